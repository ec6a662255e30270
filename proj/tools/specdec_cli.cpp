// Command-line front end: protocol runs, statistical verification, cost
// benchmarks, alignment and model-curve generation, emitting CSV/JSON files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specdec/alignment.hpp"
#include "specdec/perf_model.hpp"
#include "specdec/verify_protocol.hpp"

using namespace specdec;

namespace {

struct RunConfig {
  uint64_t seed = 1;
  int vocab = 8;
  int ell = 32;
  int frac = 12;
  int gamma = 4;
  int chunk_bits = 4;
  std::string backend = "chunked";
  double bandwidth_mbps = 1000.0;
  double delay_ms = 10.0;
  std::string out;
  std::string pub_model, pri_model;    // checkpoint paths
  std::string pub_corpus, pri_corpus;  // corpus paths to fit n-grams from
  int order = 2;
  double smoothing = 0.01;

  FixedPointConfig fixed_point() const {
    FixedPointConfig cfg{ell, frac};
    cfg.validate();
    return cfg;
  }
  CompareBackend compare_backend() const {
    if (backend == "ideal") return CompareBackend::ideal();
    if (backend == "chunked") return CompareBackend::chunked(chunk_bits);
    throw CLI::ValidationError("--backend must be ideal or chunked");
  }
  NetworkModel network() const {
    NetworkModel net{bandwidth_mbps * 1e6, delay_ms * 1e-3};
    net.validate();
    return net;
  }
};

std::unique_ptr<LanguageModel> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open model checkpoint: " + path);
  std::string tag;
  f >> tag;
  f.seekg(0);
  if (tag == "ngram") return std::make_unique<NgramModel>(NgramModel::load(f));
  if (tag == "softmax") return std::make_unique<SoftmaxModel>(SoftmaxModel::load(f));
  throw std::runtime_error("unknown checkpoint header in " + path);
}

std::unique_ptr<LanguageModel> make_model(const RunConfig& cfg, const std::string& ckpt,
                                          const std::string& corpus_path, uint64_t seed_tag) {
  if (!ckpt.empty()) return load_checkpoint(ckpt);
  if (!corpus_path.empty()) {
    const auto corpus = load_corpus_file(corpus_path);
    return std::make_unique<NgramModel>(
        NgramModel::fit(corpus, cfg.order, cfg.vocab, cfg.smoothing));
  }
  // Synthetic fallback: a smoothed n-gram over a seeded random corpus.
  Prng rng(Prng::splitmix64(cfg.seed ^ seed_tag));
  std::vector<std::vector<int>> corpus;
  for (int i = 0; i < 40; ++i) {
    std::vector<int> seq(80);
    for (auto& t : seq) t = static_cast<int>(rng.index(cfg.vocab));
    corpus.push_back(std::move(seq));
  }
  return std::make_unique<NgramModel>(NgramModel::fit(corpus, 1, cfg.vocab, 0.05));
}

std::vector<int> parse_prefix(const std::string& text) {
  std::vector<int> prefix;
  std::stringstream ss(text);
  int tok;
  while (ss >> tok) prefix.push_back(tok);
  if (prefix.empty()) prefix.push_back(0);
  return prefix;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

// ---------------------------------------------------------------------------

int cmd_decode(const RunConfig& cfg, int steps, const std::string& prefix_text,
               const std::string& trace_path, bool reference_forward) {
  const auto pub = make_model(cfg, cfg.pub_model, cfg.pub_corpus, 0x707562);
  const auto pri = make_model(cfg, cfg.pri_model, cfg.pri_corpus, 0x707269);
  ProtocolSession session(cfg.fixed_point(), cfg.compare_backend(), cfg.seed,
                          reference_forward ? StepCostProfile::reference()
                                            : StepCostProfile::none());
  std::ofstream trace_file;
  if (!trace_path.empty()) {
    trace_file = open_out(trace_path);
    session.trace = &trace_file;
  }

  std::vector<int> prefix = parse_prefix(prefix_text);
  const size_t prompt_len = prefix.size();
  for (int step = 0; step < steps; ++step) {
    const VerifyOutcome out = decode_step(*pub, *pri, prefix, cfg.gamma, session);
    if (out.emitted().empty() || out.emitted().size() > static_cast<size_t>(cfg.gamma) + 1) {
      std::cerr << "invariant violation: step emitted " << out.emitted().size() << " tokens\n";
      return 2;
    }
  }

  std::cout << "tokens:";
  for (size_t i = prompt_len; i < prefix.size(); ++i) std::cout << ' ' << prefix[i];
  std::cout << '\n';
  const CostLedger& ledger = session.channel.ledger();
  std::cout << "steps: " << steps << "  generated: " << prefix.size() - prompt_len
            << "  rounds: " << ledger.rounds() << "  bits: " << ledger.total_bits()
            << "  ot_calls: " << ledger.ot_invocations() << '\n';
  char buf[64];
  snprintf(buf, sizeof(buf), "%.6f",
           estimate_latency(ledger, cfg.network(), ledger.compute_seconds()));
  std::cout << "estimated_seconds: " << buf << '\n';

  if (!cfg.out.empty()) {
    auto f = open_out(cfg.out);
    ledger.write_csv(f);
  }
  return 0;
}

int cmd_verify_dist(const RunConfig& cfg, int runs, double tv_threshold,
                    const std::string& prefix_text) {
  const auto pub = make_model(cfg, cfg.pub_model, cfg.pub_corpus, 0x707562);
  const auto pri = make_model(cfg, cfg.pri_model, cfg.pri_corpus, 0x707269);
  const std::vector<int> prefix = parse_prefix(prefix_text);

  const ProbVector target = pri->next_distribution(prefix);
  ProbVector empirical(cfg.vocab, 0.0);
  for (int r = 0; r < runs; ++r) {
    ProtocolSession session(cfg.fixed_point(), cfg.compare_backend(), cfg.seed + r);
    std::vector<int> ctx = prefix;
    decode_step(*pub, *pri, ctx, cfg.gamma, session);
    empirical[ctx[prefix.size()]] += 1.0;
  }
  for (auto& v : empirical) v /= runs;
  const double tv = tv_distance(empirical, target);

  if (!cfg.out.empty()) {
    auto f = open_out(cfg.out);
    f << "token,empirical,target\n";
    for (int t = 0; t < cfg.vocab; ++t) {
      char buf[80];
      snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", t, empirical[t], target[t]);
      f << buf;
    }
  }
  char buf[64];
  snprintf(buf, sizeof(buf), "%.6f", tv);
  std::cout << "runs: " << runs << "  gamma: " << cfg.gamma << "  tv_first_token: " << buf
            << '\n';
  if (tv > tv_threshold) {
    std::cerr << "distribution preservation violated: tv " << tv << " > " << tv_threshold
              << '\n';
    return 1;
  }
  return 0;
}

int cmd_bench_comm(const RunConfig& cfg, const std::vector<int>& vocab_sweep) {
  std::vector<CommSweepRow> rows;
  bool sound = true;
  for (int V : vocab_sweep) {
    RunConfig local = cfg;
    local.vocab = V;
    const auto pub = make_model(local, "", "", 0x707562);
    const auto pri = make_model(local, "", "", 0x707269);
    const std::vector<int> prefix = {0};

    auto measured = [&](bool naive) {
      ProtocolSession s(local.fixed_point(), CompareBackend::chunked(local.chunk_bits),
                        local.seed);
      const DraftBatch batch = draft_tokens(*pub, prefix, local.gamma, s.client_rng);
      const SharedDistributions shared = secure_forward_stub(*pri, prefix, batch.tokens, s);
      if (naive)
        naive_verify(batch, shared, s);
      else
        secure_verify(batch, shared, s);
      return s.channel.ledger().total_bits();
    };
    const uint64_t opt_bits = measured(false);
    const uint64_t naive_bits = measured(true);
    const double opt_model =
        comm_cost(CommVariant::optimized_chunked, V, local.ell, local.gamma, local.chunk_bits);
    const double naive_model =
        comm_cost(CommVariant::naive_chunked, V, local.ell, local.gamma, local.chunk_bits);
    if (static_cast<double>(opt_bits) != opt_model ||
        static_cast<double>(naive_bits) != naive_model) {
      std::cerr << "cost model mismatch at V=" << V << '\n';
      sound = false;
    }
    rows.push_back({V, local.ell, local.chunk_bits, CommVariant::optimized_chunked, opt_model});
    rows.push_back({V, local.ell, local.chunk_bits, CommVariant::naive_chunked, naive_model});
    rows.push_back({V, local.ell, local.chunk_bits, CommVariant::optimized_monolithic,
                    comm_cost(CommVariant::optimized_monolithic, V, local.ell, local.gamma,
                              local.chunk_bits)});
    rows.push_back({V, local.ell, local.chunk_bits, CommVariant::naive_monolithic,
                    comm_cost(CommVariant::naive_monolithic, V, local.ell, local.gamma,
                              local.chunk_bits)});
    std::cout << "V=" << V << "  optimized_bits=" << opt_bits << "  naive_bits=" << naive_bits
              << "  naive/optimized=" << static_cast<double>(naive_bits) / opt_bits << '\n';
  }
  if (!cfg.out.empty()) {
    auto f = open_out(cfg.out);
    write_comm_sweep_csv(f, rows);
  } else {
    write_comm_sweep_csv(std::cout, rows);
  }
  return sound ? 0 : 1;
}

int cmd_align(const RunConfig& cfg, int prompts_count, int response_len, int topk, int epochs,
              double lr, int eval_runs, const std::string& save_model,
              const std::string& save_dataset) {
  // Target: peaked n-gram over a structured corpus. Public: softmax model
  // starting from uniform weights.
  Prng corpus_rng(Prng::splitmix64(cfg.seed ^ 0x616c69676eULL));
  std::vector<int> successor(cfg.vocab);
  for (auto& s : successor) s = static_cast<int>(corpus_rng.index(cfg.vocab));
  std::vector<std::vector<int>> corpus;
  for (int r = 0; r < 20; ++r) {
    std::vector<int> seq;
    int tok = static_cast<int>(corpus_rng.index(cfg.vocab));
    for (int i = 0; i < 200; ++i) {
      seq.push_back(tok);
      tok = corpus_rng.uniform01() < 0.9 ? successor[tok]
                                         : static_cast<int>(corpus_rng.index(cfg.vocab));
    }
    corpus.push_back(std::move(seq));
  }
  const NgramModel target =
      cfg.pri_corpus.empty()
          ? NgramModel::fit(corpus, 1, cfg.vocab, cfg.smoothing)
          : NgramModel::fit(load_corpus_file(cfg.pri_corpus), cfg.order, cfg.vocab,
                            cfg.smoothing);
  SoftmaxModel public_model(cfg.vocab, cfg.vocab, 1, Prng::splitmix64(cfg.seed ^ 0x656d62ULL));

  std::vector<std::vector<int>> prompts;
  Prng prompt_rng(Prng::splitmix64(cfg.seed ^ 0x70726dULL));
  for (int i = 0; i < prompts_count; ++i)
    prompts.push_back({static_cast<int>(prompt_rng.index(cfg.vocab))});

  Prng collect_rng(Prng::splitmix64(cfg.seed ^ 0x636f6cULL));
  const auto dataset =
      collect_distillation_set(target, prompts, response_len, topk, collect_rng);
  if (!save_dataset.empty()) {
    auto f = open_out(save_dataset);
    save_distillation_set(dataset, f);
  }

  Prng eval_rng_a(Prng::splitmix64(cfg.seed ^ 0x657661ULL));
  const AcceptanceEstimate before =
      estimate_acceptance(target, public_model, prompts, cfg.gamma, eval_runs, eval_rng_a);
  const SoftmaxModel aligned = train_align(public_model, dataset, epochs, lr);
  Prng eval_rng_b(Prng::splitmix64(cfg.seed ^ 0x657661ULL));
  const AcceptanceEstimate after =
      estimate_acceptance(target, aligned, prompts, cfg.gamma, eval_runs, eval_rng_b);

  if (!save_model.empty()) {
    auto f = open_out(save_model);
    aligned.save(f);
  }

  nlohmann::json report{{"alpha_before", before.alpha},
                        {"alpha_after", after.alpha},
                        {"stderr_before", before.stderr_},
                        {"stderr_after", after.stderr_},
                        {"proposals", after.samples},
                        {"gamma", cfg.gamma},
                        {"step_reduction_before", step_reduction_approx(before.alpha)},
                        {"step_reduction_after", step_reduction_approx(after.alpha)}};
  std::cout << report.dump(2) << '\n';
  if (!cfg.out.empty()) {
    auto f = open_out(cfg.out);
    f << report.dump(2) << '\n';
  }
  return after.alpha > before.alpha ? 0 : 1;
}

// Calibrates the per-step sampling overhead from a recorded protocol trace:
// the trace's cumulative verification-phase ledger, amortized over its steps
// and priced under the given network.
double overhead_from_trace(const std::string& path, const NetworkModel& net) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace file: " + path);
  uint64_t steps = 0;
  struct Cum {
    uint64_t rounds = 0, bits = 0;
  };
  std::map<std::string, Cum> phases;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    steps = std::max<uint64_t>(steps, rec.at("step").get<uint64_t>() + 1);
    const std::string phase = rec.at("phase").get<std::string>();
    if (phase == kPhaseForward) continue;  // decoder cost, not sampling
    auto& c = phases[phase];  // records are cumulative; keep the last
    c.rounds = rec.at("rounds").get<uint64_t>();
    c.bits = rec.at("bits_c2s").get<uint64_t>() + rec.at("bits_s2c").get<uint64_t>();
  }
  if (steps == 0) throw std::runtime_error("trace has no records: " + path);
  double rounds = 0, bits = 0;
  for (const auto& [_, c] : phases) {
    rounds += static_cast<double>(c.rounds);
    bits += static_cast<double>(c.bits);
  }
  return (rounds * net.one_way_delay_s + bits / net.bandwidth_bps) /
         static_cast<double>(steps);
}

int cmd_curves(const RunConfig& cfg, const std::string& kind, const std::string& overhead_trace) {
  if (kind == "speedup") {
    std::vector<SpeedupPoint> points;
    auto profile = DecoderCostProfile::reference();
    if (!overhead_trace.empty()) {
      const double per_step = overhead_from_trace(overhead_trace, cfg.network());
      profile.sampling_overhead = [per_step](const NetworkModel&, int) { return per_step; };
    }
    for (int gamma : {4, 8, 16})
      for (int a = 0; a <= 95; ++a)
        points.push_back(speedup(a / 100.0, gamma, profile, cfg.network()));
    if (!cfg.out.empty()) {
      auto f = open_out(cfg.out);
      write_speedup_csv(f, points);
    } else {
      write_speedup_csv(std::cout, points);
    }
    return 0;
  }
  if (kind == "length") {
    std::vector<LengthPoint> points;
    const auto layers = default_layer_profile();
    for (int len : {1, 2, 4, 8, 16})
      points.push_back({len, length_latency(cfg.network(), layers, len)});
    if (!cfg.out.empty()) {
      auto f = open_out(cfg.out);
      write_length_profile_csv(f, points);
    } else {
      write_length_profile_csv(std::cout, points);
    }
    return 0;
  }
  std::cerr << "--kind must be speedup or length\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specdec: secure speculative decoding simulator"};
  app.fallthrough();
  app.set_config("--config", "", "flat key=value configuration file");

  RunConfig cfg;
  app.add_option("--seed", cfg.seed, "master seed")->envname("SPECDEC_SEED");
  app.add_option("--vocab", cfg.vocab, "vocabulary size")->check(CLI::Range(2, 1 << 20));
  app.add_option("--ell", cfg.ell, "ring bit width");
  app.add_option("--frac", cfg.frac, "fractional bits");
  app.add_option("--gamma", cfg.gamma, "draft tokens per step")->check(CLI::Range(1, 64));
  app.add_option("--chunk-bits", cfg.chunk_bits, "bits per comparison digit");
  app.add_option("--backend", cfg.backend, "comparison backend: ideal or chunked");
  app.add_option("--bandwidth-mbps", cfg.bandwidth_mbps, "network bandwidth in Mbit/s");
  app.add_option("--delay-ms", cfg.delay_ms, "one-way delay in milliseconds");
  app.add_option("--out", cfg.out, "output file path");
  app.add_option("--pub-model", cfg.pub_model, "public model checkpoint");
  app.add_option("--pri-model", cfg.pri_model, "private model checkpoint");
  app.add_option("--pub-corpus", cfg.pub_corpus, "corpus to fit the public n-gram from");
  app.add_option("--pri-corpus", cfg.pri_corpus, "corpus to fit the private n-gram from");
  app.add_option("--order", cfg.order, "n-gram order for fitted models");
  app.add_option("--smoothing", cfg.smoothing, "add-delta smoothing");

  auto* decode = app.add_subcommand("decode", "run the decoding loop and report the ledger");
  int steps = 16;
  std::string prefix_text = "0";
  std::string trace_path;
  bool reference_forward = false;
  decode->add_option("--steps", steps, "decoding steps to run");
  decode->add_option("--prefix", prefix_text, "whitespace-separated prompt token ids");
  decode->add_option("--trace", trace_path, "JSON-lines protocol trace output");
  decode->add_flag("--reference-forward", reference_forward,
                   "charge the forward stub with the reference cost profile");

  auto* verify = app.add_subcommand("verify-dist", "statistical distribution-preservation test");
  int runs = 20000;
  double tv_threshold = 0.02;
  verify->add_option("--runs", runs, "independent protocol steps");
  verify->add_option("--tv-threshold", tv_threshold, "maximum allowed total variation");
  verify->add_option("--prefix", prefix_text, "whitespace-separated prompt token ids");

  auto* bench = app.add_subcommand("bench-comm", "naive vs optimized ledger sweep");
  std::vector<int> vocab_sweep = {8, 64, 256};
  bench->add_option("--sweep", vocab_sweep, "vocabulary sizes to sweep");

  auto* align = app.add_subcommand("align", "distill the public model and report acceptance");
  int prompts_count = 40, response_len = 20, topk = 5, epochs = 120, eval_runs = 12;
  double lr = 0.5;
  std::string save_model, save_dataset;
  align->add_option("--prompts", prompts_count, "number of prompts");
  align->add_option("--response-len", response_len, "collected response length");
  align->add_option("--topk", topk, "top-K entries kept per position");
  align->add_option("--epochs", epochs, "training epochs");
  align->add_option("--lr", lr, "learning rate");
  align->add_option("--eval-runs", eval_runs, "speculative steps per prompt when estimating");
  align->add_option("--save-model", save_model, "write the aligned checkpoint here");
  align->add_option("--save-dataset", save_dataset, "write the distillation dataset here");

  auto* curves = app.add_subcommand("curves", "emit speedup or length-latency CSV curves");
  std::string kind = "speedup";
  std::string overhead_trace;
  curves->add_option("--kind", kind, "speedup or length");
  curves->add_option("--overhead-trace", overhead_trace,
                     "calibrate sampling overhead from a recorded protocol trace");

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  try {
    if (decode->parsed())
      return cmd_decode(cfg, steps, prefix_text, trace_path, reference_forward);
    if (verify->parsed()) return cmd_verify_dist(cfg, runs, tv_threshold, prefix_text);
    if (bench->parsed()) return cmd_bench_comm(cfg, vocab_sweep);
    if (align->parsed())
      return cmd_align(cfg, prompts_count, response_len, topk, epochs, lr, eval_runs,
                       save_model, save_dataset);
    if (curves->parsed()) return cmd_curves(cfg, kind, overhead_trace);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
