// Acceptance suite: one self-contained check per criterion, one pass/fail
// line each. Usage: specdec_acceptance [N ...] runs the given criteria
// (default all); the exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "specdec/alignment.hpp"
#include "specdec/perf_model.hpp"
#include "specdec/verify_protocol.hpp"

using namespace specdec;

namespace {

const FixedPointConfig kCfg32{32, 12};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

NgramModel smoothed_random_model(int vocab, uint64_t seed) {
  Prng rng(seed);
  std::vector<std::vector<int>> corpus;
  for (int i = 0; i < 40; ++i) {
    std::vector<int> seq(60);
    for (auto& t : seq) t = static_cast<int>(rng.index(vocab));
    corpus.push_back(std::move(seq));
  }
  return NgramModel::fit(corpus, 1, vocab, 0.05);
}

class OneHotModel : public LanguageModel {
 public:
  OneHotModel(int vocab, int hot) : vocab_(vocab), hot_(hot) {}
  int vocab_size() const override { return vocab_; }
  ProbVector next_distribution(std::span<const int>) const override {
    ProbVector d(vocab_, 0.0);
    d[hot_] = 1.0;
    return d;
  }

 private:
  int vocab_, hot_;
};

class UniformAvoidingModel : public LanguageModel {
 public:
  UniformAvoidingModel(int vocab, int avoid) : vocab_(vocab), avoid_(avoid) {}
  int vocab_size() const override { return vocab_; }
  ProbVector next_distribution(std::span<const int>) const override {
    ProbVector d(vocab_, 1.0 / (vocab_ - 1));
    d[avoid_] = 0.0;
    return d;
  }

 private:
  int vocab_, avoid_;
};

class UniformModel : public LanguageModel {
 public:
  explicit UniformModel(int vocab) : vocab_(vocab) {}
  int vocab_size() const override { return vocab_; }
  ProbVector next_distribution(std::span<const int>) const override {
    return ProbVector(vocab_, 1.0 / vocab_);
  }

 private:
  int vocab_;
};

// ---------------------------------------------------------------------------
// 1. Distribution preservation: protocol-emitted first tokens follow the
//    private model's distribution at V=8, gamma in {2, 4}.

bool criterion1(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const int V = 8, runs_per_gamma = 100'000;
  bool ok = true;
  std::string tvs;
  for (int gamma : {2, 4}) {
    const NgramModel target = smoothed_random_model(V, 900 + gamma);
    const NgramModel drafter = smoothed_random_model(V, 800 + gamma);
    const std::vector<int> prefix = {1};
    const ProbVector expected = target.next_distribution(prefix);
    ProbVector empirical(V, 0.0);
    for (int r = 0; r < runs_per_gamma; ++r) {
      ProtocolSession s(kCfg32, CompareBackend::ideal(), 50'000 + r);
      std::vector<int> ctx = prefix;
      decode_step(drafter, target, ctx, gamma, s);
      empirical[ctx[prefix.size()]] += 1.0;
    }
    for (auto& v : empirical) v /= runs_per_gamma;
    const double tv = tv_distance(empirical, expected);
    tvs += fmt(" gamma=%d tv=%.4f", gamma, tv);
    if (!(tv < 0.02)) ok = false;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 300.0) ok = false;
  detail = fmt("2e5 steps,%s, %.1f s (< 300 s)", tvs.c_str(), secs);
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence: secure_verify equals the plaintext oracle under a
//    shared uniform stream away from fixed-point decision boundaries.

bool criterion2(std::string& detail) {
  const double margin_floor = 2.0 / kCfg32.scale();
  int checked = 0, boundary = 0, mismatches = 0;
  uint64_t seed = 0;
  for (int V : {8, 64}) {
    for (int gamma : {1, 4}) {
      const NgramModel target = smoothed_random_model(V, 2000 + V + gamma);
      const NgramModel drafter = smoothed_random_model(V, 3000 + V + gamma);
      for (int run = 0; run < 2500; ++run, ++seed) {
        ProtocolSession s(kCfg32, CompareBackend::chunked(4), 77'000 + seed);
        std::vector<int> prefix = {static_cast<int>(seed % V)};
        const DraftBatch batch = draft_tokens(drafter, prefix, gamma, s.client_rng);
        const SharedDistributions shared = secure_forward_stub(target, prefix, batch.tokens, s);

        Prng mask_probe = s.client_rng;
        const VerifyResult vr = secure_verify(batch, shared, s);

        std::vector<ProbVector> p_exact;
        std::vector<int> ctx = prefix;
        for (int i = 0; i <= gamma; ++i) {
          if (i > 0) ctx.push_back(batch.tokens[i - 1]);
          p_exact.push_back(target.next_distribution(ctx));
        }
        std::vector<double> decision(gamma);
        bool clear = true;
        for (int i = 0; i < gamma; ++i) {
          for (int j = 0; j < V; ++j) {
            const double r = mask_probe.uniform01();
            if (j == batch.tokens[i]) decision[i] = r;
          }
          const double margin = std::fabs(batch.q_dists[i][batch.tokens[i]] * decision[i] -
                                          p_exact[i][batch.tokens[i]]);
          if (margin <= margin_floor) clear = false;
        }
        if (!clear) {
          boundary++;
          continue;
        }
        checked++;
        Prng oracle_rng(1);
        const VerifyOutcome oracle = speculative_step_plaintext(p_exact, batch, decision, oracle_rng);
        bool same = vr.k == oracle.k;
        if (same)
          for (size_t j = 0; j < vr.p_k.size(); ++j)
            if (std::fabs(vr.p_k[j] - oracle.p_k[j]) > 0.5 / kCfg32.scale() + 1e-12) same = false;
        if (!same) mismatches++;
      }
    }
  }
  detail = fmt("10^4 runs: %d clear-margin checked, %d matched, %d boundary cases logged",
               checked, checked - mismatches, boundary);
  return mismatches == 0 && checked > 9000;
}

// ---------------------------------------------------------------------------
// 3. Refactored rejection equivalence: Monte Carlo rate vs max(0, 1 - p/q)
//    within 3 binomial standard errors for 1000 random pairs.

bool criterion3(std::string& detail) {
  Prng pair_rng(76);
  int failures = 0;
  double worst_z = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double q = 0.05 + 0.95 * pair_rng.uniform01();
    const double p = 1.2 * pair_rng.uniform01();
    const double rho = rejection_prob(p, q);
    Prng mc(Prng::splitmix64(76 * 1000003 + t));
    const int n = 100'000;
    int rejected = 0;
    for (int i = 0; i < n; ++i)
      if (refactored_reject(p, q, mc.uniform01())) rejected++;
    const double rate = static_cast<double>(rejected) / n;
    const double se = std::sqrt(rho * (1.0 - rho) / n);
    const double dev = std::fabs(rate - rho);
    if (se > 0) worst_z = std::max(worst_z, dev / se);
    if (dev > 3.0 * se) failures++;
  }
  detail = fmt("1000 pairs at N=10^5, worst |z| = %.2f, %d outside 3 sigma", worst_z, failures);
  return failures == 0;
}

// ---------------------------------------------------------------------------
// 4. Comparison soundness: chunked F_less exhaustive at ell=16; equals the
//    ideal backend on random 32-bit inputs.

bool criterion4(std::string& detail) {
  Channel ch;
  OtFunctionality ot(ch);
  Prng server_rng(11), func_rng(12), share_rng(13);

  const FixedPointConfig cfg16{16, 12};
  int wrong16 = 0;
  const size_t block = 1u << 12;
  for (uint64_t base = 0; base < (1u << 16); base += block) {
    SharedVector c{Party::client, cfg16, {}}, s{Party::server, cfg16, {}};
    for (size_t i = 0; i < block; ++i) {
      auto [cs, ss] = make_shares(RingValue{base + i}, cfg16, share_rng);
      c.values.push_back(cs);
      s.values.push_back(ss);
    }
    const BitShares out = f_less_zero(c, s, CompareBackend::chunked(4), ot, server_rng, func_rng, "c");
    for (size_t i = 0; i < block; ++i) {
      const bool expected = to_signed(RingValue{base + i}, cfg16) > 0;
      if (out.reconstruct(i) != (expected ? 1 : 0)) wrong16++;
    }
  }

  int wrong32 = 0;
  Prng value_rng(14);
  SharedVector c{Party::client, kCfg32, {}}, s{Party::server, kCfg32, {}};
  for (int i = 0; i < 10'000; ++i) {
    auto [cs, ss] = make_shares(RingValue{value_rng.bits(32)}, kCfg32, share_rng);
    c.values.push_back(cs);
    s.values.push_back(ss);
  }
  const BitShares ideal = f_less_zero(c, s, CompareBackend::ideal(), ot, server_rng, func_rng, "c");
  const BitShares chunked =
      f_less_zero(c, s, CompareBackend::chunked(4), ot, server_rng, func_rng, "c");
  for (size_t i = 0; i < c.size(); ++i)
    if (ideal.reconstruct(i) != chunked.reconstruct(i)) wrong32++;

  detail = fmt("ell=16 exhaustive: %d/65536 wrong; ell=32 vs ideal: %d/10000 differ", wrong16,
               wrong32);
  return wrong16 == 0 && wrong32 == 0;
}

// ---------------------------------------------------------------------------
// 5. Cost-model soundness: modeled bits equal measured ledgers bit for bit
//    across the grid; the naive/optimized comparison-stage ratio at V=256,
//    gamma=4 exceeds 50x.

bool criterion5(std::string& detail) {
  int mismatches = 0;
  for (int V : {8, 64, 256}) {
    for (int ell : {16, 32}) {
      for (int gamma : {1, 4, 8}) {
        const FixedPointConfig cfg{ell, 12};
        const NgramModel target = smoothed_random_model(V, 5000 + V + ell + gamma);
        const NgramModel drafter = smoothed_random_model(V, 6000 + V + ell + gamma);
        ProtocolSession s(cfg, CompareBackend::chunked(4), 880 + V + ell + gamma);
        std::vector<int> prefix = {0};
        const DraftBatch batch = draft_tokens(drafter, prefix, gamma, s.client_rng);
        const SharedDistributions shared = secure_forward_stub(target, prefix, batch.tokens, s);
        secure_verify(batch, shared, s);
        const double measured = static_cast<double>(s.channel.ledger().total_bits());
        if (measured != comm_cost(CommVariant::optimized_chunked, V, ell, gamma, 4)) mismatches++;
      }
    }
  }

  // Measured naive vs optimized comparison-stage bits at V=256, gamma=4.
  const int V = 256, gamma = 4;
  const NgramModel target = smoothed_random_model(V, 7001);
  const NgramModel drafter = smoothed_random_model(V, 7002);
  double ratio = 0, total_ratio = 0;
  {
    ProtocolSession opt(kCfg32, CompareBackend::chunked(4), 7003);
    ProtocolSession nai(kCfg32, CompareBackend::chunked(4), 7003);
    std::vector<int> prefix = {0};
    const DraftBatch ba = draft_tokens(drafter, prefix, gamma, opt.client_rng);
    const DraftBatch bb = draft_tokens(drafter, prefix, gamma, nai.client_rng);
    const SharedDistributions sa = secure_forward_stub(target, prefix, ba.tokens, opt);
    const SharedDistributions sb = secure_forward_stub(target, prefix, bb.tokens, nai);
    const VerifyResult va = secure_verify(ba, sa, opt);
    const VerifyResult vb = naive_verify(bb, sb, nai);
    if (va.k != vb.k) mismatches++;
    ratio = static_cast<double>(nai.channel.ledger().phase_bits(kPhaseCompare)) /
            static_cast<double>(opt.channel.ledger().phase_bits(kPhaseCompare));
    total_ratio = static_cast<double>(nai.channel.ledger().total_bits()) /
                  static_cast<double>(opt.channel.ledger().total_bits());
  }
  detail = fmt("18 grid points, %d mismatches; compare-stage naive/optimized = %.0fx "
               "(total ledger %.1fx)",
               mismatches, ratio, total_ratio);
  return mismatches == 0 && ratio > 50.0;
}

// ---------------------------------------------------------------------------
// 6. OT accounting: every invocation charges k*bitlen + ceil(log2 k) bits,
//    and a standalone invocation costs 2 rounds.

bool criterion6(std::string& detail) {
  uint64_t audited = 0;
  bool ok = true;

  // Standalone rounds.
  {
    Channel ch;
    OtFunctionality ot(ch);
    std::vector<uint64_t> strings = {1, 2, 3};
    ot.choose_u64(strings, 8, 1, Party::server, "x");
    if (ch.ledger().rounds() != 2) ok = false;
    ot.choose_u64(strings, 8, 2, Party::server, "x");
    if (ch.ledger().rounds() != 4) ok = false;
  }

  // Audit across full protocol runs, both orderings and backends.
  for (int which = 0; which < 4; ++which) {
    const int V = which % 2 ? 64 : 8, gamma = 3;
    const NgramModel target = smoothed_random_model(V, 8100 + which);
    const NgramModel drafter = smoothed_random_model(V, 8200 + which);
    ProtocolSession s(kCfg32, which < 2 ? CompareBackend::ideal() : CompareBackend::chunked(4),
                      8300 + which);
    std::vector<int> prefix = {0};
    for (int step = 0; step < 4; ++step) {
      const DraftBatch batch = draft_tokens(drafter, prefix, gamma, s.client_rng);
      const SharedDistributions shared = secure_forward_stub(target, prefix, batch.tokens, s);
      if (step % 2)
        naive_verify(batch, shared, s);
      else
        secure_verify(batch, shared, s);
    }
    for (const auto& rec : s.ot.audit()) {
      audited++;
      if (rec.bits_charged !=
          static_cast<uint64_t>(rec.k) * rec.bitlen + static_cast<uint64_t>(ceil_log2(rec.k)))
        ok = false;
    }
    if (s.ot.audit().size() != s.channel.ledger().ot_invocations()) ok = false;
  }
  detail = fmt("%llu invocations audited against the closed form",
               static_cast<unsigned long long>(audited));
  return ok && audited > 0;
}

// ---------------------------------------------------------------------------
// 7. Speedup band: with the reference length scalings and sampling overheads,
//    speedup(alpha, gamma=8) over alpha in [0.52, 0.84] should lie in
//    [1.8, 6.5]. The lower edge is unreachable: even with zero overhead the
//    model caps at expected_tokens(alpha, 8) / 1.2, which is 1.73 at 0.52.

bool criterion7(std::string& detail) {
  const auto profile = DecoderCostProfile::reference();
  double lo = 1e9, hi = 0;
  int outside = 0;
  double first_inside = -1;
  for (int a = 52; a <= 84; ++a) {
    const double alpha = a / 100.0;
    const double s = speedup(alpha, 8, profile, NetworkModel::lan()).speedup;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    if (s < 1.8 || s > 6.5)
      outside++;
    else if (first_inside < 0)
      first_inside = alpha;
  }
  detail = fmt("speedup range [%.2f, %.2f] over alpha in [0.52, 0.84]; %d points outside "
               "[1.8, 6.5]; in-band from alpha >= %.2f; analytic cap at alpha=0.52 is "
               "expected_tokens/scaling = %.2f/1.2 = %.2f < 1.8 for any overhead",
               lo, hi, outside, first_inside, expected_tokens_per_step(0.52, 8),
               expected_tokens_per_step(0.52, 8) / 1.2);
  return outside == 0;
}

// ---------------------------------------------------------------------------
// 8. Alignment: on the synthetic disjoint-corpus task, distillation raises
//    the acceptance ratio by at least 0.1 absolute with stderr < 0.01, and
//    the loss gradient matches finite differences within 1e-5 relative.

bool criterion8(std::string& detail) {
  const int V = 16, gamma = 4;
  // Target: peaked bigram over a structured corpus the drafter has not seen.
  Prng corpus_rng(4242);
  std::vector<int> successor(V);
  for (auto& s : successor) s = static_cast<int>(corpus_rng.index(V));
  std::vector<std::vector<int>> corpus;
  for (int r = 0; r < 20; ++r) {
    std::vector<int> seq;
    int tok = static_cast<int>(corpus_rng.index(V));
    for (int i = 0; i < 200; ++i) {
      seq.push_back(tok);
      tok = corpus_rng.uniform01() < 0.9 ? successor[tok] : static_cast<int>(corpus_rng.index(V));
    }
    corpus.push_back(std::move(seq));
  }
  const NgramModel target = NgramModel::fit(corpus, 1, V, 0.01);
  SoftmaxModel public_model(V, V, 1, 99);  // uniform start

  std::vector<std::vector<int>> prompts;
  Prng prompt_rng(77);
  for (int i = 0; i < 80; ++i) prompts.push_back({static_cast<int>(prompt_rng.index(V))});

  Prng collect_rng(31);
  const auto dataset = collect_distillation_set(target, prompts, 20, 5, collect_rng);
  Prng eval_a(55);
  const AcceptanceEstimate before =
      estimate_acceptance(target, public_model, prompts, gamma, 12, eval_a);
  const SoftmaxModel aligned = train_align(public_model, dataset, 120, 0.5);
  Prng eval_b(55);
  const AcceptanceEstimate after =
      estimate_acceptance(target, aligned, prompts, gamma, 12, eval_b);

  // Gradient check against central finite differences.
  SoftmaxModel probe(V, 8, 1, 17);
  Prng wrng(18);
  for (auto& w : probe.weights()) w = wrng.uniform01() - 0.5;
  const auto grad = distill_loss_grad(dataset[0], probe, false);
  double worst_rel = 0;
  Prng pick(19);
  for (int i = 0; i < 40; ++i) {
    const size_t idx = pick.index(grad.size());
    SoftmaxModel plus = probe, minus = probe;
    const double eps = 1e-5;
    plus.weights()[idx] += eps;
    minus.weights()[idx] -= eps;
    const double fd =
        (distill_loss(dataset[0], plus) - distill_loss(dataset[0], minus)) / (2 * eps);
    const double denom = std::max({std::fabs(fd), std::fabs(grad[idx]), 1e-3});
    worst_rel = std::max(worst_rel, std::fabs(fd - grad[idx]) / denom);
  }

  detail = fmt("alpha %.3f -> %.3f (delta %.3f, stderr %.4f); gradient worst rel err %.2e",
               before.alpha, after.alpha, after.alpha - before.alpha, after.stderr_, worst_rel);
  return after.alpha - before.alpha >= 0.1 && after.stderr_ < 0.01 && worst_rel < 1e-5;
}

// ---------------------------------------------------------------------------
// 9. Privacy structure: server-received message counts and lengths are
//    identical across runs that vary only the client's tokens, and the
//    server inbox holds nothing but functionality traffic.

bool criterion9(std::string& detail) {
  const int V = 8, gamma = 3;
  const NgramModel target = smoothed_random_model(V, 9001);
  using Signature = std::vector<std::pair<std::string, uint64_t>>;
  Signature base;
  int non_functionality = 0;
  bool identical = true;
  for (int run = 0; run < 100; ++run) {
    const NgramModel drafter = smoothed_random_model(V, 9100 + run);
    ProtocolSession s(kCfg32, CompareBackend::chunked(4), 9200 + run);
    std::vector<int> prefix = {run % V};
    const DraftBatch batch = draft_tokens(drafter, prefix, gamma, s.client_rng);

    // Shares prepared outside the measured scope; the signature covers
    // secure_verify only.
    SharedDistributions shared;
    std::vector<int> ctx = prefix;
    for (int i = 0; i <= gamma; ++i) {
      if (i > 0) ctx.push_back(batch.tokens[i - 1]);
      auto [c, sv] = share_vector(target.next_distribution(ctx), kCfg32, s.share_rng);
      shared.client.push_back(std::move(c));
      shared.server.push_back(std::move(sv));
    }
    secure_verify(batch, shared, s);

    Signature sig;
    for (const auto& e : s.channel.inbox(Party::server)) {
      sig.emplace_back(e.phase, e.bits);
      if (!e.via_functionality) non_functionality++;
    }
    if (run == 0)
      base = sig;
    else if (sig != base)
      identical = false;
  }
  detail = fmt("100 runs, %zu server-side entries each, identical=%s, non-functionality=%d",
               base.size(), identical ? "yes" : "no", non_functionality);
  return identical && non_functionality == 0;
}

// ---------------------------------------------------------------------------
// 10. Progress and worst case: a one-hot target against an adversarial
//     drafter still emits exactly one token per step.

bool criterion10(std::string& detail) {
  const int V = 8, gamma = 4, hot = 5;
  const OneHotModel target(V, hot);
  const UniformAvoidingModel drafter(V, hot);  // uniform over the other tokens
  ProtocolSession s(kCfg32, CompareBackend::chunked(4), 4321);
  std::vector<int> prefix = {0};
  bool ok = true;
  for (int step = 0; step < 500; ++step) {
    const size_t before = prefix.size();
    const VerifyOutcome out = decode_step(drafter, target, prefix, gamma, s);
    if (out.k != 0 || prefix.size() != before + 1 || prefix.back() != hot) ok = false;
  }

  // A full-support uniform drafter must still make progress every step.
  const UniformModel uniform(V);
  ProtocolSession s2(kCfg32, CompareBackend::ideal(), 4322);
  std::vector<int> prefix2 = {0};
  size_t min_emitted = 99;
  for (int step = 0; step < 200; ++step) {
    const size_t before = prefix2.size();
    decode_step(uniform, target, prefix2, gamma, s2);
    min_emitted = std::min(min_emitted, prefix2.size() - before);
  }
  detail = fmt("500 adversarial steps emitted exactly 1 token each: %s; uniform drafter "
               "minimum emitted per step = %zu",
               ok ? "yes" : "no", min_emitted);
  return ok && min_emitted >= 1;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "distribution preservation", criterion1},
      {2, "oracle equivalence under shared randomness", criterion2},
      {3, "refactored rejection equivalence", criterion3},
      {4, "comparison soundness", criterion4},
      {5, "cost-model soundness", criterion5},
      {6, "ot accounting", criterion6},
      {7, "speedup band", criterion7},
      {8, "alignment improvement and gradient check", criterion8},
      {9, "privacy-structure invariants", criterion9},
      {10, "progress and worst case", criterion10},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
      continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.id, c.name, detail.c_str());
    fflush(stdout);
    if (!ok) failures++;
  }
  return failures;
}
