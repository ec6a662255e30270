#include "specdec/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "specdec/spec_sampling.hpp"

namespace specdec {

namespace {

constexpr double kLogFloor = 1e-12;

std::vector<std::pair<int, double>> top_k_of(const ProbVector& p, int k) {
  std::vector<std::pair<int, double>> entries;
  entries.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) entries.emplace_back(static_cast<int>(i), p[i]);
  const size_t kk = std::min<size_t>(k, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + kk, entries.end(),
                    [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second > b.second : a.first < b.first;
                    });
  entries.resize(kk);
  return entries;
}

uint64_t hash_tokens(std::span<const int> tokens) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (int t : tokens) {
    h ^= static_cast<uint64_t>(static_cast<uint32_t>(t));
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void DistillationSample::validate(int vocab_size, int k) const {
  if (topk.size() != response.size())
    throw std::invalid_argument("DistillationSample: one top-K record per response position");
  for (const auto& pos : topk) {
    if (pos.empty() || pos.size() > static_cast<size_t>(k))
      throw std::invalid_argument("DistillationSample: wrong top-K size");
    double prev = 1.0 + 1e-12;
    for (const auto& [tok, prob] : pos) {
      if (tok < 0 || tok >= vocab_size)
        throw std::invalid_argument("DistillationSample: token out of range");
      if (!(prob > 0.0) || prob > prev)
        throw std::invalid_argument("DistillationSample: probabilities must be descending in (0,1]");
      prev = prob;
    }
  }
}

std::vector<DistillationSample> collect_distillation_set(const LanguageModel& target_model,
                                                         std::span<const std::vector<int>> prompts,
                                                         int response_len, int k, Prng& rng) {
  if (k < 1) throw std::invalid_argument("collect_distillation_set: K must be >= 1");
  if (response_len < 1)
    throw std::invalid_argument("collect_distillation_set: response_len must be >= 1");
  std::vector<DistillationSample> dataset;
  dataset.reserve(prompts.size());
  for (const auto& prompt : prompts) {
    DistillationSample sample;
    sample.prompt = prompt;
    std::vector<int> ctx = prompt;
    for (int t = 0; t < response_len; ++t) {
      const ProbVector p = target_model.next_distribution(ctx);
      sample.topk.push_back(top_k_of(p, k));
      const int tok = sample_from(p, rng);
      sample.response.push_back(tok);
      ctx.push_back(tok);
    }
    dataset.push_back(std::move(sample));
  }
  return dataset;
}

double distill_loss(const DistillationSample& sample, const LanguageModel& public_model,
                    bool renormalize) {
  double loss = 0.0;
  std::vector<int> ctx = sample.prompt;
  for (size_t t = 0; t < sample.response.size(); ++t) {
    const ProbVector q = public_model.next_distribution(ctx);
    double mass = 1.0;
    if (renormalize) {
      mass = 0.0;
      for (const auto& [tok, prob] : sample.topk[t]) mass += prob;
    }
    for (const auto& [tok, prob] : sample.topk[t])
      loss -= (prob / mass) * std::log(std::max(q[tok], kLogFloor));
    ctx.push_back(sample.response[t]);
  }
  return loss;
}

std::vector<double> distill_loss_grad(const DistillationSample& sample, const SoftmaxModel& model,
                                      bool renormalize) {
  const int vocab = model.vocab_size();
  const int dim = model.dim();
  std::vector<double> grad(static_cast<size_t>(vocab) * dim, 0.0);
  std::vector<int> ctx = sample.prompt;
  for (size_t t = 0; t < sample.response.size(); ++t) {
    const std::vector<double> feat = model.feature(ctx);
    const ProbVector q = model.next_distribution(ctx);
    double mass = 1.0;
    if (renormalize) {
      mass = 0.0;
      for (const auto& [tok, prob] : sample.topk[t]) mass += prob;
    }
    double top_mass = 0.0;
    for (const auto& [tok, prob] : sample.topk[t]) top_mass += prob / mass;
    // d/dlogit_v of sum_j p_j (-log q_j) = (sum_j p_j) q_v - p_v.
    std::vector<double> dlogit(vocab);
    for (int v = 0; v < vocab; ++v) dlogit[v] = top_mass * q[v];
    for (const auto& [tok, prob] : sample.topk[t]) dlogit[tok] -= prob / mass;
    for (int v = 0; v < vocab; ++v)
      for (int d = 0; d < dim; ++d)
        grad[static_cast<size_t>(v) * dim + d] += dlogit[v] * feat[d];
    ctx.push_back(sample.response[t]);
  }
  return grad;
}

SoftmaxModel train_align(const SoftmaxModel& public_model,
                         std::span<const DistillationSample> dataset, int epochs,
                         double learning_rate, bool renormalize) {
  if (dataset.empty()) throw std::invalid_argument("train_align: empty dataset");
  SoftmaxModel model = public_model;
  auto mean_loss = [&](const SoftmaxModel& m) {
    double total = 0.0;
    for (const auto& s : dataset) total += distill_loss(s, m, renormalize);
    return total / static_cast<double>(dataset.size());
  };

  std::vector<double> best_weights = model.weights();
  double best_loss = mean_loss(model);
  const size_t n_params = model.weights().size();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> grad(n_params, 0.0);
    for (const auto& s : dataset) {
      const std::vector<double> g = distill_loss_grad(s, model, renormalize);
      for (size_t i = 0; i < n_params; ++i) grad[i] += g[i];
    }
    for (size_t i = 0; i < n_params; ++i)
      model.weights()[i] -= learning_rate * grad[i] / static_cast<double>(dataset.size());
    const double loss = mean_loss(model);
    if (!std::isfinite(loss)) throw std::runtime_error("train_align: loss diverged");
    if (loss <= best_loss) {
      best_loss = loss;
      best_weights = model.weights();
    }
  }
  model.weights() = best_weights;
  return model;
}

AcceptanceEstimate estimate_acceptance(const LanguageModel& target_model,
                                       const LanguageModel& public_model,
                                       std::span<const std::vector<int>> prompts, int gamma,
                                       int runs, Prng& rng) {
  if (runs < 1) throw std::invalid_argument("estimate_acceptance: runs must be >= 1");
  if (gamma < 1) throw std::invalid_argument("estimate_acceptance: gamma must be >= 1");
  const uint64_t base_seed = rng.next_u64();
  uint64_t accepted = 0;
  uint64_t proposed = 0;
  for (const auto& prompt : prompts) {
    Prng prompt_rng(Prng::splitmix64(base_seed ^ hash_tokens(prompt)));
    std::vector<int> ctx = prompt;
    for (int step = 0; step < runs; ++step) {
      DraftBatch batch;
      std::vector<int> draft_ctx = ctx;
      std::vector<ProbVector> p_dists;
      for (int i = 0; i < gamma; ++i) {
        ProbVector q = public_model.next_distribution(draft_ctx);
        const int tok = sample_from(q, prompt_rng);
        draft_ctx.push_back(tok);
        batch.tokens.push_back(tok);
        batch.q_dists.push_back(std::move(q));
      }
      std::vector<int> p_ctx = ctx;
      for (int i = 0; i <= gamma; ++i) {
        if (i > 0) p_ctx.push_back(batch.tokens[i - 1]);
        p_dists.push_back(target_model.next_distribution(p_ctx));
      }
      const VerifyOutcome out = speculative_step_plaintext(p_dists, batch, prompt_rng);
      accepted += out.k;
      proposed += static_cast<uint64_t>(gamma);
      const std::vector<int> emitted = out.emitted();
      ctx.insert(ctx.end(), emitted.begin(), emitted.end());
    }
  }
  AcceptanceEstimate est;
  est.samples = proposed;
  est.alpha = static_cast<double>(accepted) / static_cast<double>(proposed);
  est.stderr_ = std::sqrt(est.alpha * (1.0 - est.alpha) / static_cast<double>(proposed));
  return est;
}

void save_distillation_set(std::span<const DistillationSample> dataset, std::ostream& os) {
  for (const auto& s : dataset) {
    nlohmann::json rec{{"prompt", s.prompt}, {"response", s.response}};
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& pos : s.topk) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& [tok, prob] : pos) row.push_back({tok, prob});
      positions.push_back(std::move(row));
    }
    rec["topk"] = std::move(positions);
    os << rec.dump() << '\n';
  }
}

std::vector<DistillationSample> load_distillation_set(std::istream& is) {
  std::vector<DistillationSample> dataset;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      DistillationSample s;
      s.prompt = rec.at("prompt").get<std::vector<int>>();
      s.response = rec.at("response").get<std::vector<int>>();
      for (const auto& pos : rec.at("topk")) {
        std::vector<std::pair<int, double>> row;
        for (const auto& pair : pos) row.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
        s.topk.push_back(std::move(row));
      }
      dataset.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("distillation dataset line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return dataset;
}

}  // namespace specdec
