#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "specdec/rng.hpp"
#include "specdec/toy_models.hpp"

namespace specdec {

/// One prompt's distillation record: the target model's sampled response and
/// the top-K of every per-position output distribution (descending
/// probability), which is all a typical serving API exposes.
struct DistillationSample {
  std::vector<int> prompt;
  std::vector<int> response;
  std::vector<std::vector<std::pair<int, double>>> topk;

  void validate(int vocab_size, int k) const;  // throws std::invalid_argument
};

struct AcceptanceEstimate {
  double alpha = 0.0;
  uint64_t samples = 0;
  double stderr_ = 0.0;
};

// Standard autoregressive decoding of the target on each prompt for
// `response_len` tokens, recording the top-K of every position's
// distribution. Deterministic under a fixed generator state.
std::vector<DistillationSample> collect_distillation_set(const LanguageModel& target_model,
                                                         std::span<const std::vector<int>> prompts,
                                                         int response_len, int k, Prng& rng);

// Truncated cross entropy sum_t sum_{j in topK} p_j * (-log q_j) with q from
// the public model at each prefix. Top-K masses are used as-is by default;
// `renormalize` rescales them to sum 1 first. q is floored at 1e-12.
double distill_loss(const DistillationSample& sample, const LanguageModel& public_model,
                    bool renormalize = false);

// Gradient of distill_loss with respect to the softmax model's weight matrix
// (row-major V x dim).
std::vector<double> distill_loss_grad(const DistillationSample& sample, const SoftmaxModel& model,
                                      bool renormalize = false);

// Gradient descent on the mean distill_loss over the dataset. Keeps the best
// weights seen, so the returned model never scores worse than the input on
// the training set. Throws std::runtime_error when the loss diverges.
SoftmaxModel train_align(const SoftmaxModel& public_model,
                         std::span<const DistillationSample> dataset, int epochs,
                         double learning_rate, bool renormalize = false);

// Plaintext speculative steps over the prompts; alpha is accepted draft
// tokens over proposed draft tokens with the binomial standard error. Each
// prompt gets its own generator stream derived from the prompt content, so
// the estimate is invariant to prompt order.
AcceptanceEstimate estimate_acceptance(const LanguageModel& target_model,
                                       const LanguageModel& public_model,
                                       std::span<const std::vector<int>> prompts, int gamma,
                                       int runs, Prng& rng);

// JSON-lines dataset files.
void save_distillation_set(std::span<const DistillationSample> dataset, std::ostream& os);
std::vector<DistillationSample> load_distillation_set(std::istream& is);

}  // namespace specdec
