#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "specdec/rng.hpp"

namespace specdec {

/// A probability distribution over the vocabulary. Valid when every entry is
/// nonnegative and the entries sum to 1 within 1e-9.
using ProbVector = std::vector<double>;

bool is_valid_dist(const ProbVector& p, double tol = 1e-9);
void require_valid_dist(const ProbVector& p, double tol = 1e-9);  // throws std::invalid_argument

// Inverse-CDF sample; `p` may be unnormalized but must have positive mass.
int sample_from(const ProbVector& p, Prng& rng);
int sample_from(const ProbVector& p, double u);

double tv_distance(const ProbVector& p, const ProbVector& q);

/// gamma draft tokens plus the distribution each one was sampled from.
struct DraftBatch {
  std::vector<int> tokens;
  std::vector<ProbVector> q_dists;

  size_t gamma() const { return tokens.size(); }
  void validate() const;  // q_dists[i][tokens[i]] > 0, shapes consistent
};

/// Result of verifying one draft batch: k is the first-rejection index in
/// [0, gamma], p_k the target distribution opened at that point, and the
/// emitted tokens are accepted + final (k+1 tokens in total).
struct VerifyOutcome {
  size_t k = 0;
  ProbVector p_k;
  std::vector<int> accepted;
  int final_token = -1;

  std::vector<int> emitted() const;
};

// max(0, 1 - p_i/q_i); requires q_i > 0 and p_i >= 0.
double rejection_prob(double p_i, double q_i);

// Rejection test refactored to avoid the division: rejects iff r*q_i > p_i
// (strict, so ties accept). Over uniform r this rejects with probability
// rejection_prob(p_i, q_i).
bool refactored_reject(double p_i, double q_i, double r);

// Elementwise max(0, p - q), renormalized to sum 1. Returns nullopt when the
// residual is all zero (p == q); callers fall back to sampling from p.
std::optional<ProbVector> residual_distribution(const ProbVector& p, const ProbVector& q);

// Plaintext speculative sampling step: one fresh uniform per draft position,
// first rejection at k (gamma when none), final token from the residual at k
// or directly from p_dists[gamma] when all accepted.
VerifyOutcome speculative_step_plaintext(std::span<const ProbVector> p_dists,
                                         const DraftBatch& batch, Prng& rng);

// Same, with the per-position decision uniforms supplied by the caller;
// randomness for the final token still comes from `rng`.
VerifyOutcome speculative_step_plaintext(std::span<const ProbVector> p_dists,
                                         const DraftBatch& batch,
                                         std::span<const double> decision_uniforms, Prng& rng);

}  // namespace specdec
