#include "specdec/spec_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace specdec {

bool is_valid_dist(const ProbVector& p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::fabs(sum - 1.0) <= tol;
}

void require_valid_dist(const ProbVector& p, double tol) {
  if (!is_valid_dist(p, tol))
    throw std::invalid_argument("ProbVector: entries must be >= 0 and sum to 1");
}

int sample_from(const ProbVector& p, double u) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("sample_from: no positive mass");
  double acc = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += p[i];
    if (u * total < acc) return static_cast<int>(i);
  }
  return last_positive;
}

int sample_from(const ProbVector& p, Prng& rng) { return sample_from(p, rng.uniform01()); }

double tv_distance(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) d += std::fabs(p[i] - q[i]);
  return 0.5 * d;
}

void DraftBatch::validate() const {
  if (tokens.size() != q_dists.size())
    throw std::invalid_argument("DraftBatch: tokens/q_dists size mismatch");
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto& q = q_dists[i];
    const int t = tokens[i];
    if (t < 0 || static_cast<size_t>(t) >= q.size())
      throw std::invalid_argument("DraftBatch: token " + std::to_string(t) + " out of range");
    if (!(q[t] > 0.0))
      throw std::invalid_argument("DraftBatch: drafted token has zero probability under q");
  }
}

std::vector<int> VerifyOutcome::emitted() const {
  std::vector<int> out = accepted;
  out.push_back(final_token);
  return out;
}

double rejection_prob(double p_i, double q_i) {
  if (!(q_i > 0.0)) throw std::invalid_argument("rejection_prob: q must be > 0");
  if (!(p_i >= 0.0)) throw std::invalid_argument("rejection_prob: p must be >= 0");
  return std::max(0.0, 1.0 - p_i / q_i);
}

bool refactored_reject(double p_i, double q_i, double r) { return r * q_i > p_i; }

std::optional<ProbVector> residual_distribution(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("residual_distribution: size mismatch");
  ProbVector res(p.size());
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    res[i] = std::max(0.0, p[i] - q[i]);
    sum += res[i];
  }
  if (!(sum > 0.0)) return std::nullopt;
  for (double& v : res) v /= sum;
  return res;
}

static int final_token_for(size_t k, size_t gamma, std::span<const ProbVector> p_dists,
                           const DraftBatch& batch, Prng& rng) {
  if (k < gamma) {
    if (auto res = residual_distribution(p_dists[k], batch.q_dists[k]))
      return sample_from(*res, rng);
    return sample_from(p_dists[k], rng);  // degenerate residual: p == q
  }
  return sample_from(p_dists[gamma], rng);
}

VerifyOutcome speculative_step_plaintext(std::span<const ProbVector> p_dists,
                                         const DraftBatch& batch,
                                         std::span<const double> decision_uniforms, Prng& rng) {
  const size_t gamma = batch.gamma();
  if (p_dists.size() != gamma + 1)
    throw std::invalid_argument("speculative_step: need gamma+1 target distributions");
  if (decision_uniforms.size() < gamma)
    throw std::invalid_argument("speculative_step: need one uniform per draft token");
  batch.validate();

  VerifyOutcome out;
  size_t k = gamma;
  for (size_t i = 0; i < gamma; ++i) {
    const int tok = batch.tokens[i];
    if (refactored_reject(p_dists[i][tok], batch.q_dists[i][tok], decision_uniforms[i])) {
      k = i;
      break;
    }
    out.accepted.push_back(tok);
  }
  out.k = k;
  out.p_k = p_dists[k];
  out.final_token = final_token_for(k, gamma, p_dists, batch, rng);
  return out;
}

VerifyOutcome speculative_step_plaintext(std::span<const ProbVector> p_dists,
                                         const DraftBatch& batch, Prng& rng) {
  std::vector<double> uniforms(batch.gamma());
  for (double& u : uniforms) u = rng.uniform01();
  return speculative_step_plaintext(p_dists, batch, uniforms, rng);
}

}  // namespace specdec
