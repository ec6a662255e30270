#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdec/transport.hpp"

namespace specdec {

// Expected tokens emitted per decoding step with per-draft acceptance
// probability alpha and draft length gamma: (1 - alpha^(gamma+1)) / (1 - alpha),
// which the 1/(1-alpha) step reduction approximates from above.
double expected_tokens_per_step(double alpha, int gamma);
double step_reduction_approx(double alpha);

// Piecewise-linear interpolation of {1: 1.0, 4: 1.05, 8: 1.2, 16: 1.5};
// extended past 16 with the final slope.
double default_length_scaling(int len);

enum class CommVariant { naive_monolithic, optimized_monolithic, naive_chunked, optimized_chunked };

std::string to_string(CommVariant v);

/// Per-step communication in bits, split by protocol stage. Monolithic
/// variants evaluate the closed complexity forms with unit constants and are
/// model curves only; chunked variants price the comparison through the
/// chunked closed form and match measured ledgers bit for bit.
struct CommCostBreakdown {
  double select_score = 0;
  double compare = 0;
  double open = 0;
  double select_bool = 0;
  double final_ot = 0;

  double total() const { return select_score + compare + open + select_bool + final_ot; }
};

CommCostBreakdown comm_cost_breakdown(CommVariant v, int vocab, int ell, int gamma, int m);
double comm_cost(CommVariant v, int vocab, int ell, int gamma, int m);
double comm_cost_per_token(CommVariant v, int vocab, int ell, int m);

/// Reference wall-clock measurements used to parameterize the model: secure
/// decoder step seconds and draft-sampling seconds per (network, draft
/// length) at vocabulary 32000, ell 32.
struct ReferenceTimings {
  static double decoder_seconds(const NetworkModel& net, int gamma);
  static double sampling_seconds(const NetworkModel& net, int gamma, bool optimized);
  static bool has_cell(const NetworkModel& net, int gamma);
};

/// Compute-time constants calibrated from one measured sampling cell per
/// variant; the remaining cells are predictions. Optimized sampling is
/// dominated by fixed per-step overhead, the naive ordering by per-draft
/// comparison work.
struct SamplingCalibration {
  double optimized_fixed_seconds = 0;
  double naive_seconds_per_draft = 0;

  static SamplingCalibration from_reference(int vocab = 32000, int ell = 32, int m = 4,
                                            const NetworkModel& net = NetworkModel::lan(),
                                            int gamma = 4);
};

// Modeled sampling rounds (latency estimates only; ledger rounds may
// coalesce adjacent same-direction flights).
uint64_t modeled_sampling_rounds(CommVariant v, int ell, int m);

double modeled_sampling_seconds(CommVariant v, int vocab, int ell, int gamma, int m,
                                const NetworkModel& net, const SamplingCalibration& cal);

/// Inputs of the speedup model: secure decoder step time at input length 1,
/// the length-scaling curve, and the per-step draft-sampling overhead.
struct DecoderCostProfile {
  double base_time_at_len1 = 7.225;
  std::vector<std::pair<int, double>> length_scaling = {{1, 1.0}, {4, 1.05}, {8, 1.2}, {16, 1.5}};
  std::function<double(const NetworkModel&, int gamma)> sampling_overhead;

  double scaling(int len) const;
  void validate() const;  // scaling(1) == 1, multipliers nondecreasing

  static DecoderCostProfile reference();                    // reference timings throughout
  static DecoderCostProfile no_overhead(double base_time);  // drafting/sampling cost zero
};

struct SpeedupPoint {
  double alpha = 0;
  double gamma = 0;
  double speedup = 0;
};

// expected_tokens * base / (base * scaling(gamma) + sampling_overhead);
// public-model drafting time is treated as zero.
SpeedupPoint speedup(double alpha, int gamma, const DecoderCostProfile& profile,
                     const NetworkModel& net);

/// One securely evaluated layer's cost shape as a function of input length.
struct LayerCost {
  uint64_t rounds = 0;
  std::function<double(int len)> bytes;
  std::function<double(int len)> compute_seconds;
};

double length_latency(const NetworkModel& net, std::span<const LayerCost> layers, int len);

// Two-layer default: sublinear bytes/compute for the HE-shaped layer, linear
// bytes for the MPC-shaped layer, rounds independent of length.
std::vector<LayerCost> default_layer_profile();

// CSV emitters.
void write_speedup_csv(std::ostream& os, std::span<const SpeedupPoint> points);
struct CommSweepRow {
  int vocab, ell, m;
  CommVariant variant;
  double bits;
};
void write_comm_sweep_csv(std::ostream& os, std::span<const CommSweepRow> rows);
struct LengthPoint {
  int len;
  double seconds;
};
void write_length_profile_csv(std::ostream& os, std::span<const LengthPoint> points);

}  // namespace specdec
