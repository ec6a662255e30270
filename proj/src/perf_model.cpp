#include "specdec/perf_model.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "specdec/ot.hpp"
#include "specdec/secure_compare.hpp"

namespace specdec {

double expected_tokens_per_step(double alpha, int gamma) {
  if (gamma < 1) throw std::invalid_argument("expected_tokens_per_step: gamma must be >= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("expected_tokens_per_step: alpha must be in [0, 1]");
  if (alpha == 1.0) return static_cast<double>(gamma) + 1.0;
  return (1.0 - std::pow(alpha, gamma + 1)) / (1.0 - alpha);
}

double step_reduction_approx(double alpha) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::invalid_argument("step_reduction_approx: alpha must be in [0, 1)");
  return 1.0 / (1.0 - alpha);
}

static double interpolate(std::span<const std::pair<int, double>> knots, int len) {
  if (knots.empty()) throw std::invalid_argument("length scaling: no knots");
  if (len <= knots.front().first) return knots.front().second;
  for (size_t i = 1; i < knots.size(); ++i) {
    if (len <= knots[i].first) {
      const auto& [x0, y0] = knots[i - 1];
      const auto& [x1, y1] = knots[i];
      return y0 + (y1 - y0) * static_cast<double>(len - x0) / static_cast<double>(x1 - x0);
    }
  }
  // Extend past the last knot with the final slope.
  const auto& [x0, y0] = knots[knots.size() - 2];
  const auto& [x1, y1] = knots.back();
  const double slope = (y1 - y0) / static_cast<double>(x1 - x0);
  return y1 + slope * static_cast<double>(len - x1);
}

double default_length_scaling(int len) {
  static const std::vector<std::pair<int, double>> knots = {
      {1, 1.0}, {4, 1.05}, {8, 1.2}, {16, 1.5}};
  return interpolate(knots, len);
}

std::string to_string(CommVariant v) {
  switch (v) {
    case CommVariant::naive_monolithic: return "naive_monolithic";
    case CommVariant::optimized_monolithic: return "optimized_monolithic";
    case CommVariant::naive_chunked: return "naive_chunked";
    case CommVariant::optimized_chunked: return "optimized_chunked";
  }
  return "?";
}

CommCostBreakdown comm_cost_breakdown(CommVariant v, int vocab, int ell, int gamma, int m) {
  if (vocab < 2 || ell < 2 || gamma < 1)
    throw std::invalid_argument("comm_cost: parameters must be positive");
  const double g = gamma;
  const double vl_select = static_cast<double>(OtFunctionality::cost_bits(vocab, ell));
  const double bool_select = static_cast<double>(OtFunctionality::cost_bits(vocab, 1));
  const double mono_compare = 2.0 * std::exp2(ell) + ell;  // one (2^ell 1)-OT of 2-bit strings
  CommCostBreakdown b;
  switch (v) {
    case CommVariant::optimized_monolithic:
      b.select_score = g * vl_select;
      b.compare = g * mono_compare;
      break;
    case CommVariant::naive_monolithic:
      b.compare = g * vocab * mono_compare;
      b.select_bool = g * bool_select;
      break;
    case CommVariant::optimized_chunked:
      b.select_score = g * vl_select;
      b.compare = g * static_cast<double>(chunked_compare_bits_per_element(ell, m));
      b.open = g;  // the rejection booleans, one bit per draft token
      break;
    case CommVariant::naive_chunked:
      b.compare = g * vocab * static_cast<double>(chunked_compare_bits_per_element(ell, m));
      b.select_bool = g * bool_select;
      break;
  }
  b.final_ot = static_cast<double>(
      OtFunctionality::cost_bits(static_cast<size_t>(gamma) + 1,
                                 static_cast<size_t>(vocab) * static_cast<size_t>(ell)));
  return b;
}

double comm_cost(CommVariant v, int vocab, int ell, int gamma, int m) {
  return comm_cost_breakdown(v, vocab, ell, gamma, m).total();
}

double comm_cost_per_token(CommVariant v, int vocab, int ell, int m) {
  CommCostBreakdown b = comm_cost_breakdown(v, vocab, ell, 1, m);
  b.final_ot = 0;
  return b.total();
}

// ---------------------------------------------------------------------------
// Reference timings and sampling-time calibration

namespace {

struct TimingCell {
  double bandwidth_bps;
  double delay_s;
  int gamma;
  double decoder_s;
  double naive_s;
  double optimized_s;
};

constexpr TimingCell kReferenceCells[] = {
    {1e9, 0.010, 4, 7.11, 14.78, 1.19},
    {1e9, 0.010, 8, 8.67, 28.26, 1.45},
    {400e6, 0.040, 4, 20.32, 24.44, 3.04},
    {400e6, 0.040, 8, 22.49, 46.62, 4.12},
};

const TimingCell* find_cell(const NetworkModel& net, int gamma) {
  for (const auto& c : kReferenceCells) {
    if (c.gamma == gamma && std::fabs(c.bandwidth_bps - net.bandwidth_bps) < 1.0 &&
        std::fabs(c.delay_s - net.one_way_delay_s) < 1e-9)
      return &c;
  }
  return nullptr;
}

}  // namespace

bool ReferenceTimings::has_cell(const NetworkModel& net, int gamma) {
  return find_cell(net, gamma) != nullptr;
}

double ReferenceTimings::decoder_seconds(const NetworkModel& net, int gamma) {
  if (const TimingCell* c = find_cell(net, gamma)) return c->decoder_s;
  throw std::out_of_range("ReferenceTimings: no measured cell for this (network, gamma)");
}

double ReferenceTimings::sampling_seconds(const NetworkModel& net, int gamma, bool optimized) {
  if (const TimingCell* c = find_cell(net, gamma)) return optimized ? c->optimized_s : c->naive_s;
  throw std::out_of_range("ReferenceTimings: no measured cell for this (network, gamma)");
}

uint64_t modeled_sampling_rounds(CommVariant v, int ell, int m) {
  const uint64_t compare_rounds = 2ull * static_cast<uint64_t>(ell / m);
  switch (v) {
    case CommVariant::optimized_chunked:
    case CommVariant::optimized_monolithic:
      return 2 + compare_rounds + 1 + 2;  // select, compare, open, final
    case CommVariant::naive_chunked:
    case CommVariant::naive_monolithic:
      return compare_rounds + 2 + 2;  // compare, boolean select, final
  }
  return 0;
}

SamplingCalibration SamplingCalibration::from_reference(int vocab, int ell, int m,
                                                        const NetworkModel& net, int gamma) {
  auto raw = [&](CommVariant v) {
    return modeled_sampling_rounds(v, ell, m) * net.one_way_delay_s +
           comm_cost(v, vocab, ell, gamma, m) / net.bandwidth_bps;
  };
  SamplingCalibration cal;
  cal.optimized_fixed_seconds =
      ReferenceTimings::sampling_seconds(net, gamma, true) - raw(CommVariant::optimized_chunked);
  cal.naive_seconds_per_draft =
      (ReferenceTimings::sampling_seconds(net, gamma, false) - raw(CommVariant::naive_chunked)) /
      gamma;
  return cal;
}

double modeled_sampling_seconds(CommVariant v, int vocab, int ell, int gamma, int m,
                                const NetworkModel& net, const SamplingCalibration& cal) {
  const double wire = modeled_sampling_rounds(v, ell, m) * net.one_way_delay_s +
                      comm_cost(v, vocab, ell, gamma, m) / net.bandwidth_bps;
  const bool optimized =
      v == CommVariant::optimized_chunked || v == CommVariant::optimized_monolithic;
  return wire + (optimized ? cal.optimized_fixed_seconds : cal.naive_seconds_per_draft * gamma);
}

// ---------------------------------------------------------------------------
// Speedup model

double DecoderCostProfile::scaling(int len) const { return interpolate(length_scaling, len); }

void DecoderCostProfile::validate() const {
  if (!(base_time_at_len1 > 0))
    throw std::invalid_argument("DecoderCostProfile: base time must be > 0");
  if (length_scaling.empty() || length_scaling.front().first != 1 ||
      length_scaling.front().second != 1.0)
    throw std::invalid_argument("DecoderCostProfile: length_scaling must start at {1, 1.0}");
  for (size_t i = 1; i < length_scaling.size(); ++i)
    if (length_scaling[i].second < length_scaling[i - 1].second ||
        length_scaling[i].first <= length_scaling[i - 1].first)
      throw std::invalid_argument("DecoderCostProfile: multipliers must be nondecreasing");
}

DecoderCostProfile DecoderCostProfile::reference() {
  DecoderCostProfile p;
  // Base step time implied by the measured gamma=8 LAN decoder cell and the
  // scaling curve.
  p.base_time_at_len1 = ReferenceTimings::decoder_seconds(NetworkModel::lan(), 8) /
                        default_length_scaling(8);
  p.sampling_overhead = [](const NetworkModel& net, int gamma) {
    if (ReferenceTimings::has_cell(net, gamma))
      return ReferenceTimings::sampling_seconds(net, gamma, true);
    static const SamplingCalibration cal = SamplingCalibration::from_reference();
    return modeled_sampling_seconds(CommVariant::optimized_chunked, 32000, 32, gamma, 4, net, cal);
  };
  return p;
}

DecoderCostProfile DecoderCostProfile::no_overhead(double base_time) {
  DecoderCostProfile p;
  p.base_time_at_len1 = base_time;
  p.sampling_overhead = [](const NetworkModel&, int) { return 0.0; };
  return p;
}

SpeedupPoint speedup(double alpha, int gamma, const DecoderCostProfile& profile,
                     const NetworkModel& net) {
  profile.validate();
  const double tokens = expected_tokens_per_step(alpha, gamma);
  const double overhead = profile.sampling_overhead ? profile.sampling_overhead(net, gamma) : 0.0;
  const double step_time = profile.base_time_at_len1 * profile.scaling(gamma) + overhead;
  return {alpha, static_cast<double>(gamma), tokens * profile.base_time_at_len1 / step_time};
}

// ---------------------------------------------------------------------------
// Length-latency decomposition

double length_latency(const NetworkModel& net, std::span<const LayerCost> layers, int len) {
  if (len < 1) throw std::invalid_argument("length_latency: len must be >= 1");
  net.validate();
  double total = 0.0;
  for (const auto& layer : layers) {
    total += layer.rounds * net.one_way_delay_s;
    if (layer.bytes) total += layer.bytes(len) * 8.0 / net.bandwidth_bps;
    if (layer.compute_seconds) total += layer.compute_seconds(len);
  }
  return total;
}

std::vector<LayerCost> default_layer_profile() {
  std::vector<LayerCost> layers(2);
  // HE-shaped linear layer: few rounds, sublinear bytes, mildly sublinear compute.
  layers[0].rounds = 20;
  layers[0].bytes = [](int len) { return 2.375e7 * std::pow(len, 0.25); };
  layers[0].compute_seconds = [](int len) { return 0.8 * std::pow(len, 0.12); };
  // MPC-shaped nonlinear layer: many rounds, bytes linear in length.
  layers[1].rounds = 100;
  layers[1].bytes = [](int len) { return 5e6 * static_cast<double>(len); };
  layers[1].compute_seconds = [](int) { return 0.0; };
  return layers;
}

// ---------------------------------------------------------------------------
// CSV emitters

namespace {
void write_double_csv(std::ostream& os, double v) {
  char buf[32];
  snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}
}  // namespace

void write_speedup_csv(std::ostream& os, std::span<const SpeedupPoint> points) {
  os << "alpha,gamma,speedup\n";
  for (const auto& p : points) {
    write_double_csv(os, p.alpha);
    os << ',';
    write_double_csv(os, p.gamma);
    os << ',';
    write_double_csv(os, p.speedup);
    os << '\n';
  }
}

void write_comm_sweep_csv(std::ostream& os, std::span<const CommSweepRow> rows) {
  os << "V,ell,m,variant,bits\n";
  for (const auto& r : rows) {
    os << r.vocab << ',' << r.ell << ',' << r.m << ',' << to_string(r.variant) << ',';
    write_double_csv(os, r.bits);
    os << '\n';
  }
}

void write_length_profile_csv(std::ostream& os, std::span<const LengthPoint> points) {
  os << "len,seconds\n";
  for (const auto& p : points) {
    os << p.len << ',';
    write_double_csv(os, p.seconds);
    os << '\n';
  }
}

}  // namespace specdec
