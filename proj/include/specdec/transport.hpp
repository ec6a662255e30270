#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "specdec/ring.hpp"

namespace specdec {

enum class Direction { client_to_server, server_to_client };

inline Party receiver_of(Direction d) {
  return d == Direction::client_to_server ? Party::server : Party::client;
}

struct PhaseCost {
  std::string phase;
  uint64_t rounds = 0;
  uint64_t bits_c2s = 0;
  uint64_t bits_s2c = 0;
  uint64_t ot_calls = 0;
};

/// Exact per-direction communication accounting for one protocol run.
/// Counters are in bits (OT charges are not byte-aligned); the CSV export
/// reports bytes. All counters are monotone while a run is in progress.
class CostLedger {
 public:
  uint64_t rounds() const { return rounds_; }
  uint64_t bits_c2s() const { return bits_c2s_; }
  uint64_t bits_s2c() const { return bits_s2c_; }
  uint64_t total_bits() const { return bits_c2s_ + bits_s2c_; }
  uint64_t ot_invocations() const { return ot_invocations_; }
  double compute_seconds() const { return compute_seconds_; }
  const std::vector<PhaseCost>& phases() const { return phases_; }

  const PhaseCost* find_phase(std::string_view phase) const;
  uint64_t phase_bits(std::string_view phase) const;

  void add_bits(std::string_view phase, Direction d, uint64_t nbits);
  void add_round(std::string_view phase);
  void add_ot_call(std::string_view phase) { touch(phase).ot_calls++, ot_invocations_++; }
  void add_compute_seconds(double s) { compute_seconds_ += s; }

  // CSV with header `phase,rounds,bytes_c2s,bytes_s2c,ot_calls` plus a final
  // `total` row. Bytes may be fractional since OT charges are bit-exact.
  void write_csv(std::ostream& os) const;

 private:
  PhaseCost& touch(std::string_view phase);

  uint64_t rounds_ = 0;
  uint64_t bits_c2s_ = 0;
  uint64_t bits_s2c_ = 0;
  uint64_t ot_invocations_ = 0;
  double compute_seconds_ = 0.0;
  std::vector<PhaseCost> phases_;
};

struct NetworkModel {
  double bandwidth_bps = 1e9;     // bits per second
  double one_way_delay_s = 0.01;  // seconds per round

  void validate() const;  // throws std::invalid_argument

  static NetworkModel lan() { return {1e9, 0.010}; }
  static NetworkModel wan() { return {400e6, 0.040}; }
};

// rounds * delay + bits / bandwidth + compute.
double estimate_latency(const CostLedger& ledger, const NetworkModel& net, double compute_seconds);

/// What one party received: enough to audit transcript structure without
/// replaying a run. Entries delivered by an ideal functionality are tagged;
/// their recorded length is the charged wire length, not the payload.
struct InboxEntry {
  std::string phase;
  uint64_t bits = 0;
  bool via_functionality = false;

  bool operator==(const InboxEntry&) const = default;
};

/// In-process two-party channel. A round is counted when the message
/// direction alternates or an explicit round barrier was crossed; messages
/// inside a parallel batch share the rounds of the batch's first lane.
class Channel {
 public:
  // Delivers `msg` to the receiving party and charges the ledger.
  std::vector<uint8_t> transfer(std::vector<uint8_t> msg, Direction d, std::string_view phase);

  // Accounting entry point for functionality-mediated traffic (sub-byte
  // charges, payload invisible to the counterpart).
  void charge(uint64_t nbits, Direction d, std::string_view phase, bool via_functionality);

  // Lump charge for a sub-protocol that is modeled, not executed (rounds and
  // bits in both directions at once). Ends with a round barrier.
  void charge_aggregate(uint64_t rounds, uint64_t bits_c2s, uint64_t bits_s2c,
                        std::string_view phase);

  void round_barrier() { barrier_pending_ = true; }

  // Parallel batches: lane 0 counts rounds normally, later lanes charge bits
  // only. Lanes must share one phase label and message pattern.
  void begin_parallel();
  void next_lane();
  void end_parallel();

  CostLedger& ledger() { return ledger_; }
  const CostLedger& ledger() const { return ledger_; }
  const std::vector<InboxEntry>& inbox(Party p) const {
    return p == Party::client ? client_inbox_ : server_inbox_;
  }
  void note_ot_call(std::string_view phase) { ledger_.add_ot_call(phase); }

 private:
  bool counting_rounds() const { return parallel_depth_ == 0 || lane_ == 0; }

  CostLedger ledger_;
  std::vector<InboxEntry> client_inbox_;
  std::vector<InboxEntry> server_inbox_;
  bool any_message_ = false;
  bool barrier_pending_ = false;
  Direction last_dir_ = Direction::client_to_server;
  int parallel_depth_ = 0;
  uint64_t lane_ = 0;
  // Direction state saved at batch entry so every lane replays lane 0's pattern.
  bool saved_any_ = false;
  bool saved_barrier_ = false;
  Direction saved_dir_ = Direction::client_to_server;
};

/// RAII parallel batch over a channel.
class ParallelBatch {
 public:
  explicit ParallelBatch(Channel& ch) : ch_(ch) { ch_.begin_parallel(); }
  ~ParallelBatch() { ch_.end_parallel(); }
  void next_lane() { ch_.next_lane(); }

  ParallelBatch(const ParallelBatch&) = delete;
  ParallelBatch& operator=(const ParallelBatch&) = delete;

 private:
  Channel& ch_;
};

}  // namespace specdec
