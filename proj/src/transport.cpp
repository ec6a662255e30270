#include "specdec/transport.hpp"

#include <ostream>
#include <stdexcept>

namespace specdec {

const PhaseCost* CostLedger::find_phase(std::string_view phase) const {
  for (const auto& p : phases_)
    if (p.phase == phase) return &p;
  return nullptr;
}

uint64_t CostLedger::phase_bits(std::string_view phase) const {
  const PhaseCost* p = find_phase(phase);
  return p ? p->bits_c2s + p->bits_s2c : 0;
}

PhaseCost& CostLedger::touch(std::string_view phase) {
  for (auto& p : phases_)
    if (p.phase == phase) return p;
  phases_.push_back({std::string(phase)});
  return phases_.back();
}

void CostLedger::add_bits(std::string_view phase, Direction d, uint64_t nbits) {
  auto& p = touch(phase);
  if (d == Direction::client_to_server) {
    bits_c2s_ += nbits;
    p.bits_c2s += nbits;
  } else {
    bits_s2c_ += nbits;
    p.bits_s2c += nbits;
  }
}

void CostLedger::add_round(std::string_view phase) {
  rounds_++;
  touch(phase).rounds++;
}

void CostLedger::write_csv(std::ostream& os) const {
  os << "phase,rounds,bytes_c2s,bytes_s2c,ot_calls\n";
  for (const auto& p : phases_)
    os << p.phase << ',' << p.rounds << ',' << p.bits_c2s / 8.0 << ',' << p.bits_s2c / 8.0
       << ',' << p.ot_calls << '\n';
  os << "total," << rounds_ << ',' << bits_c2s_ / 8.0 << ',' << bits_s2c_ / 8.0 << ','
     << ot_invocations_ << '\n';
}

void NetworkModel::validate() const {
  if (!(bandwidth_bps > 0)) throw std::invalid_argument("NetworkModel: bandwidth must be > 0");
  if (!(one_way_delay_s >= 0)) throw std::invalid_argument("NetworkModel: delay must be >= 0");
}

double estimate_latency(const CostLedger& ledger, const NetworkModel& net, double compute_seconds) {
  net.validate();
  return static_cast<double>(ledger.rounds()) * net.one_way_delay_s +
         static_cast<double>(ledger.total_bits()) / net.bandwidth_bps + compute_seconds;
}

std::vector<uint8_t> Channel::transfer(std::vector<uint8_t> msg, Direction d,
                                       std::string_view phase) {
  charge(msg.size() * 8, d, phase, /*via_functionality=*/false);
  return msg;
}

void Channel::charge(uint64_t nbits, Direction d, std::string_view phase,
                     bool via_functionality) {
  const bool new_round = !any_message_ || barrier_pending_ || d != last_dir_;
  if (new_round && counting_rounds()) ledger_.add_round(phase);
  barrier_pending_ = false;
  any_message_ = true;
  last_dir_ = d;
  ledger_.add_bits(phase, d, nbits);
  auto& inbox = receiver_of(d) == Party::client ? client_inbox_ : server_inbox_;
  inbox.push_back({std::string(phase), nbits, via_functionality});
}

void Channel::charge_aggregate(uint64_t rounds, uint64_t bits_c2s, uint64_t bits_s2c,
                               std::string_view phase) {
  for (uint64_t i = 0; i < rounds; ++i) ledger_.add_round(phase);
  ledger_.add_bits(phase, Direction::client_to_server, bits_c2s);
  ledger_.add_bits(phase, Direction::server_to_client, bits_s2c);
  if (bits_c2s > 0) server_inbox_.push_back({std::string(phase), bits_c2s, true});
  if (bits_s2c > 0) client_inbox_.push_back({std::string(phase), bits_s2c, true});
  any_message_ = true;
  barrier_pending_ = true;
}

void Channel::begin_parallel() {
  if (parallel_depth_ != 0) throw std::runtime_error("Channel: nested parallel batches");
  parallel_depth_ = 1;
  lane_ = 0;
  saved_any_ = any_message_;
  saved_barrier_ = barrier_pending_;
  saved_dir_ = last_dir_;
}

void Channel::next_lane() {
  if (parallel_depth_ == 0) throw std::runtime_error("Channel: next_lane outside a batch");
  lane_++;
  // Lanes replay the first lane's message pattern without counting rounds.
  any_message_ = saved_any_;
  barrier_pending_ = saved_barrier_;
  last_dir_ = saved_dir_;
}

void Channel::end_parallel() {
  parallel_depth_ = 0;
  lane_ = 0;
}

}  // namespace specdec
