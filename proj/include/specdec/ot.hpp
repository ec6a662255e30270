#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "specdec/transport.hpp"

namespace specdec {

struct OtInstance {
  size_t k = 2;       // number of sender strings
  size_t bitlen = 1;  // bits per string

  void validate() const;  // throws std::invalid_argument
};

// Smallest t with 2^t >= k.
int ceil_log2(size_t k);

struct OtRecord {
  std::string phase;
  size_t k = 0;
  size_t bitlen = 0;
  uint64_t bits_charged = 0;
};

/// Ideal 1-out-of-k oblivious transfer. Correctness and cost accounting are
/// exact; there is no cryptography. The receiver's index reaches only this
/// object, never the sender party's inbox, so nothing index-dependent is ever
/// observable on the sender side.
///
/// Cost per invocation: k*bitlen + ceil(log2 k) bits over 2 rounds — the
/// choice flight carries ceil(log2 k) bits receiver->sender, the string
/// flight k*bitlen bits sender->receiver. Batched invocations under one
/// ParallelBatch share the 2 rounds.
class OtFunctionality {
 public:
  explicit OtFunctionality(Channel& ch) : ch_(ch) {}

  // Returns strings[index]. Each string must be exactly ceil(bitlen/8) bytes
  // with unused high bits clear.
  std::vector<uint8_t> choose(std::span<const std::vector<uint8_t>> strings, size_t bitlen,
                              size_t index, Party sender, std::string_view phase);

  // Allocation-free variant for strings of at most 64 bits.
  uint64_t choose_u64(std::span<const uint64_t> strings, size_t bitlen, size_t index,
                      Party sender, std::string_view phase);

  // Ledger/transcript charge of one invocation, shared by both variants and
  // by functionalities priced as OT calls.
  void charge_invocation(size_t k, size_t bitlen, Party sender, std::string_view phase);

  static uint64_t cost_bits(size_t k, size_t bitlen) {
    return static_cast<uint64_t>(k) * bitlen + static_cast<uint64_t>(ceil_log2(k));
  }

  const std::vector<OtRecord>& audit() const { return audit_; }
  Channel& channel() { return ch_; }

 private:
  Channel& ch_;
  std::vector<OtRecord> audit_;
};

}  // namespace specdec
