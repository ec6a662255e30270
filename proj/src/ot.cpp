#include "specdec/ot.hpp"

#include <stdexcept>
#include <string>

namespace specdec {

void OtInstance::validate() const {
  if (k < 2) throw std::invalid_argument("OtInstance: k must be >= 2");
  if (bitlen < 1) throw std::invalid_argument("OtInstance: bitlen must be >= 1");
}

int ceil_log2(size_t k) {
  int t = 0;
  size_t v = 1;
  while (v < k) {
    v <<= 1;
    ++t;
  }
  return t;
}

void OtFunctionality::charge_invocation(size_t k, size_t bitlen, Party sender,
                                        std::string_view phase) {
  OtInstance{k, bitlen}.validate();
  const Direction choice_dir =
      sender == Party::server ? Direction::client_to_server : Direction::server_to_client;
  const Direction string_dir =
      sender == Party::server ? Direction::server_to_client : Direction::client_to_server;
  // Two rounds of interaction regardless of surrounding traffic.
  ch_.round_barrier();
  ch_.charge(static_cast<uint64_t>(ceil_log2(k)), choice_dir, phase, /*via_functionality=*/true);
  ch_.charge(static_cast<uint64_t>(k) * bitlen, string_dir, phase, /*via_functionality=*/true);
  ch_.note_ot_call(phase);
  audit_.push_back({std::string(phase), k, bitlen, cost_bits(k, bitlen)});
}

std::vector<uint8_t> OtFunctionality::choose(std::span<const std::vector<uint8_t>> strings,
                                             size_t bitlen, size_t index, Party sender,
                                             std::string_view phase) {
  const size_t k = strings.size();
  OtInstance{k, bitlen}.validate();
  if (index >= k) throw std::out_of_range("ot_choose: index out of range");
  const size_t nbytes = (bitlen + 7) / 8;
  for (const auto& s : strings)
    if (s.size() != nbytes)
      throw std::invalid_argument("ot_choose: string is not exactly " + std::to_string(bitlen) +
                                  " bits");
  charge_invocation(k, bitlen, sender, phase);
  return strings[index];
}

uint64_t OtFunctionality::choose_u64(std::span<const uint64_t> strings, size_t bitlen,
                                     size_t index, Party sender, std::string_view phase) {
  const size_t k = strings.size();
  OtInstance{k, bitlen}.validate();
  if (bitlen > 64) throw std::invalid_argument("ot_choose: choose_u64 limited to 64-bit strings");
  if (index >= k) throw std::out_of_range("ot_choose: index out of range");
  const uint64_t mask = bitlen == 64 ? ~uint64_t{0} : (uint64_t{1} << bitlen) - 1;
  for (uint64_t s : strings)
    if ((s & ~mask) != 0) throw std::invalid_argument("ot_choose: string exceeds bitlen");
  charge_invocation(k, bitlen, sender, phase);
  return strings[index];
}

}  // namespace specdec
