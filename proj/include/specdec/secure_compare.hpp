#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "specdec/ot.hpp"
#include "specdec/ring.hpp"
#include "specdec/rng.hpp"

namespace specdec {

/// Backend for the F_less functionality.
///   ideal   — result computed directly, charged 2 bits / 2 rounds per element.
///   chunked — each element's comparison decomposed into q = ell/m digit
///             comparisons via 1-out-of-2^m OTs of 2-bit payloads plus q-1
///             AND-combine steps priced as 1-out-of-2 OTs of 2 bits.
struct CompareBackend {
  enum class Kind { ideal, chunked };
  Kind kind = Kind::ideal;
  int chunk_bits = 4;

  static CompareBackend ideal() { return {Kind::ideal, 0}; }
  static CompareBackend chunked(int m) { return {Kind::chunked, m}; }
};

/// Additive Z_2 shares of a boolean vector, one bit per element.
struct BitShares {
  std::vector<uint8_t> client;
  std::vector<uint8_t> server;

  size_t size() const { return client.size(); }
  uint8_t reconstruct(size_t i) const { return client[i] ^ server[i]; }
};

// Shares of (0 < value) under signed interpretation, elementwise over the
// shared vector; strict, so value 0 compares false. Throws on malformed share
// pairs or (chunked) when chunk_bits does not divide ell or equals it.
BitShares f_less_zero(const SharedVector& client_shares, const SharedVector& server_shares,
                      const CompareBackend& backend, OtFunctionality& ot, Prng& server_rng,
                      Prng& func_rng, std::string_view phase);

// Closed form of the chunked backend's ledger bits per element:
// q*(2^m*2 + m) + (q-1)*(2*2 + 1) with q = ell/m.
uint64_t chunked_compare_bits_per_element(int ell, int m);

}  // namespace specdec
