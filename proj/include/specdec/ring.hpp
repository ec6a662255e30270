#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "specdec/rng.hpp"

namespace specdec {

/// Fixed-point layout on the ring Z_{2^ell}: `frac` fractional bits, signed
/// two's-complement interpretation. Probabilities and their products live in
/// [-1, 1], so the default 12 fractional bits keep quantization error below
/// 2.5e-4 while leaving 19 integer/sign bits of headroom at ell = 32.
struct FixedPointConfig {
  int ell = 32;
  int frac = 12;

  void validate() const;  // throws std::invalid_argument

  uint64_t mask() const {
    return ell >= 64 ? ~uint64_t{0} : ((uint64_t{1} << ell) - 1);
  }
  uint64_t sign_bit() const { return uint64_t{1} << (ell - 1); }
  double scale() const { return static_cast<double>(uint64_t{1} << frac); }

  bool operator==(const FixedPointConfig&) const = default;
};

/// An element of Z_{2^ell}. `raw` is kept reduced modulo 2^ell by every
/// operation; raw >= 2^(ell-1) reads as raw - 2^ell under signed decode.
struct RingValue {
  uint64_t raw = 0;
  bool operator==(const RingValue&) const = default;
};

enum class Party { client, server };

inline RingValue ring_add(RingValue a, RingValue b, const FixedPointConfig& cfg) {
  return {(a.raw + b.raw) & cfg.mask()};
}
inline RingValue ring_sub(RingValue a, RingValue b, const FixedPointConfig& cfg) {
  return {(a.raw - b.raw) & cfg.mask()};
}
inline RingValue ring_neg(RingValue a, const FixedPointConfig& cfg) {
  return {(~a.raw + 1) & cfg.mask()};
}

int64_t to_signed(RingValue v, const FixedPointConfig& cfg);

// raw = round(x * 2^frac) mod 2^ell, rounding half away from zero.
// Throws std::overflow_error when |x| >= 2^(ell-frac-1).
RingValue encode_fixed(double x, const FixedPointConfig& cfg);
double decode_fixed(RingValue v, const FixedPointConfig& cfg);

// Splits v into (client, server) with client + server = v mod 2^ell and the
// client share drawn uniformly from Z_{2^ell}.
std::pair<RingValue, RingValue> make_shares(RingValue v, const FixedPointConfig& cfg, Prng& rng);

RingValue reconstruct(RingValue a, RingValue b, const FixedPointConfig& cfg);

/// One party's additive shares of a fixed-point vector.
struct SharedVector {
  Party party = Party::client;
  FixedPointConfig cfg;
  std::vector<RingValue> values;

  size_t size() const { return values.size(); }
};

std::pair<SharedVector, SharedVector> share_vector(std::span<const double> plain,
                                                   const FixedPointConfig& cfg, Prng& rng);

// Both throw std::invalid_argument on party/config/size mismatch.
std::vector<RingValue> reconstruct_vector(const SharedVector& client, const SharedVector& server);
std::vector<double> reconstruct_decode(const SharedVector& client, const SharedVector& server);

}  // namespace specdec
