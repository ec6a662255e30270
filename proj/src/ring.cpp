#include "specdec/ring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace specdec {

void FixedPointConfig::validate() const {
  if (frac < 2 || frac >= ell || ell > 64)
    throw std::invalid_argument("FixedPointConfig: need 2 <= frac < ell <= 64, got ell=" +
                                std::to_string(ell) + " frac=" + std::to_string(frac));
}

int64_t to_signed(RingValue v, const FixedPointConfig& cfg) {
  if (cfg.ell == 64) return static_cast<int64_t>(v.raw);
  uint64_t raw = v.raw & cfg.mask();
  if (raw & cfg.sign_bit()) return static_cast<int64_t>(raw) - static_cast<int64_t>(uint64_t{1} << cfg.ell);
  return static_cast<int64_t>(raw);
}

RingValue encode_fixed(double x, const FixedPointConfig& cfg) {
  cfg.validate();
  const double limit = std::exp2(cfg.ell - cfg.frac - 1);
  if (!(std::fabs(x) < limit))
    throw std::overflow_error("encode_fixed: |" + std::to_string(x) + "| >= 2^" +
                              std::to_string(cfg.ell - cfg.frac - 1));
  // llround rounds half away from zero; the cast wraps two's-complement.
  const int64_t scaled = std::llround(x * cfg.scale());
  return {static_cast<uint64_t>(scaled) & cfg.mask()};
}

double decode_fixed(RingValue v, const FixedPointConfig& cfg) {
  return static_cast<double>(to_signed(v, cfg)) / cfg.scale();
}

std::pair<RingValue, RingValue> make_shares(RingValue v, const FixedPointConfig& cfg, Prng& rng) {
  RingValue client{rng.bits(cfg.ell)};
  RingValue server = ring_sub(v, client, cfg);
  return {client, server};
}

RingValue reconstruct(RingValue a, RingValue b, const FixedPointConfig& cfg) {
  return ring_add(a, b, cfg);
}

std::pair<SharedVector, SharedVector> share_vector(std::span<const double> plain,
                                                   const FixedPointConfig& cfg, Prng& rng) {
  SharedVector c{Party::client, cfg, {}};
  SharedVector s{Party::server, cfg, {}};
  c.values.reserve(plain.size());
  s.values.reserve(plain.size());
  for (double x : plain) {
    auto [cs, ss] = make_shares(encode_fixed(x, cfg), cfg, rng);
    c.values.push_back(cs);
    s.values.push_back(ss);
  }
  return {std::move(c), std::move(s)};
}

static void check_pair(const SharedVector& client, const SharedVector& server) {
  if (client.party != Party::client || server.party != Party::server)
    throw std::invalid_argument("reconstruct: share pair has wrong party roles");
  if (client.cfg != server.cfg)
    throw std::invalid_argument("reconstruct: fixed-point config mismatch");
  if (client.values.size() != server.values.size())
    throw std::invalid_argument("reconstruct: share length mismatch");
}

std::vector<RingValue> reconstruct_vector(const SharedVector& client, const SharedVector& server) {
  check_pair(client, server);
  std::vector<RingValue> out(client.values.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = ring_add(client.values[i], server.values[i], client.cfg);
  return out;
}

std::vector<double> reconstruct_decode(const SharedVector& client, const SharedVector& server) {
  check_pair(client, server);
  std::vector<double> out(client.values.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = decode_fixed(ring_add(client.values[i], server.values[i], client.cfg), client.cfg);
  return out;
}

}  // namespace specdec
