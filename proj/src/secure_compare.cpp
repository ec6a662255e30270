#include "specdec/secure_compare.hpp"

#include <stdexcept>

#include "specdec/transport.hpp"

namespace specdec {

namespace {

void check_inputs(const SharedVector& c, const SharedVector& s) {
  if (c.party != Party::client || s.party != Party::server)
    throw std::invalid_argument("f_less_zero: share pair has wrong party roles");
  if (c.cfg != s.cfg) throw std::invalid_argument("f_less_zero: config mismatch");
  if (c.values.size() != s.values.size())
    throw std::invalid_argument("f_less_zero: share length mismatch");
}

void check_chunking(int ell, int m) {
  if (m < 1 || m >= ell || ell % m != 0)
    throw std::invalid_argument("f_less_zero: chunk_bits must divide ell and be < ell");
}

BitShares f_less_ideal(const SharedVector& c, const SharedVector& s, OtFunctionality& ot,
                       Prng& func_rng, std::string_view phase) {
  const auto& cfg = c.cfg;
  Channel& ch = ot.channel();
  BitShares out;
  out.client.resize(c.size());
  out.server.resize(c.size());
  ParallelBatch batch(ch);
  for (size_t i = 0; i < c.size(); ++i) {
    if (i > 0) batch.next_lane();
    ch.round_barrier();
    ch.charge(1, Direction::client_to_server, phase, /*via_functionality=*/true);
    ch.charge(1, Direction::server_to_client, phase, /*via_functionality=*/true);
    const RingValue v = ring_add(c.values[i], s.values[i], cfg);
    const uint8_t result = to_signed(v, cfg) > 0 ? 1 : 0;
    const uint8_t coin = func_rng.coin() ? 1 : 0;
    out.client[i] = coin;
    out.server[i] = coin ^ result;
  }
  return out;
}

// Chunked realization. The carry into the sign position is computed by a
// most-significant-digit-first ripple over genuine digit-comparison OTs:
// per digit the server offers 2-bit payloads (masked gt/eq of the client's
// digit against its own), and q-1 AND-combine steps fold the ripple
//   G <- G xor (E and gt_d),  E <- E and eq_d.
// Each combine step is an ideal two-party step priced as one 1-out-of-2 OT of
// 2 bits; the final step also folds in the parties' sign bits and the strict
// zero test, and re-randomizes the output shares. Outputs are validated
// against the ideal backend, the ledger realizes the per-element closed form.
BitShares f_less_chunked(const SharedVector& c, const SharedVector& s, int m,
                         OtFunctionality& ot, Prng& server_rng, Prng& func_rng,
                         std::string_view phase) {
  const auto& cfg = c.cfg;
  check_chunking(cfg.ell, m);
  const int q = cfg.ell / m;
  const size_t n = c.size();
  const size_t table_size = size_t{1} << m;
  const uint64_t digit_mask = table_size - 1;
  const uint64_t low_mask = cfg.sign_bit() - 1;  // low ell-1 bits
  Channel& ch = ot.channel();

  // Per-element client/server views.
  std::vector<uint64_t> x(n), w(n), zero_probe(n);
  std::vector<uint8_t> msb_a(n), msb_b(n);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t a = c.values[i].raw & cfg.mask();
    const uint64_t b = s.values[i].raw & cfg.mask();
    x[i] = a & low_mask;
    msb_a[i] = (a & cfg.sign_bit()) ? 1 : 0;
    msb_b[i] = (b & cfg.sign_bit()) ? 1 : 0;
    // Carry into the sign bit is 1{x > w} with w the complement of the
    // server's low part; x == zero_probe means the low parts sum to zero.
    const uint64_t b_low = b & low_mask;
    w[i] = low_mask - b_low;
    zero_probe[i] = (w[i] + 1) & low_mask;
  }

  // Leaf digit comparisons, all elements and digits in parallel.
  std::vector<uint8_t> gt_c(n * q), eq_c(n * q), gt_s(n * q), eq_s(n * q);
  std::vector<uint64_t> table(table_size);
  {
    ParallelBatch batch(ch);
    bool first = true;
    for (size_t i = 0; i < n; ++i) {
      for (int d = 0; d < q; ++d) {
        if (!first) batch.next_lane();
        first = false;
        const size_t slot = i * q + d;
        const uint64_t w_d = (w[i] >> (d * m)) & digit_mask;
        gt_s[slot] = server_rng.coin() ? 1 : 0;
        eq_s[slot] = server_rng.coin() ? 1 : 0;
        for (uint64_t cand = 0; cand < table_size; ++cand) {
          const uint64_t gt_bit = gt_s[slot] ^ (cand > w_d ? 1 : 0);
          const uint64_t eq_bit = eq_s[slot] ^ (cand == w_d ? 1 : 0);
          table[cand] = (eq_bit << 1) | gt_bit;
        }
        const size_t choice = (x[i] >> (d * m)) & digit_mask;
        const uint64_t payload = ot.choose_u64(table, 2, choice, Party::server, phase);
        gt_c[slot] = payload & 1;
        eq_c[slot] = (payload >> 1) & 1;
      }
    }
  }

  // Ripple fold, most significant digit first.
  std::vector<uint8_t> G_c(n), E_c(n), G_s(n), E_s(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t top = i * q + (q - 1);
    G_c[i] = gt_c[top];
    E_c[i] = eq_c[top];
    G_s[i] = gt_s[top];
    E_s[i] = eq_s[top];
  }
  BitShares out;
  out.client.resize(n);
  out.server.resize(n);
  for (int d = q - 2; d >= 0; --d) {
    ParallelBatch batch(ch);
    for (size_t i = 0; i < n; ++i) {
      if (i > 0) batch.next_lane();
      ot.charge_invocation(2, 2, Party::server, phase);
      const size_t slot = i * q + d;
      const uint8_t G = G_c[i] ^ G_s[i];
      const uint8_t E = E_c[i] ^ E_s[i];
      const uint8_t gt_d = gt_c[slot] ^ gt_s[slot];
      const uint8_t eq_d = eq_c[slot] ^ eq_s[slot];
      const uint8_t G_next = G ^ (E & gt_d);
      const uint8_t E_next = E & eq_d;
      if (d > 0) {
        G_s[i] = func_rng.coin() ? 1 : 0;
        E_s[i] = func_rng.coin() ? 1 : 0;
        G_c[i] = G_next ^ G_s[i];
        E_c[i] = E_next ^ E_s[i];
      } else {
        // Final step: assemble the sign bit from the carry and apply the
        // strict zero test, then hand out fresh shares.
        const uint8_t msb = msb_a[i] ^ msb_b[i] ^ G_next;
        const uint8_t zero_low = x[i] == zero_probe[i] ? 1 : 0;
        const uint8_t result = static_cast<uint8_t>(!msb && !zero_low);
        const uint8_t coin = func_rng.coin() ? 1 : 0;
        out.client[i] = coin;
        out.server[i] = coin ^ result;
      }
    }
  }
  return out;
}

}  // namespace

BitShares f_less_zero(const SharedVector& client_shares, const SharedVector& server_shares,
                      const CompareBackend& backend, OtFunctionality& ot, Prng& server_rng,
                      Prng& func_rng, std::string_view phase) {
  check_inputs(client_shares, server_shares);
  if (backend.kind == CompareBackend::Kind::ideal)
    return f_less_ideal(client_shares, server_shares, ot, func_rng, phase);
  return f_less_chunked(client_shares, server_shares, backend.chunk_bits, ot, server_rng,
                        func_rng, phase);
}

uint64_t chunked_compare_bits_per_element(int ell, int m) {
  check_chunking(ell, m);
  const uint64_t q = static_cast<uint64_t>(ell / m);
  return q * OtFunctionality::cost_bits(size_t{1} << m, 2) +
         (q - 1) * OtFunctionality::cost_bits(2, 2);
}

}  // namespace specdec
