#include "specdec/verify_protocol.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "specdec/perf_model.hpp"

namespace specdec {

namespace {

// Packs each value's low `ell` bits consecutively, little-endian.
std::vector<uint8_t> pack_rings(std::span<const RingValue> values, int ell) {
  const size_t total_bits = values.size() * static_cast<size_t>(ell);
  std::vector<uint8_t> bytes((total_bits + 7) / 8, 0);
  size_t cursor = 0;
  for (const RingValue& v : values) {
    for (int b = 0; b < ell; ++b, ++cursor)
      if ((v.raw >> b) & 1) bytes[cursor / 8] |= static_cast<uint8_t>(1u << (cursor % 8));
  }
  return bytes;
}

std::vector<RingValue> unpack_rings(std::span<const uint8_t> bytes, int ell, size_t count) {
  std::vector<RingValue> out(count);
  size_t cursor = 0;
  for (size_t i = 0; i < count; ++i) {
    uint64_t raw = 0;
    for (int b = 0; b < ell; ++b, ++cursor)
      if (bytes[cursor / 8] & (1u << (cursor % 8))) raw |= uint64_t{1} << b;
    out[i].raw = raw;
  }
  return out;
}

void check_shared(const DraftBatch& batch, const SharedDistributions& shared) {
  batch.validate();
  const size_t gamma = batch.gamma();
  if (shared.client.size() != gamma + 1 || shared.server.size() != gamma + 1)
    throw std::invalid_argument("secure_verify: need gamma+1 shared distributions");
  const size_t vocab = shared.vocab();
  for (size_t i = 0; i <= gamma; ++i) {
    if (shared.client[i].size() != vocab || shared.server[i].size() != vocab)
      throw std::invalid_argument("secure_verify: ragged shared distributions");
    if (shared.client[i].cfg != shared.server[i].cfg ||
        shared.client[i].cfg != shared.client[0].cfg)
      throw std::invalid_argument("secure_verify: config mismatch across distributions");
  }
  for (size_t i = 0; i < gamma; ++i)
    if (batch.q_dists[i].size() != vocab)
      throw std::invalid_argument("secure_verify: draft/private vocabulary mismatch");
}

// Client-side score shares S_c[i][j] = encode(q[i][j] * R[i][j]) - P_c[i][j].
// The mask matrix R is drawn row-major from the client generator; products
// are taken over plaintext reals before encoding, so no secure multiplication
// or truncation is ever needed.
std::vector<std::vector<RingValue>> client_score_shares(const DraftBatch& batch,
                                                        const SharedDistributions& shared,
                                                        const FixedPointConfig& cfg,
                                                        Prng& client_rng) {
  const size_t gamma = batch.gamma();
  const size_t vocab = shared.vocab();
  std::vector<std::vector<RingValue>> rows(gamma);
  for (size_t i = 0; i < gamma; ++i) {
    rows[i].resize(vocab);
    for (size_t j = 0; j < vocab; ++j) {
      const double masked = batch.q_dists[i][j] * client_rng.uniform01();
      rows[i][j] = ring_sub(encode_fixed(masked, cfg), shared.client[i].values[j], cfg);
    }
  }
  return rows;
}

// Final stage shared by both orderings: sentinel, first rejection index, and
// the 1-out-of-(gamma+1) OT opening the k-th distribution to the client.
VerifyResult open_selected_distribution(const std::vector<uint8_t>& rejected,
                                        const SharedDistributions& shared, ProtocolSession& s) {
  const size_t gamma = rejected.size();
  size_t k = gamma;  // appended sentinel
  for (size_t i = 0; i < gamma; ++i) {
    if (rejected[i]) {
      k = i;
      break;
    }
  }

  const auto& cfg = shared.client[0].cfg;
  const size_t vocab = shared.vocab();
  std::vector<std::vector<uint8_t>> strings;
  strings.reserve(gamma + 1);
  for (size_t i = 0; i <= gamma; ++i) strings.push_back(pack_rings(shared.server[i].values, cfg.ell));
  const size_t bitlen = vocab * static_cast<size_t>(cfg.ell);
  const std::vector<uint8_t> picked =
      s.ot.choose(strings, bitlen, k, Party::server, kPhaseFinalOt);
  const std::vector<RingValue> server_row = unpack_rings(picked, cfg.ell, vocab);

  VerifyResult result;
  result.k = k;
  result.p_k.resize(vocab);
  for (size_t j = 0; j < vocab; ++j)
    result.p_k[j] = decode_fixed(ring_add(shared.client[k].values[j], server_row[j], cfg), cfg);
  return result;
}

}  // namespace

StepCostProfile StepCostProfile::none() {
  return {0, [](int) { return 0.0; }, [](int) { return 0.0; }};
}

StepCostProfile StepCostProfile::reference() {
  // Decomposition at the LAN reference point (1 Gbps, 10 ms): 120 rounds of
  // fixed delay plus bits/compute chosen so the step total is
  // base * scaling(len) with base 2.25 s.
  constexpr double kBase = 2.25;
  constexpr double kDelayShare = 1.2;       // 120 rounds * 10 ms
  constexpr double kBitsShare = 0.25;       // remainder split bits vs compute
  constexpr double kRefBandwidth = 1e9;
  StepCostProfile p;
  p.rounds = 120;
  p.bits = [](int len) {
    return kRefBandwidth * kBitsShare * (default_length_scaling(len) * kBase - kDelayShare);
  };
  p.compute_seconds = [](int len) {
    return (1.0 - kBitsShare) * (default_length_scaling(len) * kBase - kDelayShare);
  };
  return p;
}

ProtocolSession::ProtocolSession(FixedPointConfig cfg_, CompareBackend backend_, uint64_t seed,
                                 StepCostProfile forward)
    : cfg(cfg_),
      backend(backend_),
      forward_cost(std::move(forward)),
      channel(),
      ot(channel),
      client_rng(Prng::splitmix64(seed ^ 0x636c69656e74ULL)),
      server_rng(Prng::splitmix64(seed ^ 0x736572766572ULL)),
      func_rng(Prng::splitmix64(seed ^ 0x66756e63ULL)),
      share_rng(Prng::splitmix64(seed ^ 0x7368617265ULL)) {
  cfg.validate();
}

DraftBatch draft_tokens(const LanguageModel& public_model, std::span<const int> prefix,
                        int gamma, Prng& rng) {
  if (gamma < 1) throw std::invalid_argument("draft_tokens: gamma must be >= 1");
  DraftBatch batch;
  std::vector<int> ctx(prefix.begin(), prefix.end());
  for (int i = 0; i < gamma; ++i) {
    ProbVector q = public_model.next_distribution(ctx);
    const int tok = sample_from(q, rng);
    ctx.push_back(tok);
    batch.tokens.push_back(tok);
    batch.q_dists.push_back(std::move(q));
  }
  return batch;
}

SharedDistributions secure_forward_stub(const LanguageModel& private_model,
                                        std::span<const int> prefix, std::span<const int> drafts,
                                        ProtocolSession& s) {
  const int len = static_cast<int>(drafts.size()) + 1;
  const double bits = s.forward_cost.bits ? s.forward_cost.bits(len) : 0.0;
  const double compute = s.forward_cost.compute_seconds ? s.forward_cost.compute_seconds(len) : 0.0;
  const uint64_t half = static_cast<uint64_t>(std::llround(bits / 2.0));
  s.channel.charge_aggregate(s.forward_cost.rounds, half, half, kPhaseForward);
  s.channel.ledger().add_compute_seconds(compute);

  SharedDistributions shared;
  std::vector<int> ctx(prefix.begin(), prefix.end());
  for (size_t i = 0; i <= drafts.size(); ++i) {
    if (i > 0) ctx.push_back(drafts[i - 1]);
    const ProbVector p = private_model.next_distribution(ctx);
    auto [c, sv] = share_vector(p, s.cfg, s.share_rng);
    shared.client.push_back(std::move(c));
    shared.server.push_back(std::move(sv));
  }
  return shared;
}

VerifyResult secure_verify(const DraftBatch& batch, const SharedDistributions& shared_p,
                           ProtocolSession& s) {
  check_shared(batch, shared_p);
  const size_t gamma = batch.gamma();
  const size_t vocab = shared_p.vocab();
  const auto& cfg = shared_p.client[0].cfg;

  const auto score_c = client_score_shares(batch, shared_p, cfg, s.client_rng);

  // Selection: per row the server masks its share with one fresh random ring
  // value; the client retrieves exactly one element per row (the drafted
  // column) through 1-out-of-V OT of ell-bit strings.
  SharedVector sel_c{Party::client, cfg, std::vector<RingValue>(gamma)};
  SharedVector sel_s{Party::server, cfg, std::vector<RingValue>(gamma)};
  {
    ParallelBatch rows(s.channel);
    std::vector<uint64_t> masked(vocab);
    for (size_t i = 0; i < gamma; ++i) {
      if (i > 0) rows.next_lane();
      const RingValue mask{s.server_rng.bits(cfg.ell)};
      for (size_t j = 0; j < vocab; ++j) {
        const RingValue server_score = ring_neg(shared_p.server[i].values[j], cfg);
        masked[j] = ring_sub(server_score, mask, cfg).raw;
      }
      const uint64_t picked = s.ot.choose_u64(masked, cfg.ell, static_cast<size_t>(batch.tokens[i]),
                                              Party::server, kPhaseSelectScore);
      sel_c.values[i] = ring_add(score_c[i][batch.tokens[i]], RingValue{picked}, cfg);
      sel_s.values[i] = mask;
    }
  }

  const BitShares booleans =
      f_less_zero(sel_c, sel_s, s.backend, s.ot, s.server_rng, s.func_rng, kPhaseCompare);

  // Open the rejection booleans to the client (one gamma-bit message).
  s.channel.charge(gamma, Direction::server_to_client, kPhaseOpen, /*via_functionality=*/false);
  std::vector<uint8_t> rejected(gamma);
  for (size_t i = 0; i < gamma; ++i) rejected[i] = booleans.reconstruct(i);

  return open_selected_distribution(rejected, shared_p, s);
}

VerifyResult naive_verify(const DraftBatch& batch, const SharedDistributions& shared_p,
                          ProtocolSession& s) {
  check_shared(batch, shared_p);
  const size_t gamma = batch.gamma();
  const size_t vocab = shared_p.vocab();
  const auto& cfg = shared_p.client[0].cfg;

  const auto score_c = client_score_shares(batch, shared_p, cfg, s.client_rng);

  // Comparisons first, over every element of every row (all rows parallel).
  SharedVector all_c{Party::client, cfg, std::vector<RingValue>(gamma * vocab)};
  SharedVector all_s{Party::server, cfg, std::vector<RingValue>(gamma * vocab)};
  for (size_t i = 0; i < gamma; ++i) {
    for (size_t j = 0; j < vocab; ++j) {
      all_c.values[i * vocab + j] = score_c[i][j];
      all_s.values[i * vocab + j] = ring_neg(shared_p.server[i].values[j], cfg);
    }
  }
  const BitShares booleans =
      f_less_zero(all_c, all_s, s.backend, s.ot, s.server_rng, s.func_rng, kPhaseCompare);

  // The client then selects the one needed boolean share per row.
  std::vector<uint8_t> rejected(gamma);
  {
    ParallelBatch rows(s.channel);
    std::vector<uint64_t> bits(vocab);
    for (size_t i = 0; i < gamma; ++i) {
      if (i > 0) rows.next_lane();
      for (size_t j = 0; j < vocab; ++j) bits[j] = booleans.server[i * vocab + j];
      const uint64_t server_bit = s.ot.choose_u64(
          bits, 1, static_cast<size_t>(batch.tokens[i]), Party::server, kPhaseSelectBool);
      rejected[i] = booleans.client[i * vocab + batch.tokens[i]] ^
                    static_cast<uint8_t>(server_bit);
    }
  }

  return open_selected_distribution(rejected, shared_p, s);
}

int finalize_token(size_t k, size_t gamma, const ProbVector& p_k, const ProbVector* q_k,
                   Prng& rng) {
  if (k > gamma) throw std::invalid_argument("finalize_token: k must be in [0, gamma]");
  if (k < gamma) {
    if (!q_k) throw std::invalid_argument("finalize_token: rejection at k < gamma needs q_k");
    if (auto res = residual_distribution(p_k, *q_k)) return sample_from(*res, rng);
  }
  return sample_from(p_k, rng);
}

static void write_trace(ProtocolSession& s, const VerifyOutcome& outcome) {
  if (!s.trace) return;
  const CostLedger& ledger = s.channel.ledger();
  for (const auto& phase : ledger.phases()) {
    nlohmann::json rec{{"step", s.step_index},
                       {"phase", phase.phase},
                       {"rounds", phase.rounds},
                       {"bits_c2s", phase.bits_c2s},
                       {"bits_s2c", phase.bits_s2c},
                       {"ot_calls", phase.ot_calls},
                       {"k", outcome.k},
                       {"tokens", outcome.emitted()}};
    *s.trace << rec.dump() << '\n';
  }
}

VerifyOutcome decode_step(const LanguageModel& public_model, const LanguageModel& private_model,
                          std::vector<int>& prefix, int gamma, ProtocolSession& s) {
  if (gamma < 1) throw std::invalid_argument("decode_step: gamma must be >= 1");
  const DraftBatch batch = draft_tokens(public_model, prefix, gamma, s.client_rng);
  const SharedDistributions shared = secure_forward_stub(private_model, prefix, batch.tokens, s);
  VerifyResult vr = secure_verify(batch, shared, s);

  VerifyOutcome outcome;
  outcome.k = vr.k;
  outcome.p_k = std::move(vr.p_k);
  outcome.accepted.assign(batch.tokens.begin(), batch.tokens.begin() + vr.k);
  const ProbVector* q_k = vr.k < batch.gamma() ? &batch.q_dists[vr.k] : nullptr;
  outcome.final_token = finalize_token(vr.k, batch.gamma(), outcome.p_k, q_k, s.client_rng);

  prefix.insert(prefix.end(), outcome.accepted.begin(), outcome.accepted.end());
  prefix.push_back(outcome.final_token);

  write_trace(s, outcome);
  s.step_index++;
  return outcome;
}

std::pair<VerifyResult, DraftBatch> replay_verify(const DistributionTrace& trace, size_t offset,
                                                  int gamma, ProtocolSession& s) {
  if (gamma < 1) throw std::invalid_argument("replay_verify: gamma must be >= 1");
  if (offset + gamma >= trace.records.size())
    throw std::out_of_range("replay_verify: trace too short for gamma+1 records");

  DraftBatch batch;
  SharedDistributions shared;
  for (size_t i = 0; i <= static_cast<size_t>(gamma); ++i) {
    const TraceRecord& rec = trace.records[offset + i];
    if (i < static_cast<size_t>(gamma)) {
      batch.tokens.push_back(rec.drafted_token);
      batch.q_dists.push_back(rec.q);
    }
    auto [c, sv] = share_vector(rec.p, s.cfg, s.share_rng);
    shared.client.push_back(std::move(c));
    shared.server.push_back(std::move(sv));
  }
  VerifyResult vr = secure_verify(batch, shared, s);
  return {std::move(vr), std::move(batch)};
}

}  // namespace specdec
