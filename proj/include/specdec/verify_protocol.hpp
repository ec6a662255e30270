#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "specdec/ot.hpp"
#include "specdec/ring.hpp"
#include "specdec/rng.hpp"
#include "specdec/secure_compare.hpp"
#include "specdec/spec_sampling.hpp"
#include "specdec/toy_models.hpp"
#include "specdec/transport.hpp"

namespace specdec {

inline constexpr std::string_view kPhaseForward = "forward";
inline constexpr std::string_view kPhaseSelectScore = "select_score";
inline constexpr std::string_view kPhaseCompare = "compare";
inline constexpr std::string_view kPhaseOpen = "open";
inline constexpr std::string_view kPhaseSelectBool = "select_bool";
inline constexpr std::string_view kPhaseFinalOt = "final_ot";

/// Ledger charge of one secure forward pass, as a function of the number of
/// forwarded positions. Stands in for the private model's encrypted
/// evaluation; rounds are length-independent, bits and compute carry the
/// growth.
struct StepCostProfile {
  uint64_t rounds = 0;
  std::function<double(int len)> bits;
  std::function<double(int len)> compute_seconds;

  static StepCostProfile none();
  // Tuned so that at the LAN reference network the estimated step latency
  // scales as {1: 1.0, 4: 1.05, 8: 1.2, 16: 1.5} with the input length.
  static StepCostProfile reference();
};

/// State for one protocol run: channel, OT functionality, per-party seeded
/// generators and the comparison backend. One run owns its channel and
/// ledger; independent runs may execute concurrently with disjoint sessions.
struct ProtocolSession {
  FixedPointConfig cfg;
  CompareBackend backend;
  StepCostProfile forward_cost;
  Channel channel;
  OtFunctionality ot;
  Prng client_rng;
  Prng server_rng;
  Prng func_rng;
  Prng share_rng;
  std::ostream* trace = nullptr;  // JSON-lines protocol trace sink
  size_t step_index = 0;

  ProtocolSession(FixedPointConfig cfg_, CompareBackend backend_, uint64_t seed,
                  StepCostProfile forward = StepCostProfile::none());
};

/// The two parties' halves of the gamma+1 secret-shared target distributions.
struct SharedDistributions {
  std::vector<SharedVector> client;
  std::vector<SharedVector> server;

  size_t count() const { return client.size(); }
  size_t vocab() const { return client.empty() ? 0 : client[0].size(); }
};

struct VerifyResult {
  size_t k = 0;
  ProbVector p_k;  // reconstructed at fixed-point resolution
};

// Autoregressively samples gamma draft tokens from the public model,
// recording each conditioning distribution.
DraftBatch draft_tokens(const LanguageModel& public_model, std::span<const int> prefix,
                        int gamma, Prng& rng);

// Evaluates the private model in plaintext on the gamma+1 growing contexts,
// fixed-point encodes and secret-shares every distribution, and charges the
// ledger from the session's forward cost profile (len = gamma+1 positions).
SharedDistributions secure_forward_stub(const LanguageModel& private_model,
                                        std::span<const int> prefix, std::span<const int> drafts,
                                        ProtocolSession& s);

// The draft-verification protocol. Per row the server masks its score share
// with one fresh random ring value and the client retrieves the drafted
// column via 1-out-of-V OT; a single comparison per row yields the rejection
// booleans, which are opened to the client; the k-th target distribution is
// then retrieved via one 1-out-of-(gamma+1) OT of V*ell-bit strings.
//
// Consumes exactly gamma*V uniform draws from the client generator (the
// score mask matrix, row-major) and nothing else from it.
VerifyResult secure_verify(const DraftBatch& batch, const SharedDistributions& shared_p,
                           ProtocolSession& s);

// Baseline ordering: comparisons over all V elements of every score row
// first, then the needed boolean share is selected via 1-out-of-V OT of
// 1-bit strings. Functionally identical to secure_verify; exists so ledgers
// realize the naive communication complexity.
VerifyResult naive_verify(const DraftBatch& batch, const SharedDistributions& shared_p,
                          ProtocolSession& s);

// k < gamma: sample from the residual of (p_k, q_k), falling back to p_k
// when the residual is degenerate; k == gamma: sample the bonus token
// directly from p_k.
int finalize_token(size_t k, size_t gamma, const ProbVector& p_k, const ProbVector* q_k,
                   Prng& rng);

// One full decoding step: draft -> secure forward -> secure verify ->
// finalize. Extends `prefix` with the k+1 new tokens and returns the
// outcome. Every step emits at least one token.
VerifyOutcome decode_step(const LanguageModel& public_model, const LanguageModel& private_model,
                          std::vector<int>& prefix, int gamma, ProtocolSession& s);

// Replays gamma+1 consecutive trace records through secure_verify, bypassing
// the drafting rng. Returns the verify result plus the replayed batch.
std::pair<VerifyResult, DraftBatch> replay_verify(const DistributionTrace& trace, size_t offset,
                                                  int gamma, ProtocolSession& s);

}  // namespace specdec
