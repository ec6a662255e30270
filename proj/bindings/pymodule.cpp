// Python bindings for the main operations: fixed-point sharing, plaintext
// speculative sampling, protocol decode runs, and the analytic cost model.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "specdec/alignment.hpp"
#include "specdec/perf_model.hpp"
#include "specdec/verify_protocol.hpp"

namespace py = pybind11;
using namespace specdec;

namespace {

CompareBackend backend_from(const std::string& name, int chunk_bits) {
  if (name == "ideal") return CompareBackend::ideal();
  if (name == "chunked") return CompareBackend::chunked(chunk_bits);
  throw std::invalid_argument("backend must be 'ideal' or 'chunked'");
}

CommVariant variant_from(const std::string& name) {
  if (name == "naive_monolithic") return CommVariant::naive_monolithic;
  if (name == "optimized_monolithic") return CommVariant::optimized_monolithic;
  if (name == "naive_chunked") return CommVariant::naive_chunked;
  if (name == "optimized_chunked") return CommVariant::optimized_chunked;
  throw std::invalid_argument("unknown communication variant: " + name);
}

py::dict ledger_dict(const CostLedger& ledger) {
  py::dict d;
  d["rounds"] = ledger.rounds();
  d["bits_c2s"] = ledger.bits_c2s();
  d["bits_s2c"] = ledger.bits_s2c();
  d["total_bits"] = ledger.total_bits();
  d["ot_calls"] = ledger.ot_invocations();
  d["compute_seconds"] = ledger.compute_seconds();
  py::dict phases;
  for (const auto& p : ledger.phases()) {
    py::dict row;
    row["rounds"] = p.rounds;
    row["bits_c2s"] = p.bits_c2s;
    row["bits_s2c"] = p.bits_s2c;
    row["ot_calls"] = p.ot_calls;
    phases[py::str(p.phase)] = row;
  }
  d["phases"] = phases;
  return d;
}

}  // namespace

PYBIND11_MODULE(_specdec, m) {
  m.doc() = "Secure speculative decoding simulator";

  py::class_<FixedPointConfig>(m, "FixedPointConfig")
      .def(py::init([](int ell, int frac) {
             FixedPointConfig cfg{ell, frac};
             cfg.validate();
             return cfg;
           }),
           py::arg("ell") = 32, py::arg("frac") = 12)
      .def_readonly("ell", &FixedPointConfig::ell)
      .def_readonly("frac", &FixedPointConfig::frac);

  m.def(
      "encode_fixed",
      [](double x, const FixedPointConfig& cfg) { return encode_fixed(x, cfg).raw; },
      py::arg("x"), py::arg("cfg") = FixedPointConfig{});
  m.def(
      "decode_fixed",
      [](uint64_t raw, const FixedPointConfig& cfg) { return decode_fixed({raw}, cfg); },
      py::arg("raw"), py::arg("cfg") = FixedPointConfig{});
  m.def(
      "make_shares",
      [](double x, const FixedPointConfig& cfg, uint64_t seed) {
        Prng rng(seed);
        auto [c, s] = make_shares(encode_fixed(x, cfg), cfg, rng);
        return py::make_tuple(c.raw, s.raw);
      },
      py::arg("x"), py::arg("cfg") = FixedPointConfig{}, py::arg("seed") = 1);
  m.def(
      "reconstruct",
      [](uint64_t a, uint64_t b, const FixedPointConfig& cfg) {
        return decode_fixed(reconstruct({a}, {b}, cfg), cfg);
      },
      py::arg("client"), py::arg("server"), py::arg("cfg") = FixedPointConfig{});

  m.def("rejection_prob", &rejection_prob, py::arg("p"), py::arg("q"));
  m.def("refactored_reject", &refactored_reject, py::arg("p"), py::arg("q"), py::arg("r"));
  m.def(
      "residual_distribution",
      [](const ProbVector& p, const ProbVector& q) -> std::optional<ProbVector> {
        return residual_distribution(p, q);
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "plaintext_step",
      [](const std::vector<ProbVector>& p_dists, const std::vector<int>& tokens,
         const std::vector<ProbVector>& q_dists, uint64_t seed) {
        DraftBatch batch{tokens, q_dists};
        Prng rng(seed);
        const VerifyOutcome out = speculative_step_plaintext(p_dists, batch, rng);
        py::dict d;
        d["k"] = out.k;
        d["accepted"] = out.accepted;
        d["final_token"] = out.final_token;
        d["emitted"] = out.emitted();
        return d;
      },
      py::arg("p_dists"), py::arg("tokens"), py::arg("q_dists"), py::arg("seed") = 1);

  py::class_<NgramModel>(m, "NgramModel")
      .def_static(
          "fit",
          [](const std::vector<std::vector<int>>& corpus, int order, int vocab, double delta) {
            return NgramModel::fit(corpus, order, vocab, delta);
          },
          py::arg("corpus"), py::arg("order"), py::arg("vocab"), py::arg("delta") = 0.01)
      .def("next_distribution",
           [](const NgramModel& m2, const std::vector<int>& prefix) {
             return m2.next_distribution(prefix);
           })
      .def_property_readonly("vocab_size", &NgramModel::vocab_size)
      .def("dumps",
           [](const NgramModel& m2) {
             std::ostringstream os;
             m2.save(os);
             return os.str();
           })
      .def_static("loads", [](const std::string& text) {
        std::istringstream is(text);
        return NgramModel::load(is);
      });

  m.def(
      "decode",
      [](const NgramModel& public_model, const NgramModel& private_model,
         std::vector<int> prefix, int gamma, int steps, const std::string& backend,
         int chunk_bits, int ell, int frac, uint64_t seed) {
        FixedPointConfig cfg{ell, frac};
        ProtocolSession session(cfg, backend_from(backend, chunk_bits), seed);
        std::vector<size_t> ks;
        for (int s = 0; s < steps; ++s)
          ks.push_back(decode_step(public_model, private_model, prefix, gamma, session).k);
        py::dict d;
        d["tokens"] = prefix;
        d["ks"] = ks;
        d["ledger"] = ledger_dict(session.channel.ledger());
        return d;
      },
      py::arg("public_model"), py::arg("private_model"), py::arg("prefix"),
      py::arg("gamma") = 4, py::arg("steps") = 8, py::arg("backend") = "chunked",
      py::arg("chunk_bits") = 4, py::arg("ell") = 32, py::arg("frac") = 12,
      py::arg("seed") = 1);

  m.def(
      "estimate_acceptance",
      [](const NgramModel& target, const NgramModel& drafter,
         const std::vector<std::vector<int>>& prompts, int gamma, int runs, uint64_t seed) {
        Prng rng(seed);
        const AcceptanceEstimate est =
            estimate_acceptance(target, drafter, prompts, gamma, runs, rng);
        py::dict d;
        d["alpha"] = est.alpha;
        d["samples"] = est.samples;
        d["stderr"] = est.stderr_;
        return d;
      },
      py::arg("target"), py::arg("drafter"), py::arg("prompts"), py::arg("gamma") = 4,
      py::arg("runs") = 8, py::arg("seed") = 1);

  m.def("expected_tokens_per_step", &expected_tokens_per_step, py::arg("alpha"),
        py::arg("gamma"));
  m.def("step_reduction_approx", &step_reduction_approx, py::arg("alpha"));
  m.def(
      "comm_cost",
      [](const std::string& variant, int vocab, int ell, int gamma, int m2) {
        return comm_cost(variant_from(variant), vocab, ell, gamma, m2);
      },
      py::arg("variant"), py::arg("vocab"), py::arg("ell"), py::arg("gamma"), py::arg("m") = 4);
  m.def("ot_cost_bits",
        [](size_t k, size_t bitlen) { return OtFunctionality::cost_bits(k, bitlen); });
  m.def("chunked_compare_bits_per_element", &chunked_compare_bits_per_element, py::arg("ell"),
        py::arg("m"));
  m.def(
      "speedup",
      [](double alpha, int gamma, double bandwidth_mbps, double delay_ms) {
        const NetworkModel net{bandwidth_mbps * 1e6, delay_ms * 1e-3};
        return speedup(alpha, gamma, DecoderCostProfile::reference(), net).speedup;
      },
      py::arg("alpha"), py::arg("gamma") = 8, py::arg("bandwidth_mbps") = 1000.0,
      py::arg("delay_ms") = 10.0);
  m.def(
      "length_latency_profile",
      [](double bandwidth_mbps, double delay_ms) {
        const NetworkModel net{bandwidth_mbps * 1e6, delay_ms * 1e-3};
        const auto layers = default_layer_profile();
        py::dict d;
        for (int len : {1, 2, 4, 8, 16})
          d[py::int_(len)] = length_latency(net, layers, len);
        return d;
      },
      py::arg("bandwidth_mbps") = 1000.0, py::arg("delay_ms") = 10.0);
}
