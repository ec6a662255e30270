"""Smoke tests for the python module against the C++ core."""

import math
import random

import pytest

import specdec


def test_fixed_point_roundtrip():
    cfg = specdec.FixedPointConfig(32, 12)
    assert specdec.encode_fixed(0.5, cfg) == 2048
    assert abs(specdec.decode_fixed(specdec.encode_fixed(0.7, cfg), cfg) - 0.7) <= 2**-13


def test_shares_reconstruct():
    cfg = specdec.FixedPointConfig(32, 12)
    c, s = specdec.make_shares(0.3, cfg, seed=5)
    assert abs(specdec.reconstruct(c, s, cfg) - 0.3) <= 2**-13


def test_rejection_rules():
    assert specdec.rejection_prob(0.2, 0.5) == pytest.approx(0.6)
    assert specdec.refactored_reject(0.2, 0.5, 0.5)
    assert not specdec.refactored_reject(0.6, 0.5, 0.99)
    res = specdec.residual_distribution([0.5, 0.5], [1.0, 0.0])
    assert res == pytest.approx([0.0, 1.0])
    assert specdec.residual_distribution([0.5, 0.5], [0.5, 0.5]) is None


def test_plaintext_step_accepts_identical_models():
    d = [0.25] * 4
    out = specdec.plaintext_step([d, d, d], [1, 2], [d, d], seed=3)
    assert out["k"] == 2
    assert len(out["emitted"]) == 3


def _models(vocab=8):
    rng = random.Random(17)
    corpus_a = [[rng.randrange(vocab) for _ in range(60)] for _ in range(20)]
    corpus_b = [[rng.randrange(vocab) for _ in range(60)] for _ in range(20)]
    target = specdec.NgramModel.fit(corpus_a, order=1, vocab=vocab, delta=0.05)
    drafter = specdec.NgramModel.fit(corpus_b, order=1, vocab=vocab, delta=0.05)
    return target, drafter


def test_decode_progress_and_determinism():
    target, drafter = _models()
    a = specdec.decode(drafter, target, [0], gamma=3, steps=6, seed=9)
    b = specdec.decode(drafter, target, [0], gamma=3, steps=6, seed=9)
    assert a["tokens"] == b["tokens"]
    assert a["ledger"]["total_bits"] == b["ledger"]["total_bits"]
    # every step emits between 1 and gamma+1 tokens
    assert 6 <= len(a["tokens"]) - 1 <= 6 * 4
    assert a["ledger"]["ot_calls"] > 0


def test_ledger_matches_cost_model():
    target, drafter = _models(vocab=16)
    out = specdec.decode(drafter, target, [0], gamma=4, steps=1, backend="chunked", seed=2)
    assert out["ledger"]["total_bits"] == specdec.comm_cost(
        "optimized_chunked", vocab=16, ell=32, gamma=4, m=4
    )


def test_cost_model_values():
    assert specdec.ot_cost_bits(4, 32) == 130
    assert specdec.chunked_compare_bits_per_element(32, 4) == 323
    # per-token 587 plus the final 1-out-of-2 OT of V*ell = 64-bit strings
    assert specdec.comm_cost("optimized_monolithic", 8, 8, 1, 4) == 587 + (2 * 64 + 1)


def test_expected_tokens_and_speedup():
    assert specdec.expected_tokens_per_step(0.0, 4) == 1.0
    assert specdec.expected_tokens_per_step(0.5, 1) == pytest.approx(1.5)
    assert specdec.step_reduction_approx(0.5) == pytest.approx(2.0)
    s = specdec.speedup(0.8, gamma=8)
    assert 2.0 < s < 6.0


def test_acceptance_estimate_bounds():
    target, drafter = _models()
    est = specdec.estimate_acceptance(target, drafter, [[0], [1]], gamma=3, runs=5, seed=4)
    assert 0.0 <= est["alpha"] <= 1.0
    assert est["samples"] == 2 * 5 * 3


def test_length_profile_ratios():
    prof = specdec.length_latency_profile()
    assert prof[8] / prof[1] == pytest.approx(1.2, abs=0.15)
    assert prof[16] / prof[1] == pytest.approx(1.5, abs=0.15)


def test_model_checkpoint_roundtrip():
    target, _ = _models()
    text = target.dumps()
    back = specdec.NgramModel.loads(text)
    assert back.next_distribution([1, 2]) == target.next_distribution([1, 2])


def test_entropy_of_uniform_matches():
    # decode_fixed of the encoded uniform mass stays close to 1/V
    cfg = specdec.FixedPointConfig(32, 12)
    v = 1.0 / 8.0
    assert abs(specdec.decode_fixed(specdec.encode_fixed(v, cfg), cfg) - v) <= 2**-13
    assert math.isclose(specdec.rejection_prob(v, v), 0.0)
