"""Secure speculative decoding simulator."""

try:
    # Wheel layout: the extension module lives inside the package.
    from ._specdec import *  # noqa: F401,F403
    from ._specdec import __doc__  # noqa: F401
except ImportError:
    # Development layout: the extension module sits on PYTHONPATH.
    from _specdec import *  # noqa: F401,F403
    from _specdec import __doc__  # noqa: F401

__all__ = [
    "FixedPointConfig",
    "NgramModel",
    "chunked_compare_bits_per_element",
    "comm_cost",
    "decode",
    "decode_fixed",
    "encode_fixed",
    "estimate_acceptance",
    "expected_tokens_per_step",
    "length_latency_profile",
    "make_shares",
    "ot_cost_bits",
    "plaintext_step",
    "reconstruct",
    "refactored_reject",
    "rejection_prob",
    "residual_distribution",
    "speedup",
    "step_reduction_approx",
]
