"""Per-position token scores.

The plain score is the target token's log-probability. The calibrated
score z-normalizes it against the model's own next-token distribution:

    (logp_target - mu) / max(sigma, sigma_floor)

so a token that is the mode of its conditional distribution scores
positive regardless of the absolute probability mass it received, and a
token dominated by some other candidate scores negative.

>>> import math
>>> from minkpp.moments import categorical_moments
>>> from minkpp.types import PositionStats, Variant
>>> peaked = [math.log(0.2), math.log(0.1)] + [math.log(0.7 / 8)] * 8
>>> mu, sigma = categorical_moments(peaked)
>>> at_mode = PositionStats(logp_target=math.log(0.2), mu=mu, sigma=sigma)
>>> minkpp_token(at_mode, Variant.FULL) > 0
True
>>> elsewhere = [math.log(0.2), math.log(0.7)] + [math.log(0.1 / 8)] * 8
>>> mu, sigma = categorical_moments(elsewhere)
>>> off_mode = PositionStats(logp_target=math.log(0.2), mu=mu, sigma=sigma)
>>> minkpp_token(off_mode, Variant.FULL) < 0
True
"""

from __future__ import annotations

from minkpp.types import DEFAULT_SIGMA_FLOOR, PositionStats, Variant


def mink_token(ps: PositionStats) -> float:
    """Uncalibrated token score: the target log-probability itself."""
    return ps.logp_target


def minkpp_token(
    ps: PositionStats,
    variant: Variant = Variant.FULL,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> float:
    """Calibrated token score under the requested ablation variant.

    The floor on sigma only engages for degenerate (near-uniform)
    distributions, where the numerator is itself ~0; a non-degenerate
    sigma passes through untouched.
    """
    if variant is Variant.RAW:
        return ps.logp_target
    if variant is Variant.SUB_MU:
        return ps.logp_target - ps.mu
    denom = max(ps.sigma, sigma_floor)
    if variant is Variant.DIV_SIGMA:
        return ps.logp_target / denom
    if variant is Variant.FULL:
        return (ps.logp_target - ps.mu) / denom
    raise ValueError(f"unknown variant: {variant!r}")
