"""Mean and standard deviation of log-probabilities under a categorical
distribution.

Given a full next-token log-prob vector l with p = exp(l), the two sums

    mu      = sum_z p(z) * l(z)
    sigma^2 = sum_z p(z) * l(z)^2 - mu^2

are the calibration statistics used by the z-scored token score. mu equals
the negative Shannon entropy of p, so mu is in [-ln V, 0].
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from minkpp.errors import EmptyVocabulary, NormalizationError

NORMALIZATION_TOL = 1e-6


def categorical_moments(
    logp_vector: Sequence[float],
    check_normalization: bool = True,
) -> tuple[float, float]:
    """Compute (mu, sigma) from a full log-prob vector, in nats.

    Entries equal to -inf denote probability-zero outcomes and contribute
    nothing to either sum (the 0*log 0 = 0 convention). sigma^2 is clamped
    at 0 before the square root to absorb cancellation noise near uniform
    distributions.

    Raises EmptyVocabulary for vectors shorter than 2 and
    NormalizationError when exp(logp_vector) does not sum to 1 within 1e-6.
    """
    l = np.asarray(logp_vector, dtype=np.float64)
    if l.size < 2:
        raise EmptyVocabulary(f"need at least 2 outcomes, got {l.size}")
    p = np.exp(l)
    if check_normalization:
        total = float(p.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(
                f"probabilities sum to {total:.9f}, expected 1 within {NORMALIZATION_TOL}"
            )
    support = l[l > -np.inf]
    p_support = np.exp(support)
    pl = p_support * support
    mu = float(pl.sum())
    if support.size and support.max() == support.min():
        # Uniform over support: sigma is exactly 0; the two-sum formula
        # would leave cancellation noise of either sign.
        return mu, 0.0
    second = float((pl * support).sum())
    var = max(second - mu * mu, 0.0)
    return mu, float(np.sqrt(var))


def log_softmax(logits: Sequence[float]) -> np.ndarray:
    """Numerically stable log-softmax over a 1-D logit vector."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    return z - np.log(np.exp(z).sum())


def shift_logits_then_moments(logits: Sequence[float], c: float) -> tuple[float, float]:
    """Moments of softmax(logits + c); equal to the unshifted moments for any c.

    Property-test helper: softmax is invariant under a constant shift of its
    input, so this must agree with categorical_moments(log_softmax(logits)).
    """
    shifted = np.asarray(logits, dtype=np.float64) + c
    return categorical_moments(log_softmax(shifted), check_normalization=False)
