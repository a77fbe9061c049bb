"""Domain types shared by every stage of the pipeline.

All types are immutable after construction and safe to share across
threads. Validation is data, not control flow: ``validate_record``
returns a list of violations instead of raising, so callers can choose
strict or lenient handling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

DEFAULT_SIGMA_FLOOR = 1e-6

# Tolerances used when cross-checking a stored log-prob vector against the
# stored scalar statistics.
VECTOR_NORMALIZATION_TOL = 1e-6
VECTOR_MOMENT_TOL = 1e-6


class Label(str, enum.Enum):
    MEMBER = "member"
    NONMEMBER = "nonmember"
    UNKNOWN = "unknown"


class Method(str, enum.Enum):
    LOSS = "loss"
    ZLIB = "zlib"
    REF = "ref"
    LOWERCASE = "lowercase"
    NEIGHBOR = "neighbor"
    MINK = "mink"
    MINKPP = "minkpp"


class Variant(str, enum.Enum):
    """Calibration ablation for the z-scored token score.

    ``full`` subtracts the distribution mean and divides by its standard
    deviation; the other variants drop one or both calibration factors.
    """

    RAW = "raw"
    SUB_MU = "sub_mu"
    DIV_SIGMA = "div_sigma"
    FULL = "full"


@dataclass(frozen=True)
class PositionStats:
    """Next-token statistics at one scored position.

    ``logp_target`` is log p(x_t | x_<t) of the observed token; ``mu`` and
    ``sigma`` are the mean and standard deviation of log p(z | x_<t) with z
    drawn from the model's own next-token distribution. All values in nats.
    ``logp_vector`` optionally carries the full log-prob vector over the
    vocabulary; the stored scalars stay authoritative and the vector is
    cross-check data only.
    """

    logp_target: float
    mu: float
    sigma: float
    logp_vector: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class ReferenceStats:
    """One auxiliary likelihood pass over the same text.

    ``mean_nll`` is the mean negative log-likelihood (nats/token) under the
    reference pass. For the neighbor baseline, ``neighbor_nlls`` holds the
    per-neighbor mean NLLs and ``mean_nll`` is their average.
    """

    mean_nll: float
    neighbor_nlls: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class SequenceRecord:
    """One text instance: per-position stats plus optional extras.

    A T-token input yields P = T-1 scored positions (the first token has no
    prefix under the model). ``text_bytes`` is required only by the zlib
    detector; ``references`` holds named auxiliary passes for the
    reference-calibrated detectors.
    """

    id: str
    label: Label
    positions: tuple[PositionStats, ...]
    text_bytes: Optional[bytes] = None
    references: dict[str, ReferenceStats] = field(default_factory=dict)

    @property
    def num_positions(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class DetectorConfig:
    """Which detector to run and with what parameters.

    ``k_percent`` and ``variant`` only apply to the min-k detectors;
    ``reference_name`` selects the auxiliary pass for ref/lowercase/neighbor.
    """

    method: Method
    k_percent: float = 20.0
    variant: Variant = Variant.FULL
    sigma_floor: float = DEFAULT_SIGMA_FLOOR
    reference_name: Optional[str] = None

    def __post_init__(self) -> None:
        if not (0.0 < self.k_percent <= 100.0):
            raise ValueError(f"k_percent must be in (0, 100], got {self.k_percent}")
        if self.sigma_floor <= 0.0:
            raise ValueError(f"sigma_floor must be > 0, got {self.sigma_floor}")

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "k_percent": self.k_percent,
            "variant": self.variant.value,
            "sigma_floor": self.sigma_floor,
            "reference_name": self.reference_name,
        }


@dataclass(frozen=True)
class ScoredExample:
    """A record reduced to one oriented score: higher means more member-like."""

    id: str
    label: Label
    score: float


@dataclass(frozen=True)
class DecisionRule:
    """Threshold for the binary member/nonmember decision (score >= threshold)."""

    threshold: float


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_record."""

    field: str
    message: str
    position: Optional[int] = None

    def __str__(self) -> str:
        where = f" at position {self.position}" if self.position is not None else ""
        return f"{self.field}{where}: {self.message}"


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_record(record: SequenceRecord) -> list[Violation]:
    """Check every invariant of a SequenceRecord; empty list means valid.

    Pure and idempotent. When a position carries a full log-prob vector, the
    vector is cross-checked: probabilities must sum to 1 within 1e-6 and the
    moments recomputed from it must match the stored mu/sigma within 1e-6.
    """
    violations: list[Violation] = []

    if not record.id:
        violations.append(Violation("id", "must be non-empty"))
    if not isinstance(record.label, Label):
        violations.append(Violation("label", f"not a valid label: {record.label!r}"))
    if len(record.positions) < 1:
        violations.append(Violation("positions", "must contain at least one position"))

    for i, ps in enumerate(record.positions):
        for name, value in (("logp_target", ps.logp_target), ("mu", ps.mu), ("sigma", ps.sigma)):
            if not _finite(value):
                violations.append(Violation(name, f"not finite: {value!r}", position=i))
        if _finite(ps.logp_target) and ps.logp_target > 0.0:
            violations.append(Violation("logp_target", f"must be <= 0, got {ps.logp_target}", position=i))
        if _finite(ps.mu) and ps.mu > 0.0:
            violations.append(Violation("mu", f"must be <= 0, got {ps.mu}", position=i))
        if _finite(ps.sigma) and ps.sigma < 0.0:
            violations.append(Violation("sigma", f"must be >= 0, got {ps.sigma}", position=i))
        if ps.logp_vector is not None:
            violations.extend(_check_vector(ps, i))

    for name, ref in record.references.items():
        if not _finite(ref.mean_nll):
            violations.append(Violation(f"references[{name}].mean_nll", f"not finite: {ref.mean_nll!r}"))
        if ref.neighbor_nlls is not None:
            if len(ref.neighbor_nlls) == 0:
                violations.append(Violation(f"references[{name}].neighbor_nlls", "present but empty"))
            elif not all(_finite(v) for v in ref.neighbor_nlls):
                violations.append(Violation(f"references[{name}].neighbor_nlls", "contains non-finite values"))

    return violations


def _check_vector(ps: PositionStats, position: int) -> list[Violation]:
    """Cross-check a stored log-prob vector against the stored scalars."""
    # Imported here to keep types.py importable before moments.py at package
    # initialization time.
    from minkpp import moments

    out: list[Violation] = []
    vec = ps.logp_vector
    assert vec is not None
    if any(math.isnan(v) or v == math.inf for v in vec):
        out.append(Violation("logp_vector", "contains NaN or +inf entries", position=position))
        return out
    total = math.fsum(math.exp(v) for v in vec)
    if abs(total - 1.0) > VECTOR_NORMALIZATION_TOL:
        out.append(Violation(
            "logp_vector",
            f"probabilities sum to {total:.9f}, expected 1 within {VECTOR_NORMALIZATION_TOL}",
            position=position,
        ))
        return out
    mu, sigma = moments.categorical_moments(vec, check_normalization=False)
    if abs(mu - ps.mu) > VECTOR_MOMENT_TOL:
        out.append(Violation("mu", f"stored {ps.mu}, recomputed {mu} from logp_vector", position=position))
    if abs(sigma - ps.sigma) > VECTOR_MOMENT_TOL:
        out.append(Violation("sigma", f"stored {ps.sigma}, recomputed {sigma} from logp_vector", position=position))
    return out
