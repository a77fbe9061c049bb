"""Sentence-level detectors: one oriented score per record.

Every detector returns a ScoredExample whose score is oriented so that
HIGHER means more likely member. Loss is therefore the negated mean NLL,
and the reference-calibrated detectors are reference-minus-target, so a
single thresholding/evaluation path serves all methods.
"""

from __future__ import annotations

import logging
import math
import zlib
from typing import Sequence

from minkpp.aggregation import min_k_mean
from minkpp.errors import (
    EmptyNeighbors,
    MissingReference,
    MissingText,
    ScoringError,
)
from minkpp.token_scores import mink_token, minkpp_token
from minkpp.types import (
    DEFAULT_SIGMA_FLOOR,
    DetectorConfig,
    Method,
    ScoredExample,
    SequenceRecord,
    Variant,
)

logger = logging.getLogger(__name__)

# Fixed so scores are reproducible bit-for-bit across machines and runs.
ZLIB_LEVEL = 6

REF_NAME_DEFAULT = "ref"
LOWERCASE_NAME_DEFAULT = "lowercase"
NEIGHBORS_NAME_DEFAULT = "neighbors"


def mean_nll(record: SequenceRecord) -> float:
    """Mean negative log-likelihood over scored positions, nats/token."""
    return -math.fsum(ps.logp_target for ps in record.positions) / len(record.positions)


def score_loss(record: SequenceRecord) -> ScoredExample:
    """Negated mean NLL: the model's own loss, sign-flipped."""
    return ScoredExample(record.id, record.label, -mean_nll(record))


def score_zlib(record: SequenceRecord) -> ScoredExample:
    """Mean NLL calibrated by the zlib-compressed byte length of the text."""
    if not record.text_bytes:
        raise MissingText(f"record {record.id!r} has no text_bytes (required by zlib)")
    compressed_len = len(zlib.compress(record.text_bytes, ZLIB_LEVEL))
    return ScoredExample(record.id, record.label, -mean_nll(record) / compressed_len)


def _reference(record: SequenceRecord, name: str):
    ref = record.references.get(name)
    if ref is None:
        raise MissingReference(f"record {record.id!r} has no reference pass {name!r}")
    return ref


def score_ref(record: SequenceRecord, reference_name: str = REF_NAME_DEFAULT) -> ScoredExample:
    """Reference-model NLL minus target NLL; positive means the target fits better."""
    ref = _reference(record, reference_name)
    return ScoredExample(record.id, record.label, ref.mean_nll - mean_nll(record))


def score_lowercase(record: SequenceRecord, reference_name: str = LOWERCASE_NAME_DEFAULT) -> ScoredExample:
    """score_ref with the lowercased-input pass as the reference."""
    return score_ref(record, reference_name)


def score_neighbor(record: SequenceRecord, reference_name: str = NEIGHBORS_NAME_DEFAULT) -> ScoredExample:
    """Mean NLL of perturbed neighbor texts minus the record's own NLL."""
    ref = _reference(record, reference_name)
    if ref.neighbor_nlls is None:
        raise MissingReference(
            f"record {record.id!r}: reference pass {reference_name!r} has no neighbor_nlls"
        )
    if len(ref.neighbor_nlls) == 0:
        raise EmptyNeighbors(f"record {record.id!r}: neighbor_nlls is empty")
    avg = math.fsum(ref.neighbor_nlls) / len(ref.neighbor_nlls)
    return ScoredExample(record.id, record.label, avg - mean_nll(record))


def score_mink(record: SequenceRecord, k_percent: float) -> ScoredExample:
    """Mean of the k% lowest target log-probabilities."""
    scores = [mink_token(ps) for ps in record.positions]
    return ScoredExample(record.id, record.label, min_k_mean(scores, k_percent))


def score_minkpp(
    record: SequenceRecord,
    k_percent: float,
    variant: Variant = Variant.FULL,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> ScoredExample:
    """Mean of the k% lowest calibrated token scores."""
    scores = [minkpp_token(ps, variant, sigma_floor) for ps in record.positions]
    return ScoredExample(record.id, record.label, min_k_mean(scores, k_percent))


def score_record(record: SequenceRecord, config: DetectorConfig) -> ScoredExample:
    """Dispatch one record to the configured detector."""
    method = config.method
    if method is Method.LOSS:
        return score_loss(record)
    if method is Method.ZLIB:
        return score_zlib(record)
    if method is Method.REF:
        return score_ref(record, config.reference_name or REF_NAME_DEFAULT)
    if method is Method.LOWERCASE:
        return score_lowercase(record, config.reference_name or LOWERCASE_NAME_DEFAULT)
    if method is Method.NEIGHBOR:
        return score_neighbor(record, config.reference_name or NEIGHBORS_NAME_DEFAULT)
    if method is Method.MINK:
        return score_mink(record, config.k_percent)
    if method is Method.MINKPP:
        return score_minkpp(record, config.k_percent, config.variant, config.sigma_floor)
    raise ValueError(f"unknown method: {method!r}")


def score_dataset(
    records: Sequence[SequenceRecord],
    config: DetectorConfig,
    strict: bool = True,
) -> list[ScoredExample]:
    """Score every record, preserving input order.

    Strict mode aborts on the first failing record (ScoringError names it);
    lenient mode skips failing records and logs a warning each.
    """
    out: list[ScoredExample] = []
    for record in records:
        try:
            out.append(score_record(record, config))
        except Exception as exc:
            if strict:
                raise ScoringError(record.id, exc) from exc
            logger.warning("skipping record %r: %s", record.id, exc)
    return out
