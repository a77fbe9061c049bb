"""Sentence-level aggregation: mean of the k% lowest token scores."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from minkpp.errors import EmptyScores


def min_k_count(n_scores: int, k_percent: float) -> int:
    """Number of tokens selected: max(1, floor(n * k/100))."""
    return max(1, math.floor(n_scores * k_percent / 100.0))


def min_k_select(token_scores: Sequence[float], k_percent: float) -> list[int]:
    """Indices of the selected minimum scores, ties broken by position.

    The tie rule does not change the mean but pins down which positions get
    reported as "contributing" downstream.
    """
    if len(token_scores) == 0:
        raise EmptyScores("cannot aggregate an empty score list")
    if not (0.0 < k_percent <= 100.0):
        raise ValueError(f"k_percent must be in (0, 100], got {k_percent}")
    m = min_k_count(len(token_scores), k_percent)
    order = sorted(range(len(token_scores)), key=lambda i: (token_scores[i], i))
    return sorted(order[:m])


def min_k_mean(token_scores: Sequence[float], k_percent: float) -> float:
    """Mean of the max(1, floor(k% * P)) smallest token scores."""
    selected = min_k_select(token_scores, k_percent)
    return math.fsum(token_scores[i] for i in selected) / len(selected)


def sweep_k(
    token_scores_per_record: Mapping[str, Sequence[float]],
    k_grid: Sequence[float],
) -> dict[str, dict[float, float]]:
    """min_k_mean for every record at every k in the grid.

    Returns {record_id: {k: score}}, preserving input order. The k=100
    column equals each record's plain mean score.
    """
    for k in k_grid:
        if not (0.0 < k <= 100.0):
            raise ValueError(f"k grid values must be in (0, 100], got {k}")
    return {
        record_id: {k: min_k_mean(scores, k) for k in k_grid}
        for record_id, scores in token_scores_per_record.items()
    }
