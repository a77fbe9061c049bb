"""Threshold decisions and threshold-free metrics over scored examples.

AUROC uses the Mann-Whitney formulation (ties count half) computed by a
single sort; it agrees exactly with the O(n^2) pairwise definition
because every pair contributes a multiple of 1/2 and the tally is kept
in integer arithmetic. TPR@FPR uses the conservative convention: only
thresholds actually achievable from the score set, no interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from minkpp.errors import DegenerateLabels
from minkpp.types import DecisionRule, DetectorConfig, Label, ScoredExample


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    threshold: float  # +inf for the (0, 0) endpoint


@dataclass(frozen=True)
class EvalReport:
    auroc: float
    tpr_at_fpr: dict[float, float]
    roc_points: list[RocPoint]
    n_pos: int
    n_neg: int
    config_echo: Optional[DetectorConfig] = None
    notes: dict = field(default_factory=dict)


def decide(example: ScoredExample, rule: DecisionRule) -> int:
    """1 (member) iff score >= threshold, else 0."""
    return 1 if example.score >= rule.threshold else 0


def _split_scores(scored: Sequence[ScoredExample]) -> tuple[list[float], list[float]]:
    pos = [s.score for s in scored if s.label is Label.MEMBER]
    neg = [s.score for s in scored if s.label is Label.NONMEMBER]
    if not pos or not neg:
        raise DegenerateLabels(
            f"need at least one member and one nonmember, got {len(pos)} / {len(neg)}"
        )
    return pos, neg


def auroc(scored: Sequence[ScoredExample]) -> float:
    """Probability a random member outscores a random nonmember (ties 1/2).

    Sort-based sweep over distinct score values; the doubled win count is
    integer so the result matches the pairwise definition exactly.
    """
    pos, neg = _split_scores(scored)
    events = sorted([(s, 1) for s in pos] + [(s, 0) for s in neg])
    wins_doubled = 0  # 2 per strictly-won pair, 1 per tied pair
    neg_below = 0
    i = 0
    while i < len(events):
        j = i
        pos_here = neg_here = 0
        while j < len(events) and events[j][0] == events[i][0]:
            pos_here += events[j][1]
            neg_here += 1 - events[j][1]
            j += 1
        wins_doubled += pos_here * (2 * neg_below + neg_here)
        neg_below += neg_here
        i = j
    return (wins_doubled / 2) / (len(pos) * len(neg))


def roc_curve(scored: Sequence[ScoredExample]) -> list[RocPoint]:
    """One point per distinct score plus the (0, 0) endpoint.

    Thresholds descend; a point's (fpr, tpr) counts examples with
    score >= threshold. The final point (threshold = min score) is (1, 1).
    """
    pos, neg = _split_scores(scored)
    n_pos, n_neg = len(pos), len(neg)
    thresholds = sorted(set(pos) | set(neg), reverse=True)
    points = [RocPoint(0.0, 0.0, math.inf)]
    pos_ge = neg_ge = 0
    pos_sorted = sorted(pos, reverse=True)
    neg_sorted = sorted(neg, reverse=True)
    for t in thresholds:
        while pos_ge < n_pos and pos_sorted[pos_ge] >= t:
            pos_ge += 1
        while neg_ge < n_neg and neg_sorted[neg_ge] >= t:
            neg_ge += 1
        points.append(RocPoint(neg_ge / n_neg, pos_ge / n_pos, t))
    return points


def trapezoid_area(points: Sequence[RocPoint]) -> float:
    """Trapezoidal area under the ROC points; cross-check for auroc."""
    area = 0.0
    for a, b in zip(points, points[1:]):
        area += (b.fpr - a.fpr) * (b.tpr + a.tpr) / 2.0
    return area


def tpr_at_fpr(scored: Sequence[ScoredExample], fpr_target: float) -> float:
    """Best achievable TPR subject to FPR <= fpr_target.

    Only thresholds realizable from the score set count; when even the
    strictest score-admitting threshold exceeds the budget, the answer is
    the reject-everything operating point, TPR = 0.
    """
    if not (0.0 <= fpr_target <= 1.0):
        raise ValueError(f"fpr_target must be in [0, 1], got {fpr_target}")
    best = 0.0
    for point in roc_curve(scored):
        if point.fpr <= fpr_target and point.tpr > best:
            best = point.tpr
    return best


def evaluate(
    scored: Sequence[ScoredExample],
    fpr_targets: Sequence[float] = (0.05,),
    config: Optional[DetectorConfig] = None,
) -> EvalReport:
    """Full report: AUROC, TPR at each FPR budget, ROC points, counts."""
    pos, neg = _split_scores(scored)
    points = roc_curve(scored)
    return EvalReport(
        auroc=auroc(scored),
        tpr_at_fpr={t: tpr_at_fpr(scored, t) for t in fpr_targets},
        roc_points=points,
        n_pos=len(pos),
        n_neg=len(neg),
        config_echo=config,
    )
