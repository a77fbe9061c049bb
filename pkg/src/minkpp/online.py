"""Windowed detection over a token stream.

Splits a record's positions into consecutive non-overlapping windows and
scores each window on its own, simulating detect-while-generating: the
per-position statistics stay conditioned on the full preceding context;
only the aggregation is windowed. The synthetic dataset builder splices
a member text onto the end of a nonmember text so window-level ground
truth exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from minkpp.aggregation import min_k_select
from minkpp.detectors import score_record
from minkpp.errors import InsufficientPool, UnsupportedOnlineMethod
from minkpp.evaluation import decide
from minkpp.token_scores import mink_token, minkpp_token
from minkpp.types import (
    DecisionRule,
    DetectorConfig,
    Label,
    Method,
    ScoredExample,
    SequenceRecord,
)

import numpy as np

ONLINE_METHODS = (Method.LOSS, Method.MINK, Method.MINKPP)


@dataclass(frozen=True)
class WindowVerdict:
    """Score and decision for one window of a record."""

    window_index: int
    start: int  # first position index, inclusive
    end: int    # last position index, exclusive
    score: float
    decision: int
    selected_positions: tuple[int, ...]  # global indices of the min-k tokens

    def to_dict(self) -> dict:
        return {
            "window_index": self.window_index,
            "start": self.start,
            "end": self.end,
            "score": self.score,
            "decision": self.decision,
            "selected_positions": list(self.selected_positions),
        }


def _window_token_scores(window: Sequence, config: DetectorConfig) -> tuple[list[float], float]:
    """(per-token scores, k%) used to report selected positions."""
    if config.method is Method.LOSS:
        return [mink_token(ps) for ps in window], 100.0
    if config.method is Method.MINK:
        return [mink_token(ps) for ps in window], config.k_percent
    if config.method is Method.MINKPP:
        return [minkpp_token(ps, config.variant, config.sigma_floor) for ps in window], config.k_percent
    raise UnsupportedOnlineMethod(
        f"method {config.method.value!r} needs per-window text or reference passes, "
        "which the windowed protocol does not carry"
    )


def online_scan(
    record: SequenceRecord,
    config: DetectorConfig,
    rule: DecisionRule,
    window: int = 32,
) -> list[WindowVerdict]:
    """Score each non-overlapping window of the record's positions.

    Windows tile the positions exactly; the last window may be shorter. A
    window covering all positions reproduces the whole-record detector
    score bit for bit.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    verdicts = []
    n = record.num_positions
    for idx, start in enumerate(range(0, n, window)):
        end = min(start + window, n)
        sub = SequenceRecord(
            id=f"{record.id}#w{idx}",
            label=record.label,
            positions=record.positions[start:end],
        )
        token_scores, k = _window_token_scores(sub.positions, config)
        scored = score_record(sub, config)
        selected = tuple(start + i for i in min_k_select(token_scores, k))
        verdicts.append(WindowVerdict(
            window_index=idx,
            start=start,
            end=end,
            score=scored.score,
            decision=decide(scored, rule),
            selected_positions=selected,
        ))
    return verdicts


@dataclass(frozen=True)
class OnlineExample:
    """One spliced record: nonmember prefix followed by member suffix.

    ``splice_position`` is the first position index whose target character
    belongs to the member suffix.
    """

    record: SequenceRecord
    splice_position: int

    def window_labels(self, window: int = 32) -> list[Label]:
        """Ground truth per window: member iff at least half the window's
        positions fall at or after the splice (ties resolve to member)."""
        labels = []
        n = self.record.num_positions
        for start in range(0, n, window):
            end = min(start + window, n)
            member_positions = max(0, end - max(start, self.splice_position))
            labels.append(Label.MEMBER if 2 * member_positions >= end - start else Label.NONMEMBER)
        return labels


def build_online_dataset(
    member_texts: Sequence[str],
    nonmember_texts: Sequence[str],
    stats_fn: Callable[[str], SequenceRecord],
    lengths: Sequence[int] = (32, 64, 128),
    seed: int = 0,
) -> list[OnlineExample]:
    """Concatenate nonmember-prefix + member-suffix pairs, then re-extract stats.

    Prefix and suffix lengths are drawn independently from ``lengths``.
    ``stats_fn`` must produce one position per character after the first
    over the full concatenation, so every position is conditioned on
    everything before it, including across the splice. Deterministic for a
    fixed seed.
    """
    if not member_texts or not nonmember_texts:
        raise InsufficientPool("need non-empty member and nonmember pools")
    rng = np.random.default_rng(seed)
    examples = []
    n_pairs = min(len(member_texts), len(nonmember_texts))
    for i in range(n_pairs):
        prefix_len = int(rng.choice(lengths))
        suffix_len = int(rng.choice(lengths))
        prefix = nonmember_texts[i][:prefix_len]
        suffix = member_texts[i][:suffix_len]
        if len(prefix) < prefix_len or len(suffix) < suffix_len:
            raise InsufficientPool(
                f"pool texts shorter than requested splice lengths at pair {i}"
            )
        record = stats_fn(prefix + suffix)
        record = SequenceRecord(
            id=f"online-{i:04d}",
            label=Label.UNKNOWN,
            positions=record.positions,
            text_bytes=record.text_bytes,
            references=record.references,
        )
        examples.append(OnlineExample(record=record, splice_position=prefix_len - 1))
    return examples


def windowed_examples(
    examples: Sequence[OnlineExample],
    config: DetectorConfig,
    rule: DecisionRule,
    window: int = 32,
) -> list[ScoredExample]:
    """Flatten spliced records into window-level scored examples.

    The output feeds the standard evaluation path unchanged: each window
    contributes one ScoredExample with its ground-truth label.
    """
    out = []
    for example in examples:
        labels = example.window_labels(window)
        verdicts = online_scan(example.record, config, rule, window)
        for verdict, label in zip(verdicts, labels):
            out.append(ScoredExample(
                id=f"{example.record.id}#w{verdict.window_index}",
                label=label,
                score=verdict.score,
            ))
    return out
