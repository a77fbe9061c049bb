"""Per-token statistics from a causal LM checkpoint.

One forward pass per input gives everything the downstream detectors
need: the target token log-probs plus the mean and standard deviation of
the model's next-token log-prob distribution at every position. Logits
are upcast to float64 before the log-softmax so the emitted statistics
are good to full double precision regardless of inference dtype; the
z-score denominator downstream can be small, and precision lost here is
unrecoverable later.

Output is the mia-stats/v1 JSON Lines format consumed by the `minkpp`
tooling; records are emitted in input order.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer

logger = logging.getLogger(__name__)

SCHEMA = "mia-stats/v1"
LABELS = ("member", "nonmember", "unknown")


@dataclass
class ExtractOptions:
    max_len: int = 128
    device: str = "cpu"
    batch: int = 1
    emit_vectors: bool = False
    lowercase_pass: bool = False
    ref_model_id: Optional[str] = None
    label: str = "unknown"
    id_prefix: str = "line-"

    def __post_init__(self) -> None:
        if self.max_len < 2:
            raise ValueError(f"max_len must be >= 2, got {self.max_len}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")


@dataclass
class SequenceStats:
    """float64 per-position statistics for one tokenized input."""

    token_log_probs: torch.Tensor  # [P]
    mu: torch.Tensor               # [P]
    sigma: torch.Tensor            # [P]
    log_probs: Optional[torch.Tensor] = None  # [P, V] when vectors requested

    @property
    def mean_nll(self) -> float:
        return float(-self.token_log_probs.mean())


@dataclass
class ExtractReport:
    records: int = 0
    skipped: list[str] = field(default_factory=list)


class CausalLMScorer:
    """Wraps a checkpoint and computes SequenceStats for batches of texts."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = torch.device(device)
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.to(self.device)
        self.model.eval()

    def encode(self, text: str, max_len: int) -> list[int]:
        ids = self.tokenizer.encode(text, add_special_tokens=False)
        return ids[:max_len]

    @torch.no_grad()
    def stats_for_ids(
        self,
        batch_ids: list[list[int]],
        emit_vectors: bool = False,
    ) -> list[SequenceStats]:
        """Forward one right-padded batch; per-sequence stats in input order.

        Scored positions are 1..T-1 of each sequence: logits[:-1] predict the
        shifted targets, so a T-token input yields P = T-1 positions. Batch
        padding sits to the right behind the attention mask and never
        influences the valid prefix.
        """
        lengths = [len(ids) for ids in batch_ids]
        max_t = max(lengths)
        pad_id = self.tokenizer.pad_token_id or 0
        input_ids = torch.full((len(batch_ids), max_t), pad_id, dtype=torch.long)
        attention_mask = torch.zeros((len(batch_ids), max_t), dtype=torch.long)
        for row, ids in enumerate(batch_ids):
            input_ids[row, :len(ids)] = torch.tensor(ids, dtype=torch.long)
            attention_mask[row, :len(ids)] = 1
        logits = self.model(
            input_ids=input_ids.to(self.device),
            attention_mask=attention_mask.to(self.device),
        ).logits.to(torch.float64).cpu()

        out = []
        for row, ids in enumerate(batch_ids):
            t = lengths[row]
            row_logits = logits[row, :t - 1]                      # [P, V]
            log_probs = torch.log_softmax(row_logits, dim=-1)
            targets = input_ids[row, 1:t].unsqueeze(-1)
            token_log_probs = log_probs.gather(-1, targets).squeeze(-1)
            probs = log_probs.exp()
            mu = (probs * log_probs).sum(-1)
            sigma = ((probs * log_probs.square()).sum(-1) - mu.square()).clamp_min(0.0).sqrt()
            out.append(SequenceStats(
                token_log_probs=token_log_probs,
                mu=mu,
                sigma=sigma,
                log_probs=log_probs if emit_vectors else None,
            ))
        return out

    def mean_nll(self, text: str, max_len: int) -> Optional[float]:
        """Mean NLL of one text; None when it tokenizes below 2 tokens."""
        ids = self.encode(text, max_len)
        if len(ids) < 2:
            return None
        return self.stats_for_ids([ids])[0].mean_nll


def _record_dict(
    record_id: str,
    label: str,
    text: str,
    stats: SequenceStats,
    refs: dict[str, float],
) -> dict:
    doc = {
        "schema": SCHEMA,
        "id": record_id,
        "label": label,
        "logp": [float(x) for x in stats.token_log_probs],
        "mu": [float(x) for x in stats.mu],
        "sigma": [float(x) for x in stats.sigma],
        "text": text,
    }
    if stats.log_probs is not None:
        doc["logp_vectors"] = [[float(x) for x in row] for row in stats.log_probs]
    if refs:
        doc["refs"] = {name: {"mean_nll": value} for name, value in sorted(refs.items())}
    return doc


def _batched(items: list, size: int) -> Iterable[list]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def extract(
    model_id: str,
    texts: Iterable[str],
    sink: TextIO,
    options: Optional[ExtractOptions] = None,
) -> ExtractReport:
    """Score texts under a checkpoint and write mia-stats/v1 lines to sink.

    Inputs that tokenize to fewer than 2 tokens are skipped and reported in
    the returned ExtractReport. Reference passes (a second checkpoint, a
    lowercased-input pass) add one mean-NLL entry per record under
    refs.ref / refs.lowercase.
    """
    options = options or ExtractOptions()
    scorer = CausalLMScorer(model_id, device=options.device)
    ref_scorer = None
    if options.ref_model_id:
        ref_scorer = CausalLMScorer(options.ref_model_id, device=options.device)

    report = ExtractReport()
    indexed = []
    for lineno, text in enumerate(texts, start=1):
        ids = scorer.encode(text, options.max_len)
        if len(ids) < 2:
            note = f"line {lineno}: skipped (tokenizes to {len(ids)} tokens, need >= 2)"
            logger.warning(note)
            report.skipped.append(note)
            continue
        indexed.append((lineno, text, ids))

    for batch in _batched(indexed, options.batch):
        stats_batch = scorer.stats_for_ids([ids for _, _, ids in batch],
                                           emit_vectors=options.emit_vectors)
        for (lineno, text, _), stats in zip(batch, stats_batch):
            refs: dict[str, float] = {}
            if ref_scorer is not None:
                nll = ref_scorer.mean_nll(text, options.max_len)
                if nll is not None and math.isfinite(nll):
                    refs["ref"] = nll
            if options.lowercase_pass:
                nll = scorer.mean_nll(text.lower(), options.max_len)
                if nll is not None and math.isfinite(nll):
                    refs["lowercase"] = nll
            doc = _record_dict(f"{options.id_prefix}{lineno:04d}", options.label,
                               text, stats, refs)
            sink.write(json.dumps(doc, ensure_ascii=False, allow_nan=False,
                                  separators=(",", ":")) + "\n")
            report.records += 1
    return report
