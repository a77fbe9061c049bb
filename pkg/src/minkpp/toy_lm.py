"""Self-contained character-level n-gram language model.

Interpolated additive-smoothed counts give exact, strictly positive
conditional distributions over a small vocabulary, so every per-position
statistic the detectors consume (target log-prob, mu, sigma, full
log-prob vector) is available in closed form. Trained by plain counting,
which is the maximum-likelihood fit for this model family; members of
the training corpus leave verbatim count trails that the detectors are
supposed to find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from minkpp import moments
from minkpp.errors import CorpusTooShort, InsufficientCorpus, MissingText, TextTooShort
from minkpp.types import Label, PositionStats, ReferenceStats, SequenceRecord

MODEL_SCHEMA = "toy-lm/v1"

# Reserved out-of-vocabulary symbol; never appears in training text.
UNK = "\x00"


@dataclass
class NGramModel:
    """Interpolated n-gram model over a character vocabulary.

    ``tables[j-1]`` maps an order-j context (string of j-1 chars) to its
    next-symbol counts; distributions mix all orders whose context is
    available, weights renormalized, each order additively smoothed with
    ``alpha`` over the full vocabulary (observed symbols + one reserved
    unknown symbol).
    """

    order: int
    alpha: float
    symbols: tuple[str, ...]
    weights: tuple[float, ...]
    tables: list[dict[str, dict[str, int]]]
    totals: list[dict[str, int]] = field(repr=False, default_factory=list)

    def __post_init__(self) -> None:
        self._index = {s: i for i, s in enumerate(self.symbols)}
        self._index[UNK] = len(self.symbols)
        if not self.totals:
            self.totals = [
                {ctx: sum(cnts.values()) for ctx, cnts in table.items()}
                for table in self.tables
            ]
        self._dist_cache: dict[str, tuple[np.ndarray, float, float]] = {}

    @property
    def vocab_size(self) -> int:
        return len(self.symbols) + 1

    def symbol_index(self, symbol: str) -> int:
        return self._index.get(symbol, len(self.symbols))

    def conditional_probs(self, context: str) -> np.ndarray:
        """Mixture distribution over the vocabulary given trailing context.

        Orders whose context window exceeds the available context are
        dropped and the remaining interpolation weights renormalized, so
        the result is a proper distribution for any context length.
        """
        v = self.vocab_size
        usable = [j for j in range(1, self.order + 1) if len(context) >= j - 1]
        weights = [self.weights[j - 1] for j in usable]
        if sum(weights) <= 0:
            # All usable orders carry zero weight (short context under a
            # top-heavy weighting): fall back to the highest usable order.
            usable, weights = [usable[-1]], [1.0]
        mixed = np.zeros(v)
        for j, w in zip(usable, weights):
            if w == 0.0:
                continue
            ctx = context[len(context) - (j - 1):]
            arr = np.full(v, self.alpha)
            counts = self.tables[j - 1].get(ctx)
            if counts is not None:
                for sym, c in counts.items():
                    arr[self._index[sym]] += c
                total = self.totals[j - 1][ctx]
            else:
                total = 0
            mixed += w * (arr / (total + self.alpha * v))
        return mixed / sum(weights)

    def _context_stats(self, context: str) -> tuple[np.ndarray, float, float]:
        """(log-prob vector, mu, sigma) for a context, memoized."""
        cached = self._dist_cache.get(context)
        if cached is None:
            logp = np.log(self.conditional_probs(context))
            mu, sigma = moments.categorical_moments(logp, check_normalization=False)
            cached = (logp, mu, sigma)
            self._dist_cache[context] = cached
        return cached

    def to_json_dict(self) -> dict:
        return {
            "schema": MODEL_SCHEMA,
            "order": self.order,
            "alpha": self.alpha,
            "symbols": list(self.symbols),
            "weights": list(self.weights),
            "tables": [
                {ctx: dict(sorted(cnts.items())) for ctx, cnts in sorted(table.items())}
                for table in self.tables
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NGramModel":
        if doc.get("schema") != MODEL_SCHEMA:
            raise ValueError(f"unsupported model schema: {doc.get('schema')!r}")
        return cls(
            order=doc["order"],
            alpha=doc["alpha"],
            symbols=tuple(doc["symbols"]),
            weights=tuple(doc["weights"]),
            tables=[
                {ctx: dict(cnts) for ctx, cnts in table.items()}
                for table in doc["tables"]
            ],
        )


def save_model(model: NGramModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_json_dict(), f, sort_keys=True, separators=(",", ":"))


def load_model(path: str) -> NGramModel:
    with open(path, "r", encoding="utf-8") as f:
        return NGramModel.from_json_dict(json.load(f))


def train(
    corpus: str,
    order: int = 3,
    alpha: float = 0.1,
    weights: Optional[Sequence[float]] = None,
) -> NGramModel:
    """Count-based fit of an interpolated n-gram model.

    Deterministic: same corpus, same model, bit for bit.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if len(corpus) < order:
        raise CorpusTooShort(f"corpus length {len(corpus)} < order {order}")
    if UNK in corpus:
        raise ValueError("corpus contains the reserved unknown symbol")
    if weights is None:
        weights = (1.0 / order,) * order
    elif len(weights) != order or any(w < 0 for w in weights) or sum(weights) <= 0:
        raise ValueError("need one non-negative interpolation weight per order, summing > 0")

    tables: list[dict[str, dict[str, int]]] = []
    for j in range(1, order + 1):
        table: dict[str, dict[str, int]] = {}
        for i in range(len(corpus) - j + 1):
            ctx = corpus[i:i + j - 1]
            sym = corpus[i + j - 1]
            bucket = table.setdefault(ctx, {})
            bucket[sym] = bucket.get(sym, 0) + 1
        tables.append(table)

    return NGramModel(
        order=order,
        alpha=float(alpha),
        symbols=tuple(sorted(set(corpus))),
        weights=tuple(float(w) for w in weights),
        tables=tables,
    )


def stats_for(
    model: NGramModel,
    text: str,
    record_id: str = "text",
    label: Label = Label.UNKNOWN,
    emit_vectors: bool = False,
    attach_text: bool = True,
) -> SequenceRecord:
    """Per-position statistics for a text under the model.

    A text of T characters yields P = T-1 positions: the first character
    has no prefix and is never scored. mu/sigma come from the same moment
    computation the validator uses for cross-checks, so emitted vectors
    always reconcile with the emitted scalars.
    """
    if len(text) < 2:
        raise TextTooShort(f"need at least 2 characters, got {len(text)}")
    span = model.order - 1
    positions = []
    for t in range(1, len(text)):
        context = text[max(0, t - span):t]
        logp, mu, sigma = model._context_stats(context)
        target = model.symbol_index(text[t])
        positions.append(PositionStats(
            logp_target=float(logp[target]),
            mu=mu,
            sigma=sigma,
            logp_vector=tuple(float(x) for x in logp) if emit_vectors else None,
        ))
    return SequenceRecord(
        id=record_id,
        label=label,
        positions=tuple(positions),
        text_bytes=text.encode("utf-8") if attach_text else None,
    )


def text_nll(model: NGramModel, text: str) -> float:
    """Mean NLL (nats/char) of a text under the model; the reference-pass unit."""
    if len(text) < 2:
        raise TextTooShort(f"need at least 2 characters, got {len(text)}")
    span = model.order - 1
    total = 0.0
    for t in range(1, len(text)):
        logp, _, _ = model._context_stats(text[max(0, t - span):t])
        total += float(logp[model.symbol_index(text[t])])
    return -total / (len(text) - 1)


def count_mode_targets(model: NGramModel, text: str) -> tuple[int, int]:
    """(positions whose target attains the distribution maximum, total positions)."""
    if len(text) < 2:
        raise TextTooShort(f"need at least 2 characters, got {len(text)}")
    span = model.order - 1
    hits = 0
    for t in range(1, len(text)):
        logp, _, _ = model._context_stats(text[max(0, t - span):t])
        if logp[model.symbol_index(text[t])] == logp.max():
            hits += 1
    return hits, len(text) - 1


@dataclass
class MembershipBenchmark:
    """Labeled snippet dataset plus the model that scored it."""

    records: list[SequenceRecord]
    model: NGramModel
    snippet_len: int
    seed: int


def make_membership_benchmark(
    corpus_member: str,
    corpus_holdout: str,
    snippet_len: int = 64,
    n_snippets: int = 200,
    seed: int = 0,
    order: int = 3,
    alpha: float = 0.1,
    emit_vectors: bool = False,
) -> MembershipBenchmark:
    """Train on the member corpus, then sample labeled snippets from both.

    Member snippets are verbatim slices of the training text; holdout
    snippets come from text the model never saw. Callers must keep the two
    corpora disjoint. Fixed seed makes the dataset byte-identical across
    runs.
    """
    if snippet_len < 2:
        raise ValueError(f"snippet_len must be >= 2, got {snippet_len}")
    for name, corpus in (("member", corpus_member), ("holdout", corpus_holdout)):
        if len(corpus) < snippet_len:
            raise InsufficientCorpus(
                f"{name} corpus has {len(corpus)} chars, need >= {snippet_len}"
            )

    model = train(corpus_member, order=order, alpha=alpha)
    rng = np.random.default_rng(seed)
    records: list[SequenceRecord] = []
    for label, corpus in ((Label.MEMBER, corpus_member), (Label.NONMEMBER, corpus_holdout)):
        starts = rng.integers(0, len(corpus) - snippet_len + 1, size=n_snippets)
        for i, start in enumerate(starts):
            snippet = corpus[int(start):int(start) + snippet_len]
            records.append(stats_for(
                model,
                snippet,
                record_id=f"{label.value}-{i:04d}",
                label=label,
                emit_vectors=emit_vectors,
            ))
    return MembershipBenchmark(records=records, model=model, snippet_len=snippet_len, seed=seed)


def add_reference_pass(
    records: Sequence[SequenceRecord],
    reference_model: NGramModel,
    name: str = "ref",
) -> list[SequenceRecord]:
    """Attach a second model's mean NLL to each record, keyed by name."""
    return [_with_reference(r, name, ReferenceStats(mean_nll=text_nll(reference_model, _text_of(r))))
            for r in records]


def add_lowercase_pass(
    records: Sequence[SequenceRecord],
    model: NGramModel,
    name: str = "lowercase",
) -> list[SequenceRecord]:
    """Attach the model's mean NLL over the lowercased text."""
    return [_with_reference(r, name, ReferenceStats(mean_nll=text_nll(model, _text_of(r).lower())))
            for r in records]


def add_neighbor_pass(
    records: Sequence[SequenceRecord],
    model: NGramModel,
    n_neighbors: int = 5,
    edit_fraction: float = 0.1,
    seed: int = 0,
    name: str = "neighbors",
) -> list[SequenceRecord]:
    """Attach mean NLLs of randomly perturbed copies of each text.

    Each neighbor replaces ~edit_fraction of the characters with random
    vocabulary symbols; seeded, so reference values are reproducible.
    """
    rng = np.random.default_rng(seed)
    out = []
    for record in records:
        text = _text_of(record)
        n_edits = max(1, int(len(text) * edit_fraction))
        nlls = []
        for _ in range(n_neighbors):
            chars = list(text)
            for pos in rng.integers(0, len(chars), size=n_edits):
                chars[int(pos)] = model.symbols[int(rng.integers(0, len(model.symbols)))]
            nlls.append(text_nll(model, "".join(chars)))
        stats = ReferenceStats(
            mean_nll=float(np.mean(nlls)),
            neighbor_nlls=tuple(nlls),
        )
        out.append(_with_reference(record, name, stats))
    return out


def _text_of(record: SequenceRecord) -> str:
    if not record.text_bytes:
        raise MissingText(f"record {record.id!r} has no text to build a reference pass from")
    return record.text_bytes.decode("utf-8")


def _with_reference(record: SequenceRecord, name: str, stats: ReferenceStats) -> SequenceRecord:
    refs = dict(record.references)
    refs[name] = stats
    return replace(record, references=refs)
