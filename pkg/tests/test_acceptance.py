"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to get one pass/fail
line per criterion. Golden values for the separation study were produced
by the first oracle run on the bundled corpus (data/corpus.txt, split
80/20, snippet length 64, 200+200 snippets, seed 1234) and are frozen
here as regression anchors; the thresholds they must clear are asserted
independently of the goldens.
"""

import math
import time

import numpy as np
import pytest

from minkpp import online, toy_lm
from minkpp.detectors import score_dataset, score_loss, score_mink, score_minkpp
from minkpp.errors import MalformedLine
from minkpp.evaluation import auroc, roc_curve, trapezoid_area
from minkpp.ingestion import dumps_records, parse_records
from minkpp.moments import categorical_moments, log_softmax, shift_logits_then_moments
from minkpp.token_scores import minkpp_token
from minkpp.types import (
    DecisionRule,
    DetectorConfig,
    Label,
    Method,
    PositionStats,
    ScoredExample,
    Variant,
)
from tests.conftest import random_record
from tests.test_ingestion import parse_bytes, random_rich_record

LN2 = math.log(2.0)

# Frozen by the first oracle run; exact re-runs are deterministic.
GOLDEN = {
    "loss_auroc": 0.97035,
    "mink20_auroc": 0.99635,
    "minkpp20_full_auroc": 0.995375,
    "ablation": {
        Variant.RAW: 0.99635,
        Variant.SUB_MU: 0.999225,
        Variant.DIV_SIGMA: 0.74325,
        Variant.FULL: 0.995375,
    },
    "mode_rate_member": 2371 / 12600,
    "mode_rate_nonmember": 2241 / 12600,
    "online_chunk_auroc": 0.9826512133285041,
    "online_n_windows": 471,
}

SEPARATION_FLOOR = 0.55


def report(line: str) -> None:
    print(f"ACCEPTANCE PASS {line}")


@pytest.fixture(scope="module")
def benchmark(corpus_split):
    member, holdout = corpus_split
    start = time.perf_counter()
    bench = toy_lm.make_membership_benchmark(
        member, holdout, snippet_len=64, n_snippets=200, seed=1234, order=3, alpha=0.1)
    bench.build_seconds = time.perf_counter() - start
    return bench


def test_moment_correctness():
    start = time.perf_counter()
    mu, sigma = categorical_moments([math.log(0.5), math.log(0.25), math.log(0.25)])
    assert mu == pytest.approx(-1.5 * LN2, abs=1e-12)
    assert sigma == pytest.approx(0.5 * LN2, abs=1e-12)
    mu_u, sigma_u = categorical_moments([math.log(0.25)] * 4)
    assert mu_u == pytest.approx(-math.log(4), abs=1e-12)
    assert sigma_u == 0.0
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(f"moment-correctness: (1/2,1/4,1/4) -> ({mu:.12f}, {sigma:.12f}); "
           f"uniform sigma clamped to {sigma_u}; {elapsed:.3f}s")


def test_token_score_closed_form():
    mu, sigma = categorical_moments([math.log(0.5), math.log(0.25), math.log(0.25)])
    mode = minkpp_token(PositionStats(math.log(0.5), mu, sigma), Variant.FULL)
    off_mode = minkpp_token(PositionStats(math.log(0.25), mu, sigma), Variant.FULL)
    assert mode == pytest.approx(1.0, abs=1e-12)
    assert off_mode == pytest.approx(-1.0, abs=1e-12)
    report(f"token-score-closed-form: mode {mode:+.15f}, non-mode {off_mode:+.15f}")


def test_shift_invariance_1000_trials():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        v = int(rng.integers(2, 60))
        logits = rng.normal(0.0, 5.0, size=v)
        c = float(rng.uniform(-100.0, 100.0))
        target = int(rng.integers(0, v))

        mu0, sigma0 = shift_logits_then_moments(logits, 0.0)
        mu1, sigma1 = shift_logits_then_moments(logits, c)
        score0 = minkpp_token(PositionStats(float(log_softmax(logits)[target]), mu0, sigma0))
        score1 = minkpp_token(PositionStats(float(log_softmax(logits + c)[target]), mu1, sigma1))

        for a, b in ((mu0, mu1), (sigma0, sigma1), (score0, score1)):
            assert b == pytest.approx(a, rel=1e-9, abs=1e-12)
            scale = max(abs(a), abs(b), 1e-12)
            worst = max(worst, abs(a - b) / scale)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    report(f"shift-invariance: 1000 trials, worst relative deviation {worst:.2e}; {elapsed:.2f}s")


def test_detector_identities_500_records():
    rng = np.random.default_rng(2025)
    worst_loss = worst_raw = 0.0
    for i in range(500):
        record = random_record(rng, f"r{i}")
        k = float(rng.uniform(1, 100))
        d_loss = abs(score_mink(record, 100).score - score_loss(record).score)
        d_raw = abs(score_minkpp(record, k, Variant.RAW).score - score_mink(record, k).score)
        assert d_loss <= 1e-12
        assert d_raw <= 1e-12
        worst_loss = max(worst_loss, d_loss)
        worst_raw = max(worst_raw, d_raw)
    report(f"detector-identities: mink(100)==loss (max dev {worst_loss:.1e}), "
           f"minkpp(raw)==mink (max dev {worst_raw:.1e}) over 500 records")


def test_auroc_oracle_equivalence():
    rng = np.random.default_rng(2026)

    def pairwise(members, nonmembers):
        total = 0.0
        for m in members:
            for n in nonmembers:
                total += 1.0 if m > n else (0.5 if m == n else 0.0)
        return total / (len(members) * len(nonmembers))

    def scored_from(members, nonmembers):
        return ([ScoredExample(f"m{i}", Label.MEMBER, float(s)) for i, s in enumerate(members)]
                + [ScoredExample(f"n{i}", Label.NONMEMBER, float(s)) for i, s in enumerate(nonmembers)])

    for trial in range(200):
        n_pos = int(rng.integers(1, 251))
        n_neg = int(rng.integers(1, 251))
        members = np.round(rng.normal(0.2, 1.0, n_pos), 1).tolist()  # rounding injects ties
        nonmembers = np.round(rng.normal(0.0, 1.0, n_neg), 1).tolist()
        scored = scored_from(members, nonmembers)
        fast = auroc(scored)
        assert fast == pairwise(members, nonmembers)
        assert trapezoid_area(roc_curve(scored)) == pytest.approx(fast, abs=1e-12)

    members = rng.normal(0.3, 1.0, 100).tolist()
    nonmembers = rng.normal(0.0, 1.0, 100).tolist()
    base = auroc(scored_from(members, nonmembers))
    for transform in (lambda x: 3.0 * x + 7.0, math.exp, lambda x: x ** 3):
        assert auroc(scored_from([transform(s) for s in members],
                                 [transform(s) for s in nonmembers])) == base
    report("auroc-oracle-equivalence: 200 randomized sets match the pairwise oracle "
           "exactly; trapezoid(roc)==auroc @1e-12; 3 monotone transforms exact")


def test_toy_lm_separation_study(benchmark):
    start = time.perf_counter()
    results = {}
    for name, config in (
        ("loss", DetectorConfig(method=Method.LOSS)),
        ("mink20", DetectorConfig(method=Method.MINK, k_percent=20)),
        ("minkpp20_full", DetectorConfig(method=Method.MINKPP, k_percent=20, variant=Variant.FULL)),
    ):
        results[name] = auroc(score_dataset(benchmark.records, config))

    assert results["loss"] > SEPARATION_FLOOR
    assert results["mink20"] > SEPARATION_FLOOR
    assert results["minkpp20_full"] > SEPARATION_FLOOR
    assert results["minkpp20_full"] > 0.5

    # regression goldens from the first oracle run
    assert results["loss"] == pytest.approx(GOLDEN["loss_auroc"], abs=1e-12)
    assert results["mink20"] == pytest.approx(GOLDEN["mink20_auroc"], abs=1e-12)
    assert results["minkpp20_full"] == pytest.approx(GOLDEN["minkpp20_full_auroc"], abs=1e-12)

    # member tokens sit at the mode of their conditional distribution more often
    def pooled_mode_rate(label):
        hits = total = 0
        for record in benchmark.records:
            if record.label is label:
                h, t = toy_lm.count_mode_targets(benchmark.model, record.text_bytes.decode("utf-8"))
                hits += h
                total += t
        return hits / total

    member_rate = pooled_mode_rate(Label.MEMBER)
    nonmember_rate = pooled_mode_rate(Label.NONMEMBER)
    assert member_rate > nonmember_rate
    assert member_rate == pytest.approx(GOLDEN["mode_rate_member"], abs=1e-12)
    assert nonmember_rate == pytest.approx(GOLDEN["mode_rate_nonmember"], abs=1e-12)

    elapsed = time.perf_counter() - start + benchmark.build_seconds
    assert elapsed < 30.0
    report(f"toy-lm-separation: loss={results['loss']:.4f} mink20={results['mink20']:.4f} "
           f"minkpp20={results['minkpp20_full']:.4f} (floor {SEPARATION_FLOOR}); "
           f"mode-rate gap {member_rate - nonmember_rate:+.4f}; {elapsed:.1f}s")


def test_ablation_four_distinct_auroc_values(benchmark):
    table = {}
    for variant in (Variant.RAW, Variant.SUB_MU, Variant.DIV_SIGMA, Variant.FULL):
        config = DetectorConfig(method=Method.MINKPP, k_percent=20, variant=variant)
        table[variant] = auroc(score_dataset(benchmark.records, config))
    values = list(table.values())
    assert len(set(values)) == 4, f"expected 4 distinct AUROCs, got {table}"
    for variant, value in table.items():
        assert value == pytest.approx(GOLDEN["ablation"][variant], abs=1e-12)
    report("ablation-plumbing: raw/sub_mu/div_sigma/full -> "
           + " ".join(f"{v.value}={table[v]:.4f}" for v in table))


def test_online_protocol(benchmark, corpus_split):
    start = time.perf_counter()
    member, holdout = corpus_split
    model = benchmark.model
    rng = np.random.default_rng(7)
    member_texts = [member[int(s):int(s) + 128]
                    for s in rng.integers(0, len(member) - 128, size=100)]
    nonmember_texts = [holdout[int(s):int(s) + 128]
                       for s in rng.integers(0, len(holdout) - 128, size=100)]
    examples = online.build_online_dataset(
        member_texts, nonmember_texts,
        stats_fn=lambda text: toy_lm.stats_for(model, text),
        lengths=(32, 64, 128), seed=7)

    config = DetectorConfig(method=Method.MINKPP, k_percent=20)
    rule = DecisionRule(0.0)

    # windows tile exactly
    for example in examples:
        verdicts = online.online_scan(example.record, config, rule, window=32)
        covered = [i for v in verdicts for i in range(v.start, v.end)]
        assert covered == list(range(example.record.num_positions))

    # a window at least as long as the record reproduces the full-record score
    for example in examples[:20]:
        whole = online.online_scan(example.record, config, rule,
                                   window=example.record.num_positions)
        assert len(whole) == 1
        direct = score_minkpp(example.record, 20, Variant.FULL).score
        assert abs(whole[0].score - direct) <= 1e-12

    windowed = online.windowed_examples(examples, config, rule, window=32)
    chunk_auroc = auroc(windowed)
    assert chunk_auroc > SEPARATION_FLOOR
    assert len(windowed) == GOLDEN["online_n_windows"]
    assert chunk_auroc == pytest.approx(GOLDEN["online_chunk_auroc"], abs=1e-12)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    report(f"online-protocol: {len(examples)} spliced records, {len(windowed)} windows, "
           f"chunk AUROC {chunk_auroc:.4f} (floor {SEPARATION_FLOOR}); {elapsed:.1f}s")


def test_wire_format_round_trip_and_rejection():
    rng = np.random.default_rng(2027)
    records = [random_rich_record(rng, f"rec-{i:04d}") for i in range(1000)]
    reparsed, diagnostics = parse_records(iter(dumps_records(records).splitlines(keepends=True)))
    assert diagnostics == []
    assert reparsed == records  # exact numeric equality via dataclass equality

    base = dumps_records(records[:1]).decode("utf-8").strip()
    corruptions = {
        "length mismatch": base.replace('"mu":[', '"mu":[0.0,', 1),
        "NaN": base.replace('"logp":[', '"logp":[NaN,', 1),
        "bad label": base.replace(f'"{records[0].label.value}"', '"intruder"', 1),
        "wrong schema": base.replace("mia-stats/v1", "mia-stats/v0", 1),
    }
    for name, corrupted in corruptions.items():
        assert corrupted != base, f"corruption {name!r} did not apply"
        with pytest.raises(MalformedLine):
            parse_bytes((corrupted + "\n").encode("utf-8"))
    report("wire-format: 1000-record write->parse exact; strict mode rejects "
           + ", ".join(corruptions))
