"""Wire format: write -> parse identity, strict rejection, throughput guard."""

import io
import json
import math
import time

import numpy as np
import pytest

from minkpp.errors import MalformedLine
from minkpp.ingestion import (
    SCHEMA,
    dumps_records,
    parse_records,
    record_from_dict,
    record_to_dict,
    write_records,
)
from minkpp.moments import categorical_moments
from minkpp.types import (
    Label,
    PositionStats,
    ReferenceStats,
    SequenceRecord,
    validate_record,
)
from tests.conftest import random_record


def parse_bytes(data: bytes, lenient: bool = False):
    return parse_records(io.BytesIO(data), lenient=lenient)


def random_rich_record(rng: np.random.Generator, record_id: str) -> SequenceRecord:
    """Random record exercising every optional field."""
    n = int(rng.integers(1, 12))
    with_vectors = rng.random() < 0.3
    v = int(rng.integers(2, 10))  # one vocabulary size per record
    positions = []
    for _ in range(n):
        if with_vectors:
            probs = rng.dirichlet(np.ones(v))
            logp = np.log(probs)
            mu, sigma = categorical_moments(logp, check_normalization=False)
            target = float(logp[int(rng.integers(0, v))])
            positions.append(PositionStats(target, mu, sigma, tuple(float(x) for x in logp)))
        else:
            lp = float(-rng.exponential(2.0))
            positions.append(PositionStats(lp, lp - float(rng.exponential(1.0)),
                                           float(rng.exponential(1.0))))
    references = {}
    if rng.random() < 0.5:
        references["ref"] = ReferenceStats(mean_nll=float(rng.exponential(2.0)))
    if rng.random() < 0.3:
        nlls = tuple(float(x) for x in rng.exponential(2.0, size=int(rng.integers(1, 6))))
        references["neighbors"] = ReferenceStats(
            mean_nll=math.fsum(nlls) / len(nlls), neighbor_nlls=nlls)
    text = None
    if rng.random() < 0.5:
        text = "".join(chr(c) for c in rng.integers(32, 1000, size=int(rng.integers(1, 40))))
    return SequenceRecord(
        id=record_id,
        label=Label(["member", "nonmember", "unknown"][int(rng.integers(0, 3))]),
        positions=tuple(positions),
        text_bytes=text.encode("utf-8") if text else None,
        references=references,
    )


def valid_line(record_id="r1") -> dict:
    return {
        "schema": SCHEMA,
        "id": record_id,
        "label": "member",
        "logp": [-1.0, -2.5],
        "mu": [-2.0, -3.0],
        "sigma": [0.5, 0.25],
    }


class TestRoundTrip:
    def test_three_line_file(self):
        lines = [valid_line("a"), valid_line("b"), valid_line("c")]
        data = ("\n".join(json.dumps(l) for l in lines) + "\n").encode()
        records, diagnostics = parse_bytes(data)
        assert [r.id for r in records] == ["a", "b", "c"]
        assert diagnostics == []

    def test_write_then_parse_is_identity(self):
        rng = np.random.default_rng(103)
        records = [random_rich_record(rng, f"rec-{i:04d}") for i in range(1000)]
        reparsed, diagnostics = parse_bytes(dumps_records(records))
        assert diagnostics == []
        assert reparsed == records  # dataclass equality: every field, exact floats

    def test_empty_record_list_writes_nothing(self):
        sink = io.BytesIO()
        assert write_records([], sink) == 0
        assert sink.getvalue() == b""

    def test_byte_count_matches(self):
        rng = np.random.default_rng(107)
        records = [random_rich_record(rng, f"r{i}") for i in range(10)]
        sink = io.BytesIO()
        count = write_records(records, sink)
        assert count == len(sink.getvalue())

    def test_vectors_survive_round_trip(self):
        rng = np.random.default_rng(109)
        probs = rng.dirichlet(np.ones(5))
        logp = tuple(float(x) for x in np.log(probs))
        mu, sigma = categorical_moments(logp, check_normalization=False)
        record = SequenceRecord(
            id="v", label=Label.UNKNOWN,
            positions=(PositionStats(logp[0], mu, sigma, logp),),
        )
        reparsed, _ = parse_bytes(dumps_records([record]))
        assert reparsed[0].positions[0].logp_vector == logp

    def test_deterministic_serialization(self):
        rng = np.random.default_rng(113)
        records = [random_rich_record(rng, f"r{i}") for i in range(20)]
        assert dumps_records(records) == dumps_records(records)

    def test_parse_never_accepts_invalid_record(self):
        rng = np.random.default_rng(127)
        records, _ = parse_bytes(dumps_records([random_rich_record(rng, f"r{i}")
                                                for i in range(200)]))
        for record in records:
            assert validate_record(record) == []


class TestStrictRejection:
    def test_length_mismatch_names_line(self):
        bad = valid_line()
        bad["mu"] = [-2.0]
        data = (json.dumps(valid_line("ok")) + "\n" + json.dumps(bad) + "\n").encode()
        with pytest.raises(MalformedLine) as exc_info:
            parse_bytes(data)
        assert exc_info.value.lineno == 2
        assert "len(mu)" in str(exc_info.value)

    def test_wrong_schema_tag(self):
        bad = valid_line()
        bad["schema"] = "mia-stats/v99"
        with pytest.raises(MalformedLine) as exc_info:
            parse_bytes((json.dumps(bad) + "\n").encode())
        assert "schema" in str(exc_info.value)

    def test_nan_rejected(self):
        raw = json.dumps(valid_line()).replace("-1.0", "NaN")
        with pytest.raises(MalformedLine):
            parse_bytes((raw + "\n").encode())

    def test_infinity_rejected(self):
        raw = json.dumps(valid_line()).replace("-2.5", "Infinity")
        with pytest.raises(MalformedLine):
            parse_bytes((raw + "\n").encode())

    def test_bad_label_rejected(self):
        bad = valid_line()
        bad["label"] = "insider"
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())

    def test_unknown_field_rejected_in_strict(self):
        bad = valid_line()
        bad["surprise"] = 1
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())

    def test_unknown_field_ignored_in_lenient(self):
        doc = valid_line()
        doc["surprise"] = 1
        records, diagnostics = parse_bytes((json.dumps(doc) + "\n").encode(), lenient=True)
        assert len(records) == 1 and diagnostics == []

    def test_positive_logp_rejected(self):
        bad = valid_line()
        bad["logp"] = [0.5, -1.0]
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())

    def test_invalid_json_rejected(self):
        with pytest.raises(MalformedLine) as exc_info:
            parse_bytes(b'{"schema": "mia-stats/v1", \n')
        assert exc_info.value.lineno == 1

    def test_missing_required_field(self):
        bad = valid_line()
        del bad["sigma"]
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())

    def test_empty_positions_rejected(self):
        bad = valid_line()
        bad["logp"], bad["mu"], bad["sigma"] = [], [], []
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())

    def test_vector_row_count_mismatch(self):
        bad = valid_line()
        bad["logp_vectors"] = [[-1.0, -1.0]]
        with pytest.raises(MalformedLine):
            parse_bytes((json.dumps(bad) + "\n").encode())


class TestLenient:
    def test_skips_and_reports(self):
        bad = valid_line("bad")
        bad["mu"] = [-2.0]
        data = (json.dumps(valid_line("good1")) + "\n"
                + json.dumps(bad) + "\n"
                + json.dumps(valid_line("good2")) + "\n").encode()
        records, diagnostics = parse_bytes(data, lenient=True)
        assert [r.id for r in records] == ["good1", "good2"]
        assert len(diagnostics) == 1 and diagnostics[0].startswith("line 2:")

    def test_blank_lines_skipped(self):
        data = ("\n" + json.dumps(valid_line()) + "\n\n").encode()
        records, diagnostics = parse_bytes(data)
        assert len(records) == 1 and diagnostics == []


class TestThroughput:
    def test_parses_50k_positions_per_second(self):
        # Regression guard, intentionally loose: budget is 4x the target
        # so slow CI machines do not flap.
        rng = np.random.default_rng(131)
        records = [random_record(rng, f"r{i}", n_positions=50) for i in range(1200)]
        data = dumps_records(records)
        n_positions = sum(r.num_positions for r in records)
        start = time.perf_counter()
        reparsed, _ = parse_bytes(data)
        elapsed = time.perf_counter() - start
        assert len(reparsed) == len(records)
        assert n_positions / elapsed > 50_000 / 4, f"{n_positions / elapsed:.0f} positions/s"


def test_record_to_dict_field_order_is_fixed():
    rng = np.random.default_rng(137)
    doc = record_to_dict(random_rich_record(rng, "r"))
    keys = [k for k in doc]
    assert keys[:6] == ["schema", "id", "label", "logp", "mu", "sigma"]


def test_record_from_dict_rejects_non_object():
    with pytest.raises(ValueError):
        record_from_dict([1, 2, 3])
