"""The mia-stats/v1 wire format: strict JSON Lines ingestion and emission.

One record per line, UTF-8. Required fields: schema, id, label, and the
three parallel number arrays logp/mu/sigma. Optional: text (needed only
by the zlib detector), logp_vectors, refs. Numbers must be finite; the
serializer uses Python's shortest round-trip float formatting, so
write -> parse reproduces every value bit for bit.

Strict mode rejects unknown top-level fields and aborts on the first bad
line; lenient mode skips bad lines, reports them, and ignores unknown
fields.
"""

from __future__ import annotations

import io
import json
import math
from typing import BinaryIO, Iterable, Optional, Union

from minkpp.errors import LengthMismatch, MalformedLine, SchemaVersionMismatch
from minkpp.types import (
    Label,
    PositionStats,
    ReferenceStats,
    SequenceRecord,
    validate_record,
)

SCHEMA = "mia-stats/v1"

_REQUIRED_FIELDS = ("schema", "id", "label", "logp", "mu", "sigma")
_OPTIONAL_FIELDS = ("text", "logp_vectors", "refs")
_KNOWN_FIELDS = set(_REQUIRED_FIELDS) | set(_OPTIONAL_FIELDS)


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def _require_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where}: expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise ValueError(f"{where}: number must be finite, got {value!r}")
    return float(value)


def _require_number_array(value, where: str) -> list[float]:
    if not isinstance(value, list):
        raise ValueError(f"{where}: expected an array")
    return [_require_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def record_from_dict(doc: dict, strict: bool = True) -> SequenceRecord:
    """Build and fully validate a SequenceRecord from one decoded line."""
    if not isinstance(doc, dict):
        raise ValueError("line is not a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaVersionMismatch(f"expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    for field in _REQUIRED_FIELDS:
        if field not in doc:
            raise ValueError(f"missing required field {field!r}")
    if strict:
        unknown = sorted(set(doc) - _KNOWN_FIELDS)
        if unknown:
            raise ValueError(f"unknown top-level fields: {', '.join(unknown)}")

    if not isinstance(doc["id"], str):
        raise ValueError("id must be a string")
    try:
        label = Label(doc["label"])
    except ValueError:
        raise ValueError(f"invalid label {doc['label']!r}") from None

    logp = _require_number_array(doc["logp"], "logp")
    mu = _require_number_array(doc["mu"], "mu")
    sigma = _require_number_array(doc["sigma"], "sigma")
    if not (len(logp) == len(mu) == len(sigma)):
        raise LengthMismatch(
            f"parallel arrays differ: len(logp)={len(logp)}, len(mu)={len(mu)}, len(sigma)={len(sigma)}"
        )
    if len(logp) < 1:
        raise ValueError("logp/mu/sigma must have at least one position")

    vectors: Optional[list] = None
    if "logp_vectors" in doc:
        raw = doc["logp_vectors"]
        if not isinstance(raw, list):
            raise ValueError("logp_vectors: expected an array of arrays")
        if len(raw) != len(logp):
            raise LengthMismatch(f"logp_vectors has {len(raw)} rows for {len(logp)} positions")
        vectors = []
        width = None
        for i, row in enumerate(raw):
            values = _require_number_array(row, f"logp_vectors[{i}]")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise LengthMismatch(f"logp_vectors[{i}] has length {len(values)}, expected {width}")
            vectors.append(tuple(values))

    text_bytes: Optional[bytes] = None
    if "text" in doc:
        if not isinstance(doc["text"], str):
            raise ValueError("text must be a string")
        text_bytes = doc["text"].encode("utf-8")

    references: dict[str, ReferenceStats] = {}
    if "refs" in doc:
        raw_refs = doc["refs"]
        if not isinstance(raw_refs, dict):
            raise ValueError("refs must be an object")
        for name, body in raw_refs.items():
            if not isinstance(body, dict):
                raise ValueError(f"refs[{name}]: expected an object")
            mean_nll = None
            neighbor_nlls = None
            if "neighbor_nlls" in body:
                values = _require_number_array(body["neighbor_nlls"], f"refs[{name}].neighbor_nlls")
                if not values:
                    raise ValueError(f"refs[{name}].neighbor_nlls must be non-empty")
                neighbor_nlls = tuple(values)
            if "mean_nll" in body:
                mean_nll = _require_number(body["mean_nll"], f"refs[{name}].mean_nll")
            if mean_nll is None:
                if neighbor_nlls is None:
                    raise ValueError(f"refs[{name}]: need mean_nll or neighbor_nlls")
                mean_nll = math.fsum(neighbor_nlls) / len(neighbor_nlls)
            references[name] = ReferenceStats(mean_nll=mean_nll, neighbor_nlls=neighbor_nlls)

    record = SequenceRecord(
        id=doc["id"],
        label=label,
        positions=tuple(
            PositionStats(
                logp_target=logp[i],
                mu=mu[i],
                sigma=sigma[i],
                logp_vector=vectors[i] if vectors is not None else None,
            )
            for i in range(len(logp))
        ),
        text_bytes=text_bytes,
        references=references,
    )
    violations = validate_record(record)
    if violations:
        raise ValueError("invalid record: " + "; ".join(str(v) for v in violations))
    return record


def record_to_dict(record: SequenceRecord) -> dict:
    """Wire representation with a fixed field order."""
    doc: dict = {
        "schema": SCHEMA,
        "id": record.id,
        "label": record.label.value,
        "logp": [float(ps.logp_target) for ps in record.positions],
        "mu": [float(ps.mu) for ps in record.positions],
        "sigma": [float(ps.sigma) for ps in record.positions],
    }
    if record.text_bytes is not None:
        doc["text"] = record.text_bytes.decode("utf-8")
    if any(ps.logp_vector is not None for ps in record.positions):
        if any(ps.logp_vector is None for ps in record.positions):
            raise ValueError(
                f"record {record.id!r}: logp_vector must be present on every position or none"
            )
        doc["logp_vectors"] = [
            [float(x) for x in ps.logp_vector] for ps in record.positions  # type: ignore[union-attr]
        ]
    if record.references:
        refs = {}
        for name in sorted(record.references):
            ref = record.references[name]
            body: dict = {"mean_nll": float(ref.mean_nll)}
            if ref.neighbor_nlls is not None:
                body["neighbor_nlls"] = [float(v) for v in ref.neighbor_nlls]
            refs[name] = body
        doc["refs"] = refs
    return doc


def _iter_lines(stream: Union[BinaryIO, Iterable[bytes]]) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        yield lineno, raw.decode("utf-8")


def parse_records(
    stream: Union[BinaryIO, Iterable[bytes]],
    lenient: bool = False,
) -> tuple[list[SequenceRecord], list[str]]:
    """Parse a byte stream of mia-stats/v1 lines.

    Strict (default): the first malformed line raises MalformedLine with
    its line number and reason. Lenient: malformed lines are skipped and
    reported in the diagnostics list. Either way, every returned record
    passes validate_record.
    """
    records: list[SequenceRecord] = []
    diagnostics: list[str] = []
    for lineno, line in _iter_lines(stream):
        if not line.strip():
            continue
        try:
            doc = json.loads(line, parse_constant=_reject_constant)
            records.append(record_from_dict(doc, strict=not lenient))
        except Exception as exc:
            reason = str(exc)
            if lenient:
                diagnostics.append(f"line {lineno}: {reason}")
                continue
            raise MalformedLine(lineno, reason) from exc
    return records, diagnostics


def parse_records_from_path(path: str, lenient: bool = False) -> tuple[list[SequenceRecord], list[str]]:
    with open(path, "rb") as f:
        return parse_records(f, lenient=lenient)


def write_records(records: Iterable[SequenceRecord], sink: BinaryIO) -> int:
    """Serialize records one per line; returns the byte count written.

    Output is deterministic: fixed field order, shortest round-trip float
    formatting, no padding. parse(write(records)) reproduces every numeric
    field exactly.
    """
    written = 0
    for record in records:
        line = json.dumps(record_to_dict(record), ensure_ascii=False, allow_nan=False,
                          separators=(",", ":")) + "\n"
        data = line.encode("utf-8")
        sink.write(data)
        written += len(data)
    return written


def write_records_to_path(records: Iterable[SequenceRecord], path: str) -> int:
    with open(path, "wb") as f:
        return write_records(records, f)


def dumps_records(records: Iterable[SequenceRecord]) -> bytes:
    buf = io.BytesIO()
    write_records(records, buf)
    return buf.getvalue()
