"""Command-line surface.

Subcommands: score, eval, sweep, online, toy-lm {train,stats,benchmark},
validate. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
error. Output files are written atomically (temp + rename) and are
byte-identical across runs for identical inputs; every report embeds the
wire-format schema version, the tool version, and the resolved detector
configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Optional, Sequence

from minkpp import __version__
from minkpp import ingestion, online, toy_lm
from minkpp.detectors import score_dataset
from minkpp.errors import DataError, MiaError, UsageError
from minkpp.evaluation import EvalReport, evaluate
from minkpp.types import DecisionRule, DetectorConfig, Label, Method, ScoredExample, Variant

logger = logging.getLogger("minkpp")

SCORES_SCHEMA = "mia-scores/v1"
REPORT_SCHEMA = "mia-report/v1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; the contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def _atomic_write_text(path: str, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _detector_config(args) -> DetectorConfig:
    try:
        return DetectorConfig(
            method=Method(args.method),
            k_percent=args.k,
            variant=Variant(args.variant),
            sigma_floor=args.sigma_floor,
            reference_name=getattr(args, "ref_name", None),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_detector_flags(p: argparse.ArgumentParser, methods=None) -> None:
    p.add_argument("--method", required=True, choices=[m.value for m in (methods or Method)])
    p.add_argument("--k", type=float, default=20.0, help="min-k percentage (mink/minkpp)")
    p.add_argument("--variant", default="full", choices=[v.value for v in Variant])
    p.add_argument("--sigma-floor", type=float, default=1e-6)
    p.add_argument("--ref-name", default=None, help="reference pass name (ref/lowercase/neighbor)")


# score ----------------------------------------------------------------------

def _write_scores(path: str, scored: Sequence[ScoredExample], config: DetectorConfig) -> None:
    buf = io.StringIO()
    header = {
        "schema": SCORES_SCHEMA,
        "tool_version": __version__,
        "config": config.to_dict(),
    }
    buf.write(json.dumps(header, allow_nan=False, separators=(",", ":")) + "\n")
    for s in scored:
        line = {"id": s.id, "label": s.label.value, "score": float(s.score)}
        buf.write(json.dumps(line, allow_nan=False, separators=(",", ":")) + "\n")
    _atomic_write_text(path, buf.getvalue())


def _read_scores(path: str) -> tuple[list[ScoredExample], Optional[DetectorConfig]]:
    scored: list[ScoredExample] = []
    config = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if doc.get("schema") == SCORES_SCHEMA:
                cfg = doc.get("config")
                if cfg:
                    config = DetectorConfig(
                        method=Method(cfg["method"]),
                        k_percent=cfg["k_percent"],
                        variant=Variant(cfg["variant"]),
                        sigma_floor=cfg["sigma_floor"],
                        reference_name=cfg.get("reference_name"),
                    )
                continue
            try:
                score = float(doc["score"])
                if not math.isfinite(score):
                    raise ValueError(f"score not finite: {score!r}")
                scored.append(ScoredExample(id=doc["id"], label=Label(doc["label"]), score=score))
            except (KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad score line: {exc}") from exc
    return scored, config


def cmd_score(args) -> int:
    config = _detector_config(args)
    records, diagnostics = ingestion.parse_records_from_path(args.input, lenient=args.lenient)
    for note in diagnostics:
        logger.warning("%s", note)
    scored = score_dataset(records, config, strict=not args.lenient)
    _write_scores(args.output, scored, config)
    print(f"scored {len(scored)} records method={config.method.value} k={config.k_percent} -> {args.output}")
    return EXIT_OK


# eval -----------------------------------------------------------------------

def _report_to_json(report: EvalReport) -> str:
    doc = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "auroc": report.auroc,
        "tpr_at_fpr": {str(k): v for k, v in report.tpr_at_fpr.items()},
        "n_pos": report.n_pos,
        "n_neg": report.n_neg,
        "n_roc_points": len(report.roc_points),
        "tpr_convention": "max TPR over achievable thresholds with FPR <= target; no interpolation",
        "config": report.config_echo.to_dict() if report.config_echo else None,
        "notes": report.notes,
    }
    return json.dumps(doc, indent=2, allow_nan=False, sort_keys=True) + "\n"


def _roc_to_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fpr", "tpr", "threshold"])
    for point in report.roc_points:
        writer.writerow([repr(point.fpr), repr(point.tpr), "inf" if math.isinf(point.threshold) else repr(point.threshold)])
    return buf.getvalue()


def cmd_eval(args) -> int:
    scored, config = _read_scores(args.scores)
    if args.unknown_as != "exclude":
        relabel = Label(args.unknown_as)
        scored = [ScoredExample(s.id, relabel, s.score) if s.label is Label.UNKNOWN else s
                  for s in scored]
    report = evaluate(scored, fpr_targets=tuple(args.fpr), config=config)
    report.notes["unknown_as"] = args.unknown_as
    if args.report_out:
        _atomic_write_text(args.report_out, _report_to_json(report))
    if args.roc_out:
        _atomic_write_text(args.roc_out, _roc_to_csv(report))
    tprs = " ".join(f"tpr@{k:g}={v:.4f}" for k, v in report.tpr_at_fpr.items())
    print(f"auroc={report.auroc:.6f} n_pos={report.n_pos} n_neg={report.n_neg} {tprs}")
    return EXIT_OK


# sweep ----------------------------------------------------------------------

def _parse_grid(raw: str) -> list[float]:
    try:
        grid = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --k-grid: {exc}") from exc
    if not grid:
        raise UsageError("--k-grid is empty")
    return grid


def cmd_sweep(args) -> int:
    method = Method(args.method)
    if method not in (Method.MINK, Method.MINKPP):
        raise UsageError("sweep supports only mink and minkpp")
    grid = _parse_grid(args.k_grid)
    variants = [Variant(v) for v in args.variants.split(",")] if method is Method.MINKPP else [Variant.RAW]
    records, diagnostics = ingestion.parse_records_from_path(args.input, lenient=args.lenient)
    for note in diagnostics:
        logger.warning("%s", note)

    rows = []
    best = None
    for variant in variants:
        for k in grid:
            config = DetectorConfig(method=method, k_percent=k, variant=variant,
                                    sigma_floor=args.sigma_floor)
            scored = score_dataset(records, config, strict=not args.lenient)
            report = evaluate(scored, fpr_targets=(args.fpr,), config=config)
            rows.append({
                "method": method.value,
                "variant": variant.value if method is Method.MINKPP else "",
                "k_percent": k,
                "auroc": report.auroc,
                f"tpr_at_fpr_{args.fpr:g}": report.tpr_at_fpr[args.fpr],
                "n_pos": report.n_pos,
                "n_neg": report.n_neg,
            })
            if best is None or report.auroc > best[2]:
                best = (variant.value, k, report.auroc)

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: repr(v) if isinstance(v, float) else v for key, v in row.items()})
    _atomic_write_text(args.report_out, buf.getvalue())
    assert best is not None
    print(f"swept {len(rows)} configs; best variant={best[0] or '-'} k={best[1]:g} auroc={best[2]:.6f}")
    return EXIT_OK


# online ---------------------------------------------------------------------

def cmd_online(args) -> int:
    config = _detector_config(args)
    rule = DecisionRule(threshold=args.threshold)
    records, diagnostics = ingestion.parse_records_from_path(args.input, lenient=args.lenient)
    for note in diagnostics:
        logger.warning("%s", note)
    buf = io.StringIO()
    n_windows = 0
    n_flagged = 0
    for record in records:
        for verdict in online.online_scan(record, config, rule, window=args.window):
            doc = {"id": record.id, **verdict.to_dict()}
            buf.write(json.dumps(doc, allow_nan=False, separators=(",", ":")) + "\n")
            n_windows += 1
            n_flagged += verdict.decision
    _atomic_write_text(args.output, buf.getvalue())
    print(f"scanned {len(records)} records window={args.window}: {n_windows} windows, {n_flagged} flagged")
    return EXIT_OK


# toy-lm ---------------------------------------------------------------------

def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def cmd_toy_train(args) -> int:
    corpus = _read_text(args.corpus)
    model = toy_lm.train(corpus, order=args.order, alpha=args.alpha)
    doc = json.dumps(model.to_json_dict(), sort_keys=True, separators=(",", ":"))
    _atomic_write_text(args.output, doc)
    print(f"trained order-{args.order} model on {len(corpus)} chars "
          f"(vocab {model.vocab_size}) -> {args.output}")
    return EXIT_OK


def cmd_toy_stats(args) -> int:
    model = toy_lm.load_model(args.model)
    label = Label(args.label)
    records = []
    with open(args.texts, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.rstrip("\n")
            if len(text) < 2:
                logger.warning("line %d: skipped (needs >= 2 characters)", lineno)
                continue
            records.append(toy_lm.stats_for(
                model, text,
                record_id=f"{args.id_prefix}{lineno:04d}",
                label=label,
                emit_vectors=args.emit_vectors,
            ))
    data = ingestion.dumps_records(records)
    _atomic_write_bytes(args.output, data)
    print(f"emitted {len(records)} records -> {args.output}")
    return EXIT_OK


def cmd_toy_benchmark(args) -> int:
    corpus = _read_text(args.corpus)
    split_at = int(len(corpus) * args.split)
    member, holdout = corpus[:split_at], corpus[split_at:]
    bench = toy_lm.make_membership_benchmark(
        member, holdout,
        snippet_len=args.snippet_len,
        n_snippets=args.n_snippets,
        seed=args.seed,
        order=args.order,
        alpha=args.alpha,
        emit_vectors=args.emit_vectors,
    )
    records = bench.records
    if args.ref_order:
        ref_model = toy_lm.train(member, order=args.ref_order, alpha=args.alpha)
        records = toy_lm.add_reference_pass(records, ref_model)
    if args.lowercase:
        records = toy_lm.add_lowercase_pass(records, bench.model)
    if args.neighbors:
        records = toy_lm.add_neighbor_pass(records, bench.model,
                                           n_neighbors=args.neighbors, seed=args.seed)
    data = ingestion.dumps_records(records)
    _atomic_write_bytes(args.output, data)
    print(f"benchmark: {len(records)} records (snippet_len={args.snippet_len}, "
          f"seed={args.seed}) -> {args.output}")
    return EXIT_OK


# validate -------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        records, diagnostics = ingestion.parse_records_from_path(args.input, lenient=args.lenient)
    except DataError as exc:
        print(json.dumps({"schema": REPORT_SCHEMA, "tool_version": __version__,
                          "valid": False, "records": 0,
                          "diagnostics": [str(exc)]}, indent=2))
        return EXIT_DATA
    doc = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "valid": not diagnostics,
        "records": len(records),
        "diagnostics": diagnostics,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK if not diagnostics else EXIT_DATA


# wiring ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minkpp", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score records with one detector")
    p.add_argument("--input", required=True, help="mia-stats/v1 JSONL")
    _add_detector_flags(p)
    p.add_argument("--output", required=True, help="scores JSONL to write")
    p.add_argument("--lenient", action="store_true", help="skip bad records instead of aborting")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="AUROC / TPR@FPR / ROC export over scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--fpr", type=float, action="append", default=None,
                   help="FPR budget for TPR reporting (repeatable; default 0.05)")
    p.add_argument("--unknown-as", default="exclude", choices=["exclude", "nonmember", "member"],
                   help="how to treat unknown-labeled examples (default: exclude them)")
    p.add_argument("--roc-out", default=None, help="CSV of (fpr, tpr, threshold) points")
    p.add_argument("--report-out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="AUROC over a (k, variant) grid")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, choices=[Method.MINK.value, Method.MINKPP.value])
    p.add_argument("--k-grid", default="10,20,30,40,50,60,70,80,90,100")
    p.add_argument("--variants", default="raw,sub_mu,div_sigma,full")
    p.add_argument("--sigma-floor", type=float, default=1e-6)
    p.add_argument("--fpr", type=float, default=0.05)
    p.add_argument("--report-out", required=True)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("online", help="windowed scan emitting one verdict per window")
    p.add_argument("--input", required=True)
    _add_detector_flags(p, methods=(Method.LOSS, Method.MINK, Method.MINKPP))
    p.add_argument("--window", type=int, default=32)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--output", required=True, help="verdicts JSONL")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_online)

    toy = sub.add_parser("toy-lm", help="train/score/benchmark the built-in n-gram model")
    toy_sub = toy.add_subparsers(dest="toy_command", required=True)

    p = toy_sub.add_parser("train")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_toy_train)

    p = toy_sub.add_parser("stats")
    p.add_argument("--model", required=True)
    p.add_argument("--texts", required=True, help="one text per line")
    p.add_argument("--label", default="unknown", choices=[l.value for l in Label])
    p.add_argument("--id-prefix", default="text-")
    p.add_argument("--emit-vectors", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_toy_stats)

    p = toy_sub.add_parser("benchmark")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", type=float, default=0.8,
                   help="fraction of the corpus used as the member/training split")
    p.add_argument("--snippet-len", type=int, default=64)
    p.add_argument("--n-snippets", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--emit-vectors", action="store_true")
    p.add_argument("--ref-order", type=int, default=0,
                   help="attach a reference pass from a lower-order model (0 = off)")
    p.add_argument("--lowercase", action="store_true", help="attach a lowercased-text pass")
    p.add_argument("--neighbors", type=int, default=0,
                   help="attach N perturbed-neighbor NLLs per record (0 = off)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_toy_benchmark)

    p = sub.add_parser("validate", help="check a stats file; diagnostics as JSON on stdout")
    p.add_argument("--input", required=True)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "eval" and args.fpr is None:
            args.fpr = [0.05]
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except MiaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort mapping
        logger.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
