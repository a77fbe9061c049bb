"""mia-extract: checkpoint + text file -> mia-stats/v1 JSONL."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from mia_extract.extract import LABELS, ExtractOptions, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mia-extract", description=__doc__)
    parser.add_argument("--model", required=True, help="checkpoint id or local path")
    parser.add_argument("--texts", required=True, help="input file, one text per line")
    parser.add_argument("--out", required=True, help="stats JSONL to write")
    parser.add_argument("--ref-model", default=None, help="reference checkpoint for refs.ref")
    parser.add_argument("--lowercase", action="store_true",
                        help="add a lowercased-input pass under refs.lowercase")
    parser.add_argument("--emit-vectors", action="store_true",
                        help="include full log-prob vectors (large output)")
    parser.add_argument("--max-len", type=int, default=128)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch", type=int, default=1)
    parser.add_argument("--label", default="unknown", choices=list(LABELS),
                        help="label recorded on every emitted record")
    parser.add_argument("--id-prefix", default="line-")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    options = ExtractOptions(
        max_len=args.max_len,
        device=args.device,
        batch=args.batch,
        emit_vectors=args.emit_vectors,
        lowercase_pass=args.lowercase,
        ref_model_id=args.ref_model,
        label=args.label,
        id_prefix=args.id_prefix,
    )
    with open(args.texts, "r", encoding="utf-8") as f:
        texts = [line.rstrip("\n") for line in f]

    tmp = args.out + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as sink:
            report = extract(args.model, texts, sink, options)
        os.replace(tmp, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"extracted {report.records} records "
          f"({len(report.skipped)} skipped) -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
