"""``awae compare``: one merged metric table for several runs."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..repositories.matrix_repository import DatasetRepository
from ..schemas.evaluation import MetricTable
from ..services.baseline_service import evaluate_popularity
from ..services.exceptions import ConfigError
from ..services.report_service import compare_rows, write_compare
from .common import add_eval_arguments
from .evaluate import evaluate_run

POPULARITY = "popularity"


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "compare", help="Evaluate several runs into one table"
    )
    parser.add_argument(
        "runs",
        nargs="+",
        metavar="NAME=RUN_DIR",
        help=f"Named run directories; RUN_DIR may be '{POPULARITY}' with --data",
    )
    add_eval_arguments(parser)
    parser.add_argument("--out", type=Path, help="Also write the table as CSV")
    parser.add_argument("--xlsx", type=Path, help="Also write an .xlsx workbook")
    parser.set_defaults(func=run)


def parse_runs(pairs: list[str]) -> dict[str, str]:
    runs: dict[str, str] = {}
    for pair in pairs:
        name, sep, target = pair.partition("=")
        if not sep or not name or not target:
            raise ConfigError(f"expected NAME=RUN_DIR, got {pair!r}", "runs")
        if name in runs:
            raise ConfigError(f"duplicate model name {name!r}", "runs")
        runs[name] = target
    return runs


def _popularity(data: Path | None, split: str, args: argparse.Namespace) -> MetricTable:
    if data is None:
        raise ConfigError(f"'{POPULARITY}' needs --data", "data")
    prepared = DatasetRepository().load(data)
    heldout = prepared.val if split == "val" else prepared.test
    return evaluate_popularity(
        prepared.train, heldout, args.r, batch_size=args.batch_size
    )


def run(args: argparse.Namespace) -> int:
    tables: dict[str, MetricTable] = {}
    for name, target in parse_runs(args.runs).items():
        if target == POPULARITY:
            tables[name] = _popularity(args.data, args.split, args)
        else:
            tables[name] = evaluate_run(
                Path(target),
                args.data,
                args.split,
                args.r,
                batch_size=args.batch_size,
            )
    text = write_compare(compare_rows(tables), args.out, args.xlsx)
    print(text, end="")
    return 0
