"""``awae evaluate``: rank held-out users with a run's best checkpoint."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..repositories.matrix_repository import HeldoutRepository
from ..schemas.evaluation import MetricTable
from ..services.ranking_service import evaluate
from ..services.report_service import render_table, write_metric_table
from ..services.trainer_service import load_best
from .common import add_eval_arguments, run_data_dir


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("evaluate", help="Recall@R / NDCG@R of a run")
    parser.add_argument("run_dir", type=Path)
    add_eval_arguments(parser)
    parser.add_argument(
        "--per-user", action="store_true", help="Also dump per-user metrics"
    )
    parser.add_argument(
        "--out", type=Path, help="Write <out>.csv and <out>.json (and per-user CSV)"
    )
    parser.set_defaults(func=run)


def evaluate_run(
    run_dir: Path,
    data: Path | None,
    split: str,
    r_list: list[int],
    *,
    batch_size: int = 1000,
    per_user: bool = False,
) -> MetricTable:
    heldout = HeldoutRepository().load(run_data_dir(run_dir, data) / split)
    params = load_best(run_dir).params
    return evaluate(params, heldout, r_list, batch_size=batch_size, per_user=per_user)


def run(args: argparse.Namespace) -> int:
    table = evaluate_run(
        args.run_dir,
        args.data,
        args.split,
        args.r,
        batch_size=args.batch_size,
        per_user=args.per_user,
    )
    print(render_table(table), end="")
    if args.out is not None:
        write_metric_table(table, args.out)
    return 0
