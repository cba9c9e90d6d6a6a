"""``awae train``: fit one model on a prepared dataset."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..core.logging_config import get_logger
from ..repositories.matrix_repository import DatasetRepository
from ..services.baseline_service import fit_model
from .common import add_config_arguments, default_run_dir, load_config

logger = get_logger("cli.train")


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train aWAE or a baseline")
    parser.add_argument("data_dir", type=Path, help="Prepared dataset directory")
    add_config_arguments(parser)
    parser.add_argument(
        "--run-dir",
        type=Path,
        help="Output directory (default RUN_ROOT/<model>_<seed>)",
    )
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    cfg = load_config(args.model, args.config, args.overrides)
    data = DatasetRepository().load(args.data_dir)
    run_dir = args.run_dir or default_run_dir(args.model, cfg.seed)
    result = fit_model(
        args.model,
        data.train,
        data.val,
        cfg,
        run_dir=run_dir,
        source={"data_dir": str(args.data_dir)},
    )
    logger.info("run_written", run_dir=str(run_dir), best_epoch=result.log.best_epoch)
    print(f"run_dir={run_dir}")
    print(f"best_epoch={result.log.best_epoch}")
    print(f"{cfg.early_stop_metric}={result.log.best_value}")
    return 0
