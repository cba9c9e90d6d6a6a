"""``awae sweep``: train and evaluate once per value of one parameter."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..core.config import get_settings
from ..schemas.training import SweepPoint, train_config_for
from ..services.report_service import sweep_frame
from ..tasks.sweep_tasks import flat_number, run_sweep
from .common import (
    add_config_arguments,
    config_values,
    float_list,
    int_list,
)


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "sweep", help="One train + evaluate run per parameter value"
    )
    parser.add_argument("data_dir", type=Path)
    parser.add_argument("--param", required=True, help="Configuration key to vary")
    parser.add_argument("--values", type=float_list, required=True)
    add_config_arguments(parser)
    parser.add_argument("--r", type=int_list, default=[10])
    parser.add_argument("--split", choices=("val", "test"), default="test")
    parser.add_argument(
        "--workers", type=int, default=1, help="Parallel worker processes"
    )
    parser.add_argument(
        "--run-root", type=Path, help="Parent of the per-value run directories"
    )
    parser.add_argument("--out", type=Path, help="Also write the CSV here")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    values = {k: str(v) for k, v in config_values(args.config, args.overrides).items()}
    # validates the base configuration and the swept key before any training
    for value in args.values:
        train_config_for(args.model, {**values, args.param: flat_number(value)})
    root = args.run_root or get_settings().RUN_ROOT / f"sweep_{args.model}_{args.param}"
    points = [
        SweepPoint(
            data_dir=str(args.data_dir),
            run_dir=str(root / f"{args.param}_{value:g}"),
            model_kind=args.model,
            config=values,
            param=args.param,
            value=value,
            r_list=args.r,
            split=args.split,
        )
        for value in args.values
    ]
    frame = sweep_frame(run_sweep(points, args.workers))
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False)
    print(frame.to_csv(index=False), end="")
    return 0

