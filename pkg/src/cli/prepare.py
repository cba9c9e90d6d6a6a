"""``awae prepare``: ingest or synthesize, split and write a dataset."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..repositories.matrix_repository import DatasetRepository, PreparedData
from ..schemas.data import IngestThresholds
from ..services.data_service import ingest_file, split, summarize, synthesize
from ..services.exceptions import ConfigError
from .common import float_list


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "prepare", help="Build train/val/test splits from interactions"
    )
    parser.add_argument("out_dir", type=Path, help="Dataset directory to write")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="user,item[,value] text file")
    source.add_argument(
        "--synthetic", action="store_true", help="Use the clustered generator"
    )
    parser.add_argument("--protocol", choices=("ml20m", "netflix", "lastfm"))
    parser.add_argument("--min-value", type=float)
    parser.add_argument("--min-user-clicks", type=int)
    parser.add_argument("--min-item-audience", type=int)
    parser.add_argument("--ratios", type=float_list, default=[0.8, 0.1, 0.1])
    parser.add_argument("--foldin-fraction", type=float, default=0.8)
    parser.add_argument("--seed", type=int, default=0)
    add_generator_arguments(parser)
    parser.set_defaults(func=run)


def add_generator_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--users", type=int, default=1000)
    parser.add_argument("--items", type=int, default=300)
    parser.add_argument("--clusters", type=int, default=5)
    parser.add_argument("--clicks", type=int, default=20)


def run(args: argparse.Namespace) -> int:
    if args.synthetic:
        if args.protocol:
            raise ConfigError("--protocol applies to --input only", "protocol")
        matrix = synthesize(
            args.users, args.items, args.clusters, args.clicks, seed=args.seed
        )
    else:
        thresholds = IngestThresholds.for_protocol(
            args.protocol,
            min_value=args.min_value,
            min_user_clicks=args.min_user_clicks,
            min_item_audience=args.min_item_audience,
        )
        matrix = ingest_file(args.input, thresholds)
    parts = split(matrix, args.ratios, args.foldin_fraction, seed=args.seed)
    repository = DatasetRepository()
    repository.save(PreparedData(*parts), args.out_dir)
    summary = summarize(matrix, *parts)
    repository.save_summary(summary, args.out_dir)
    for key, value in summary.model_dump().items():
        print(f"{key}={value}")
    return 0
