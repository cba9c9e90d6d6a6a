"""``awae synthesize``: write generator output in the ingestion format."""

from __future__ import annotations

import argparse
from pathlib import Path

from ..services.data_service import export_interactions, synthesize
from .prepare import add_generator_arguments


def add_parser(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "synthesize", help="Write a clustered synthetic interaction file"
    )
    parser.add_argument("out_file", type=Path)
    parser.add_argument("--seed", type=int, default=0)
    add_generator_arguments(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    matrix = synthesize(
        args.users, args.items, args.clusters, args.clicks, seed=args.seed
    )
    path = export_interactions(matrix, args.out_file)
    print(f"wrote {matrix.nnz} interactions to {path}")
    return 0
