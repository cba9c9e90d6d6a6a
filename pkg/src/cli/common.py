"""Argument parsing helpers shared by the commands."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
from pathlib import Path
from typing import Any, cast

from ..core.config import get_settings
from ..repositories.base import read_kv
from ..repositories.run_log_repository import RunLogRepository
from ..schemas.training import ModelKind, TrainConfig, train_config_for
from ..services.exceptions import ConfigError, NotFoundError, ParseError

MODEL_KINDS = ("awae", "dae", "vae")
DEFAULT_R = "1,5,10,20,50,100"


def int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def parse_assignments(pairs: Sequence[str] | None) -> dict[str, str]:
    """``key=value`` flags to a dict; later flags win."""
    values: dict[str, str] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {pair!r}", "set")
        values[key.strip()] = value.strip()
    return values


def config_values(
    config: Path | None, overrides: Sequence[str] | None
) -> dict[str, Any]:
    """Config file values merged with ``--set`` overrides."""
    values: dict[str, Any] = {}
    if config is not None:
        try:
            values.update(read_kv(config))
        except ParseError as exc:
            raise ConfigError(f"{config}: {exc.message}", "config") from exc
    values.update(parse_assignments(overrides))
    return values


def load_config(
    model_kind: str, config: Path | None, overrides: Sequence[str] | None
) -> TrainConfig:
    values = config_values(config, overrides)
    return train_config_for(cast(ModelKind, model_kind), values)


def default_run_dir(model_kind: str, seed: int) -> Path:
    return get_settings().RUN_ROOT / f"{model_kind}_{seed}"


def run_data_dir(run_dir: Path, data: Path | None) -> Path:
    """Explicit ``--data`` or the dataset recorded when the run trained."""
    if data is not None:
        return data
    try:
        source = RunLogRepository(run_dir).read_source()
    except NotFoundError as exc:
        raise ConfigError(
            f"{run_dir} records no dataset; pass --data", "data"
        ) from exc
    if "data_dir" not in source:
        raise ConfigError(f"{run_dir} records no dataset; pass --data", "data")
    return Path(source["data_dir"])


def add_eval_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data", type=Path, help="Dataset directory (default: the run's dataset)"
    )
    parser.add_argument("--split", choices=("val", "test"), default="test")
    parser.add_argument(
        "--r",
        type=int_list,
        default=int_list(DEFAULT_R),
        help=f"Comma-separated cutoffs (default {DEFAULT_R})",
    )
    parser.add_argument("--batch-size", type=int, default=1000)


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="KEY=VALUE",
        help="Override one configuration key (repeatable)",
    )
    parser.add_argument("--model", choices=MODEL_KINDS, default="awae")
