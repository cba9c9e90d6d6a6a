"""Shared file helpers for the on-disk artifact formats.

Everything human-readable is a flat ``key=value`` file: one pair per line,
``#`` comments and blank lines ignored, keys written in sorted order so two
identical runs produce identical bytes.
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path
from typing import Any

from ..core.logging_config import get_logger
from ..services.exceptions import NotFoundError, ParseError


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def write_kv(path: Path, values: Mapping[str, Any], *, sort: bool = True) -> None:
    keys = sorted(values) if sort else list(values)
    lines = [f"{key}={format_value(values[key])}" for key in keys]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_kv(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected key=value, got {raw!r}", lineno)
        values[key.strip()] = value.strip()
    return values


def read_kv(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise NotFoundError(path.name, str(path))
    return parse_kv(path.read_text(encoding="utf-8"))


class FileRepositoryImpl:
    """Base for directory-backed repositories; owns a named logger."""

    kind: str = "artifact"

    def __init__(self) -> None:
        self._logger = get_logger(f"repo.{self.kind}")

    @staticmethod
    def _require_dir(directory: Path, what: str) -> Path:
        if not directory.is_dir():
            raise NotFoundError(what, str(directory))
        return directory
