"""Run directories: configuration, CSV training logs and the best marker.

``steps.csv``, ``admm.csv`` and ``epochs.csv`` are appended as training
progresses and are byte-identical across runs with the same seed;
``timing.csv`` holds wall-clock seconds and is not.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import pandas as pd

from ..schemas.training import AdmmRecord, EpochRecord, StepRecord
from ..services.exceptions import NotFoundError
from .base import FileRepositoryImpl, read_kv, write_kv

STEP_COLUMNS = ("epoch", "step", "reconstruction", "smv", "mi", "sparse", "total")
ADMM_COLUMNS = (
    "epoch",
    "step",
    "target",
    "iterations",
    "primal_residual",
    "dual_residual",
    "converged",
)
EPOCH_COLUMNS = ("epoch", "metric", "value", "improved")
TIMING_COLUMNS = ("epoch", "seconds")

_TABLES = {
    "steps": STEP_COLUMNS,
    "admm": ADMM_COLUMNS,
    "epochs": EPOCH_COLUMNS,
    "timing": TIMING_COLUMNS,
}


def epoch_dir_name(epoch: int) -> str:
    return f"epoch_{epoch}"


class RunLogRepository(FileRepositoryImpl):
    """Everything a training run writes, rooted at ``run_dir``."""

    kind = "run"

    def __init__(self, run_dir: Path) -> None:
        super().__init__()
        self.run_dir = run_dir

    def start(self, config: Mapping[str, Any], source: Mapping[str, Any]) -> None:
        """Create the run directory, write provenance and fresh CSV headers."""
        self.run_dir.mkdir(parents=True, exist_ok=True)
        write_kv(self.run_dir / "config", config)
        write_kv(self.run_dir / "source", source)
        for name, columns in _TABLES.items():
            with self._path(name).open("w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerow(columns)
        best = self.run_dir / "best"
        if best.exists():
            best.unlink()

    def append_steps(self, records: Iterable[StepRecord]) -> None:
        self._append("steps", STEP_COLUMNS, (r.model_dump() for r in records))

    def append_admm(self, records: Iterable[AdmmRecord]) -> None:
        self._append("admm", ADMM_COLUMNS, (r.model_dump() for r in records))

    def append_epoch(self, record: EpochRecord, seconds: float) -> None:
        self._append("epochs", EPOCH_COLUMNS, [record.model_dump()])
        timing = {"epoch": record.epoch, "seconds": seconds}
        self._append("timing", TIMING_COLUMNS, [timing])

    def checkpoint_dir(self, epoch: int) -> Path:
        return self.run_dir / epoch_dir_name(epoch)

    def mark_best(self, epoch: int) -> None:
        (self.run_dir / "best").write_text(f"{epoch_dir_name(epoch)}\n", "utf-8")

    def best_checkpoint(self) -> Path:
        marker = self.run_dir / "best"
        if not marker.is_file():
            raise NotFoundError("best checkpoint marker", str(marker))
        path = self.run_dir / marker.read_text(encoding="utf-8").strip()
        if not path.is_dir():
            raise NotFoundError("best checkpoint", str(path))
        return path

    def read_config(self) -> dict[str, str]:
        return read_kv(self.run_dir / "config")

    def read_source(self) -> dict[str, str]:
        return read_kv(self.run_dir / "source")

    def read_table(self, name: str) -> pd.DataFrame:
        path = self._path(name)
        if not path.is_file():
            raise NotFoundError(f"{name} log", str(path))
        return pd.read_csv(path)

    def _path(self, name: str) -> Path:
        return self.run_dir / f"{name}.csv"

    def _append(
        self,
        name: str,
        columns: tuple[str, ...],
        rows: Iterable[Mapping[str, Any]],
    ) -> None:
        with self._path(name).open("a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerows([_cell(row[c]) for c in columns] for row in rows)


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value
