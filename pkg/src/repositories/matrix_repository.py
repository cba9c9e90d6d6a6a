"""Click-matrix directories.

Layout of one matrix directory::

    meta    key=value: n_users, n_items, nnz, then free-form provenance
    rows    one line per user, space-separated item indices (may be empty)
    users   optional, one user identifier per line
    items   optional, one item identifier per line

A prepared dataset is ``train/``, ``val/`` and ``test/`` plus ``summary``;
the held-out splits hold ``foldin/``, ``heldout/`` and ``user_index``.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..models.click_matrix import ClickMatrix, HeldoutPair
from ..schemas.data import DatasetSummary
from ..services.exceptions import DataError, NotFoundError, ParseError
from .base import FileRepositoryImpl, read_kv, write_kv
from .interfaces import ArtifactRepository

_RESERVED = ("n_users", "n_items", "nnz")


class PreparedData(NamedTuple):
    train: ClickMatrix
    val: HeldoutPair
    test: HeldoutPair


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def _read_lines(path: Path, expected: int) -> list[str]:
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if len(lines) < expected or any(lines[expected:]):
        raise DataError(f"{path.name}: expected {expected} lines")
    return lines[:expected]


class MatrixRepository(FileRepositoryImpl, ArtifactRepository[ClickMatrix]):
    kind = "matrix"

    def save(self, artifact: ClickMatrix, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        meta: dict[str, object] = {
            "n_users": artifact.n_users,
            "n_items": artifact.n_items,
            "nnz": artifact.nnz,
        }
        write_kv(directory / "meta", meta, sort=False)
        if artifact.meta:
            with (directory / "meta").open("a", encoding="utf-8") as fh:
                for key in sorted(artifact.meta):
                    fh.write(f"{key}={artifact.meta[key]}\n")
        _write_lines(
            directory / "rows",
            [" ".join(str(int(j)) for j in row) for row in artifact.rows()],
        )
        for name, ids in (("users", artifact.user_ids), ("items", artifact.item_ids)):
            path = directory / name
            if ids is not None:
                _write_lines(path, list(ids))
            elif path.exists():
                path.unlink()
        return directory

    def load(self, directory: Path) -> ClickMatrix:
        self._require_dir(directory, "matrix directory")
        meta = read_kv(directory / "meta")
        try:
            n_users, n_items, nnz = (int(meta[key]) for key in _RESERVED)
        except (KeyError, ValueError) as exc:
            raise DataError(f"{directory / 'meta'}: missing or bad counts") from exc
        rows_path = directory / "rows"
        if not rows_path.is_file():
            raise NotFoundError("rows", str(rows_path))
        rows: list[list[int]] = []
        for lineno, line in enumerate(_read_lines(rows_path, n_users), start=1):
            try:
                rows.append([int(tok) for tok in line.split()])
            except ValueError as exc:
                raise ParseError(f"{rows_path}: bad item index", lineno) from exc
        user_ids = self._read_ids(directory / "users", n_users)
        item_ids = self._read_ids(directory / "items", n_items)
        extra = {k: v for k, v in meta.items() if k not in _RESERVED}
        matrix = ClickMatrix.from_rows(
            rows, n_items, user_ids=user_ids, item_ids=item_ids, meta=extra
        )
        if matrix.nnz != nnz:
            raise DataError(f"{directory}: meta says nnz={nnz}, rows hold {matrix.nnz}")
        self._logger.debug("matrix_loaded", path=str(directory), nnz=nnz)
        return matrix

    def exists(self, directory: Path) -> bool:
        return (directory / "meta").is_file() and (directory / "rows").is_file()

    @staticmethod
    def _read_ids(path: Path, expected: int) -> list[str] | None:
        if not path.is_file():
            return None
        return _read_lines(path, expected)


class HeldoutRepository(FileRepositoryImpl, ArtifactRepository[HeldoutPair]):
    kind = "heldout"

    def __init__(self, matrices: MatrixRepository | None = None) -> None:
        super().__init__()
        self.matrices = matrices or MatrixRepository()

    def save(self, artifact: HeldoutPair, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        self.matrices.save(artifact.foldin, directory / "foldin")
        self.matrices.save(artifact.heldout_truth, directory / "heldout")
        index_lines = [str(int(i)) for i in artifact.user_index]
        _write_lines(directory / "user_index", index_lines)
        return directory

    def load(self, directory: Path) -> HeldoutPair:
        self._require_dir(directory, "held-out directory")
        foldin = self.matrices.load(directory / "foldin")
        truth = self.matrices.load(directory / "heldout")
        index_path = directory / "user_index"
        if not index_path.is_file():
            raise NotFoundError("user_index", str(index_path))
        lines = _read_lines(index_path, foldin.n_users)
        return HeldoutPair(foldin, truth, np.array([int(v) for v in lines], np.int64))

    def exists(self, directory: Path) -> bool:
        return self.matrices.exists(directory / "foldin") and self.matrices.exists(
            directory / "heldout"
        )


class DatasetRepository(FileRepositoryImpl, ArtifactRepository[PreparedData]):
    """A prepared dataset: the train matrix and the two held-out splits."""

    kind = "dataset"

    def __init__(self) -> None:
        super().__init__()
        self.matrices = MatrixRepository()
        self.heldout = HeldoutRepository(self.matrices)

    def save(self, artifact: PreparedData, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        self.matrices.save(artifact.train, directory / "train")
        self.heldout.save(artifact.val, directory / "val")
        self.heldout.save(artifact.test, directory / "test")
        self._logger.info(
            "dataset_written",
            path=str(directory),
            train_users=artifact.train.n_users,
            val_users=artifact.val.n_users,
            test_users=artifact.test.n_users,
        )
        return directory

    def load(self, directory: Path) -> PreparedData:
        self._require_dir(directory, "dataset directory")
        return PreparedData(
            self.matrices.load(directory / "train"),
            self.heldout.load(directory / "val"),
            self.heldout.load(directory / "test"),
        )

    def exists(self, directory: Path) -> bool:
        return (
            self.matrices.exists(directory / "train")
            and self.heldout.exists(directory / "val")
            and self.heldout.exists(directory / "test")
        )

    @staticmethod
    def save_summary(summary: DatasetSummary, directory: Path) -> None:
        write_kv(directory / "summary", summary.model_dump(), sort=False)

    @staticmethod
    def load_summary(directory: Path) -> DatasetSummary:
        return DatasetSummary.model_validate(read_kv(directory / "summary"))
