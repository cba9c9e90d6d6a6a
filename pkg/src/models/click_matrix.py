"""Binary user x item click matrices in compressed sparse row layout."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from ..services.exceptions import DataError, ShapeError


def _row_ids(indptr: NDArray[Any]) -> NDArray[np.int64]:
    return np.repeat(np.arange(len(indptr) - 1, dtype=np.int64), np.diff(indptr))


@dataclass(frozen=True, eq=False)
class ClickMatrix:
    """Immutable binary interaction matrix X (N users x M items).

    Row ``i`` stores the strictly increasing item indices user ``i`` clicked;
    stored values are always 1.
    """

    csr: sp.csr_matrix
    user_ids: tuple[str, ...] | None = None
    item_ids: tuple[str, ...] | None = None
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        csr = self.csr
        n_users, n_items = csr.shape
        if csr.nnz and not np.all(csr.data == 1):
            raise DataError("click matrix must be binary")
        indices = csr.indices
        if indices.size and (indices.min() < 0 or indices.max() >= n_items):
            raise DataError("item index out of range")
        rows = _row_ids(csr.indptr)
        same_row = rows[1:] == rows[:-1]
        if np.any(same_row & (indices[1:] <= indices[:-1])):
            raise DataError("row indices must be strictly increasing")
        if self.user_ids is not None and len(self.user_ids) != n_users:
            raise ShapeError("user vocabulary", n_users, len(self.user_ids))
        if self.item_ids is not None and len(self.item_ids) != n_items:
            raise ShapeError("item vocabulary", n_items, len(self.item_ids))

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Iterable[int]],
        n_items: int,
        *,
        user_ids: Sequence[str] | None = None,
        item_ids: Sequence[str] | None = None,
        meta: Mapping[str, str] | None = None,
    ) -> ClickMatrix:
        """Build from per-user item lists (duplicates collapse, order is free)."""
        cleaned = [np.unique(np.asarray(list(r), dtype=np.int64)) for r in rows]
        counts = np.array([len(r) for r in cleaned], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        indices = (
            np.concatenate(cleaned).astype(np.int64)
            if cleaned
            else np.zeros(0, dtype=np.int64)
        )
        data = np.ones(indices.size, dtype=np.float64)
        csr = sp.csr_matrix((data, indices, indptr), shape=(len(cleaned), n_items))
        return cls(
            csr,
            tuple(user_ids) if user_ids is not None else None,
            tuple(item_ids) if item_ids is not None else None,
            dict(meta or {}),
        )

    @classmethod
    def from_pairs(
        cls,
        users: NDArray[np.int64],
        items: NDArray[np.int64],
        shape: tuple[int, int],
        **kwargs: Any,
    ) -> ClickMatrix:
        """Build from coordinate pairs; duplicate pairs collapse to one click."""
        coo = sp.coo_matrix(
            (np.ones(len(users), dtype=np.float64), (users, items)), shape=shape
        )
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        csr.data[:] = 1.0
        return cls(csr, **kwargs)

    @property
    def n_users(self) -> int:
        return int(self.csr.shape[0])

    @property
    def n_items(self) -> int:
        return int(self.csr.shape[1])

    @property
    def nnz(self) -> int:
        return int(self.csr.nnz)

    @property
    def user_click_counts(self) -> NDArray[np.int64]:
        return np.diff(self.csr.indptr).astype(np.int64)

    def row(self, i: int) -> NDArray[np.int64]:
        start, stop = self.csr.indptr[i], self.csr.indptr[i + 1]
        return self.csr.indices[start:stop].astype(np.int64)

    def rows(self) -> list[NDArray[np.int64]]:
        return [self.row(i) for i in range(self.n_users)]

    def dense(
        self, user_index: NDArray[np.int64] | None = None
    ) -> NDArray[np.float64]:
        """Dense float64 rows for a batch of users (all users when None)."""
        block = self.csr if user_index is None else self.csr[user_index]
        return np.asarray(block.toarray(), dtype=np.float64)

    def take(self, user_index: NDArray[np.int64]) -> ClickMatrix:
        """Sub-matrix of the given users, full item universe kept."""
        user_ids = (
            tuple(self.user_ids[i] for i in user_index)
            if self.user_ids is not None
            else None
        )
        sub = self.csr[np.asarray(user_index, dtype=np.int64)]
        return ClickMatrix(sp.csr_matrix(sub), user_ids, self.item_ids, dict(self.meta))

    def item_counts(self) -> NDArray[np.int64]:
        """Distinct users per item."""
        return np.bincount(self.csr.indices, minlength=self.n_items).astype(np.int64)

    def equals(self, other: ClickMatrix) -> bool:
        return (
            self.csr.shape == other.csr.shape
            and np.array_equal(self.csr.indptr, other.csr.indptr)
            and np.array_equal(self.csr.indices, other.csr.indices)
            and self.user_ids == other.user_ids
            and self.item_ids == other.item_ids
        )


@dataclass(frozen=True, eq=False)
class HeldoutPair:
    """Held-out users: fold-in clicks fed to the model and the truth I_u to rank.

    Row ``k`` of both matrices belongs to user ``user_index[k]`` of the source
    matrix.
    """

    foldin: ClickMatrix
    heldout_truth: ClickMatrix
    user_index: NDArray[np.int64]

    def __post_init__(self) -> None:
        if self.foldin.csr.shape != self.heldout_truth.csr.shape:
            raise ShapeError(
                "held-out truth", self.foldin.csr.shape, self.heldout_truth.csr.shape
            )
        if len(self.user_index) != self.foldin.n_users:
            raise ShapeError(
                "held-out user index", self.foldin.n_users, len(self.user_index)
            )
        if self.foldin.csr.multiply(self.heldout_truth.csr).nnz:
            raise DataError("fold-in and held-out clicks must be disjoint")
        if np.any(self.heldout_truth.user_click_counts == 0):
            raise DataError("every held-out user needs a non-empty truth set")

    @property
    def n_users(self) -> int:
        return self.foldin.n_users

    @property
    def n_items(self) -> int:
        return self.foldin.n_items
