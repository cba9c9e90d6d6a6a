from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..services.exceptions import DataError


@dataclass(frozen=True, eq=False)
class RankingResult:
    """One user's ranked item list ``w(1..)`` and held-out truth set."""

    ranked_items: NDArray[np.int64]
    truth: frozenset[int]

    def __post_init__(self) -> None:
        if not self.truth:
            raise DataError("ranking truth set must be non-empty")
        if len(np.unique(self.ranked_items)) != len(self.ranked_items):
            raise DataError("ranked items must not repeat")

    @classmethod
    def of(
        cls, ranked_items: list[int] | NDArray[np.int64], truth: set[int]
    ) -> RankingResult:
        return cls(np.asarray(ranked_items, dtype=np.int64), frozenset(truth))

    def hits(self, r: int) -> NDArray[np.bool_]:
        top = self.ranked_items[:r]
        return np.fromiter((int(i) in self.truth for i in top), bool, len(top))
