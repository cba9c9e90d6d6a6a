from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..services.exceptions import NumericError, ShapeError

Array = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class SparseCodeState:
    """Dictionary A (K x h), batch codes S (n x K) and their ADMM auxiliaries.

    ``h_aux``/``u_dual`` split the A-update (H is the unit-norm copy of A),
    ``b_aux``/``v_dual`` split the S-update (B is the sparse copy of S).
    """

    s: Array
    a: Array
    h_aux: Array
    u_dual: Array
    b_aux: Array
    v_dual: Array
    rho: float = 1.0

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise NumericError(f"ADMM penalty rho must be > 0, got {self.rho}")
        k, h = self.a.shape
        for name in ("h_aux", "u_dual"):
            if getattr(self, name).shape != (k, h):
                raise ShapeError(name, (k, h), getattr(self, name).shape)
        n = self.s.shape[0]
        if self.s.shape != (n, k):
            raise ShapeError("s", (n, k), self.s.shape)
        for name in ("b_aux", "v_dual"):
            if getattr(self, name).shape != (n, k):
                raise ShapeError(name, (n, k), getattr(self, name).shape)

    @property
    def k_atoms(self) -> int:
        return int(self.a.shape[0])

    @property
    def latent_dim(self) -> int:
        return int(self.a.shape[1])

    @property
    def n_rows(self) -> int:
        return int(self.s.shape[0])

    def check_finite(self) -> None:
        for name in ("s", "a", "h_aux", "u_dual", "b_aux", "v_dual"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise NumericError(f"non-finite values in sparse-code state {name}")
