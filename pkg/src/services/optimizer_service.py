"""Adaptive moment estimation for the network tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..models.network import MlpParams
from .exceptions import ShapeError

Array = NDArray[np.float64]


@dataclass
class AdamState:
    """First/second moment estimates per tensor and the step counter."""

    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_params(cls, params: MlpParams) -> AdamState:
        tensors = params.tensors()
        return cls(
            m={k: np.zeros_like(t) for k, t in tensors.items()},
            v={k: np.zeros_like(t) for k, t in tensors.items()},
        )


def adam_step(
    params: MlpParams,
    grads: dict[str, Array],
    state: AdamState,
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[MlpParams, AdamState]:
    """One bias-corrected update; ``params`` tensors are replaced in place."""
    beta1, beta2 = betas
    step = state.step + 1
    bc1 = 1.0 - beta1**step
    bc2 = 1.0 - beta2**step
    for name, tensor in params.tensors().items():
        g = grads[name]
        if g.shape != tensor.shape:
            raise ShapeError(f"gradient {name}", tensor.shape, g.shape)
        m = beta1 * state.m[name] + (1.0 - beta1) * g
        v = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
        state.m[name], state.v[name] = m, v
        update = (lr / bc1) * m / (np.sqrt(v / bc2) + eps)
        setattr(params, name, tensor - update)
    state.step = step
    return params, state


class Adam:
    """Holds hyperparameters and state for one parameter set."""

    def __init__(
        self,
        params: MlpParams,
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = AdamState.for_params(params)

    def step(self, params: MlpParams, grads: dict[str, Array]) -> MlpParams:
        params, self.state = adam_step(
            params, grads, self.state, self.lr, self.betas, self.eps
        )
        return params
