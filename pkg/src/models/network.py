"""Parameters and cached activations of the two-hidden-layer autoencoder."""

from __future__ import annotations

import copy
from dataclasses import dataclass, fields
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from ..services.exceptions import NumericError, ShapeError

HiddenActivation = Literal["tanh"]
OutputActivation = Literal["softmax", "sigmoid"]

TENSOR_NAMES: tuple[str, ...] = (
    "enc_w1",
    "enc_b1",
    "enc_w2",
    "enc_b2",
    "dec_w1",
    "dec_b1",
    "dec_w2",
    "dec_b2",
)

Array = NDArray[np.float64]


@dataclass(eq=False)
class MlpParams:
    """Encoder g_phi (enc_*) and decoder f_theta (dec_*) weights.

    Weights are stored input-major: ``enc_w1`` is I x hidden, so a batch
    ``X`` (n x I) maps to ``X @ enc_w1``.
    """

    enc_w1: Array
    enc_b1: Array
    enc_w2: Array
    enc_b2: Array
    dec_w1: Array
    dec_b1: Array
    dec_w2: Array
    dec_b2: Array
    hidden_activation: HiddenActivation = "tanh"
    output_activation: OutputActivation = "softmax"
    normalize_input: bool = True
    model_kind: str = "awae"

    def __post_init__(self) -> None:
        n_items, hidden = self.enc_w1.shape
        h = self.dec_w1.shape[0]
        expected = {
            "enc_w1": (n_items, hidden),
            "enc_b1": (hidden,),
            "enc_w2": (hidden, self.encoder_width(h)),
            "enc_b2": (self.encoder_width(h),),
            "dec_w1": (h, hidden),
            "dec_b1": (hidden,),
            "dec_w2": (hidden, n_items),
            "dec_b2": (n_items,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ShapeError(name, shape, actual)
        if h > n_items:
            raise ShapeError("latent_dim <= n_items", n_items, h)

    @staticmethod
    def encoder_width(latent_dim: int) -> int:
        return latent_dim

    @property
    def n_items(self) -> int:
        return int(self.enc_w1.shape[0])

    @property
    def hidden_dim(self) -> int:
        return int(self.enc_w1.shape[1])

    @property
    def latent_dim(self) -> int:
        return int(self.dec_w1.shape[0])

    def tensors(self) -> dict[str, Array]:
        """Live references to the eight parameter arrays, keyed by name."""
        return {name: getattr(self, name) for name in TENSOR_NAMES}

    def settings(self) -> dict[str, object]:
        """Non-tensor fields (activations, flags, kind)."""
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in TENSOR_NAMES
        }

    def copy(self) -> MlpParams:
        return copy.deepcopy(self)

    def check_finite(self) -> None:
        for name, tensor in self.tensors().items():
            if not np.all(np.isfinite(tensor)):
                raise NumericError(f"non-finite values in {name}", {"tensor": name})


@dataclass(eq=False)
class VaeParams(MlpParams):
    """Mult-VAE parameters: the encoder emits a mean and a log-variance per dim."""

    model_kind: str = "vae"
    kl_anneal_cap: float = 0.2
    anneal_steps: int = 20000

    def __post_init__(self) -> None:
        super().__post_init__()
        if not 0.0 <= self.kl_anneal_cap <= 1.0:
            raise NumericError("kl_anneal_cap must lie in [0, 1]")

    @staticmethod
    def encoder_width(latent_dim: int) -> int:
        return 2 * latent_dim


@dataclass(frozen=True, eq=False)
class ForwardTape:
    """Activations cached by a forward pass, replayed by the backward pass.

    ``enc_out`` is the encoder's final layer; ``z`` is what the decoder sees
    (``enc_out`` plus training noise, or a reparameterized sample).
    """

    x_in: Array
    enc_pre: Array
    enc_hidden: Array
    enc_out: Array
    z: Array
    dropout_mask: Array | None = None
    noise: Array | None = None
    dec_pre: Array | None = None
    dec_hidden: Array | None = None
    logits: Array | None = None
    output: Array | None = None
    log_output: Array | None = None

    @property
    def n(self) -> int:
        return int(self.x_in.shape[0])

    @property
    def decoded(self) -> bool:
        return self.output is not None
