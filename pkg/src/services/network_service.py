"""Forward and backward passes of the two-hidden-layer autoencoder.

Batches are row-major ``n x I`` float64 arrays. The encoder computes
``enc_out = tanh(x @ enc_w1 + enc_b1) @ enc_w2 + enc_b2`` and the decoder
``logits = tanh(z @ dec_w1 + dec_b1) @ dec_w2 + dec_b2``; gradients are
derived by hand for exactly this architecture.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..models.network import ForwardTape, MlpParams, VaeParams
from .exceptions import NumericError, ShapeError

Array = NDArray[np.float64]
Grads = dict[str, Array]


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> Array:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(
    n_items: int,
    latent_dim: int,
    seed: int,
    *,
    hidden_dim: int = 600,
    params_cls: type[MlpParams] = MlpParams,
    **settings: Any,
) -> MlpParams:
    """Glorot-uniform weights, zero biases; deterministic in ``seed``."""
    if latent_dim < 1 or hidden_dim < 1:
        raise ShapeError("latent_dim/hidden_dim >= 1", 1, min(latent_dim, hidden_dim))
    rng = np.random.default_rng(seed)
    width = params_cls.encoder_width(latent_dim)
    return params_cls(
        enc_w1=glorot_uniform(rng, n_items, hidden_dim),
        enc_b1=np.zeros(hidden_dim),
        enc_w2=glorot_uniform(rng, hidden_dim, width),
        enc_b2=np.zeros(width),
        dec_w1=glorot_uniform(rng, latent_dim, hidden_dim),
        dec_b1=np.zeros(hidden_dim),
        dec_w2=glorot_uniform(rng, hidden_dim, n_items),
        dec_b2=np.zeros(n_items),
        **settings,
    )


# -- activations -------------------------------------------------------------


def softmax(logits: Array) -> Array:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def log_softmax(logits: Array) -> Array:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def sigmoid(logits: Array) -> Array:
    return np.exp(-np.logaddexp(0.0, -logits))


def log_sigmoid(logits: Array) -> Array:
    return -np.logaddexp(0.0, -logits)


def normalize_rows(x: Array) -> Array:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms > 0, norms, 1.0)


# -- forward -----------------------------------------------------------------


def encode(
    params: MlpParams,
    batch: Array,
    *,
    input_dropout: float = 0.0,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> ForwardTape:
    """Encoder half. Dropout and latent noise apply in training mode only."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.n_items:
        raise ShapeError("batch", ("n", params.n_items), x.shape)
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite values in the encoder input")
    if params.normalize_input:
        x = normalize_rows(x)
    mask = None
    if training and input_dropout > 0:
        if rng is None:
            raise NumericError("training-mode dropout needs a random generator")
        keep = rng.random(x.shape) >= input_dropout
        mask = keep / (1.0 - input_dropout)
        x = x * mask
    enc_pre = x @ params.enc_w1 + params.enc_b1
    enc_hidden = np.tanh(enc_pre)
    enc_out = enc_hidden @ params.enc_w2 + params.enc_b2
    noise = None
    z = enc_out
    if training and noise_std > 0 and not isinstance(params, VaeParams):
        if rng is None:
            raise NumericError("training-mode latent noise needs a random generator")
        noise = rng.standard_normal(enc_out.shape) * noise_std
        z = enc_out + noise
    return ForwardTape(
        x_in=x,
        enc_pre=enc_pre,
        enc_hidden=enc_hidden,
        enc_out=enc_out,
        z=z,
        dropout_mask=mask,
        noise=noise,
    )


def decode(params: MlpParams, tape: ForwardTape) -> ForwardTape:
    if tape.z.shape != (tape.n, params.latent_dim):
        raise ShapeError("z", (tape.n, params.latent_dim), tape.z.shape)
    dec_pre = tape.z @ params.dec_w1 + params.dec_b1
    dec_hidden = np.tanh(dec_pre)
    logits = dec_hidden @ params.dec_w2 + params.dec_b2
    if params.output_activation == "softmax":
        log_output = log_softmax(logits)
        output = np.exp(log_output)
    else:
        log_output = log_sigmoid(logits)
        output = sigmoid(logits)
    return replace(
        tape,
        dec_pre=dec_pre,
        dec_hidden=dec_hidden,
        logits=logits,
        output=output,
        log_output=log_output,
    )


def forward(params: MlpParams, batch: Array, **encode_kwargs: Any) -> ForwardTape:
    return decode(params, encode(params, batch, **encode_kwargs))


# -- backward ----------------------------------------------------------------


def decoder_backward(
    params: MlpParams, tape: ForwardTape, d_output: Array
) -> tuple[Grads, Array]:
    """Decoder gradients and dLoss/dz.

    ``d_output`` is taken w.r.t. the logits for softmax output (the fused
    multinomial form) and w.r.t. the activated output for sigmoid output.
    """
    if not tape.decoded:
        raise NumericError("backward needs a decoded tape")
    assert tape.dec_hidden is not None and tape.output is not None
    if d_output.shape != tape.output.shape:
        raise ShapeError("d_output", tape.output.shape, d_output.shape)
    if params.output_activation == "softmax":
        d_logits = d_output
    else:
        d_logits = d_output * tape.output * (1.0 - tape.output)
    d_hidden = d_logits @ params.dec_w2.T
    d_pre = d_hidden * (1.0 - tape.dec_hidden**2)
    grads = {
        "dec_w2": tape.dec_hidden.T @ d_logits,
        "dec_b2": d_logits.sum(axis=0),
        "dec_w1": tape.z.T @ d_pre,
        "dec_b1": d_pre.sum(axis=0),
    }
    return grads, d_pre @ params.dec_w1.T


def encoder_backward(params: MlpParams, tape: ForwardTape, d_enc_out: Array) -> Grads:
    """Encoder gradients given dLoss/d(encoder output)."""
    if d_enc_out.shape != tape.enc_out.shape:
        raise ShapeError("d_enc_out", tape.enc_out.shape, d_enc_out.shape)
    d_hidden = d_enc_out @ params.enc_w2.T
    d_pre = d_hidden * (1.0 - tape.enc_hidden**2)
    return {
        "enc_w2": tape.enc_hidden.T @ d_enc_out,
        "enc_b2": d_enc_out.sum(axis=0),
        # x_in already carries the dropout mask of the forward pass
        "enc_w1": tape.x_in.T @ d_pre,
        "enc_b1": d_pre.sum(axis=0),
    }


def backward(
    params: MlpParams,
    tape: ForwardTape,
    d_output: Array,
    d_z_extra: Array | None = None,
) -> Grads:
    """Gradients for all eight tensors; ``d_z_extra`` attaches at z."""
    dec_grads, d_z = decoder_backward(params, tape, d_output)
    if d_z_extra is not None:
        if d_z_extra.shape != d_z.shape:
            raise ShapeError("d_z_extra", d_z.shape, d_z_extra.shape)
        d_z = d_z + d_z_extra
    return {**encoder_backward(params, tape, d_z), **dec_grads}


# -- inference ---------------------------------------------------------------


def predict_scores(
    params: MlpParams, foldin_rows: Array, *, mask: bool = True
) -> Array:
    """Evaluation-mode decoder output for fold-in rows.

    Fold-in items are set to ``-inf`` so they rank below every other item.
    A VAE decodes its posterior mean.
    """
    rows = np.asarray(foldin_rows, dtype=np.float64)
    tape = encode(params, rows, training=False)
    if isinstance(params, VaeParams):
        tape = replace(tape, z=tape.enc_out[:, : params.latent_dim])
    scores = decode(params, tape).output
    assert scores is not None
    scores = scores.copy()
    if mask:
        scores[rows > 0] = -np.inf
    return scores
