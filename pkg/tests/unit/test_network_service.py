"""Forward passes, hand-derived gradients and scoring of the autoencoder."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from src.models.network import MlpParams, VaeParams
from src.services.exceptions import NumericError, ShapeError
from src.services.network_service import (
    backward,
    decode,
    encode,
    forward,
    init_params,
    predict_scores,
    softmax,
)
from tests.gradcheck import numeric_grad, rel_error


def _zero_params(n_items: int, latent: int, hidden: int, **kw) -> MlpParams:
    return MlpParams(
        enc_w1=np.zeros((n_items, hidden)),
        enc_b1=np.zeros(hidden),
        enc_w2=np.zeros((hidden, latent)),
        enc_b2=np.zeros(latent),
        dec_w1=np.zeros((latent, hidden)),
        dec_b1=np.zeros(hidden),
        dec_w2=np.zeros((hidden, n_items)),
        dec_b2=np.zeros(n_items),
        **kw,
    )


def test_init_params_is_deterministic_and_bounded():
    a = init_params(1000, 20, seed=7, hidden_dim=600)
    b = init_params(1000, 20, seed=7, hidden_dim=600)
    for name, tensor in a.tensors().items():
        assert np.array_equal(tensor, b.tensors()[name])
    limit = math.sqrt(6 / (1000 + 600))
    assert np.abs(a.enc_w1).max() <= limit
    assert not a.enc_b1.any() and not a.dec_b2.any()
    sigma = limit / math.sqrt(3)
    assert abs(a.enc_w1.mean()) < 3 * sigma / math.sqrt(1000 * 600)


def test_params_reject_latent_wider_than_items():
    with pytest.raises(ShapeError):
        init_params(3, 4, seed=0, hidden_dim=5)


def test_zero_weights_map_to_zero_latent():
    params = _zero_params(5, 2, 3)
    tape = encode(params, np.random.default_rng(0).random((4, 5)))
    assert not tape.z.any()


def test_one_item_toy_encoder():
    params = MlpParams(
        enc_w1=np.array([[1.0]]),
        enc_b1=np.zeros(1),
        enc_w2=np.array([[1.0]]),
        enc_b2=np.zeros(1),
        dec_w1=np.array([[1.0]]),
        dec_b1=np.zeros(1),
        dec_w2=np.array([[1.0]]),
        dec_b2=np.zeros(1),
        normalize_input=False,
    )
    tape = encode(params, np.array([[0.5]]))
    assert tape.z[0, 0] == pytest.approx(0.46212, abs=1e-5)


def test_inverted_dropout_scales_survivors():
    params = init_params(50, 4, seed=0, hidden_dim=6, normalize_input=False)
    x = np.ones((3, 50))
    tape = encode(
        params, x, input_dropout=0.5, rng=np.random.default_rng(1), training=True
    )
    assert set(np.unique(tape.x_in).tolist()) <= {0.0, 2.0}
    assert tape.dropout_mask is not None


def test_evaluation_mode_ignores_dropout_and_noise():
    params = init_params(8, 3, seed=0, hidden_dim=5)
    x = np.random.default_rng(2).integers(0, 2, size=(4, 8)).astype(float)
    a = forward(params, x, input_dropout=0.5, noise_std=1.0, rng=None)
    b = forward(params, x)
    assert np.array_equal(a.output, b.output)


def test_encode_rejects_non_finite_and_bad_shape():
    params = init_params(4, 2, seed=0, hidden_dim=3)
    with pytest.raises(NumericError):
        encode(params, np.array([[np.nan, 0, 0, 0]]))
    with pytest.raises(ShapeError):
        encode(params, np.zeros((2, 5)))


def test_softmax_rows_normalized_and_uniform_for_equal_logits():
    assert np.allclose(softmax(np.zeros((2, 4))), 0.25)
    params = init_params(9, 3, seed=3, hidden_dim=4)
    out = forward(params, np.random.default_rng(0).random((5, 9))).output
    assert np.all(out > 0)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-12)


def test_sigmoid_of_zero_logits_is_half():
    params = _zero_params(4, 2, 3, output_activation="sigmoid")
    out = forward(params, np.ones((2, 4))).output
    assert np.allclose(out, 0.5, atol=1e-15)


def test_zero_upstream_gradients_give_zero_gradients():
    params = init_params(5, 3, seed=0, hidden_dim=4)
    tape = forward(params, np.eye(5)[:3])
    grads = backward(params, tape, np.zeros((3, 5)), np.zeros((3, 3)))
    assert all(not g.any() for g in grads.values())


def test_latent_gradient_only_reaches_encoder():
    params = init_params(5, 3, seed=0, hidden_dim=4)
    tape = forward(params, np.eye(5)[:3])
    d_z = np.random.default_rng(0).normal(size=(3, 3))
    grads = backward(params, tape, np.zeros((3, 5)), d_z)
    assert all(not grads[k].any() for k in ("dec_w1", "dec_b1", "dec_w2", "dec_b2"))
    assert np.abs(grads["enc_w2"]).sum() > 0


@pytest.mark.parametrize("activation", ["softmax", "sigmoid"])
def test_backward_matches_finite_differences(activation):
    rng = np.random.default_rng(5)
    params = init_params(
        5, 3, seed=1, hidden_dim=4, output_activation=activation
    )
    for tensor in params.tensors().values():
        tensor += rng.normal(scale=0.1, size=tensor.shape)
    x = rng.integers(0, 2, size=(4, 5)).astype(float)
    x[:, 0] = 1.0
    weights = rng.normal(size=(4, 5))
    z_weights = rng.normal(size=(4, 3))

    def loss() -> float:
        tape = forward(params, x)
        # softmax upstream is taken w.r.t. the logits
        out = tape.logits if activation == "softmax" else tape.output
        return float(np.sum(weights * out) + np.sum(z_weights * tape.z))

    tape = forward(params, x)
    grads = backward(params, tape, weights, z_weights)
    for name, tensor in params.tensors().items():
        assert rel_error(grads[name], numeric_grad(loss, tensor)) < 1e-4, name


def test_backward_rejects_shape_mismatch():
    params = init_params(5, 3, seed=0, hidden_dim=4)
    tape = forward(params, np.eye(5)[:2])
    with pytest.raises(ShapeError):
        backward(params, tape, np.zeros((3, 5)))


def test_predict_scores_masks_foldin_items():
    params = init_params(6, 2, seed=0, hidden_dim=4)
    rows = np.array([[1, 0, 1, 0, 0, 0], [0, 0, 0, 0, 0, 0]], dtype=float)
    scores = predict_scores(params, rows)
    assert np.all(np.isneginf(scores[0, [0, 2]]))
    assert np.all(np.isfinite(scores[0, [1, 3, 4, 5]]))
    raw = predict_scores(params, rows, mask=False)
    assert np.allclose(raw.sum(axis=1), 1.0)


def test_predict_scores_identical_for_empty_users():
    params = init_params(6, 2, seed=0, hidden_dim=4)
    scores = predict_scores(params, np.zeros((2, 6)))
    assert np.array_equal(scores[0], scores[1])


def test_vae_scores_decode_posterior_mean():
    params = init_params(6, 2, seed=0, hidden_dim=4, params_cls=VaeParams)
    x = np.eye(6)[:3]
    tape = encode(params, x)
    mean_tape = decode(params, replace(tape, z=tape.enc_out[:, :2]))
    assert np.allclose(predict_scores(params, x, mask=False), mean_tape.output)
