"""Loss terms of the composite objective and their analytic gradients.

Every term is averaged over the ``n`` rows of the batch except the SMV
divergence, which is already a per-batch scalar. Reconstruction costs are
negated log-likelihoods so that training minimizes them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from ..models.network import ForwardTape
from ..schemas.objective import LossBreakdown, ObjectiveConfig
from .exceptions import ConfigError, NumericError, ShapeError

Array = NDArray[np.float64]

VARIANCE_FLOOR = 1e-12


class Term(NamedTuple):
    value: float
    grad: Array


class TotalLoss(NamedTuple):
    breakdown: LossBreakdown
    grad_output: Array
    grad_z: Array


def _log_of(x_prime: Array, log_x_prime: Array | None) -> Array:
    if log_x_prime is not None:
        return log_x_prime
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(x_prime, np.finfo(np.float64).tiny))


def _weighted_multinomial(
    weights: Array, x_prime: Array, log_x_prime: Array | None
) -> Term:
    """-(1/n) sum w*log(x') with its fused softmax gradient (W_i x' - w)/n."""
    n = weights.shape[0]
    log_p = _log_of(x_prime, log_x_prime)
    value = -float(np.sum(weights * log_p)) / n
    grad = (weights.sum(axis=1, keepdims=True) * x_prime - weights) / n
    return Term(value, grad)


# -- reconstruction costs ----------------------------------------------------


def cost_multinomial(
    x_batch: Array, x_prime: Array, *, log_x_prime: Array | None = None
) -> Term:
    """Negative multinomial log-likelihood; gradient w.r.t. the logits."""
    return _weighted_multinomial(x_batch, x_prime, log_x_prime)


def cost_multinomial_nonclick(
    x_batch: Array,
    x_prime: Array,
    gamma: float,
    *,
    log_x_prime: Array | None = None,
    complement: bool = False,
) -> Term:
    """Multinomial cost with a gamma-weighted term on non-clicked items.

    The default adds ``gamma*(1-x)*log(x')`` as written; ``complement``
    uses ``gamma*(1-x)*log(1-x')`` instead.
    """
    if not complement:
        weights = x_batch + gamma * (1.0 - x_batch)
        return _weighted_multinomial(weights, x_prime, log_x_prime)
    base = _weighted_multinomial(x_batch, x_prime, log_x_prime)
    n = x_batch.shape[0]
    c = gamma * (1.0 - x_batch)
    one_minus = np.maximum(1.0 - x_prime, np.finfo(np.float64).tiny)
    value = -float(np.sum(c * np.log(one_minus))) / n
    r = c * x_prime / one_minus
    grad = (r - x_prime * r.sum(axis=1, keepdims=True)) / n
    return Term(base.value + value, base.grad + grad)


def cost_mil(x_batch: Array, x_prime: Array, cfg: ObjectiveConfig) -> Term:
    """Missing-information loss; gradient w.r.t. the sigmoid output."""
    if np.any(x_prime <= 0.0) or np.any(x_prime >= 1.0):
        raise NumericError("MIL needs decoder outputs strictly inside (0, 1)")
    n = x_batch.shape[0]
    x = x_batch
    g_plus, a_mi, two_g = cfg.gamma_plus, cfg.a_mi, 2 * cfg.gamma_mi
    one_minus = 1.0 - x_prime
    centred = x_prime - 0.5
    term1 = 0.5 * x * (1.0 + x) * one_minus**g_plus
    term2 = 0.5 * (1.0 + x) * one_minus * a_mi * centred**two_g
    value = float(np.sum(term1 + term2)) / n
    d_term1 = -0.5 * x * (1.0 + x) * g_plus * one_minus ** (g_plus - 1.0)
    d_term2 = (
        0.5
        * (1.0 + x)
        * a_mi
        * (-(centred**two_g) + one_minus * two_g * centred ** (two_g - 1))
    )
    return Term(value, (d_term1 + d_term2) / n)


# -- latent regularizers -----------------------------------------------------


def smv_from_moments(mean: float, var: float, latent_dim: int) -> float:
    """(J/2)(mu^2 + sigma^2 - log sigma^2 - 1) with J = latent_dim."""
    var = max(var, VARIANCE_FLOOR)
    return 0.5 * latent_dim * (mean * mean + var - np.log(var) - 1.0)


def smv_divergence(z_batch: Array) -> Term:
    """Divergence of the pooled batch moments from a standard normal.

    One mean and one (population) variance are taken over all ``n*h``
    entries; a variance below the floor is clamped and held constant.
    """
    n, h = z_batch.shape
    if n < 2:
        raise NumericError("SMV divergence needs a batch of at least 2 rows")
    count = z_batch.size
    mean = float(z_batch.mean())
    centred = z_batch - mean
    var = float(np.mean(centred * centred))
    value = smv_from_moments(mean, var, h)
    if var < VARIANCE_FLOOR:
        grad = np.full_like(z_batch, h * mean / count)
    else:
        grad = (h / count) * (mean + (1.0 - 1.0 / var) * centred)
    return Term(value, grad)


def gaussian_kl(mu: Array, logvar: Array) -> tuple[float, Array, Array]:
    """Batch mean of KL(N(mu, e^logvar) || N(0, I)) and its two gradients."""
    n = mu.shape[0]
    var = np.exp(logvar)
    value = 0.5 * float(np.sum(mu * mu + var - logvar - 1.0)) / n
    return value, mu / n, 0.5 * (var - 1.0) / n


def imq_kernel(a: Array, b: Array, scale: float) -> tuple[Array, Array]:
    """Inverse multiquadratic kernel matrix and its pairwise sq. distances."""
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * a @ b.T
    )
    sq = np.maximum(sq, 0.0)
    return scale / (scale + sq), sq


def _pull(a: Array, b: Array, kernel: Array, scale: float) -> Array:
    """sum_j dk(a_i, b_j)/da_i for the IMQ kernel."""
    w = -2.0 * kernel * kernel / scale
    return a * w.sum(axis=1, keepdims=True) - w @ b


def mi_regularizer(
    z_batch: Array,
    prior_batch: Array,
    bandwidth: float = 1.0,
    *,
    unbiased: bool = True,
) -> Term:
    """MMD^2 between encoded codes and prior samples (IMQ kernel).

    The kernel is ``C / (C + |a - b|^2)`` with ``C = 2 * h * bandwidth^2``.
    The unbiased estimate drops the diagonal of the within-sample sums and
    can be negative; the biased one is exactly 0 for identical batches.
    """
    n, h = z_batch.shape
    m = prior_batch.shape[0]
    if prior_batch.shape[1] != h:
        raise ShapeError("prior_batch", (m, h), prior_batch.shape)
    if n < 2 or m < 2:
        raise NumericError("MMD estimate needs at least 2 rows per sample")
    scale = 2.0 * h * bandwidth * bandwidth
    k_zz, _ = imq_kernel(z_batch, z_batch, scale)
    k_pp, _ = imq_kernel(prior_batch, prior_batch, scale)
    k_zp, _ = imq_kernel(z_batch, prior_batch, scale)
    if unbiased:
        c_zz, c_pp = 1.0 / (n * (n - 1)), 1.0 / (m * (m - 1))
        s_zz = float(k_zz.sum() - np.trace(k_zz))
        s_pp = float(k_pp.sum() - np.trace(k_pp))
    else:
        c_zz, c_pp = 1.0 / (n * n), 1.0 / (m * m)
        s_zz, s_pp = float(k_zz.sum()), float(k_pp.sum())
    c_zp = 2.0 / (n * m)
    s_zp = float(k_zp.sum())
    if unbiased or n != m:
        value = c_zz * s_zz + c_pp * s_pp - c_zp * s_zp
    else:
        value = (s_zz + s_pp - 2.0 * s_zp) / (n * n)
    # the within-batch sum is symmetric in its two arguments
    grad = 2.0 * c_zz * _pull(z_batch, z_batch, k_zz, scale)
    grad -= c_zp * _pull(z_batch, prior_batch, k_zp, scale)
    return Term(value, grad)


def sparse_penalty_value(
    z_batch: Array,
    s_batch: Array,
    a: Array,
    lambda1: float,
    lambda2: float,
) -> Term:
    """(1/n)[lambda1 |Z - SA|_F^2 + lambda2 |S|_1]; S and A held constant."""
    n = z_batch.shape[0]
    if s_batch.shape[0] != n or s_batch.shape[1] != a.shape[0]:
        raise ShapeError("s_batch", (n, a.shape[0]), s_batch.shape)
    if a.shape[1] != z_batch.shape[1]:
        raise ShapeError("a", (a.shape[0], z_batch.shape[1]), a.shape)
    residual = z_batch - s_batch @ a
    value = (
        lambda1 * float(np.sum(residual * residual))
        + lambda2 * float(np.abs(s_batch).sum())
    ) / n
    return Term(value, (2.0 * lambda1 / n) * residual)


# -- composition -------------------------------------------------------------


def reconstruction(
    x_batch: Array, tape: ForwardTape, cfg: ObjectiveConfig
) -> Term:
    assert tape.output is not None
    if cfg.cost_kind == "multinomial":
        return cost_multinomial(x_batch, tape.output, log_x_prime=tape.log_output)
    if cfg.cost_kind == "multinomial_nonclick":
        return cost_multinomial_nonclick(
            x_batch,
            tape.output,
            cfg.gamma,
            log_x_prime=tape.log_output,
            complement=cfg.nonclick_complement,
        )
    return cost_mil(x_batch, tape.output, cfg)


def total_loss(
    x_batch: Array,
    tape: ForwardTape,
    cfg: ObjectiveConfig,
    *,
    output_activation: str,
    s_batch: Array | None = None,
    a: Array | None = None,
    prior_batch: Array | None = None,
) -> TotalLoss:
    """All four terms on one decoded batch.

    ``prior_batch`` may be None only when alpha is 0, and ``s_batch``/``a``
    only when delta is 0; the skipped terms then read 0.
    """
    if output_activation != cfg.output_activation:
        raise ConfigError(
            f"cost {cfg.cost_kind} needs {cfg.output_activation} output, "
            f"the network has {output_activation}",
            "cost_kind",
        )
    if not tape.decoded:
        raise NumericError("total_loss needs a decoded tape")
    z = tape.z
    rec = reconstruction(x_batch, tape, cfg)
    smv = smv_divergence(z)
    grad_z = cfg.beta * smv.grad
    mi_value = 0.0
    if prior_batch is not None:
        mi = mi_regularizer(
            z, prior_batch, cfg.mmd_kernel_bandwidth, unbiased=cfg.mi_unbiased
        )
        mi_value = mi.value
        grad_z = grad_z + cfg.alpha * mi.grad
    elif cfg.alpha > 0:
        raise ConfigError("alpha > 0 needs prior samples", "alpha")
    sparse_value = 0.0
    if s_batch is not None and a is not None:
        sparse = sparse_penalty_value(z, s_batch, a, cfg.lambda1, cfg.lambda2)
        sparse_value = sparse.value
        grad_z = grad_z + cfg.delta * sparse.grad
    elif cfg.delta > 0:
        raise ConfigError("delta > 0 needs sparse codes and a dictionary", "delta")
    breakdown = LossBreakdown.compose(rec.value, smv.value, mi_value, sparse_value, cfg)
    return TotalLoss(breakdown, rec.grad, grad_z)
