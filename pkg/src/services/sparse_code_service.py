"""ADMM solvers for the dictionary A (unit-norm columns) and codes S (lasso).

Both problems share the data term ``lambda1 * |Z - S A|_F^2``:

* A-update splits A = H with H constrained to unit-norm columns,
* S-update splits S = B with the L1 penalty carried by B.

Each linear subproblem has a constant ridge-shifted Gram matrix, factored
once per solve with a Cholesky decomposition.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import cho_factor, cho_solve

from ..core.tracing import get_tracer
from ..models.sparse_code import SparseCodeState
from ..schemas.sparse import AdmmReport
from .exceptions import NumericError, ShapeError

Array = NDArray[np.float64]


def soft_threshold(x: Array | float, kappa: float) -> Array:
    """sign(x) * max(|x| - kappa, 0), element-wise."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - kappa, 0.0)


def project_columns(m: Array) -> Array:
    """Scale every column of ``m`` into the unit Euclidean ball."""
    norms = np.linalg.norm(m, axis=0)
    return m / np.maximum(norms, 1.0)


def init_sparse(
    n_pool: int,
    k_atoms: int,
    latent_dim: int,
    seed: int | np.random.Generator,
    *,
    rho: float = 1.0,
) -> SparseCodeState:
    """Uniform dictionary scaled to unit-ball columns; zero codes and duals."""
    if k_atoms < 1:
        raise ShapeError("k_atoms >= 1", 1, k_atoms)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    a = project_columns(rng.uniform(-1.0, 1.0, size=(k_atoms, latent_dim)))
    codes = np.zeros((n_pool, k_atoms))
    return SparseCodeState(
        s=codes,
        a=a,
        h_aux=a.copy(),
        u_dual=np.zeros_like(a),
        b_aux=codes.copy(),
        v_dual=codes.copy(),
        rho=rho,
    )


def reset_codes(state: SparseCodeState, n_rows: int) -> SparseCodeState:
    """Zero S, B and V for a new batch of ``n_rows``; A, H and U persist."""
    codes = np.zeros((n_rows, state.k_atoms))
    return replace(state, s=codes, b_aux=codes.copy(), v_dual=codes.copy())


def sparse_objective(
    state: SparseCodeState, z: Array, lambda1: float, lambda2: float
) -> float:
    """lambda1 |Z - S H|_F^2 + lambda2 |S|_1 at the feasible dictionary H."""
    residual = z - state.s @ state.h_aux
    return lambda1 * float(np.sum(residual * residual)) + lambda2 * float(
        np.abs(state.s).sum()
    )


def _check(state: SparseCodeState, z: Array) -> None:
    if state.rho <= 0:
        raise NumericError(f"ADMM penalty rho must be > 0, got {state.rho}")
    if z.shape != (state.n_rows, state.latent_dim):
        raise ShapeError("z", (state.n_rows, state.latent_dim), z.shape)


def update_a(
    state: SparseCodeState,
    z: Array,
    lambda1: float = 1.0,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> tuple[SparseCodeState, AdmmReport]:
    """Dictionary step with S fixed.

    A <- (l1 S'S + rho I)^-1 (l1 S'Z + rho (H - U)); H <- unit-ball
    projection of the columns of A + U; U <- U + A - H.
    """
    _check(state, z)
    rho = state.rho
    with get_tracer().start_as_current_span("sparse_code.update_a") as span:
        s = state.s
        gram = cho_factor(lambda1 * s.T @ s + rho * np.eye(state.k_atoms))
        szt = lambda1 * s.T @ z
        a, h, u = state.a, state.h_aux.copy(), state.u_dual.copy()
        primal = dual = np.inf
        primal_tol = tol
        iterations = 0
        for iterations in range(1, max_iters + 1):  # noqa: B007
            a = cho_solve(gram, szt + rho * (h - u))
            h_prev = h
            h = project_columns(a + u)
            u = u + a - h
            primal = float(np.linalg.norm(a - h))
            dual = rho * float(np.linalg.norm(h - h_prev))
            primal_tol = tol * max(float(np.linalg.norm(a)), 1.0)
            if primal <= primal_tol and dual <= tol:
                break
        report = AdmmReport(
            iterations=iterations,
            primal_residual=primal,
            dual_residual=dual,
            primal_tolerance=primal_tol,
            dual_tolerance=tol,
            converged=primal <= primal_tol and dual <= tol,
        )
        span.set_attribute("admm.iterations", iterations)
        span.set_attribute("admm.converged", report.converged)
        new_state = replace(state, a=a, h_aux=h, u_dual=u)
        new_state.check_finite()
        return new_state, report


def update_s(
    state: SparseCodeState,
    z: Array,
    lambda1: float = 1.0,
    lambda2: float = 0.1,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> tuple[SparseCodeState, AdmmReport]:
    """Lasso step for the codes with A fixed.

    S <- (l1 Z A' + rho (B - V)) (l1 A A' + rho I)^-1;
    B <- soft_threshold(S + V, l2 / (2 rho)); V <- V + S - B.
    """
    _check(state, z)
    rho = state.rho
    kappa = lambda2 / (2.0 * rho)
    with get_tracer().start_as_current_span("sparse_code.update_s") as span:
        a = state.a
        gram = cho_factor(lambda1 * a @ a.T + rho * np.eye(state.k_atoms))
        zat = lambda1 * z @ a.T
        s, b, v = state.s, state.b_aux.copy(), state.v_dual.copy()
        primal = dual = np.inf
        primal_tol = tol
        iterations = 0
        for iterations in range(1, max_iters + 1):  # noqa: B007
            # the Gram matrix is symmetric, so S = R G^-1 is (G^-1 R')'
            s = cho_solve(gram, (zat + rho * (b - v)).T).T
            b_prev = b
            b = soft_threshold(s + v, kappa)
            v = v + s - b
            primal = float(np.linalg.norm(s - b))
            dual = rho * float(np.linalg.norm(b - b_prev))
            primal_tol = tol * max(float(np.linalg.norm(s)), 1.0)
            if primal <= primal_tol and dual <= tol:
                break
        report = AdmmReport(
            iterations=iterations,
            primal_residual=primal,
            dual_residual=dual,
            primal_tolerance=primal_tol,
            dual_tolerance=tol,
            converged=primal <= primal_tol and dual <= tol,
        )
        span.set_attribute("admm.iterations", iterations)
        span.set_attribute("admm.converged", report.converged)
        new_state = replace(state, s=s, b_aux=b, v_dual=v)
        new_state.check_finite()
        return new_state, report
