"""Preconditioned conjugate gradients and Lanczos eigenvalue estimates.

Preconditioners are passed as callables ``r -> B r`` (a
:class:`~tsplinebpx.multilevel.bpx.BPXPreconditioner`, a ``LinearOperator``),
as matrices, or as ``None`` for the identity.
"""

from __future__ import annotations

import logging
import time
import warnings
from collections.abc import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..exceptions import SolverBreakdownError
from ..models import ConditionEstimate, SolveReport

logger = logging.getLogger(__name__)

Preconditioner = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-6
LANCZOS_TOL = 1e-4
LANCZOS_WINDOW = 5
LANCZOS_MAXIT = 400


def as_preconditioner(b: object) -> Preconditioner:
    if b is None:
        return lambda r: np.array(r, dtype=float, copy=True)
    if sp.issparse(b) or isinstance(b, np.ndarray):
        matrix = b
        return lambda r: np.asarray(matrix @ r, dtype=float).ravel()
    if callable(b):
        return b  # type: ignore[return-value]
    raise TypeError(f"cannot use {type(b).__name__} as a preconditioner")


def _tridiagonal_extremes(diag: np.ndarray, off: np.ndarray) -> tuple[float, float]:
    if diag.size == 1:
        return float(diag[0]), float(diag[0])
    values = sla.eigvalsh_tridiagonal(diag, off)
    return float(values[0]), float(values[-1])


def cg_tridiagonal(alphas: list[float], betas: list[float]) -> tuple[np.ndarray, np.ndarray]:
    """Lanczos matrix of a PCG run from its step lengths and direction updates."""
    a = np.asarray(alphas, dtype=float)
    b = np.asarray(betas[: max(a.size - 1, 0)], dtype=float)
    diag = 1.0 / a
    diag[1:] += b / a[:-1]
    off = np.sqrt(b) / a[:-1]
    return diag, off


def pcg_solve(
    matrix: sp.spmatrix | np.ndarray,
    rhs: np.ndarray,
    preconditioner: object = None,
    tol: float = DEFAULT_TOL,
    maxit: int = 2000,
    *,
    x0: np.ndarray | None = None,
    callback: Callable[[np.ndarray], None] | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve ``A x = b`` by PCG.

    Stops when ``sqrt(r.Br / r0.Br0) < tol``. The report carries the extreme
    eigenvalues of the Lanczos matrix built from the CG coefficients.
    """
    apply_b = as_preconditioner(preconditioner)
    start = time.perf_counter()
    b = np.asarray(rhs, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - matrix @ x
    z = apply_b(r)
    rz = float(r @ z)
    if rz < 0.0:
        raise SolverBreakdownError("preconditioner is not positive definite (r.Br < 0)")
    if rz == 0.0:
        return x, SolveReport(iterations=0, converged=True, residuals=[0.0])
    rz0 = rz
    residuals = [1.0]
    alphas: list[float] = []
    betas: list[float] = []
    p = z.copy()
    converged = False
    for _ in range(maxit):
        q = matrix @ p
        curvature = float(p @ q)
        if curvature <= 0.0:
            raise SolverBreakdownError(
                f"non-positive curvature {curvature:.3e} at iteration {len(alphas) + 1}"
            )
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * q
        z = apply_b(r)
        rz_new = float(r @ z)
        if rz_new < 0.0:
            raise SolverBreakdownError("preconditioner is not positive definite (r.Br < 0)")
        beta = rz_new / rz
        alphas.append(alpha)
        betas.append(beta)
        rz = rz_new
        residuals.append(float(np.sqrt(rz / rz0)))
        if callback is not None:
            callback(x)
        if residuals[-1] < tol:
            converged = True
            break
        p = z + beta * p
    diag, off = cg_tridiagonal(alphas, betas)
    lo, hi = _tridiagonal_extremes(diag, off)
    report = SolveReport(
        iterations=len(alphas),
        converged=converged,
        residuals=residuals,
        lambda_min=lo,
        lambda_max=hi,
        elapsed_s=time.perf_counter() - start,
    )
    if not converged:
        warnings.warn(
            f"PCG stopped after {maxit} iterations at relative residual {residuals[-1]:.3e}",
            stacklevel=2,
        )
    logger.debug("pcg: %d iterations, converged=%s", report.iterations, converged)
    return x, report


def estimate_condition(
    matrix: sp.spmatrix | np.ndarray,
    preconditioner: object = None,
    *,
    tol: float = LANCZOS_TOL,
    maxit: int = LANCZOS_MAXIT,
    window: int = LANCZOS_WINDOW,
    seed: int = 0,
) -> ConditionEstimate:
    """Extreme eigenvalues of ``B A`` by Lanczos in the ``B`` inner product.

    Stops once both extreme Ritz values changed by less than ``tol``
    (relative) over the last ``window`` steps, on an invariant subspace, or
    at ``maxit`` steps; the last case is flagged as unconverged.
    """
    apply_b = as_preconditioner(preconditioner)
    n = matrix.shape[0]
    if n == 0:
        raise ValueError("empty operator")
    steps = min(maxit, n)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    u = apply_b(v)
    norm = float(np.sqrt(v @ u))
    if not norm > 0.0:
        raise SolverBreakdownError("preconditioner is not positive definite")
    basis_v = np.zeros((n, steps))
    basis_u = np.zeros((n, steps))
    basis_v[:, 0], basis_u[:, 0] = v / norm, u / norm
    alphas: list[float] = []
    betas: list[float] = []
    history: list[tuple[float, float]] = []
    converged = False
    for j in range(steps):
        vj, uj = basis_v[:, j], basis_u[:, j]
        w = np.asarray(matrix @ uj, dtype=float).ravel()
        alpha = float(uj @ w)
        alphas.append(alpha)
        w -= alpha * vj
        if j > 0:
            w -= betas[-1] * basis_v[:, j - 1]
        w -= basis_v[:, : j + 1] @ (basis_u[:, : j + 1].T @ w)
        bw = apply_b(w)
        beta_sq = float(w @ bw)
        history.append(_tridiagonal_extremes(np.asarray(alphas), np.asarray(betas)))
        scale = max(abs(a) for a in alphas)
        if beta_sq <= (1e-14 * scale) ** 2:
            converged = True
            break
        if len(history) > window:
            lo_ref, hi_ref = history[-window - 1]
            lo, hi = history[-1]
            if abs(lo - lo_ref) <= tol * abs(lo) and abs(hi - hi_ref) <= tol * abs(hi):
                converged = True
                break
        if j + 1 == steps:
            break
        beta = float(np.sqrt(beta_sq))
        betas.append(beta)
        basis_v[:, j + 1] = w / beta
        basis_u[:, j + 1] = bw / beta
    lo, hi = history[-1]
    if not converged and len(alphas) < n:
        warnings.warn(
            f"Lanczos did not converge in {len(alphas)} steps; returning current estimates",
            stacklevel=2,
        )
    else:
        converged = True
    if lo <= 0.0:
        raise SolverBreakdownError(f"operator is not positive definite (lambda_min={lo:.3e})")
    logger.debug("lanczos: %d steps, kappa=%.4g, converged=%s", len(alphas), hi / lo, converged)
    return ConditionEstimate(
        lambda_min=lo, lambda_max=hi, iterations=len(alphas), converged=converged
    )


def dense_condition(
    matrix: sp.spmatrix | np.ndarray, preconditioner: object = None
) -> ConditionEstimate:
    """Exact extreme eigenvalues of ``B A`` from dense matrices (small systems only).

    With ``B = L L^T`` the spectrum of ``B A`` is that of ``L^T A L``.
    """
    dense_a = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    if preconditioner is None:
        values = sla.eigvalsh(dense_a)
    else:
        apply_b = as_preconditioner(preconditioner)
        dense_b = np.column_stack([apply_b(e) for e in np.eye(dense_a.shape[0])])
        dense_b = 0.5 * (dense_b + dense_b.T)
        lower = sla.cholesky(dense_b, lower=True)
        values = sla.eigvalsh(lower.T @ dense_a @ lower)
    return ConditionEstimate(lambda_min=float(values[0]), lambda_max=float(values[-1]))
