"""Univariate B-splines: evaluation, derivatives, knot insertion, dual functionals.

Local knot vectors hold ``p + 2`` knots and define one B-spline. Evaluation is
right-continuous except at ``x = 1``, where the left limit is used so that the
last function of an open knot vector interpolates the end point.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import polynomial as npoly

from ..exceptions import BasisError

LocalKnotVector = tuple[float, ...]
DerivativeHandle = Callable[[float, int], float]


@dataclass(frozen=True, slots=True)
class KnotVector:
    """Global knot vector of degree ``degree`` on ``[0, 1]``."""

    knots: tuple[float, ...]
    degree: int

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise BasisError(f"degree must be non-negative, got {self.degree}")
        if len(self.knots) < self.degree + 2:
            raise BasisError("a knot vector needs at least p + 2 knots")
        if any(b < a for a, b in zip(self.knots, self.knots[1:], strict=False)):
            raise BasisError("knots must be non-decreasing")

    @classmethod
    def open_uniform(cls, degree: int, elements: int) -> KnotVector:
        """``p``-open knot vector with ``elements`` equal intervals."""
        if elements < 1:
            raise BasisError(f"need at least one element, got {elements}")
        inner = tuple(i / elements for i in range(1, elements))
        return cls((0.0,) * (degree + 1) + inner + (1.0,) * (degree + 1), degree)

    @property
    def size(self) -> int:
        """Number of basis functions."""
        return len(self.knots) - self.degree - 1

    def local(self, i: int) -> LocalKnotVector:
        return self.knots[i : i + self.degree + 2]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.knots, dtype=float)


# -- evaluation -------------------------------------------------------------


def _indicators(knots: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Degree-0 functions of each knot interval at ``xs`` (rows: intervals)."""
    lo = knots[:-1, None]
    hi = knots[1:, None]
    values = (lo <= xs) & (xs < hi)
    closing = (hi == 1.0) & (lo < hi) & (xs == 1.0)
    return (values | closing).astype(float)


def _cox_de_boor(knots: np.ndarray, xs: np.ndarray) -> np.ndarray:
    degree = len(knots) - 2
    table = _indicators(knots, xs)
    for k in range(1, degree + 1):
        nxt = np.zeros((table.shape[0] - 1, xs.size))
        for j in range(table.shape[0] - 1):
            left = knots[j + k] - knots[j]
            right = knots[j + k + 1] - knots[j + 1]
            if left > 0:
                nxt[j] += (xs - knots[j]) / left * table[j]
            if right > 0:
                nxt[j] += (knots[j + k + 1] - xs) / right * table[j + 1]
        table = nxt
    return table[0]


def _evaluate(knots: np.ndarray, xs: np.ndarray, order: int) -> np.ndarray:
    degree = len(knots) - 2
    if order == 0:
        return _cox_de_boor(knots, xs)
    if order > degree:
        return np.zeros_like(xs)
    out = np.zeros_like(xs)
    left = knots[degree] - knots[0]
    right = knots[degree + 1] - knots[1]
    if left > 0:
        out += degree / left * _evaluate(knots[:-1], xs, order - 1)
    if right > 0:
        out -= degree / right * _evaluate(knots[1:], xs, order - 1)
    return out


def eval_local_array(lkv: Sequence[float], xs: np.ndarray | Sequence[float], order: int = 0):
    """Vectorized value (or derivative of ``order``) of ``B[lkv]`` at ``xs``."""
    knots = np.asarray(lkv, dtype=float)
    points = np.atleast_1d(np.asarray(xs, dtype=float))
    if order < 0:
        raise ValueError(f"derivative order must be non-negative, got {order}")
    return _evaluate(knots, points, order)


def eval_local(lkv: Sequence[float], x: float) -> float:
    """Value of the single B-spline on ``lkv`` at ``x``; zero outside its support."""
    return float(eval_local_array(lkv, [x])[0])


def eval_derivative(lkv: Sequence[float], x: float, order: int) -> float:
    """Derivative of ``B[lkv]`` by degree-lowering; orders above ``p`` give 0."""
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    return float(eval_local_array(lkv, [x], order)[0])


def find_span(kv: KnotVector, x: float) -> int:
    """Index ``i`` with ``knots[i] <= x < knots[i + 1]`` (last non-empty span at 1)."""
    knots = kv.knots
    p = kv.degree
    if x >= knots[-p - 1]:
        span = len(knots) - p - 2
        while knots[span] == knots[span + 1]:
            span -= 1
        return span
    lo, hi = p, len(knots) - p - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if x < knots[mid]:
            hi = mid
        else:
            lo = mid
    return lo


def eval_all_nonzero(kv: KnotVector, x: float) -> tuple[int, np.ndarray]:
    """First index and values of the ``p + 1`` B-splines not vanishing at ``x``.

    Triangular scheme of the NURBS book (algorithm A2.2).
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    p = kv.degree
    knots = kv.knots
    span = find_span(kv, x)
    left = np.zeros(p)
    right = np.zeros(p)
    values = np.zeros(p + 1)
    values[0] = 1.0
    for j in range(p):
        left[j] = x - knots[span - j]
        right[j] = knots[span + 1 + j] - x
        saved = 0.0
        for r in range(j + 1):
            temp = values[r] / (right[r] + left[j - r])
            values[r] = saved + right[r] * temp
            saved = left[j - r] * temp
        values[j + 1] = saved
    return span - p, values


# -- knot insertion ---------------------------------------------------------


def insertion_step(
    knots: Sequence[float], degree: int, u: float
) -> tuple[tuple[float, ...], sp.csr_matrix]:
    """Insert the single knot ``u`` (Boehm).

    Works for open and for local knot vectors. Returns the new knots and the
    ``(n + 1, n)`` matrix mapping old coefficients to new ones.
    """
    n = len(knots) - degree - 1
    if not knots[0] <= u < knots[-1]:
        raise BasisError(f"knot {u} outside [{knots[0]}, {knots[-1]})")
    k = max(i for i in range(len(knots) - 1) if knots[i] <= u < knots[i + 1])
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for i in range(n + 1):
        if i <= k - degree:
            alpha = 1.0
        elif i >= k + 1:
            alpha = 0.0
        else:
            alpha = (u - knots[i]) / (knots[i + degree] - knots[i])
        if i < n and alpha != 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(alpha)
        if i >= 1 and alpha != 1.0:
            rows.append(i)
            cols.append(i - 1)
            vals.append(1.0 - alpha)
    new_knots = (*knots[: k + 1], u, *knots[k + 1 :])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))
    return new_knots, matrix


def _missing_knots(coarse: Sequence[float], fine: Sequence[float]) -> list[float]:
    missing: list[float] = []
    i = 0
    for value in fine:
        if i < len(coarse) and coarse[i] == value:
            i += 1
        else:
            missing.append(value)
    if i != len(coarse):
        raise BasisError("knot vectors are not nested")
    return missing


def knot_insertion_matrix(coarse: KnotVector, fine: KnotVector) -> sp.csr_matrix:
    """Sparse ``(fine.size, coarse.size)`` refinement matrix by repeated Boehm steps."""
    if coarse.degree != fine.degree:
        raise BasisError("coarse and fine knot vectors must share the degree")
    if coarse.knots[0] != fine.knots[0] or coarse.knots[-1] != fine.knots[-1]:
        raise BasisError("knot vectors are not nested")
    knots: tuple[float, ...] = coarse.knots
    matrix = sp.identity(coarse.size, format="csr")
    for u in _missing_knots(coarse.knots, fine.knots):
        knots, step = insertion_step(knots, coarse.degree, u)
        matrix = step @ matrix
    return matrix.tocsr()


def refine_local(
    lkv: Sequence[float], inserted: Sequence[float]
) -> tuple[tuple[float, ...], np.ndarray]:
    """Expand ``B[lkv]`` over the knot vector refined by ``inserted``.

    Returns the refined knots and the coefficients of the consecutive
    B-splines on it.
    """
    degree = len(lkv) - 2
    knots = tuple(lkv)
    coeffs = sp.csr_matrix(np.ones((1, 1)))
    for u in sorted(inserted):
        knots, step = insertion_step(knots, degree, u)
        coeffs = step @ coeffs
    return knots, np.asarray(coeffs.todense()).ravel()


# -- dual functionals -------------------------------------------------------


def dual_point(lkv: Sequence[float]) -> float:
    """Evaluation point of the de Boor-Fix functional.

    Midpoint of the non-empty knot interval closest to the middle of the
    local knot vector.
    """
    degree = len(lkv) - 2
    order = sorted(range(degree + 1), key=lambda j: (abs(2 * j - degree), j))
    for j in order:
        if lkv[j + 1] > lkv[j]:
            return 0.5 * (lkv[j] + lkv[j + 1])
    raise BasisError(f"local knot vector {tuple(lkv)} has zero-length support")


@lru_cache(maxsize=65536)
def dual_weights(lkv: tuple[float, ...]) -> tuple[float, tuple[float, ...]]:
    """Point ``tau`` and weights ``w_r`` with ``lambda(f) = sum_r w_r f^(r)(tau)``.

    de Boor-Fix: ``w_r = (-1)^(p-r) psi^(p-r)(tau) / p!`` with
    ``psi(t) = prod_j (xi_j - t)`` over the interior knots.
    """
    degree = len(lkv) - 2
    tau = dual_point(lkv)
    psi = npoly.polyfromroots(lkv[1:-1]) * (-1.0) ** degree
    weights = []
    for r in range(degree + 1):
        der = npoly.polyder(psi, degree - r) if degree - r > 0 else psi
        value = npoly.polyval(tau, der)
        weights.append((-1.0) ** (degree - r) * value / math.factorial(degree))
    return tau, tuple(weights)


def dual_functional(lkv: Sequence[float], f: DerivativeHandle) -> float:
    """Apply the dual functional of ``B[lkv]`` to ``f(x, order)``."""
    tau, weights = dual_weights(tuple(float(v) for v in lkv))
    return sum(w * f(tau, r) for r, w in enumerate(weights))


@lru_cache(maxsize=262144)
def dual_of_bspline(target: tuple[float, ...], source: tuple[float, ...]) -> float:
    """``lambda[target](B[source])``; cached since T-spline pairs repeat heavily."""
    tau, weights = dual_weights(target)
    if not source[0] <= tau <= source[-1]:
        return 0.0
    total = 0.0
    for r, w in enumerate(weights):
        if w != 0.0:
            total += w * float(_evaluate(np.asarray(source), np.array([tau]), r)[0])
    return total
