"""Galerkin assembly of the Poisson problem ``-Laplace(u) = f``, ``u = 0`` on the boundary.

Integration runs over the Bézier mesh with a tensor Gauss-Legendre rule per
element. Element contributions are collected as COO triplets and summed into a
CSR matrix; with several threads, chunks of elements are processed in parallel
and concatenated in element order, so the assembled matrix does not depend on
the thread count.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..core.bspline import eval_local_array
from ..core.tspline import TSplineFunction, TSplineSpace
from .geometry import GeometryMap, IdentityMap, checked_jacobian, physical_gradients

if TYPE_CHECKING:
    from .multipatch import MultiPatchSpace

logger = logging.getLogger(__name__)

THREADS_ENV = "TSPLINEBPX_THREADS"
SIDES = ("south", "east", "north", "west")

SourceHandle = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class LinearSystem:
    """Matrix, right-hand side and the map from rows to basis indices.

    ``dofs[i]`` is the basis index of row ``i``; ``size`` is the number of
    basis functions before any elimination.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofs: np.ndarray
    size: int
    boundary: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def reduced(self) -> bool:
        return self.dofs.size < self.size

    def extend(self, values: np.ndarray) -> np.ndarray:
        """Pad a vector over the rows with zeros to all basis functions."""
        full = np.zeros(self.size)
        full[self.dofs] = values
        return full

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[self.dofs]


# -- configuration -----------------------------------------------------------


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: ``TSPLINEBPX_THREADS`` wins over the argument; default 1."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return value
    if threads is None:
        return 1
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    return threads


def default_quad_order(space: TSplineSpace) -> int:
    return max(space.degree) + 1


def _check_quad_order(space: TSplineSpace, quad_order: int | None) -> int:
    order = default_quad_order(space) if quad_order is None else quad_order
    if order < max(space.degree) + 1:
        raise ValueError(f"quadrature order {order} is below p + 1 = {max(space.degree) + 1}")
    return order


# -- element kernels ---------------------------------------------------------


@lru_cache(maxsize=32)
def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _interval_rule(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = _gauss(order)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


@lru_cache(maxsize=65536)
def _univariate(
    knots: tuple[float, ...], a: float, b: float, order: int, derivative: int
) -> np.ndarray:
    points, _ = _interval_rule(a, b, order)
    values = eval_local_array(knots, points, derivative)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, slots=True)
class _ElementData:
    functions: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    points: np.ndarray


def _element_data(
    space: TSplineSpace,
    geometry: GeometryMap,
    element: int,
    order: int,
    with_gradients: bool = True,
) -> _ElementData:
    cell = space.bezier[element]
    x0, y0, x1, y1 = cell.rect
    xq, wx = _interval_rule(x0, x1, order)
    yq, wy = _interval_rule(y0, y1, order)
    uu = np.repeat(xq, order)
    vv = np.tile(yq, order)
    jac, det = checked_jacobian(geometry, uu, vv)
    weights = np.outer(wx, wy).ravel() * det
    idx = np.asarray(space.incidence[element], dtype=int)
    values = np.empty((idx.size, order * order))
    grad_u = np.empty_like(values)
    grad_v = np.empty_like(values)
    for row, i in enumerate(idx):
        f = space.functions[i]
        bx = _univariate(f.knots_x, x0, x1, order, 0)
        by = _univariate(f.knots_y, y0, y1, order, 0)
        values[row] = np.outer(bx, by).ravel()
        if with_gradients:
            dbx = _univariate(f.knots_x, x0, x1, order, 1)
            dby = _univariate(f.knots_y, y0, y1, order, 1)
            grad_u[row] = np.outer(dbx, by).ravel()
            grad_v[row] = np.outer(bx, dby).ravel()
    gradients = (
        physical_gradients(jac, grad_u, grad_v)
        if with_gradients
        else np.zeros((idx.size, order * order, 2))
    )
    return _ElementData(idx, weights, values, gradients, geometry(uu, vv))


def _stiffness_chunk(
    space: TSplineSpace, geometry: GeometryMap, elements: Sequence[int], order: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols, vals = [], [], []
    for e in elements:
        data = _element_data(space, geometry, e, order)
        local = np.einsum("aqi,bqi,q->ab", data.gradients, data.gradients, data.weights)
        rows.append(np.repeat(data.functions, data.functions.size))
        cols.append(np.tile(data.functions, data.functions.size))
        vals.append(local.ravel())
    if not rows:
        empty = np.zeros(0)
        return empty.astype(int), empty.astype(int), empty
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def _chunks(count: int, threads: int) -> list[range]:
    if threads <= 1 or count < 2 * threads:
        return [range(count)]
    size = -(-count // (4 * threads))
    return [range(start, min(start + size, count)) for start in range(0, count, size)]


def _collect(
    work: Callable[[range], tuple[np.ndarray, np.ndarray, np.ndarray]],
    count: int,
    threads: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    chunks = _chunks(count, threads)
    if len(chunks) == 1:
        parts = [work(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    rows = np.concatenate([part[0] for part in parts])
    cols = np.concatenate([part[1] for part in parts])
    vals = np.concatenate([part[2] for part in parts])
    return rows, cols, vals


# -- operations --------------------------------------------------------------


def assemble_stiffness(
    space: TSplineSpace,
    geometry: GeometryMap | None = None,
    quad_order: int | None = None,
    *,
    threads: int | None = None,
) -> LinearSystem:
    """Stiffness matrix ``a(B_i, B_j)`` over all basis functions (no elimination)."""
    space.require_analysis_suitable()
    geometry = geometry or IdentityMap()
    order = _check_quad_order(space, quad_order)
    workers = resolve_threads(threads)
    rows, cols, vals = _collect(
        lambda chunk: _stiffness_chunk(space, geometry, chunk, order),
        len(space.bezier),
        workers,
    )
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(space.dim, space.dim)).tocsr()
    logger.debug(
        "stiffness: %d dofs, %d elements, nnz=%d, threads=%d",
        space.dim,
        len(space.bezier),
        matrix.nnz,
        workers,
    )
    return LinearSystem(matrix, np.zeros(space.dim), np.arange(space.dim), space.dim)


def assemble_rhs(
    space: TSplineSpace,
    geometry: GeometryMap | None,
    f: SourceHandle,
    quad_order: int | None = None,
) -> np.ndarray:
    """Load vector ``(f, B_i)``; ``f`` takes arrays of physical ``x`` and ``y``."""
    space.require_analysis_suitable()
    geometry = geometry or IdentityMap()
    order = _check_quad_order(space, quad_order)
    out = np.zeros(space.dim)
    for e in range(len(space.bezier)):
        data = _element_data(space, geometry, e, order, with_gradients=False)
        source = np.asarray(f(data.points[:, 0], data.points[:, 1]), dtype=float)
        source = np.broadcast_to(source, data.weights.shape)
        np.add.at(out, data.functions, data.values @ (source * data.weights))
    return out


def has_trace(f: TSplineFunction, side: str, samples: int = 5) -> bool:
    """Whether ``f`` is nonzero somewhere on ``side`` of the unit square.

    The trace is sampled at interior points of the support along the side.
    """
    x0, y0, x1, y1 = f.support
    t = (np.arange(samples) + 0.5) / samples
    along_x = x0 + (x1 - x0) * t
    along_y = y0 + (y1 - y0) * t
    if side == "south" and y0 == 0.0:
        trace = f.evaluate(along_x, np.zeros(samples))
    elif side == "north" and y1 == 1.0:
        trace = f.evaluate(along_x, np.ones(samples))
    elif side == "west" and x0 == 0.0:
        trace = f.evaluate(np.zeros(samples), along_y)
    elif side == "east" and x1 == 1.0:
        trace = f.evaluate(np.ones(samples), along_y)
    else:
        return False
    return bool(np.max(np.abs(trace)) > 1e-14)


def check_sides(sides: Sequence[str]) -> None:
    unknown = set(sides) - set(SIDES)
    if unknown:
        raise ValueError(f"unknown sides {sorted(unknown)}; expected a subset of {SIDES}")


def boundary_functions(space: TSplineSpace, sides: Sequence[str] = SIDES) -> np.ndarray:
    """Indices of the functions with a nonzero trace on any of ``sides``."""
    check_sides(sides)
    found = [
        i for i, f in enumerate(space.functions) if any(has_trace(f, side) for side in sides)
    ]
    return np.asarray(found, dtype=int)


def eliminate(system: LinearSystem, boundary: np.ndarray) -> LinearSystem:
    """Drop the rows and columns of the dofs in ``boundary`` (homogeneous data)."""
    keep_mask = np.ones(system.shape[0], dtype=bool)
    positions = np.searchsorted(system.dofs, boundary)
    valid = (positions < system.dofs.size) & (
        system.dofs[np.minimum(positions, system.dofs.size - 1)] == boundary
    )
    keep_mask[positions[valid]] = False
    keep = np.nonzero(keep_mask)[0]
    matrix = system.matrix[keep][:, keep].tocsr()
    return LinearSystem(
        matrix,
        np.asarray(system.rhs)[keep],
        system.dofs[keep],
        system.size,
        np.union1d(system.boundary, boundary).astype(int),
    )


def apply_dirichlet(system: LinearSystem, space: TSplineSpace | MultiPatchSpace) -> LinearSystem:
    """Remove the functions whose trace is nonzero on the domain boundary."""
    if isinstance(space, TSplineSpace):
        boundary = boundary_functions(space)
    else:
        boundary = space.boundary_dofs()
    reduced = eliminate(system, boundary)
    logger.debug("dirichlet: %d -> %d dofs", system.shape[0], reduced.shape[0])
    return reduced


def symmetry_defect(matrix: sp.spmatrix) -> float:
    """``max|A - A^T| / max|A|``."""
    scale = abs(matrix).max()
    if scale == 0:
        return 0.0
    return float(abs(matrix - matrix.T).max() / scale)


# -- solving and errors ------------------------------------------------------


def solve_poisson(
    space: TSplineSpace,
    f: SourceHandle,
    geometry: GeometryMap | None = None,
    quad_order: int | None = None,
    *,
    threads: int | None = None,
) -> tuple[np.ndarray, LinearSystem]:
    """Direct solve of the Dirichlet-reduced system; returns full coefficients."""
    system = assemble_stiffness(space, geometry, quad_order, threads=threads)
    system.rhs = assemble_rhs(space, geometry, f, quad_order)
    reduced = apply_dirichlet(system, space)
    values = spla.spsolve(reduced.matrix.tocsc(), reduced.rhs)
    return reduced.extend(np.atleast_1d(values)), reduced


def l2_error(
    space: TSplineSpace,
    geometry: GeometryMap | None,
    coeffs: np.ndarray,
    exact: SourceHandle,
    quad_order: int | None = None,
) -> float:
    """``||u_h - u||_{L2}`` with ``p + 3`` Gauss points per direction by default."""
    geometry = geometry or IdentityMap()
    order = quad_order if quad_order is not None else max(space.degree) + 3
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.dim,):
        raise ValueError(f"expected {space.dim} coefficients, got shape {coeffs.shape}")
    total = 0.0
    for e in range(len(space.bezier)):
        data = _element_data(space, geometry, e, order, with_gradients=False)
        approx = coeffs[data.functions] @ data.values
        reference = np.asarray(exact(data.points[:, 0], data.points[:, 1]), dtype=float)
        total += float(np.sum((approx - reference) ** 2 * data.weights))
    return float(np.sqrt(total))

