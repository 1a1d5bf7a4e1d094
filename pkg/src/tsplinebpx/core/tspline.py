"""Analysis-suitable T-spline spaces built on a bisection T-mesh.

Functions are identified by their pair of index vectors (``TSplineFunction.key``).
Frame lines of the index domain are integers, so this pair is in one-to-one
correspondence with the pair of local knot vectors.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from ..exceptions import BasisError, MeshError, NotAnalysisSuitableError
from .bspline import dual_of_bspline, dual_weights, eval_local_array, refine_local
from .dyadic import DyadicIndex, IndexRect, IndexVec2, dyadic_grid
from .tmesh import LineCover, Segment, TMesh, index_to_knot

logger = logging.getLogger(__name__)

FunctionKey = tuple[tuple[DyadicIndex, ...], tuple[DyadicIndex, ...]]
Box = tuple[float, float, float, float]
SplineHandle = Callable[[float, float, int, int], float]

_CERTIFY_TOL = 1e-10


class AnchorKind(StrEnum):
    VERTEX = "vertex"
    ELEMENT = "element"
    H_EDGE = "h-edge"
    V_EDGE = "v-edge"


def anchor_kind(degree: tuple[int, int]) -> AnchorKind:
    odd_x, odd_y = degree[0] % 2 == 1, degree[1] % 2 == 1
    if odd_x and odd_y:
        return AnchorKind.VERTEX
    if not odd_x and not odd_y:
        return AnchorKind.ELEMENT
    return AnchorKind.H_EDGE if odd_y else AnchorKind.V_EDGE


@dataclass(frozen=True, slots=True, order=True)
class Anchor:
    """Vertex, edge or element of the mesh; ``location`` is degenerate for vertices/edges."""

    location: IndexRect
    kind: AnchorKind = field(compare=False)

    @property
    def centre(self) -> IndexVec2:
        return self.location.midpoint


@dataclass(frozen=True, slots=True)
class TSplineFunction:
    """One blending function ``B[knots_x](x) * B[knots_y](y)``."""

    anchor: Anchor
    hv: tuple[DyadicIndex, ...]
    vv: tuple[DyadicIndex, ...]
    knots_x: tuple[float, ...]
    knots_y: tuple[float, ...]
    generation: int = 0

    @property
    def key(self) -> FunctionKey:
        return self.hv, self.vv

    @property
    def support(self) -> Box:
        return self.knots_x[0], self.knots_y[0], self.knots_x[-1], self.knots_y[-1]

    @property
    def index_support(self) -> IndexRect:
        return IndexRect(IndexVec2(self.hv[0], self.vv[0]), IndexVec2(self.hv[-1], self.vv[-1]))

    def evaluate(self, xs: np.ndarray, ys: np.ndarray, dx: int = 0, dy: int = 0) -> np.ndarray:
        return eval_local_array(self.knots_x, xs, dx) * eval_local_array(self.knots_y, ys, dy)

    def with_generation(self, generation: int) -> TSplineFunction:
        return TSplineFunction(
            self.anchor, self.hv, self.vv, self.knots_x, self.knots_y, generation
        )


@dataclass(frozen=True, slots=True)
class BezierElement:
    index_rect: IndexRect
    rect: Box

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) * (y1 - y0)

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.rect
        return float(np.hypot(x1 - x0, y1 - y0))


@dataclass(frozen=True, slots=True)
class TJunction:
    vertex: IndexVec2
    missing: str


@dataclass(frozen=True, slots=True)
class ExtendedTMesh:
    """T-junction extensions of a mesh, with the classical crossing test."""

    junctions: tuple[TJunction, ...]
    extensions: tuple[Segment, ...]
    crossings: tuple[tuple[Segment, Segment], ...]

    @property
    def crossing_free(self) -> bool:
        return not self.crossings

    @property
    def horizontal(self) -> tuple[Segment, ...]:
        return tuple(s for s in self.extensions if not s.vertical)

    @property
    def vertical(self) -> tuple[Segment, ...]:
        return tuple(s for s in self.extensions if s.vertical)


@dataclass(frozen=True, slots=True)
class DualCompatibilityReport:
    ok: bool
    violations: tuple[tuple[Anchor, Anchor], ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class TSplineSpace:
    """Basis, Bézier mesh and element incidence of one T-mesh."""

    mesh: TMesh
    functions: tuple[TSplineFunction, ...]
    bezier: tuple[BezierElement, ...]
    incidence: tuple[tuple[int, ...], ...]
    compatibility: DualCompatibilityReport
    extended: ExtendedTMesh

    @property
    def dim(self) -> int:
        return len(self.functions)

    @property
    def degree(self) -> tuple[int, int]:
        return self.mesh.degree

    @property
    def analysis_suitable(self) -> bool:
        return self.compatibility.ok

    @cached_property
    def index(self) -> dict[FunctionKey, int]:
        return {f.key: i for i, f in enumerate(self.functions)}

    @cached_property
    def supports(self) -> np.ndarray:
        """``(dim, 4)`` array of parametric support boxes."""
        return np.array([f.support for f in self.functions], dtype=float).reshape(-1, 4)

    def require_analysis_suitable(self) -> None:
        if not self.analysis_suitable:
            raise NotAnalysisSuitableError(
                f"space has {len(self.compatibility.violations)} dual-compatibility violations"
            )


# -- anchors and index vectors -----------------------------------------------


def active_region(mesh: TMesh) -> IndexRect:
    (p1, p2), (m1, m2) = mesh.degree, mesh.extent
    c1, c2 = (p1 + 1) // 2, (p2 + 1) // 2
    return IndexRect.of(c1, c2, m1 - c1, m2 - c2)


def _clip(rect: IndexRect, bounds: IndexRect) -> IndexRect | None:
    lo = IndexVec2(max(rect.lo.x, bounds.lo.x), max(rect.lo.y, bounds.lo.y))
    hi = IndexVec2(min(rect.hi.x, bounds.hi.x), min(rect.hi.y, bounds.hi.y))
    if lo.x > hi.x or lo.y > hi.y:
        return None
    return IndexRect(lo, hi)


def anchors_in(mesh: TMesh, rect: IndexRect) -> list[Anchor]:
    """Anchors lying in the closed ``rect`` (and in the active region)."""
    clip = _clip(rect, active_region(mesh))
    if clip is None:
        return []
    kind = anchor_kind(mesh.degree)
    if kind is AnchorKind.VERTEX:
        found = [Anchor(IndexRect(v, v), kind) for v in mesh.vertices_in(clip)]
    elif kind is AnchorKind.ELEMENT:
        found = [Anchor(t, kind) for t in mesh.elements_inside(clip)]
    elif kind is AnchorKind.H_EDGE:
        found = [
            Anchor(IndexRect(IndexVec2(s.lo, s.fixed), IndexVec2(s.hi, s.fixed)), kind)
            for s in mesh.edges_in(clip, vertical=False)
        ]
    else:
        found = [
            Anchor(IndexRect(IndexVec2(s.fixed, s.lo), IndexVec2(s.fixed, s.hi)), kind)
            for s in mesh.edges_in(clip, vertical=True)
        ]
    return sorted(found)


def anchors(mesh: TMesh) -> list[Anchor]:
    """All anchors of the mesh, lexicographically ordered by location."""
    return anchors_in(mesh, active_region(mesh))


def _ray_vector(
    cover: LineCover, t: DyadicIndex, start: DyadicIndex, degree: int
) -> tuple[DyadicIndex, ...]:
    if degree % 2:
        count = (degree + 1) // 2
        middle: tuple[DyadicIndex, ...] = (start,)
    else:
        count = (degree + 2) // 2
        middle = ()
    left = cover.hits(t, start, False, count)
    right = cover.hits(t, start, True, count)
    if len(left) < count or len(right) < count:
        raise MeshError(f"ray from {start} at {t} left the index domain early")
    return (*reversed(left), *middle, *right)


def index_vectors(
    mesh: TMesh, anchor: Anchor
) -> tuple[tuple[DyadicIndex, ...], tuple[DyadicIndex, ...]]:
    """Trace the horizontal and vertical rays of ``anchor`` through the skeleton."""
    centre = anchor.centre
    hv = _ray_vector(mesh.vlines, centre.y, centre.x, mesh.degree[0])
    vv = _ray_vector(mesh.hlines, centre.x, centre.y, mesh.degree[1])
    return hv, vv


def make_function(mesh: TMesh, anchor: Anchor, generation: int | None = None) -> TSplineFunction:
    hv, vv = index_vectors(mesh, anchor)
    (p1, p2), (n1, n2) = mesh.degree, mesh.n
    if generation is None:
        generation = max(mesh.generation(t) for t in mesh.elements_touching(anchor.location))
    return TSplineFunction(
        anchor=anchor,
        hv=hv,
        vv=vv,
        knots_x=tuple(index_to_knot(k, p1, n1) for k in hv),
        knots_y=tuple(index_to_knot(k, p2, n2) for k in vv),
        generation=generation,
    )


# -- dual compatibility ------------------------------------------------------


def _vectors_overlap(a: Sequence[DyadicIndex], b: Sequence[DyadicIndex]) -> bool:
    lo = max(a[0], b[0])
    hi = min(a[-1], b[-1])
    if lo > hi:
        return False
    return [v for v in a if lo <= v <= hi] == [v for v in b if lo <= v <= hi]


def overlapping_pairs(boxes: np.ndarray) -> Iterable[tuple[int, int]]:
    """Index pairs ``i < j`` whose boxes overlap with positive area."""
    x0, y0, x1, y1 = boxes.T
    for i in range(len(boxes)):
        rest = slice(i + 1, None)
        mask = (x0[rest] < x1[i]) & (x0[i] < x1[rest]) & (y0[rest] < y1[i]) & (y0[i] < y1[rest])
        for j in np.nonzero(mask)[0]:
            yield i, i + 1 + int(j)


def dual_compatibility(functions: Sequence[TSplineFunction]) -> DualCompatibilityReport:
    boxes = np.array([f.support for f in functions], dtype=float).reshape(-1, 4)
    violations = []
    for i, j in overlapping_pairs(boxes):
        a, b = functions[i], functions[j]
        if (a.hv != b.hv and _vectors_overlap(a.hv, b.hv)) or (
            a.vv != b.vv and _vectors_overlap(a.vv, b.vv)
        ):
            continue
        violations.append((a.anchor, b.anchor))
    return DualCompatibilityReport(not violations, tuple(violations))


def check_dual_compatibility(space: TSplineSpace) -> DualCompatibilityReport:
    return dual_compatibility(space.functions)


# -- extensions and Bézier mesh ----------------------------------------------


def t_junctions(mesh: TMesh) -> list[TJunction]:
    """Vertices with exactly three edges strictly inside the parametric region."""
    (p1, p2), (n1, n2) = mesh.degree, mesh.n
    region = IndexRect.of(p1, p2, n1, n2)
    found = []
    for v in mesh.vertices_in(region):
        if not (p1 < v.x < n1 and p2 < v.y < n2):
            continue
        present = {
            "left": mesh.hlines.covers_below(v.y, v.x),
            "right": mesh.hlines.covers_above(v.y, v.x),
            "down": mesh.vlines.covers_below(v.x, v.y),
            "up": mesh.vlines.covers_above(v.x, v.y),
        }
        missing = [side for side, ok in present.items() if not ok]
        if len(missing) == 1:
            found.append(TJunction(v, missing[0]))
    return found


def _extension(mesh: TMesh, junction: TJunction) -> Segment:
    v = junction.vertex
    horizontal = junction.missing in ("left", "right")
    if horizontal:
        cover, t, start, degree = mesh.vlines, v.y, v.x, mesh.degree[0]
    else:
        cover, t, start, degree = mesh.hlines, v.x, v.y, mesh.degree[1]
    toward = junction.missing in ("right", "up")
    face = cover.hits(t, start, toward, (degree + 1) // 2)
    edge = cover.hits(t, start, not toward, degree // 2)
    if len(face) < (degree + 1) // 2 or len(edge) < degree // 2:
        raise MeshError(f"extension of T-junction {v} left the index domain")
    ends = [start, *face, *edge]
    return Segment(not horizontal, t, min(ends), max(ends))


def _segments_cross(h: Segment, v: Segment) -> bool:
    return h.lo <= v.fixed <= h.hi and v.lo <= h.fixed <= v.hi


def extended_tmesh(mesh: TMesh) -> ExtendedTMesh:
    """T-junction extensions plus every horizontal/vertical extension crossing."""
    junctions = t_junctions(mesh)
    extensions = [_extension(mesh, j) for j in junctions]
    hs = [s for s in extensions if not s.vertical]
    vs = [s for s in extensions if s.vertical]
    crossings = []
    if hs and vs:
        h_arr = np.array([[float(s.fixed), float(s.lo), float(s.hi)] for s in hs])
        v_arr = np.array([[float(s.fixed), float(s.lo), float(s.hi)] for s in vs])
        hit = (
            (h_arr[:, None, 1] <= v_arr[None, :, 0])
            & (v_arr[None, :, 0] <= h_arr[:, None, 2])
            & (v_arr[None, :, 1] <= h_arr[:, None, 0])
            & (h_arr[:, None, 0] <= v_arr[None, :, 2])
        )
        for i, j in zip(*np.nonzero(hit), strict=True):
            if _segments_cross(hs[i], vs[j]):
                crossings.append((hs[i], vs[j]))
    return ExtendedTMesh(tuple(junctions), tuple(extensions), tuple(crossings))


def _cuts(segments: Iterable[Segment]) -> dict[DyadicIndex, list[tuple[DyadicIndex, DyadicIndex]]]:
    table: dict[DyadicIndex, list[tuple[DyadicIndex, DyadicIndex]]] = defaultdict(list)
    for s in segments:
        table[s.fixed].append((s.lo, s.hi))
    return table


def bezier_mesh(mesh: TMesh, extended: ExtendedTMesh | None = None) -> list[BezierElement]:
    """Non-empty parametric cells of the mesh cut by the T-junction extensions."""
    extended = extended if extended is not None else extended_tmesh(mesh)
    hcuts = _cuts(extended.horizontal)
    vcuts = _cuts(extended.vertical)
    out = []
    for tau in mesh:
        x0, y0, x1, y1 = mesh.parametric_rect(tau)
        if x0 == x1 or y0 == y1:
            continue
        ys = sorted(
            y
            for y, spans in hcuts.items()
            if tau.lo.y < y < tau.hi.y
            and any(lo <= tau.lo.x and tau.hi.x <= hi for lo, hi in spans)
        )
        xs = sorted(
            x
            for x, spans in vcuts.items()
            if tau.lo.x < x < tau.hi.x
            and any(lo <= tau.lo.y and tau.hi.y <= hi for lo, hi in spans)
        )
        xs = [tau.lo.x, *xs, tau.hi.x]
        ys = [tau.lo.y, *ys, tau.hi.y]
        for xa, xb in zip(xs, xs[1:], strict=False):
            for ya, yb in zip(ys, ys[1:], strict=False):
                cell = IndexRect(IndexVec2(xa, ya), IndexVec2(xb, yb))
                out.append(BezierElement(cell, mesh.parametric_rect(cell)))
    return out


# -- incidence ---------------------------------------------------------------


def _incidence(
    functions: Sequence[TSplineFunction], cells: Sequence[BezierElement]
) -> tuple[tuple[int, ...], ...]:
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for i, f in enumerate(functions):
        box = f.index_support
        for bx in range(box.lo.x.floor(), box.hi.x.ceil()):
            for by in range(box.lo.y.floor(), box.hi.y.ceil()):
                buckets[bx, by].append(i)
    out = []
    for cell in cells:
        key = cell.index_rect.lo.x.floor(), cell.index_rect.lo.y.floor()
        rect = cell.index_rect
        hits = [i for i in buckets.get(key, ()) if functions[i].index_support.overlaps(rect)]
        out.append(tuple(hits))
    return tuple(out)


def incidence(space: TSplineSpace) -> tuple[tuple[int, ...], ...]:
    """Per Bézier element, the indices of the functions not vanishing on it."""
    return space.incidence


@dataclass(frozen=True, slots=True)
class SupportExtension:
    boxes: tuple[Box, ...]
    bounding: Box


def supports(space: TSplineSpace, element: int) -> SupportExtension:
    """Support extension of Bézier element ``element`` and its bounding box."""
    boxes = tuple(space.functions[i].support for i in space.incidence[element])
    arr = np.array(boxes, dtype=float).reshape(-1, 4)
    bounding = (
        float(arr[:, 0].min()),
        float(arr[:, 1].min()),
        float(arr[:, 2].max()),
        float(arr[:, 3].max()),
    )
    return SupportExtension(boxes, bounding)


# -- construction ------------------------------------------------------------


def build_space(
    mesh: TMesh, generations: Mapping[FunctionKey, int] | None = None
) -> TSplineSpace:
    """Build the T-spline space of ``mesh``.

    ``generations`` maps function keys to the generation of the bisection that
    created them (see :mod:`tsplinebpx.core.levels`). Without it a function's
    generation is the highest generation among the elements touching its anchor.
    """
    snapshot = mesh.copy()
    functions = []
    for anchor in anchors(snapshot):
        f = make_function(snapshot, anchor)
        if generations is not None and f.key in generations:
            f = f.with_generation(generations[f.key])
        functions.append(f)
    compatibility = dual_compatibility(functions)
    extended = extended_tmesh(snapshot)
    cells = bezier_mesh(snapshot, extended)
    space = TSplineSpace(
        mesh=snapshot,
        functions=tuple(functions),
        bezier=tuple(cells),
        incidence=_incidence(functions, cells),
        compatibility=compatibility,
        extended=extended,
    )
    logger.debug(
        "space: %d functions, %d Bezier elements, AS=%s",
        space.dim,
        len(space.bezier),
        space.analysis_suitable,
    )
    return space


# -- evaluation --------------------------------------------------------------


def evaluate_space(
    space: TSplineSpace, points: np.ndarray, dx: int = 0, dy: int = 0
) -> sp.csr_matrix:
    """``(len(points), dim)`` matrix of basis values (or derivatives) at ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for i, f in enumerate(space.functions):
        x0, y0, x1, y1 = f.support
        mask = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        values = f.evaluate(pts[idx, 0], pts[idx, 1], dx, dy)
        keep = values != 0.0
        rows.append(idx[keep])
        cols.append(np.full(int(keep.sum()), i))
        vals.append(values[keep])
    if not rows:
        return sp.csr_matrix((len(pts), space.dim))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(pts), space.dim),
    )


@lru_cache(maxsize=262144)
def _eval1(knots: tuple[float, ...], x: float, order: int) -> float:
    return float(eval_local_array(knots, [x], order)[0])


class SplineField:
    """A spline ``sum_i c_i B_i`` with pointwise partial derivatives."""

    def __init__(self, functions: Sequence[TSplineFunction], coeffs: np.ndarray) -> None:
        self.functions = tuple(functions)
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape != (len(self.functions),):
            raise ValueError("one coefficient per function is required")
        self._boxes = np.array([f.support for f in self.functions], dtype=float).reshape(-1, 4)

    def __call__(self, x: float, y: float, rx: int = 0, ry: int = 0) -> float:
        b = self._boxes
        mask = (b[:, 0] <= x) & (x <= b[:, 2]) & (b[:, 1] <= y) & (y <= b[:, 3])
        total = 0.0
        for i in np.nonzero(mask)[0]:
            c = self.coeffs[i]
            if c == 0.0:
                continue
            f = self.functions[i]
            total += c * _eval1(f.knots_x, x, rx) * _eval1(f.knots_y, y, ry)
        return total

    def values(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.array([self(x, y) for x, y in pts])


def projector(space: TSplineSpace, f: SplineHandle) -> np.ndarray:
    """Coefficients ``lambda_A(f)`` from the tensorized de Boor-Fix functionals."""
    space.require_analysis_suitable()
    coeffs = np.empty(space.dim)
    for i, g in enumerate(space.functions):
        tx, wx = dual_weights(g.knots_x)
        ty, wy = dual_weights(g.knots_y)
        coeffs[i] = sum(
            a * b * f(tx, ty, r, s)
            for r, a in enumerate(wx)
            if a != 0.0
            for s, b in enumerate(wy)
            if b != 0.0
        )
    return coeffs


# -- fine embedding ----------------------------------------------------------


@lru_cache(maxsize=64)
def _fine_line(p: int, n: int, level: int) -> tuple[tuple[DyadicIndex, ...], dict]:
    inner = dyadic_grid(p, n, level)[1:-1]
    line = (
        *(DyadicIndex(k) for k in range(p + 1)),
        *inner,
        *(DyadicIndex(k) for k in range(n, n + p + 1)),
    )
    return line, {v: i for i, v in enumerate(line)}


@lru_cache(maxsize=131072)
def _embed_1d(
    vector: tuple[DyadicIndex, ...], p: int, n: int, level: int
) -> tuple[int, np.ndarray]:
    line, position = _fine_line(p, n, level)
    missing = [v for v in vector if v not in position]
    if missing:
        raise BasisError(f"level {level} is too coarse for index {missing[0]}")
    start, stop = position[vector[0]], position[vector[-1]]
    present = set(vector)
    inserted = [
        index_to_knot(line[i], p, n) for i in range(start, stop + 1) if line[i] not in present
    ]
    _, coeffs = refine_local([index_to_knot(v, p, n) for v in vector], inserted)
    coeffs.setflags(write=False)
    return start, coeffs


@dataclass(frozen=True, slots=True)
class FineGrid:
    """Uniform tensor B-spline space with ``2**levels[d]`` index steps per unit."""

    degree: tuple[int, int]
    n: tuple[int, int]
    levels: tuple[int, int]

    @classmethod
    def at_level(cls, mesh: TMesh, level: int) -> FineGrid:
        return cls(mesh.degree, mesh.n, ((level + 1) // 2, level // 2))

    @classmethod
    def covering(cls, mesh: TMesh, functions: Iterable[TSplineFunction]) -> FineGrid:
        lx = ly = 0
        for f in functions:
            lx = max(lx, *(v.exp for v in f.hv))
            ly = max(ly, *(v.exp for v in f.vv))
        return cls(mesh.degree, mesh.n, (lx, ly))

    def size(self, axis: int) -> int:
        p, n = self.degree[axis], self.n[axis]
        return (n - p) * (1 << self.levels[axis]) + p

    @property
    def total(self) -> int:
        return self.size(0) * self.size(1)


def _embed_parts(f: TSplineFunction, grid: FineGrid) -> tuple[np.ndarray, np.ndarray]:
    (p1, p2), (n1, n2) = grid.degree, grid.n
    ox, cx = _embed_1d(f.hv, p1, n1, grid.levels[0])
    oy, cy = _embed_1d(f.vv, p2, n2, grid.levels[1])
    ix = np.arange(ox, ox + cx.size)
    iy = np.arange(oy, oy + cy.size)
    rows = (ix[:, None] * grid.size(1) + iy[None, :]).ravel()
    return rows, np.outer(cx, cy).ravel()


def fine_embedding(f: TSplineFunction, grid: FineGrid) -> sp.csr_matrix:
    """Coefficients of ``f`` in the uniform fine basis, as a ``(1, grid.total)`` row."""
    rows, vals = _embed_parts(f, grid)
    keep = vals != 0.0
    return sp.csr_matrix(
        (vals[keep], (np.zeros(int(keep.sum()), dtype=int), rows[keep])), shape=(1, grid.total)
    )


def embedding_matrix(functions: Sequence[TSplineFunction], grid: FineGrid) -> sp.csc_matrix:
    """``(grid.total, len(functions))`` matrix whose columns are fine embeddings."""
    rows, cols, vals = [], [], []
    for j, f in enumerate(functions):
        r, v = _embed_parts(f, grid)
        rows.append(r)
        cols.append(np.full(r.size, j))
        vals.append(v)
    if not functions:
        return sp.csc_matrix((grid.total, 0))
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.total, len(functions)),
    )


# -- change of basis ---------------------------------------------------------


def _column_norms(matrix: sp.spmatrix) -> np.ndarray:
    return np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=0)).ravel())


def _candidates(target: TSplineSpace, f: TSplineFunction) -> np.ndarray:
    b = target.supports
    x0, y0, x1, y1 = f.support
    mask = (b[:, 0] < x1) & (x0 < b[:, 2]) & (b[:, 1] < y1) & (y0 < b[:, 3])
    return np.nonzero(mask)[0]


def _least_squares_column(
    column: sp.csc_matrix, target_embed: sp.csc_matrix, candidates: np.ndarray
) -> tuple[np.ndarray, float]:
    local = target_embed[:, candidates]
    rows = np.union1d(column.nonzero()[0], local.nonzero()[0])
    lhs = local[rows].toarray()
    rhs = column[rows].toarray().ravel()
    coeffs, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    residual = float(np.linalg.norm(lhs @ coeffs - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return coeffs, residual


def change_of_basis(
    coarse: Sequence[TSplineFunction],
    target: TSplineSpace,
    *,
    certify: bool = True,
    tol: float = _CERTIFY_TOL,
) -> sp.csc_matrix:
    """``(target.dim, len(coarse))`` matrix expressing each coarse function in ``target``.

    Coefficients come from the target's dual functionals; with ``certify`` the
    identity is checked in a common uniform fine space and failing columns are
    recomputed by local least squares.
    """
    target.require_analysis_suitable()
    rows, cols, vals = [], [], []
    for j, f in enumerate(coarse):
        own = target.index.get(f.key)
        if own is not None:
            rows.append(own)
            cols.append(j)
            vals.append(1.0)
            continue
        for i in _candidates(target, f):
            g = target.functions[i]
            value = dual_of_bspline(g.knots_x, f.knots_x) * dual_of_bspline(g.knots_y, f.knots_y)
            if abs(value) > 1e-14:
                rows.append(int(i))
                cols.append(j)
                vals.append(value)
    psi = sp.csc_matrix((vals, (rows, cols)), shape=(target.dim, len(coarse)))
    if not certify or not coarse:
        return psi

    grid = FineGrid.covering(target.mesh, [*target.functions, *coarse])
    target_embed = embedding_matrix(target.functions, grid)
    coarse_embed = embedding_matrix(coarse, grid)
    residual = _column_norms(coarse_embed - target_embed @ psi) / _column_norms(coarse_embed)
    bad = np.nonzero(residual > tol)[0]
    if bad.size == 0:
        return psi
    logger.warning("dual-functional coefficients failed for %d columns; refitting", bad.size)
    psi = psi.tolil()
    for j in bad:
        candidates = _candidates(target, coarse[j])
        coeffs, res = _least_squares_column(coarse_embed[:, j], target_embed, candidates)
        if res > tol:
            raise BasisError(
                f"function not in target span (anchor {coarse[j].anchor.location}, "
                f"residual {res:.2e})"
            )
        psi[:, j] = 0.0
        for i, c in zip(candidates, coeffs, strict=True):
            if abs(c) > 1e-14:
                psi[int(i), j] = c
    return psi.tocsc()


# -- structural audits -------------------------------------------------------


def _admitted_lengths(generation: int, axis: int) -> tuple[DyadicIndex, ...]:
    if axis == 0:
        if generation % 2 == 0:
            return (DyadicIndex(1, generation // 2),)
        return DyadicIndex(1, (generation + 1) // 2), DyadicIndex(1, (generation - 1) // 2)
    if generation % 2 == 0:
        return DyadicIndex(1, generation // 2), DyadicIndex(1, generation // 2).scaled(1)
    return (DyadicIndex(1, (generation - 1) // 2),)


def tiled_floor_audit(
    space: TSplineSpace, generations: Mapping[FunctionKey, int] | None = None
) -> list[tuple[FunctionKey, int, DyadicIndex]]:
    """Tiled-floor cell lengths outside the two values admitted for the generation.

    Returns ``(key, axis, index_length)`` for every offending cell; lengths in
    the frame are skipped.
    """
    bad = []
    p, n = space.degree, space.mesh.n
    for f in space.functions:
        g = generations.get(f.key, f.generation) if generations is not None else f.generation
        for axis, vector in ((0, f.hv), (1, f.vv)):
            allowed = _admitted_lengths(g, axis)
            for a, b in zip(vector, vector[1:], strict=False):
                if a < p[axis] or b > n[axis]:
                    continue
                if b - a not in allowed:
                    bad.append((f.key, axis, b - a))
    return bad


def bezier_per_tiled_cell(space: TSplineSpace) -> int:
    """Largest number of Bézier elements inside one tiled-floor cell of any function."""
    buckets: dict[tuple[int, int], list[IndexRect]] = defaultdict(list)
    for cell in space.bezier:
        buckets[cell.index_rect.lo.x.floor(), cell.index_rect.lo.y.floor()].append(
            cell.index_rect
        )
    p, n = space.degree, space.mesh.n
    worst = 0
    for f in space.functions:
        for xa, xb in zip(f.hv, f.hv[1:], strict=False):
            if xa < p[0] or xb > n[0]:
                continue
            for ya, yb in zip(f.vv, f.vv[1:], strict=False):
                if ya < p[1] or yb > n[1]:
                    continue
                tile = IndexRect(IndexVec2(xa, ya), IndexVec2(xb, yb))
                count = 0
                for bx in range(xa.floor(), xb.ceil()):
                    for by in range(ya.floor(), yb.ceil()):
                        count += sum(tile.contains(c) for c in buckets.get((bx, by), ()))
                worst = max(worst, count)
    return worst


def size_comparability(space: TSplineSpace) -> float:
    """Largest ratio between the bounding box of a support extension and its element."""
    worst = 1.0
    for e, cell in enumerate(space.bezier):
        x0, y0, x1, y1 = supports(space, e).bounding
        worst = max(worst, float(np.hypot(x1 - x0, y1 - y0)) / cell.diameter)
    return worst
