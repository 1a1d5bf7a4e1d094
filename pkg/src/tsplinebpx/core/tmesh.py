"""Bisection T-meshes in the index domain.

A :class:`TMesh` starts from the Cartesian grid of unit index cells
``[0, m1] x [0, m2]`` with ``m_d = n_d + p_d`` and changes only through
:meth:`TMesh.split`. Every split is appended to ``history``, which is the
source of truth: admissibility audits and the multilevel decompositions replay
it.

Error-handling contract:
- Unknown elements, invalid degrees and runaway closures raise ``MeshError``.
- Query methods never mutate the mesh.
"""

from __future__ import annotations

import bisect
import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from types import MappingProxyType
from typing import NamedTuple

from ..exceptions import MeshError
from .dyadic import (
    DyadicIndex,
    IndexRect,
    IndexVec2,
    componentwise_dist,
    midpoint,
    translate_point,
)

logger = logging.getLogger(__name__)

_MAX_CLOSURE_DEPTH = 128


class Direction(StrEnum):
    X = "x"
    Y = "y"

    @property
    def axis(self) -> int:
        return 0 if self is Direction.X else 1


@dataclass(frozen=True, slots=True)
class Bisection:
    """One history record; ``children == (parent,)`` for zero-length bisections."""

    parent: IndexRect
    direction: Direction
    generation: int
    children: tuple[IndexRect, ...]

    @property
    def is_degenerate(self) -> bool:
        return len(self.children) == 1


class Segment(NamedTuple):
    """Axis-parallel index segment; ``vertical`` segments have fixed x."""

    vertical: bool
    fixed: DyadicIndex
    lo: DyadicIndex
    hi: DyadicIndex

    def continues(self, other: Segment) -> bool:
        """Collinear with ``other`` and sharing at least one point."""
        return (
            self.vertical == other.vertical
            and self.fixed == other.fixed
            and self.lo <= other.hi
            and other.lo <= self.hi
        )


@dataclass(frozen=True, slots=True)
class AdmissibilityReport:
    ok: bool
    violations: tuple[Bisection, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


class LineCover:
    """Closed, merged coverage intervals per line of one orientation.

    For vertical lines the key is x and the intervals run in y.
    """

    __slots__ = ("_ends", "_keys", "_starts")

    def __init__(self) -> None:
        self._keys: list[DyadicIndex] = []
        self._starts: dict[DyadicIndex, list[DyadicIndex]] = {}
        self._ends: dict[DyadicIndex, list[DyadicIndex]] = {}

    def copy(self) -> LineCover:
        other = LineCover()
        other._keys = list(self._keys)
        other._starts = {k: list(v) for k, v in self._starts.items()}
        other._ends = {k: list(v) for k, v in self._ends.items()}
        return other

    @property
    def keys(self) -> list[DyadicIndex]:
        return self._keys

    def add(self, fixed: DyadicIndex, lo: DyadicIndex, hi: DyadicIndex) -> None:
        if fixed not in self._starts:
            bisect.insort(self._keys, fixed)
            self._starts[fixed] = [lo]
            self._ends[fixed] = [hi]
            return
        starts = self._starts[fixed]
        ends = self._ends[fixed]
        i = bisect.bisect_left(starts, lo)
        if i > 0 and ends[i - 1] >= lo:
            i -= 1
        j = i
        new_lo, new_hi = lo, hi
        while j < len(starts) and starts[j] <= new_hi:
            new_lo = min(new_lo, starts[j])
            new_hi = max(new_hi, ends[j])
            j += 1
        starts[i:j] = [new_lo]
        ends[i:j] = [new_hi]

    def covers(self, fixed: DyadicIndex, t: DyadicIndex) -> bool:
        starts = self._starts.get(fixed)
        if starts is None:
            return False
        i = bisect.bisect_right(starts, t) - 1
        return i >= 0 and self._ends[fixed][i] >= t

    def covers_below(self, fixed: DyadicIndex, t: DyadicIndex) -> bool:
        """Some interval ``[a, b]`` has ``a < t <= b``."""
        starts = self._starts.get(fixed)
        if starts is None:
            return False
        i = bisect.bisect_left(starts, t) - 1
        return i >= 0 and self._ends[fixed][i] >= t

    def covers_above(self, fixed: DyadicIndex, t: DyadicIndex) -> bool:
        """Some interval ``[a, b]`` has ``a <= t < b``."""
        starts = self._starts.get(fixed)
        if starts is None:
            return False
        i = bisect.bisect_right(starts, t) - 1
        return i >= 0 and self._ends[fixed][i] > t

    def covers_segment(self, fixed: DyadicIndex, lo: DyadicIndex, hi: DyadicIndex) -> bool:
        starts = self._starts.get(fixed)
        if starts is None:
            return False
        i = bisect.bisect_right(starts, lo) - 1
        return i >= 0 and self._ends[fixed][i] >= hi

    def hits(
        self,
        t: DyadicIndex,
        start: DyadicIndex,
        forward: bool,
        count: int,
        *,
        exclude_start: bool = True,
    ) -> list[DyadicIndex]:
        """The first ``count`` lines met by a ray at ``t`` leaving ``start``."""
        keys = self._keys
        found: list[DyadicIndex] = []
        right = bisect.bisect_right(keys, start)
        left = bisect.bisect_left(keys, start)
        if forward:
            i = right if exclude_start else left
            while i < len(keys) and len(found) < count:
                if self.covers(keys[i], t):
                    found.append(keys[i])
                i += 1
        else:
            i = (left if exclude_start else right) - 1
            while i >= 0 and len(found) < count:
                if self.covers(keys[i], t):
                    found.append(keys[i])
                i -= 1
        return found

    def keys_between(self, lo: DyadicIndex, hi: DyadicIndex) -> list[DyadicIndex]:
        return self._keys[bisect.bisect_left(self._keys, lo) : bisect.bisect_right(self._keys, hi)]

    def intervals(self, fixed: DyadicIndex) -> list[tuple[DyadicIndex, DyadicIndex]]:
        return list(zip(self._starts.get(fixed, []), self._ends.get(fixed, []), strict=True))


def index_to_knot(k: DyadicIndex | int, p: int, n: int) -> float:
    if k <= p:
        return 0.0
    if k >= n:
        return 1.0
    return float(k - p) / (n - p)


def neighborhood_spec(degree: tuple[int, int], level: int) -> tuple[DyadicIndex, DyadicIndex]:
    """The componentwise neighbourhood radius ``D_p(level)``."""
    p1, p2 = degree
    if level % 2 == 0:
        return (
            DyadicIndex(2 * (p1 // 2) + 1, 1 + level // 2),
            DyadicIndex(2 * ((p2 + 1) // 2) + 1, 1 + level // 2),
        )
    half = (level + 1) // 2
    return (
        DyadicIndex(2 * ((p1 + 1) // 2) + 1, 1 + half),
        DyadicIndex(2 * (p2 // 2) + 1, half),
    )


@dataclass
class TMesh:
    """Index-domain T-mesh with generations and bisection history."""

    degree: tuple[int, int]
    n: tuple[int, int]
    _elements: dict[IndexRect, int] = field(default_factory=dict, repr=False)
    _buckets: dict[tuple[int, int], set[IndexRect]] = field(default_factory=dict, repr=False)
    history: list[Bisection] = field(default_factory=list, repr=False)
    vlines: LineCover = field(default_factory=LineCover, repr=False)
    hlines: LineCover = field(default_factory=LineCover, repr=False)

    def __post_init__(self) -> None:
        for p_d, n_d in zip(self.degree, self.n, strict=True):
            if p_d < 1:
                raise MeshError(f"degrees must be positive, got {self.degree}")
            if n_d < p_d + 1:
                raise MeshError(
                    f"n={self.n} too small for an open knot vector of degree {self.degree}"
                )
        if not self._elements:
            self._fill_initial()

    def _fill_initial(self) -> None:
        m1, m2 = self.extent
        for i in range(m1):
            for j in range(m2):
                self._insert(IndexRect.of(i, j, i + 1, j + 1), 0)
        for i in range(m1 + 1):
            self.vlines.add(DyadicIndex(i), DyadicIndex(0), DyadicIndex(m2))
        for j in range(m2 + 1):
            self.hlines.add(DyadicIndex(j), DyadicIndex(0), DyadicIndex(m1))

    # -- basic views ---------------------------------------------------------

    @property
    def extent(self) -> tuple[int, int]:
        return self.n[0] + self.degree[0], self.n[1] + self.degree[1]

    @property
    def elements(self) -> Mapping[IndexRect, int]:
        return MappingProxyType(self._elements)

    @property
    def element_counts(self) -> tuple[int, int]:
        """Non-empty elements per direction of the initial grid."""
        return self.n[0] - self.degree[0], self.n[1] - self.degree[1]

    @property
    def max_generation(self) -> int:
        return max(self._elements.values())

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self) -> Iterator[IndexRect]:
        return iter(sorted(self._elements))

    def __contains__(self, tau: object) -> bool:
        return tau in self._elements

    def generation(self, tau: IndexRect) -> int:
        try:
            return self._elements[tau]
        except KeyError:
            raise MeshError(f"element {tau} is not in the mesh") from None

    def copy(self) -> TMesh:
        return TMesh(
            degree=self.degree,
            n=self.n,
            _elements=dict(self._elements),
            _buckets={k: set(v) for k, v in self._buckets.items()},
            history=list(self.history),
            vlines=self.vlines.copy(),
            hlines=self.hlines.copy(),
        )

    # -- parametric mapping --------------------------------------------------

    def knot_value(self, axis: int, k: DyadicIndex | int) -> float:
        """Parametric coordinate of index ``k``: ``clamp((k - p) / (n - p), 0, 1)``."""
        return index_to_knot(k, self.degree[axis], self.n[axis])

    def is_degenerate(self, tau: IndexRect, direction: Direction) -> bool:
        """``tau`` has zero parametric length along ``direction``."""
        axis = direction.axis
        p = self.degree[axis]
        n = self.n[axis]
        return tau.hi[axis] <= p or tau.lo[axis] >= n

    def parametric_rect(self, tau: IndexRect) -> tuple[float, float, float, float]:
        return (
            self.knot_value(0, tau.lo.x),
            self.knot_value(1, tau.lo.y),
            self.knot_value(0, tau.hi.x),
            self.knot_value(1, tau.hi.y),
        )

    def translated(self, point: IndexVec2) -> IndexVec2:
        return translate_point(point, self.degree, self.n)

    # -- element index -------------------------------------------------------

    def _bucket_key(self, tau: IndexRect) -> tuple[int, int]:
        mid = self.translated(tau.midpoint)
        return mid.x.floor(), mid.y.floor()

    def _insert(self, tau: IndexRect, generation: int) -> None:
        self._elements[tau] = generation
        self._buckets.setdefault(self._bucket_key(tau), set()).add(tau)

    def _remove(self, tau: IndexRect) -> None:
        del self._elements[tau]
        self._buckets[self._bucket_key(tau)].discard(tau)

    def _candidates(self, lo: IndexVec2, hi: IndexVec2) -> Iterable[IndexRect]:
        """Elements whose translated midpoint may lie in the translated box."""
        tlo = self.translated(lo)
        thi = self.translated(hi)
        for i in range(tlo.x.floor(), thi.x.floor() + 1):
            for j in range(tlo.y.floor(), thi.y.floor() + 1):
                yield from self._buckets.get((i, j), ())

    def elements_touching(self, rect: IndexRect) -> list[IndexRect]:
        """Elements whose closure meets the closed ``rect``."""
        half = DyadicIndex(1, 1)
        lo = IndexVec2(rect.lo.x - half, rect.lo.y - half)
        hi = IndexVec2(rect.hi.x + half, rect.hi.y + half)
        return sorted(t for t in self._candidates(lo, hi) if t.touches(rect))

    def elements_inside(self, rect: IndexRect) -> list[IndexRect]:
        return [t for t in self.elements_touching(rect) if rect.contains(t)]

    def element_containing(self, point: IndexVec2) -> IndexRect:
        """Element whose half-open box ``[lo, hi)`` contains ``point``."""
        probe = IndexRect(point, point)
        for tau in self.elements_touching(probe):
            if tau.lo.x <= point.x < tau.hi.x and tau.lo.y <= point.y < tau.hi.y:
                return tau
        raise MeshError(f"no element contains {point}")

    # -- neighbourhoods ------------------------------------------------------

    def neighborhood_radius(self, tau: IndexRect) -> tuple[DyadicIndex, DyadicIndex]:
        return neighborhood_spec(self.degree, self.generation(tau))

    def neighborhood(self, tau: IndexRect) -> list[IndexRect]:
        """Elements whose translated midpoints are within ``D_p(g(tau))`` of tau's."""
        d1, d2 = self.neighborhood_radius(tau)
        centre = self.translated(tau.midpoint)
        region = self.u_region(tau)
        found = []
        for other in self._candidates(region.lo, region.hi):
            dx, dy = componentwise_dist(centre, self.translated(other.midpoint))
            if dx <= d1 and dy <= d2:
                found.append(other)
        return sorted(found)

    def u_region(self, tau: IndexRect) -> IndexRect:
        """Rectangle of index points ``x`` with ``Dist(tau, x) <= D_p(g(tau))``."""
        d = self.neighborhood_radius(tau)
        centre = self.translated(tau.midpoint)
        lo: list[DyadicIndex] = []
        hi: list[DyadicIndex] = []
        for axis in (0, 1):
            p, n, m = self.degree[axis], self.n[axis], self.extent[axis]
            low = centre[axis] - d[axis]
            high = centre[axis] + d[axis]
            lo.append(DyadicIndex(0) if low <= p else low)
            hi.append(DyadicIndex(m) if high >= n else high)
        return IndexRect(IndexVec2(*lo), IndexVec2(*hi))

    def is_admissible_bisection(self, tau: IndexRect) -> bool:
        g = self.generation(tau)
        return all(self._elements[t] >= g for t in self.neighborhood(tau))

    # -- refinement ----------------------------------------------------------

    def split(
        self, tau: IndexRect, direction: Direction, generation: int | None = None
    ) -> Bisection:
        """Bisect ``tau`` along ``direction``; children get ``generation`` (default g+1)."""
        g = self.generation(tau)
        label = g + 1 if generation is None else generation
        if self.is_degenerate(tau, direction):
            self._elements[tau] = label
            record = Bisection(tau, direction, label, (tau,))
            self.history.append(record)
            return record
        if direction is Direction.X:
            mid = midpoint(tau.lo.x, tau.hi.x)
            children = (
                IndexRect(tau.lo, IndexVec2(mid, tau.hi.y)),
                IndexRect(IndexVec2(mid, tau.lo.y), tau.hi),
            )
            self.vlines.add(mid, tau.lo.y, tau.hi.y)
        else:
            mid = midpoint(tau.lo.y, tau.hi.y)
            children = (
                IndexRect(tau.lo, IndexVec2(tau.hi.x, mid)),
                IndexRect(IndexVec2(tau.lo.x, mid), tau.hi),
            )
            self.hlines.add(mid, tau.lo.x, tau.hi.x)
        self._remove(tau)
        for child in children:
            self._insert(child, label)
        record = Bisection(tau, direction, label, children)
        self.history.append(record)
        return record

    def bisect_element(self, tau: IndexRect) -> Bisection:
        """Bisect in x for even generation and in y for odd generation."""
        direction = Direction.X if self.generation(tau) % 2 == 0 else Direction.Y
        return self.split(tau, direction)

    def refine_admissible(self, tau: IndexRect) -> list[Bisection]:
        """Bisect ``tau`` after recursively bisecting coarser neighbours.

        Coarser neighbours are handled in lexicographic order, so identical
        call sequences give identical meshes.
        """
        self.generation(tau)
        done: list[Bisection] = []
        self._refine(tau, done, 0)
        if len(done) > 1:
            logger.debug("closure of %s needed %d bisections", tau, len(done))
        return done

    def _refine(self, tau: IndexRect, done: list[Bisection], depth: int) -> None:
        if depth > _MAX_CLOSURE_DEPTH:
            raise MeshError(f"admissible closure of {tau} did not terminate")
        g = self._elements[tau]
        while True:
            coarser = [t for t in self.neighborhood(tau) if self._elements[t] < g]
            if not coarser:
                break
            self._refine(coarser[0], done, depth + 1)
        done.append(self.bisect_element(tau))

    # -- audits --------------------------------------------------------------

    def check_admissible(self) -> AdmissibilityReport:
        """Replay history and report bisections whose neighbourhood held coarser elements."""
        replay = TMesh(self.degree, self.n)
        violations = []
        for record in self.history:
            if record.parent not in replay:
                raise MeshError(f"history refers to missing element {record.parent}")
            if not replay.is_admissible_bisection(record.parent):
                violations.append(record)
            replay.split(record.parent, record.direction, record.generation)
        return AdmissibilityReport(not violations, tuple(violations))

    def generation_gap_audit(self) -> int:
        """Largest ``g(tau) - g(tau')`` over elements and their neighbourhoods."""
        gap = 0
        for tau, g in self._elements.items():
            for other in self.neighborhood(tau):
                gap = max(gap, g - self._elements[other])
        return gap

    # -- skeleton ------------------------------------------------------------

    def vertices_in(self, rect: IndexRect) -> list[IndexVec2]:
        """Mesh vertices inside the closed ``rect``, lexicographically sorted."""
        found = []
        ys = self.hlines.keys_between(rect.lo.y, rect.hi.y)
        for x in self.vlines.keys_between(rect.lo.x, rect.hi.x):
            for y in ys:
                if self.vlines.covers(x, y) and self.hlines.covers(y, x):
                    found.append(IndexVec2(x, y))
        return found

    def edges_in(self, rect: IndexRect, vertical: bool) -> list[Segment]:
        """Edges (vertex to vertex) contained in the closed ``rect``."""
        lines, cross = (self.vlines, self.hlines) if vertical else (self.hlines, self.vlines)
        axis = 0 if vertical else 1
        lo_fixed, hi_fixed = rect.lo[axis], rect.hi[axis]
        lo_run, hi_run = rect.lo[1 - axis], rect.hi[1 - axis]
        found = []
        for fixed in lines.keys_between(lo_fixed, hi_fixed):
            stops = [
                t
                for t in cross.keys_between(lo_run, hi_run)
                if cross.covers(t, fixed) and lines.covers(fixed, t)
            ]
            for a, b in zip(stops, stops[1:], strict=False):
                if lines.covers_segment(fixed, a, b):
                    found.append(Segment(vertical, fixed, a, b))
        return found


def bisection_edge(record: Bisection) -> Segment | None:
    """The index segment a bisection adds, or None for zero-length bisections."""
    if record.is_degenerate:
        return None
    first = record.children[0]
    if record.direction is Direction.X:
        return Segment(True, first.hi.x, first.lo.y, first.hi.y)
    return Segment(False, first.hi.y, first.lo.x, first.hi.x)


def initial_mesh(p: tuple[int, int], n: tuple[int, int]) -> TMesh:
    """Cartesian grid of ``(n1 + p1) * (n2 + p2)`` unit index cells, generation 0."""
    return TMesh(degree=(int(p[0]), int(p[1])), n=(int(n[0]), int(n[1])))


def replay(degree: tuple[int, int], n: tuple[int, int], history: Iterable[Bisection]) -> TMesh:
    mesh = initial_mesh(degree, n)
    for record in history:
        mesh.split(record.parent, record.direction, record.generation)
    return mesh


def bisect_element(mesh: TMesh, tau: IndexRect) -> TMesh:
    """Bisect ``tau`` in place by the parity rule and return the mesh."""
    mesh.bisect_element(tau)
    return mesh


def neighborhood(mesh: TMesh, tau: IndexRect) -> list[IndexRect]:
    return mesh.neighborhood(tau)


def refine_admissible(mesh: TMesh, tau: IndexRect) -> TMesh:
    mesh.refine_admissible(tau)
    return mesh


def check_admissible(mesh: TMesh) -> AdmissibilityReport:
    return mesh.check_admissible()


def generation_gap_audit(mesh: TMesh) -> int:
    return mesh.generation_gap_audit()
