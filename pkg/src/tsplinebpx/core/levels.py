"""Per-bisection function sets of a refinement history.

Replaying a history one bisection at a time, step ``k`` records the functions
that appeared or changed (``added``) and the ones that disappeared
(``removed``). Only functions whose index support touches the bisected element
can change, so every step is a local recomputation.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import MeshError
from .dyadic import IndexRect
from .tmesh import Bisection, TMesh, initial_mesh
from .tspline import (
    Box,
    FunctionKey,
    TSplineFunction,
    TSplineSpace,
    anchors,
    anchors_in,
    make_function,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class LevelStep:
    """Step ``k``: functions added by a bisection and those it removed."""

    index: int
    bisection: Bisection | None
    generation: int
    added: frozenset[FunctionKey]
    removed: frozenset[FunctionKey]
    omega: tuple[Box, ...] = ()
    omega_tilde: tuple[Box, ...] = ()


@dataclass
class LevelSets:
    """Result of a full replay."""

    degree: tuple[int, int]
    n: tuple[int, int]
    steps: list[LevelStep] = field(default_factory=list)
    catalog: dict[FunctionKey, TSplineFunction] = field(default_factory=dict)
    generations: dict[FunctionKey, int] = field(default_factory=dict)
    snapshots: dict[int, frozenset[FunctionKey]] = field(default_factory=dict)
    final: frozenset[FunctionKey] = frozenset()

    @property
    def max_generation(self) -> int:
        return max(self.snapshots)

    def functions(self, keys: Iterable[FunctionKey]) -> list[TSplineFunction]:
        """Catalogued functions for ``keys`` in anchor order."""
        return sorted((self.catalog[k] for k in keys), key=lambda f: (f.anchor, f.key))

    def snapshot(self, generation: int) -> frozenset[FunctionKey]:
        """Basis of the finest mesh whose bisections all have generation <= ``generation``."""
        known = [g for g in self.snapshots if g <= generation]
        if not known:
            raise MeshError(f"no snapshot at or below generation {generation}")
        return self.snapshots[max(known)]

    def macro_sets(self) -> dict[int, frozenset[FunctionKey]]:
        """Functions added between consecutive generation snapshots."""
        out = {0: self.snapshots[0]}
        previous = self.snapshots[0]
        for g in sorted(self.snapshots):
            if g == 0:
                continue
            current = self.snapshots[g]
            out[g] = current - previous
            previous = current
        return out


class LevelSetBuilder:
    """Incremental replay of bisections with local basis updates."""

    def __init__(
        self, degree: tuple[int, int], n: tuple[int, int], *, track_regions: bool = False
    ) -> None:
        self.mesh = initial_mesh(degree, n)
        self.track_regions = track_regions
        self._current: dict[FunctionKey, TSplineFunction] = {}
        self._buckets: dict[tuple[int, int], set[FunctionKey]] = defaultdict(set)
        self._levels = LevelSets(degree=self.mesh.degree, n=self.mesh.n)
        self._generation = 0
        initial = [make_function(self.mesh, a, 0) for a in anchors(self.mesh)]
        for f in initial:
            self._register(f)
        self._levels.steps.append(
            LevelStep(
                0,
                None,
                0,
                frozenset(f.key for f in initial),
                frozenset(),
                tuple(f.support for f in initial) if track_regions else (),
            )
        )

    # -- spatial index -----------------------------------------------------

    @staticmethod
    def _cells(box: IndexRect) -> Iterable[tuple[int, int]]:
        for bx in range(box.lo.x.floor(), box.hi.x.ceil() + 1):
            for by in range(box.lo.y.floor(), box.hi.y.ceil() + 1):
                yield bx, by

    def _register(self, f: TSplineFunction) -> None:
        self._current[f.key] = f
        self._levels.catalog.setdefault(f.key, f)
        self._levels.generations.setdefault(f.key, f.generation)
        for cell in self._cells(f.index_support):
            self._buckets[cell].add(f.key)

    def _unregister(self, key: FunctionKey) -> None:
        f = self._current.pop(key)
        for cell in self._cells(f.index_support):
            self._buckets[cell].discard(key)

    def _touching(self, rect: IndexRect) -> set[FunctionKey]:
        found: set[FunctionKey] = set()
        for cell in self._cells(rect):
            for key in self._buckets.get(cell, ()):
                if self._current[key].index_support.touches(rect):
                    found.add(key)
        return found

    def _overlapping_support(self, boxes: Sequence[Box]) -> tuple[Box, ...]:
        if not boxes:
            return ()
        region = np.array(boxes, dtype=float)
        out = []
        for f in self._current.values():
            x0, y0, x1, y1 = f.support
            overlap = (region[:, 0] < x1) & (x0 < region[:, 2])
            overlap &= (region[:, 1] < y1) & (y0 < region[:, 3])
            if np.any(overlap):
                out.append(f.support)
        return tuple(sorted(out))

    # -- replay ------------------------------------------------------------

    @property
    def current(self) -> dict[FunctionKey, TSplineFunction]:
        return self._current

    @property
    def result(self) -> LevelSets:
        """Level sets of everything replayed so far."""
        self._levels.snapshots[self._generation] = frozenset(self._current)
        self._levels.final = frozenset(self._current)
        return self._levels

    def apply(self, record: Bisection) -> LevelStep:
        """Replay one bisection and record the induced function changes."""
        if record.generation < self._generation:
            raise MeshError(
                f"bisection of generation {record.generation} after generation {self._generation}"
            )
        if record.generation > self._generation:
            self._levels.snapshots[self._generation] = frozenset(self._current)
            self._generation = record.generation
        parent = record.parent
        affected = self._touching(parent)
        self.mesh.split(parent, record.direction, record.generation)
        k = len(self._levels.steps)
        if record.is_degenerate:
            step = LevelStep(k, record, record.generation, frozenset(), frozenset())
        else:
            candidates = {self._current[key].anchor for key in affected}
            candidates = {a for a in candidates if not parent.contains(a.location)}
            candidates.update(anchors_in(self.mesh, parent))
            fresh = {}
            for anchor in sorted(candidates):
                f = make_function(self.mesh, anchor, record.generation)
                fresh[f.key] = f
            added = frozenset(key for key in fresh if key not in self._current)
            removed = frozenset(key for key in affected if key not in fresh)
            for key in removed:
                self._unregister(key)
            for key in sorted(added, key=lambda key: fresh[key].anchor):
                self._levels.generations[key] = record.generation
                self._levels.catalog[key] = fresh[key]
                self._register(fresh[key])
            omega: tuple[Box, ...] = ()
            omega_tilde: tuple[Box, ...] = ()
            if self.track_regions:
                omega = tuple(sorted(fresh[key].support for key in added))
                omega_tilde = self._overlapping_support(omega)
            step = LevelStep(k, record, record.generation, added, removed, omega, omega_tilde)
        self._levels.steps.append(step)
        return step

    def extend(self, records: Iterable[Bisection]) -> LevelSets:
        for record in sorted(records, key=lambda r: r.generation):
            self.apply(record)
        return self.result


def level_sets(mesh: TMesh, *, track_regions: bool = False) -> LevelSets:
    """Replay ``mesh.history`` (stably sorted by generation) into level sets."""
    builder = LevelSetBuilder(mesh.degree, mesh.n, track_regions=track_regions)
    result = builder.extend(mesh.history)
    logger.debug("level sets: %d steps, %d functions", len(result.steps), len(result.final))
    return result


def overlap_bounds(degree: tuple[int, int], generation: int) -> tuple[int, int]:
    """Caps on how many ``omega_k`` / ``omega_tilde_k`` sets of one generation cover an element.

    Odd generations come from vertical bisections and even ones from
    horizontal bisections, so the roles of ``p1`` and ``p2`` swap with the parity.
    """
    a, b = degree if generation % 2 == 1 else degree[::-1]
    omega = (2 * a + 1) * (2 * ((b + 1) // 2) + 1)
    tilde = (4 * a + 1) * (4 * ((b + 1) // 2) + 2 * (b // 2) + 1)
    return omega, tilde


def overlap_audit(levels: LevelSets, space: TSplineSpace) -> dict[int, tuple[int, int]]:
    """Per generation, the most ``omega_k`` / ``omega_tilde_k`` sets meeting one Bezier element.

    Requires level sets built with ``track_regions=True``.
    """
    cells = np.array([c.rect for c in space.bezier], dtype=float).reshape(-1, 4)
    by_generation: dict[int, list[LevelStep]] = defaultdict(list)
    for step in levels.steps:
        if step.bisection is not None and step.added:
            by_generation[step.generation].append(step)

    def count(boxes_per_step: list[tuple[Box, ...]]) -> int:
        hits = np.zeros(len(cells), dtype=int)
        for boxes in boxes_per_step:
            if not boxes:
                continue
            region = np.array(boxes, dtype=float)
            inside = (
                (region[None, :, 0] < cells[:, None, 2])
                & (cells[:, None, 0] < region[None, :, 2])
                & (region[None, :, 1] < cells[:, None, 3])
                & (cells[:, None, 1] < region[None, :, 3])
            )
            hits += inside.any(axis=1)
        return int(hits.max()) if hits.size else 0

    return {
        generation: (count([s.omega for s in steps]), count([s.omega_tilde for s in steps]))
        for generation, steps in sorted(by_generation.items())
    }
