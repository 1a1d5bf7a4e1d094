"""Space decompositions of a refined T-spline space.

Every subspace is spanned by a set of functions that appeared during the
refinement history (see :mod:`tsplinebpx.core.levels`). The functions are
expressed in the final basis by change of basis and restricted to the free
(Dirichlet-reduced) dofs; functions with a nonzero boundary trace are not in
the reduced space and are left out.

- ``micro``: one subspace per bisection step.
- ``aligned``: consecutive same-generation steps whose new edges lie on one
  line are merged.
- ``macro``: one subspace per generation.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..assembly.multipatch import MultiPatchSpace, glue
from ..assembly.poisson import SIDES, LinearSystem, has_trace
from ..core.levels import LevelSets
from ..core.tmesh import Segment, bisection_edge
from ..core.tspline import FunctionKey, TSplineFunction, TSplineSpace, change_of_basis

logger = logging.getLogger(__name__)


class DecompositionKind(StrEnum):
    MICRO = "micro"
    ALIGNED = "aligned"
    MACRO = "macro"


@dataclass(frozen=True, slots=True)
class FunctionGroup:
    """Functions spanning one subspace, with the history steps that produced them."""

    generation: int
    steps: tuple[int, ...]
    keys: frozenset[FunctionKey]


@dataclass(frozen=True, slots=True)
class Subspace:
    generation: int
    steps: tuple[int, ...]
    basis: sp.csc_matrix

    @property
    def size(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class SubspaceDecomposition:
    kind: DecompositionKind
    subspaces: tuple[Subspace, ...]
    size: int

    def __len__(self) -> int:
        return len(self.subspaces)

    @cached_property
    def stacked(self) -> sp.csc_matrix:
        """All subspace bases side by side, ``(size, sum of subspace sizes)``."""
        if not self.subspaces:
            return sp.csc_matrix((self.size, 0))
        return sp.hstack([s.basis for s in self.subspaces], format="csc")

    @property
    def block_sizes(self) -> list[int]:
        return [s.size for s in self.subspaces]

    def counts_per_generation(self) -> dict[int, int]:
        return dict(sorted(Counter(s.generation for s in self.subspaces).items()))


# -- grouping ----------------------------------------------------------------


def micro_groups(levels: LevelSets) -> list[FunctionGroup]:
    return [
        FunctionGroup(step.generation, (step.index,), step.added)
        for step in levels.steps
        if step.added
    ]


def aligned_groups(levels: LevelSets) -> list[FunctionGroup]:
    """Merge runs of same-generation steps whose bisection edges continue each other.

    Zero-length bisections add no edge and never break a run.
    """
    groups: list[FunctionGroup] = []
    run_steps: list[int] = []
    run_keys: set[FunctionKey] = set()
    run_generation = -1
    run_edge: Segment | None = None

    def close() -> None:
        if run_keys:
            groups.append(FunctionGroup(run_generation, tuple(run_steps), frozenset(run_keys)))

    for step in levels.steps:
        edge = bisection_edge(step.bisection) if step.bisection is not None else None
        joins = (
            step.bisection is not None
            and step.generation == run_generation
            and (edge is None or run_edge is None or edge.continues(run_edge))
        )
        if not joins:
            close()
            run_steps, run_keys = [], set()
            run_generation, run_edge = step.generation, None
        run_steps.append(step.index)
        run_keys |= step.added
        if edge is not None and run_edge is not None:
            lo, hi = min(edge.lo, run_edge.lo), max(edge.hi, run_edge.hi)
            run_edge = Segment(edge.vertical, edge.fixed, lo, hi)
        elif edge is not None:
            run_edge = edge
    close()
    return groups


def macro_groups(levels: LevelSets) -> list[FunctionGroup]:
    steps_by_generation: dict[int, list[int]] = {}
    for step in levels.steps:
        steps_by_generation.setdefault(step.generation, []).append(step.index)
    return [
        FunctionGroup(g, tuple(steps_by_generation.get(g, ())), keys)
        for g, keys in sorted(levels.macro_sets().items())
        if keys
    ]


GROUPERS = {
    DecompositionKind.MICRO: micro_groups,
    DecompositionKind.ALIGNED: aligned_groups,
    DecompositionKind.MACRO: macro_groups,
}


# -- change of basis into the reduced space ----------------------------------


def _is_boundary(f: TSplineFunction, sides: Iterable[str]) -> bool:
    return any(has_trace(f, side) for side in sides)


def _single_patch_columns(
    coarse: Sequence[TSplineFunction], space: TSplineSpace
) -> tuple[sp.csc_matrix, np.ndarray]:
    psi = change_of_basis(coarse, space)
    interior = np.array([not _is_boundary(f, SIDES) for f in coarse], dtype=bool)
    return psi, interior


def _multipatch_columns(
    coarse: Sequence[TSplineFunction], space: MultiPatchSpace
) -> tuple[sp.csc_matrix, np.ndarray, list[list[int]]]:
    """Glued coarse functions in the global basis.

    Returns the matrix, the interior mask of glued coarse functions and, per
    coarse function, the glued indices of its copies on all patches.
    """
    patches = space.patches
    coarse_conn = glue([coarse] * len(patches), space.interfaces, shared_traces=True)
    blocks = [change_of_basis(coarse, patch) for patch in patches]
    unpacked = sp.block_diag(blocks, format="csr")
    fine = space.connectivity
    select = sp.csr_matrix(
        (np.ones(fine.dim), (np.arange(fine.dim), fine.representatives)),
        shape=(fine.dim, unpacked.shape[0]),
    )
    copies = coarse_conn.unique
    merge = sp.csr_matrix(
        (np.ones(copies.size), (np.arange(copies.size), copies)),
        shape=(copies.size, coarse_conn.dim),
    )
    psi = (select @ unpacked @ merge).tocsc()
    interior = np.ones(coarse_conn.dim, dtype=bool)
    for i, sides in enumerate(space.boundary_sides):
        for j, f in enumerate(coarse):
            if _is_boundary(f, sides):
                interior[copies[coarse_conn.offsets[i] + j]] = False
    glued = [
        sorted({int(coarse_conn.patch_map(i)[j]) for i in range(len(patches))})
        for j in range(len(coarse))
    ]
    return psi, interior, glued


def _subspace_bases(
    groups: Sequence[FunctionGroup],
    levels: LevelSets,
    space: TSplineSpace | MultiPatchSpace,
    system: LinearSystem,
) -> list[Subspace]:
    every: set[FunctionKey] = set().union(*(g.keys for g in groups))
    keys = sorted(every, key=lambda k: (levels.catalog[k].anchor, k))
    coarse = [levels.catalog[k] for k in keys]
    if isinstance(space, TSplineSpace):
        psi, interior = _single_patch_columns(coarse, space)
        column_of = {k: [j] for j, k in enumerate(keys)}
    else:
        psi, interior, glued = _multipatch_columns(coarse, space)
        column_of = {k: glued[j] for j, k in enumerate(keys)}
    psi = psi[system.dofs].tocsc()
    out = []
    for group in groups:
        cols = sorted({c for k in group.keys for c in column_of[k] if interior[c]})
        if not cols:
            continue
        out.append(Subspace(group.generation, group.steps, psi[:, cols].tocsc()))
    return out


def build_decomposition(
    kind: DecompositionKind | str,
    levels: LevelSets,
    space: TSplineSpace | MultiPatchSpace,
    system: LinearSystem,
) -> SubspaceDecomposition:
    """Decomposition of the reduced space of ``system`` from the history in ``levels``."""
    kind = DecompositionKind(kind)
    groups = GROUPERS[kind](levels)
    subspaces = _subspace_bases(groups, levels, space, system)
    decomposition = SubspaceDecomposition(kind, tuple(subspaces), system.shape[0])
    logger.info(
        "%s decomposition: %d subspaces (%d groups), %d stacked columns",
        kind,
        len(subspaces),
        len(groups),
        sum(decomposition.block_sizes),
    )
    return decomposition


def micro_decomposition(
    levels: LevelSets, space: TSplineSpace | MultiPatchSpace, system: LinearSystem
) -> SubspaceDecomposition:
    return build_decomposition(DecompositionKind.MICRO, levels, space, system)


def aligned_micro_decomposition(
    levels: LevelSets, space: TSplineSpace | MultiPatchSpace, system: LinearSystem
) -> SubspaceDecomposition:
    return build_decomposition(DecompositionKind.ALIGNED, levels, space, system)


def macro_decomposition(
    levels: LevelSets, space: TSplineSpace | MultiPatchSpace, system: LinearSystem
) -> SubspaceDecomposition:
    return build_decomposition(DecompositionKind.MACRO, levels, space, system)


def span_residual(basis: sp.spmatrix, vectors: np.ndarray) -> float:
    """Largest relative least-squares residual of ``vectors`` (columns) in ``span(basis)``."""
    dense = basis.toarray() if sp.issparse(basis) else np.asarray(basis)
    targets = np.atleast_2d(np.asarray(vectors, dtype=float).T).T
    coeffs, *_ = np.linalg.lstsq(dense, targets, rcond=None)
    residual = np.linalg.norm(dense @ coeffs - targets, axis=0)
    scale = np.maximum(np.linalg.norm(targets, axis=0), 1e-300)
    return float(np.max(residual / scale))
