"""Multi-patch spaces glued with C^0 continuity across shared patch sides.

Each patch keeps its own numbering ("unpacked" dofs, patch after patch). Two
unpacked dofs are identified when their traces on a shared side coincide;
connected components of these couples are the global dofs, numbered by first
appearance.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..core.dyadic import DyadicIndex
from ..core.tmesh import TMesh
from ..core.tspline import FunctionKey, TSplineFunction, TSplineSpace, build_space
from ..exceptions import InterfaceMismatchError
from .geometry import DEFAULT_BEND, GeometryMap, curved_l_patches
from .poisson import (
    LinearSystem,
    SourceHandle,
    assemble_rhs,
    assemble_stiffness,
    boundary_functions,
    check_sides,
    has_trace,
    l2_error,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Interface:
    """Side ``first[1]`` of patch ``first[0]`` coincides with side ``second[1]`` of ``second[0]``.

    Both sides are traversed with the same parametric coordinate.
    """

    first: tuple[int, str]
    second: tuple[int, str]


CURVED_L_INTERFACES = (
    Interface((0, "west"), (1, "west")),
    Interface((1, "south"), (2, "south")),
)
CURVED_L_BOUNDARY = (
    ("south", "east", "north"),
    ("east", "north"),
    ("west", "east", "north"),
)


def trace_key(f: TSplineFunction, side: str) -> tuple[DyadicIndex, ...]:
    """Index vector along ``side``; it determines the trace of ``f`` there."""
    return f.vv if side in ("west", "east") else f.hv


def trace_knots(f: TSplineFunction, side: str) -> tuple[float, ...]:
    return f.knots_y if side in ("west", "east") else f.knots_x


def side_points(side: str, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Parametric points of ``side`` at coordinates ``t``."""
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    return {
        "south": (t, zeros),
        "north": (t, ones),
        "west": (zeros, t),
        "east": (ones, t),
    }[side]


@dataclass(frozen=True)
class Connectivity:
    """Map from unpacked (per-patch) dofs to global dofs."""

    unique: np.ndarray
    offsets: np.ndarray
    dim: int

    @property
    def patch_count(self) -> int:
        return self.offsets.size - 1

    def patch_map(self, patch: int) -> np.ndarray:
        return self.unique[self.offsets[patch] : self.offsets[patch + 1]]

    def prolongation(self, patch: int) -> sp.csr_matrix:
        """``(n_patch, dim)`` 0/1 matrix selecting the global dof of each local one."""
        cols = self.patch_map(patch)
        rows = np.arange(cols.size)
        return sp.csr_matrix((np.ones(cols.size), (rows, cols)), shape=(cols.size, self.dim))

    def pack(self, unpacked: np.ndarray) -> np.ndarray:
        """Global values from unpacked ones; the first copy of each dof wins."""
        out = np.zeros(self.dim, dtype=np.asarray(unpacked).dtype)
        out[self.unique[::-1]] = np.asarray(unpacked)[::-1]
        return out

    def unpack(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[self.unique]

    @cached_property
    def representatives(self) -> np.ndarray:
        """Unpacked index of the first copy of every global dof."""
        _, first = np.unique(self.unique, return_index=True)
        return first


def _side_table(
    functions: Sequence[TSplineFunction], side: str, shared: bool
) -> dict[tuple[DyadicIndex, ...], list[int]]:
    table: dict[tuple[DyadicIndex, ...], list[int]] = {}
    for j, f in enumerate(functions):
        if not has_trace(f, side):
            continue
        key = trace_key(f, side)
        if key in table and not shared:
            raise InterfaceMismatchError(f"two functions share the trace {key} on side {side}")
        table.setdefault(key, []).append(j)
    return table


def glue(
    patch_functions: Sequence[Sequence[TSplineFunction]],
    interfaces: Sequence[Interface],
    shared_traces: bool = False,
) -> Connectivity:
    """Identify functions with equal traces on every interface.

    A basis has one function per trace. Mixed sets (functions of several
    refinement steps) may repeat a trace; with ``shared_traces`` the k-th
    function carrying a trace on one side is glued to the k-th one on the other.
    """
    sizes = [len(fs) for fs in patch_functions]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    total = int(offsets[-1])
    first, second = [], []
    for iface in interfaces:
        (pa, sa), (pb, sb) = iface.first, iface.second
        check_sides([sa, sb])
        table_a = _side_table(patch_functions[pa], sa, shared_traces)
        table_b = _side_table(patch_functions[pb], sb, shared_traces)
        counts_a = {key: len(js) for key, js in table_a.items()}
        counts_b = {key: len(js) for key, js in table_b.items()}
        if counts_a != counts_b:
            raise InterfaceMismatchError(
                f"patch {pa} side {sa} has {sum(counts_a.values())} trace functions, "
                f"patch {pb} side {sb} has {sum(counts_b.values())}; knot lines do not match"
            )
        for key, indices_a in table_a.items():
            for ja, jb in zip(indices_a, table_b[key], strict=True):
                fa, fb = patch_functions[pa][ja], patch_functions[pb][jb]
                if trace_knots(fa, sa) != trace_knots(fb, sb):
                    raise InterfaceMismatchError(f"trace knots differ for {key} on {sa}/{sb}")
                first.append(offsets[pa] + ja)
                second.append(offsets[pb] + jb)
    graph = sp.coo_matrix((np.ones(len(first)), (first, second)), shape=(total, total))
    dim, labels = connected_components(graph, directed=False)
    _, first_seen = np.unique(labels, return_index=True)
    rank = np.empty(dim, dtype=int)
    rank[np.argsort(first_seen)] = np.arange(dim)
    return Connectivity(rank[labels], offsets, int(dim))


@dataclass(frozen=True)
class MultiPatchSpace:
    """Patch spaces, their geometry maps and the glued global numbering."""

    patches: tuple[TSplineSpace, ...]
    geometries: tuple[GeometryMap, ...]
    interfaces: tuple[Interface, ...]
    boundary_sides: tuple[tuple[str, ...], ...]
    connectivity: Connectivity

    @property
    def dim(self) -> int:
        return self.connectivity.dim

    @property
    def degree(self) -> tuple[int, int]:
        return self.patches[0].degree

    @property
    def analysis_suitable(self) -> bool:
        return all(space.analysis_suitable for space in self.patches)

    def prolongation(self, patch: int) -> sp.csr_matrix:
        return self.connectivity.prolongation(patch)

    def boundary_dofs(self) -> np.ndarray:
        """Global dofs with a nonzero trace on a physical boundary side of any patch."""
        found = [
            self.connectivity.patch_map(i)[boundary_functions(space, sides)]
            for i, (space, sides) in enumerate(zip(self.patches, self.boundary_sides, strict=True))
        ]
        return np.unique(np.concatenate(found)).astype(int)


def build_multipatch(
    patches: Sequence[TSplineSpace],
    geometries: Sequence[GeometryMap],
    interfaces: Sequence[Interface],
    boundary_sides: Sequence[Sequence[str]],
) -> MultiPatchSpace:
    if not len(patches) == len(geometries) == len(boundary_sides):
        raise ValueError("need one geometry and one boundary side list per patch")
    for sides in boundary_sides:
        check_sides(sides)
    connectivity = glue([space.functions for space in patches], interfaces)
    space = MultiPatchSpace(
        patches=tuple(patches),
        geometries=tuple(geometries),
        interfaces=tuple(interfaces),
        boundary_sides=tuple(tuple(s) for s in boundary_sides),
        connectivity=connectivity,
    )
    logger.debug(
        "multipatch: %d patches, %d unpacked -> %d global dofs",
        len(patches),
        int(connectivity.offsets[-1]),
        space.dim,
    )
    return space


def build_curved_L(
    meshes: TMesh | Sequence[TMesh],
    bend: float = DEFAULT_BEND,
    generations: dict[FunctionKey, int] | None = None,
) -> MultiPatchSpace:
    """Three-patch curved L-shaped domain over the given parametric mesh(es)."""
    if isinstance(meshes, TMesh):
        space = build_space(meshes, generations)
        patches: list[TSplineSpace] = [space, space, space]
    else:
        if len(meshes) != 3:
            raise ValueError(f"the curved L-shape has 3 patches, got {len(meshes)} meshes")
        patches = [build_space(mesh, generations) for mesh in meshes]
    return build_multipatch(
        patches, curved_l_patches(bend), CURVED_L_INTERFACES, CURVED_L_BOUNDARY
    )


def assemble_multipatch(
    space: MultiPatchSpace,
    f: SourceHandle | None = None,
    quad_order: int | None = None,
    *,
    threads: int | None = None,
) -> LinearSystem:
    """Global stiffness ``sum_i P_i^T A_i P_i`` and, with ``f``, the load vector."""
    matrix = sp.csr_matrix((space.dim, space.dim))
    rhs = np.zeros(space.dim)
    for i, (patch, geometry) in enumerate(zip(space.patches, space.geometries, strict=True)):
        prolong = space.prolongation(i)
        local = assemble_stiffness(patch, geometry, quad_order, threads=threads)
        matrix = matrix + (prolong.T @ local.matrix @ prolong)
        if f is not None:
            rhs += prolong.T @ assemble_rhs(patch, geometry, f, quad_order)
    return LinearSystem(matrix.tocsr(), rhs, np.arange(space.dim), space.dim)


def interface_defect(space: MultiPatchSpace, samples: int = 50) -> float:
    """Largest trace mismatch of glued function pairs and of the patch images on interfaces."""
    t = (np.arange(samples) + 0.5) / samples
    worst = 0.0
    conn = space.connectivity
    for iface in space.interfaces:
        (pa, sa), (pb, sb) = iface.first, iface.second
        ua, va = side_points(sa, t)
        ub, vb = side_points(sb, t)
        image_a = space.geometries[pa](ua, va)
        image_b = space.geometries[pb](ub, vb)
        worst = max(worst, float(np.max(np.abs(image_a - image_b))))
        map_a, map_b = conn.patch_map(pa), conn.patch_map(pb)
        index_b = {int(g): j for j, g in enumerate(map_b)}
        for ja, g in enumerate(map_a):
            jb = index_b.get(int(g))
            if jb is None:
                continue
            fa = space.patches[pa].functions[ja]
            fb = space.patches[pb].functions[jb]
            if not (has_trace(fa, sa) and has_trace(fb, sb)):
                continue
            diff = fa.evaluate(ua, va) - fb.evaluate(ub, vb)
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def l2_error_multipatch(
    space: MultiPatchSpace,
    coeffs: np.ndarray,
    exact: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quad_order: int | None = None,
) -> float:
    unpacked = space.connectivity.unpack(coeffs)
    total = 0.0
    for i, (patch, geometry) in enumerate(zip(space.patches, space.geometries, strict=True)):
        start, stop = space.connectivity.offsets[i], space.connectivity.offsets[i + 1]
        total += l2_error(patch, geometry, unpacked[start:stop], exact, quad_order) ** 2
    return float(np.sqrt(total))
