"""SVG figures of T-meshes, extended meshes and Bézier meshes.

Meshes are drawn in the index domain with the parametric region scaled to a
unit square; the zero-measure frame cells outside it are drawn as thin bands
so repeated knot lines stay distinguishable. Edges are coloured by the
generation that created them. Output is byte-identical for identical input.
"""

from __future__ import annotations

import io
from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path
from typing import Literal

import matplotlib
import numpy as np
from matplotlib.axes import Axes
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure

from ..assembly.multipatch import MultiPatchSpace
from ..core.dyadic import DyadicIndex, IndexRect
from ..core.tmesh import Segment, TMesh, bisection_edge
from ..core.tspline import bezier_mesh, extended_tmesh

Layer = Literal["tmesh", "extended", "bezier"]

FRAME_GAP = 0.03
FIGURE_SIZE = 6.0
_RC = {"svg.hashsalt": "tsplinebpx", "svg.fonttype": "none", "path.simplify": False}
_PALETTE = matplotlib.colormaps["tab10"]


def generation_colour(generation: int) -> str:
    return matplotlib.colors.to_hex(_PALETTE(generation % _PALETTE.N))


def _display(mesh: TMesh, axis: int, k: DyadicIndex) -> float:
    p, n = mesh.degree[axis], mesh.n[axis]
    value = float(k)
    if value <= p:
        return value * FRAME_GAP
    if value >= n:
        return p * FRAME_GAP + 1.0 + (value - n) * FRAME_GAP
    return p * FRAME_GAP + (value - p) / (n - p)


def _points(mesh: TMesh, segment: Segment) -> list[tuple[float, float]]:
    if segment.vertical:
        x = _display(mesh, 0, segment.fixed)
        return [(x, _display(mesh, 1, segment.lo)), (x, _display(mesh, 1, segment.hi))]
    y = _display(mesh, 1, segment.fixed)
    return [(_display(mesh, 0, segment.lo), y), (_display(mesh, 0, segment.hi), y)]


def _edge_generations(mesh: TMesh) -> dict[Segment, int]:
    """Skeleton edges with the generation of the bisection that drew them."""
    created: dict[tuple[bool, DyadicIndex], list[tuple[Segment, int]]] = defaultdict(list)
    for record in mesh.history:
        edge = bisection_edge(record)
        if edge is not None:
            created[edge.vertical, edge.fixed].append((edge, record.generation))
    m1, m2 = mesh.extent
    domain = IndexRect.of(0, 0, m1, m2)
    out: dict[Segment, int] = {}
    for vertical in (True, False):
        for edge in mesh.edges_in(domain, vertical):
            out[edge] = next(
                (
                    g
                    for line, g in created.get((vertical, edge.fixed), ())
                    if line.lo <= edge.lo and edge.hi <= line.hi
                ),
                0,
            )
    return out


def _figure(extent: tuple[float, float]) -> tuple[Figure, Axes]:
    width, height = extent
    scale = FIGURE_SIZE / max(width, height)
    fig = Figure(figsize=(width * scale, height * scale))
    ax = fig.add_axes((0.0, 0.0, 1.0, 1.0))
    ax.set_xlim(-0.01, width + 0.01)
    ax.set_ylim(-0.01, height + 0.01)
    ax.set_aspect("equal")
    ax.set_axis_off()
    return fig, ax


def _to_svg(fig: Figure) -> str:
    buffer = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None, "Creator": None})
    return buffer.getvalue()


def _add_lines(
    ax: Axes, lines: Iterable[list[tuple[float, float]]], colours: list[str], **style: object
) -> None:
    lines = list(lines)
    if lines:
        ax.add_collection(LineCollection(lines, colors=colours, **style))


def mesh_svg(mesh: TMesh, layer: Layer = "tmesh") -> str:
    """Render one layer of ``mesh``.

    ``extended`` adds the T-junction extensions dashed; ``bezier`` draws the
    Bézier cells in the generation colour of the element they belong to.
    """
    m1, m2 = mesh.extent
    fig, ax = _figure((_display(mesh, 0, DyadicIndex(m1)), _display(mesh, 1, DyadicIndex(m2))))
    if layer == "bezier":
        lines, colours = [], []
        for cell in bezier_mesh(mesh):
            owner = mesh.element_containing(cell.index_rect.lo)
            lo, hi = cell.index_rect
            x0, y0 = _display(mesh, 0, lo.x), _display(mesh, 1, lo.y)
            x1, y1 = _display(mesh, 0, hi.x), _display(mesh, 1, hi.y)
            lines.append([(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)])
            colours.append(generation_colour(mesh.generation(owner)))
        _add_lines(ax, lines, colours, linewidths=0.6)
        return _to_svg(fig)
    edges = sorted(_edge_generations(mesh).items())
    _add_lines(
        ax,
        (_points(mesh, edge) for edge, _ in edges),
        [generation_colour(g) for _, g in edges],
        linewidths=0.8,
    )
    if layer == "extended":
        extensions = sorted(extended_tmesh(mesh).extensions)
        _add_lines(
            ax,
            (_points(mesh, s) for s in extensions),
            ["#7f7f7f"] * len(extensions),
            linewidths=0.6,
            linestyles="dashed",
        )
    return _to_svg(fig)


def multipatch_svg(space: MultiPatchSpace, samples: int = 8) -> str:
    """Bézier meshes of all patches mapped to the physical domain."""
    t = np.linspace(0.0, 1.0, samples)
    lines: list[np.ndarray] = []
    colours: list[str] = []
    for patch, geometry in zip(space.patches, space.geometries, strict=True):
        for cell in patch.bezier:
            x0, y0, x1, y1 = cell.rect
            xs, ys = x0 + (x1 - x0) * t, y0 + (y1 - y0) * t
            g = patch.mesh.generation(patch.mesh.element_containing(cell.index_rect.lo))
            sides = (
                (xs, np.full(samples, y0)),
                (np.full(samples, x1), ys),
                (xs, np.full(samples, y1)),
                (np.full(samples, x0), ys),
            )
            for u, v in sides:
                lines.append(np.asarray(geometry(u, v)))
                colours.append(generation_colour(g))
    stacked = np.concatenate(lines) if lines else np.zeros((1, 2))
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    fig, ax = _figure(tuple(hi - lo))
    _add_lines(ax, ([tuple(p) for p in line - lo] for line in lines), colours, linewidths=0.5)
    return _to_svg(fig)


def export_svg(mesh: TMesh, path: str | Path, layer: Layer = "tmesh") -> Path:
    """Write :func:`mesh_svg` to ``path``; ``OSError`` if it is not writable."""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(mesh_svg(mesh, layer), encoding="utf-8")
    return output_path
