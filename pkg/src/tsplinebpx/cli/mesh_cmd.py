"""Mesh subcommand implementation."""

from __future__ import annotations

import sys
from pathlib import Path

from ..assembly import boundary_functions
from ..core import build_space, level_sets
from ..exceptions import TSplineBPXError
from ..experiments import mesh_sequence
from ..models import default_elements
from ..renderers import export_svg, render_mesh_summary
from ..serializers import save_mesh_json

LAYERS = ("tmesh", "extended", "bezier")


def run_mesh(
    level: int,
    degree: int,
    *,
    elements: int | None,
    refinement: str,
    svg_dir: Path | None,
    json_path: Path | None,
) -> int:
    if level < 1:
        print(f"Error: --levels must be at least 1, got {level}", file=sys.stderr)
        return 1
    if not 1 <= degree <= 5:
        print(f"Error: --degree must lie in 1..5, got {degree}", file=sys.stderr)
        return 1
    if elements is None:
        try:
            elements = default_elements(degree, refinement)
        except ValueError as exc:
            print(f"Error: {exc}", file=sys.stderr)
            return 1

    try:
        _, mesh = next(mesh_sequence((degree, degree), (elements, elements), [level], refinement))
        space = build_space(mesh, level_sets(mesh).generations)
    except TSplineBPXError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1

    print(render_mesh_summary(mesh, title=f"p={degree} {refinement} level {level}"))
    print(f"Functions: {space.dim}")
    print(f"Dofs: {space.dim - len(boundary_functions(space))}")
    print(f"Analysis-suitable: {'yes' if space.analysis_suitable else 'no'}")

    try:
        if svg_dir is not None:
            for layer in LAYERS:
                path = export_svg(mesh, svg_dir / f"level{level}-{layer}.svg", layer)
                print(f"Wrote {path}")
        if json_path is not None:
            print(f"Wrote {save_mesh_json(mesh, json_path)}")
    except OSError as exc:
        print(f"Error writing file: {exc}", file=sys.stderr)
        return 1
    return 0
