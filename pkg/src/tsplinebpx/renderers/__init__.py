"""Console tables and SVG mesh figures."""

from .console import render_deviation, render_mesh_summary, render_report, render_rows
from .svg import export_svg, generation_colour, mesh_svg, multipatch_svg

__all__ = [
    "export_svg",
    "generation_colour",
    "mesh_svg",
    "multipatch_svg",
    "render_deviation",
    "render_mesh_summary",
    "render_report",
    "render_rows",
]
