"""Command line interface for tsplinebpx."""

from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path

from rich.logging import RichHandler

from ..models import config_schema
from .compare_cmd import run_compare
from .mesh_cmd import run_mesh
from .run_cmd import run_run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsplinebpx")
    parser.add_argument("--verbose", action="store_true", help="Log progress to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run an experiment from a JSON config")
    run_parser.add_argument("--config", type=Path, required=True, help="Experiment config JSON")
    run_parser.add_argument(
        "--output-dir", type=Path, default=None, help="Override the config's output directory"
    )
    run_parser.add_argument("--svg", action="store_true", help="Also write mesh figures")

    mesh_parser = subparsers.add_parser("mesh", help="Build a refined mesh and export figures")
    mesh_parser.add_argument("--levels", type=int, required=True, help="Table level L (>= 1)")
    mesh_parser.add_argument("--degree", type=int, default=2, help="Degree in both directions")
    mesh_parser.add_argument(
        "--elements", type=int, default=None, help="Initial elements per direction"
    )
    mesh_parser.add_argument(
        "--refinement", choices=["corner", "alternative"], default="corner"
    )
    mesh_parser.add_argument(
        "--export-svg", type=Path, default=None, help="Directory for T-mesh/Bezier SVG figures"
    )
    mesh_parser.add_argument(
        "--json", type=Path, default=None, help="Write the mesh document to this path"
    )

    compare_parser = subparsers.add_parser("compare", help="Compare a result CSV with a reference")
    compare_parser.add_argument("--results", type=Path, required=True, help="Result table CSV")
    compare_parser.add_argument(
        "--reference",
        required=True,
        help="Reference CSV path or packaged table name (e.g. square_corner)",
    )
    compare_parser.add_argument(
        "--degree", type=int, default=None, help="Degree to select from multi-degree tables"
    )
    compare_parser.add_argument("--tolerance", type=float, default=0.30)
    compare_parser.add_argument(
        "--columns",
        nargs="*",
        default=["cond_jacobi", "cond_sgs"],
        help="Columns compared within the relative tolerance",
    )
    compare_parser.add_argument(
        "--no-dofs", action="store_true", help="Do not require exact dof counts"
    )

    subparsers.add_parser("schema", help="Print the experiment config JSON schema")
    return parser


def _configure_logging(verbose: bool) -> None:
    if not verbose:
        return
    logging.basicConfig(
        level=logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(show_path=False, rich_tracebacks=False)],
        force=True,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    if args.command == "run":
        return run_run(args.config, output_dir=args.output_dir, svg=args.svg)
    if args.command == "mesh":
        return run_mesh(
            args.levels,
            args.degree,
            elements=args.elements,
            refinement=args.refinement,
            svg_dir=args.export_svg,
            json_path=args.json,
        )
    if args.command == "compare":
        return run_compare(
            args.results,
            args.reference,
            degree=args.degree,
            tolerance=args.tolerance,
            columns=args.columns,
            exact_dofs=not args.no_dofs,
        )
    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2, sort_keys=True))
        return 0

    parser.error("Unknown command")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
