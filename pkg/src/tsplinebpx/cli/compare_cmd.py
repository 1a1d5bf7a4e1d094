"""Compare subcommand implementation."""

from __future__ import annotations

import sys
from collections.abc import Sequence
from pathlib import Path

from ..exceptions import TSplineBPXError
from ..experiments import compare_rows, load_reference
from ..renderers import render_deviation
from ..serializers import load_rows_csv


def run_compare(
    results_path: Path,
    reference: str,
    *,
    degree: int | None,
    tolerance: float,
    columns: Sequence[str],
    exact_dofs: bool,
) -> int:
    try:
        rows = load_rows_csv(results_path)
        reference_rows = load_reference(reference, degree)
    except FileNotFoundError as exc:
        print(f"Error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except TSplineBPXError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"Error reading file: {exc}", file=sys.stderr)
        return 1

    deviation = compare_rows(
        rows,
        reference_rows,
        tolerance=tolerance,
        exact=("dofs",) if exact_dofs else (),
        columns=columns,
        name=Path(reference).stem,
    )
    print(render_deviation(deviation))
    return 0 if deviation.passed else 1
