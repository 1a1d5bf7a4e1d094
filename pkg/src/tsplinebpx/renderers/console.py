"""Rich-based console rendering of result tables, comparisons and meshes."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from io import StringIO

from rich.console import Console
from rich.table import Table
from rich.tree import Tree

from ..core.tmesh import TMesh
from ..models import CSV_COLUMNS, DeviationReport, ExperimentReport, ResultRow

_HEADERS = {
    "level": "Level",
    "dofs": "Dofs",
    "cond_np": "N.P.",
    "cond_jacobi": "Jac.",
    "cond_sgs": "SGS",
    "iters_jacobi": "It. Jac.",
    "iters_sgs": "It. SGS",
}


def _export(renderable: object) -> str:
    console = Console(record=True, width=120, markup=False, file=StringIO())
    console.print(renderable)
    return console.export_text()


def _format(value: float | int | None) -> str:
    if value is None:
        return "-"
    if isinstance(value, int):
        return str(value)
    return f"{value:.1f}"


def render_rows(
    rows: Iterable[ResultRow], *, title: str = "", columns: Sequence[str] = CSV_COLUMNS
) -> str:
    rows = list(rows)
    shown = [
        c for c in columns if c in ("level", "dofs") or any(r.value(c) is not None for r in rows)
    ]
    table = Table(title=title or None)
    for column in shown:
        table.add_column(_HEADERS.get(column, column), justify="right")
    for row in rows:
        table.add_row(*(_format(row.value(column)) for column in shown))
    return _export(table)


def render_report(report: ExperimentReport) -> str:
    """Result table plus the comparison summary and any warnings."""
    parts = [render_rows(report.rows, title=report.config.label)]
    if report.deviation is not None:
        parts.append(render_deviation(report.deviation))
    for message in report.warnings:
        parts.append(f"warning: {message}\n")
    return "".join(parts)


def render_deviation(deviation: DeviationReport) -> str:
    table = Table(title=f"Comparison with {deviation.reference}")
    for header in ("Level", "Column", "Value", "Reference", "Rel. error", "Tol.", ""):
        table.add_column(header, justify="right")
    for cell in deviation.cells:
        error = cell.relative_error
        table.add_row(
            str(cell.level),
            cell.column,
            _format(cell.value),
            _format(int(cell.reference) if cell.exact else cell.reference),
            "-" if error is None else f"{error:.1%}",
            "exact" if cell.exact else f"{cell.tolerance:.0%}",
            "✓" if cell.passed else "✗",
        )
    verdict = "passed" if deviation.passed else f"{len(deviation.failures)} cell(s) failed"
    text = _export(table) + f"{verdict}\n"
    for note in deviation.notes:
        text += f"note: {note}\n"
    return text


def render_mesh_summary(mesh: TMesh, *, title: str = "T-mesh") -> str:
    """Tree of element counts per generation."""
    p1, p2 = mesh.degree
    tree = Tree(
        f"{title}: degree ({p1}, {p2}), {len(mesh)} elements, {len(mesh.history)} bisections"
    )
    counts = Counter(mesh.elements.values())
    for generation in sorted(counts):
        tree.add(f"generation {generation}: {counts[generation]} elements")
    return _export(tree)
