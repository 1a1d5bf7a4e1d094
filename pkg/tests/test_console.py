from __future__ import annotations

from tsplinebpx.core import TMesh
from tsplinebpx.models import (
    DeviationCell,
    DeviationReport,
    ExperimentConfig,
    ExperimentReport,
    ResultRow,
)
from tsplinebpx.renderers import (
    render_deviation,
    render_mesh_summary,
    render_report,
    render_rows,
)


def _rows() -> list[ResultRow]:
    return [
        ResultRow(level=2, dofs=85, cond_np=41.25, cond_jacobi=17.94),
        ResultRow(level=3, dofs=135, cond_np=130.0, cond_jacobi=19.2),
    ]


def test_render_rows_hides_empty_columns() -> None:
    text = render_rows(_rows(), title="p=2")
    assert "p=2" in text
    assert "Dofs" in text
    assert "Jac." in text
    assert "SGS" not in text
    assert "17.9" in text
    assert "135" in text


def test_render_deviation_marks_failures() -> None:
    deviation = DeviationReport(
        reference="square_corner",
        cells=[
            DeviationCell(level=2, column="dofs", value=85, reference=85, tolerance=0, exact=True),
            DeviationCell(level=2, column="cond_jacobi", value=30, reference=17.9, tolerance=0.3),
        ],
        notes=["checked"],
    )
    text = render_deviation(deviation)
    assert "Comparison with square_corner" in text
    assert "1 cell(s) failed" in text
    assert "exact" in text
    assert "note: checked" in text


def test_render_report_includes_warnings() -> None:
    report = ExperimentReport(
        config=ExperimentConfig(name="demo"),
        rows=_rows(),
        deviation=DeviationReport(reference="empty"),
        warnings=["Lanczos did not converge"],
    )
    text = render_report(report)
    assert "demo" in text
    assert "passed" in text
    assert "warning: Lanczos did not converge" in text


def test_render_mesh_summary_counts_generations(quadratic_mesh: TMesh) -> None:
    text = render_mesh_summary(quadratic_mesh, title="corner")
    assert text.startswith("corner: degree (2, 2)")
    assert f"{len(quadratic_mesh)} elements" in text
    assert f"generation {quadratic_mesh.max_generation}:" in text
