from __future__ import annotations

import pytest
from pydantic import ValidationError

from tsplinebpx.models import (
    DeviationCell,
    DeviationReport,
    ExperimentConfig,
    ExperimentReport,
    ResultRow,
    SolveReport,
    config_schema,
)


def test_config_defaults_follow_the_degree() -> None:
    config = ExperimentConfig(degree=(3, 3))
    assert config.initial_elements == (8, 8)
    assert config.initial_functions == (11, 11)
    assert config.max_level == 4
    assert config.label == "square-corner-macro-p33"
    assert ExperimentConfig(degree=(2, 2), elements=(3, 4)).initial_functions == (5, 6)


def test_degrees_without_a_default_grid_need_explicit_elements() -> None:
    with pytest.raises(ValidationError, match="pass elements explicitly"):
        ExperimentConfig(degree=(5, 5))
    assert ExperimentConfig(degree=(5, 5), elements=(6, 6)).initial_functions == (11, 11)
    assert ExperimentConfig(degree=(5, 5), refinement="alternative").initial_elements == (8, 8)
    assert ExperimentConfig(degree=(2, 2), refinement="alternative").initial_elements == (8, 8)


@pytest.mark.parametrize(
    "overrides",
    [
        {"degree": (0, 2)},
        {"degree": (6, 6)},
        {"levels": []},
        {"levels": [3, 2]},
        {"levels": [0, 1]},
        {"smoothers": ["jacobi", "jacobi"]},
        {"elements": (1, 4)},
        {"tol": 0.0},
        {"threads": 0},
        {"geometry": "disc"},
        {"unknown_field": True},
    ],
)
def test_invalid_configs_are_rejected(overrides: dict[str, object]) -> None:
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(overrides)


def test_none_smoother_means_unpreconditioned_only() -> None:
    assert ExperimentConfig(smoothers="none").smoothers == []
    assert ExperimentConfig.model_validate({"smoothers": "sgs"}).smoothers == ["sgs"]


def test_config_schema_lists_the_fields() -> None:
    schema = config_schema()
    assert schema["title"] == "ExperimentConfig"
    assert {"degree", "levels", "decomposition", "smoothers"} <= set(schema["properties"])


def test_deviation_cells_check_tolerance_and_exactness() -> None:
    close = DeviationCell(level=3, column="cond_sgs", value=12.0, reference=10.0, tolerance=0.3)
    far = DeviationCell(level=3, column="cond_sgs", value=14.0, reference=10.0, tolerance=0.3)
    exact = DeviationCell(level=3, column="dofs", value=85, reference=85, tolerance=0, exact=True)
    missing = DeviationCell(level=4, column="cond_np", value=None, reference=1.0, tolerance=0.3)
    assert close.passed and close.relative_error == pytest.approx(0.2)
    assert not far.passed
    assert exact.passed
    assert not missing.passed
    report = DeviationReport(reference="t", cells=[close, far, exact])
    assert not report.passed
    assert report.failures == [far]
    assert DeviationReport(reference="empty").passed


def test_solve_report_condition() -> None:
    assert SolveReport(iterations=3, converged=True, lambda_min=0.5, lambda_max=5.0).condition == 10
    assert SolveReport(iterations=0, converged=True).condition is None


def test_report_requires_increasing_dofs() -> None:
    config = ExperimentConfig()
    rows = [ResultRow(level=2, dofs=85), ResultRow(level=3, dofs=85)]
    with pytest.raises(ValidationError, match="dofs must increase"):
        ExperimentReport(config=config, rows=rows)


def test_result_row_ignores_extra_columns() -> None:
    row = ResultRow.model_validate({"level": "2", "dofs": "85", "degree": "2", "cond_np": "5"})
    assert row.value("cond_np") == 5.0
    assert row.value("iters_sgs") is None
