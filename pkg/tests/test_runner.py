from __future__ import annotations

import pytest

from tsplinebpx.core import NullHook
from tsplinebpx.exceptions import AssemblyError, ExperimentError
from tsplinebpx.experiments.runner import ExperimentRunner, run_experiment, stage
from tsplinebpx.models import ExperimentConfig, ExperimentReport, ResultRow
from tsplinebpx.serializers import mesh_from_json, report_from_json, rows_from_csv
from tsplinebpx.storage import MemoryStore


def _config(**overrides: object) -> ExperimentConfig:
    settings: dict[str, object] = {
        "degree": (2, 2),
        "elements": (4, 4),
        "levels": [1, 2],
        "compare": False,
    }
    settings.update(overrides)
    return ExperimentConfig.model_validate(settings)


class RecordingHook(NullHook):
    def __init__(self) -> None:
        self.events: list[str] = []

    def on_level_started(self, level: int, dofs: int) -> None:
        self.events.append(f"start {level}")

    def on_level_completed(self, row: ResultRow) -> None:
        self.events.append(f"done {row.level}")

    def on_experiment_completed(self, report: ExperimentReport) -> None:
        self.events.append("finished")


class FailingHook(RecordingHook):
    def on_level_completed(self, row: ResultRow) -> None:
        raise RuntimeError("boom")


def test_run_writes_artifacts() -> None:
    store = MemoryStore()
    report = run_experiment(_config(), storage=store)
    assert store.list_artifacts() == [
        "meshes/level1.json",
        "meshes/level2.json",
        "report.json",
        "results.csv",
    ]
    assert "report.json" in report.artifacts
    saved = rows_from_csv(store.load_text("results.csv") or "")
    assert [row.dofs for row in saved] == [row.dofs for row in report.rows]
    mesh = mesh_from_json(store.load_text("meshes/level2.json") or "")
    assert mesh.max_generation == 1
    assert report_from_json(store.load_text("report.json") or "").config == report.config


def test_run_rows() -> None:
    report = run_experiment(_config(), storage=MemoryStore())
    first, second = report.rows
    assert first.dofs == 16
    assert second.dofs > first.dofs
    for row in report.rows:
        assert row.converged
        assert row.cond_jacobi is not None and row.cond_jacobi > 1.0
        assert row.cond_sgs is not None and row.cond_sgs >= 1.0
        assert row.iters_sgs is not None and row.iters_sgs > 0
    assert second.subspaces == 2
    assert report.duration_s is not None


def test_unpreconditioned_only() -> None:
    report = run_experiment(_config(smoothers="none", levels=[1]), storage=MemoryStore())
    (row,) = report.rows
    assert row.cond_np is not None
    assert row.cond_jacobi is None
    assert row.subspaces is None


def test_hooks_receive_events() -> None:
    hook = RecordingHook()
    run_experiment(_config(), storage=MemoryStore(), hooks=[hook])
    assert hook.events == ["start 1", "done 1", "start 2", "done 2", "finished"]


class CompletionHook(NullHook):
    def __init__(self) -> None:
        self.levels: list[int] = []

    def on_level_completed(self, row: ResultRow) -> None:
        self.levels.append(row.level)


def test_partial_hook_overrides_only_some_events() -> None:
    hook = CompletionHook()
    run_experiment(_config(smoothers="none"), storage=MemoryStore(), hooks=[hook])
    assert hook.levels == [1, 2]


def test_objects_without_hook_methods_are_rejected() -> None:
    with pytest.raises(TypeError, match="subclass NullHook"):
        ExperimentRunner(_config(), MemoryStore(), [object()])  # type: ignore[list-item]


def test_hook_errors_become_warnings() -> None:
    hook = FailingHook()
    report = ExperimentRunner(_config(levels=[1]), MemoryStore(), [hook]).run()
    assert "tsplinebpx: hook error in on_level_completed" in report.warnings
    assert len(report.rows) == 1
    assert hook.events == ["start 1", "finished"]


def test_svg_artifacts() -> None:
    store = MemoryStore()
    run_experiment(_config(levels=[1], svg=True, smoothers="none"), storage=store)
    assert "svg/level1-tmesh.svg" in store.list_artifacts()
    assert "svg/level1-bezier.svg" in store.list_artifacts()


def test_curved_l_run() -> None:
    store = MemoryStore()
    config = _config(geometry="curved-L", levels=[1], svg=True, solve=False)
    report = run_experiment(config, storage=store)
    (row,) = report.rows
    assert row.cond_sgs is not None
    assert "svg/level1-physical.svg" in store.list_artifacts()


def test_curved_l_refined_level_uses_the_glued_decomposition() -> None:
    config = _config(
        geometry="curved-L",
        elements=None,
        levels=[2],
        smoothers=["jacobi"],
        solve=False,
        compare=True,
    )
    report = run_experiment(config, storage=MemoryStore())
    (row,) = report.rows
    assert row.dofs == 275
    assert row.subspaces == 2
    assert row.cond_jacobi is not None and row.cond_jacobi > 1.0
    assert report.deviation is not None
    assert report.deviation.reference == "curved_l_corner"
    assert report.deviation.passed


@pytest.mark.slow
def test_curved_l_dofs() -> None:
    config = _config(geometry="curved-L", elements=None, levels=[2, 3, 4], smoothers="none")
    report = run_experiment(config, storage=MemoryStore())
    assert [row.dofs for row in report.rows] == [275, 430, 682]


def test_comparison_attached_to_report() -> None:
    config = _config(elements=None, levels=[2], smoothers=["sgs"], solve=False, compare=True)
    report = run_experiment(config, storage=MemoryStore())
    assert report.rows[0].dofs == 85
    assert report.deviation is not None
    assert report.deviation.reference == "square_corner"


def test_stage_wraps_library_errors() -> None:
    with pytest.raises(ExperimentError, match=r"\[assemble\] AssemblyError: bad"):
        with stage("assemble"):
            raise AssemblyError("bad")


def test_stage_passes_other_errors_through() -> None:
    with pytest.raises(KeyError):
        with stage("assemble"):
            raise KeyError("x")
