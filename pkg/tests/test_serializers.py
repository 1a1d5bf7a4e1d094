from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from tsplinebpx.core import TMesh, build_space
from tsplinebpx.exceptions import LoadError
from tsplinebpx.models import ExperimentConfig, ExperimentReport, ResultRow
from tsplinebpx.serializers import (
    config_from_json,
    load_matrix_market,
    load_mesh_json,
    load_report_json,
    load_rows_csv,
    load_vector,
    mesh_from_json,
    mesh_to_json,
    read_records,
    rows_from_csv,
    rows_to_csv,
    save_matrix_market,
    save_mesh_json,
    save_report_json,
    save_rows_csv,
    save_vector,
    space_from_json,
    space_to_json,
)


def _rows() -> list[ResultRow]:
    return [
        ResultRow(level=2, dofs=85, cond_np=41.25, cond_jacobi=17.9, iters_jacobi=12),
        ResultRow(level=3, dofs=135, cond_np=130.0, cond_sgs=4.4),
    ]


def test_mesh_json_replays_the_history(quadratic_mesh: TMesh) -> None:
    payload = mesh_to_json(quadratic_mesh)
    loaded = mesh_from_json(payload)
    document = json.loads(payload)
    assert document["element_count"] == len(quadratic_mesh)
    assert document["history"][0]["direction"] in ("x", "y")
    assert dict(loaded.elements) == dict(quadratic_mesh.elements)


def test_save_and_load_mesh_json_file(tmp_path: Path, quadratic_mesh: TMesh) -> None:
    path = save_mesh_json(quadratic_mesh, tmp_path / "nested" / "mesh.json")
    assert load_mesh_json(path).max_generation == quadratic_mesh.max_generation


def test_mesh_json_with_bad_history_raises(quadratic_mesh: TMesh) -> None:
    document = json.loads(mesh_to_json(quadratic_mesh))
    document["history"][0]["parent"] = [[0, 0], [0, 0], [1, 3], [1, 3]]
    with pytest.raises(LoadError, match="does not replay"):
        mesh_from_json(json.dumps(document))


def test_mesh_json_with_wrong_element_count_raises(quadratic_mesh: TMesh) -> None:
    document = json.loads(mesh_to_json(quadratic_mesh))
    document["element_count"] = 1
    with pytest.raises(LoadError, match="claims 1 elements"):
        mesh_from_json(json.dumps(document))


def test_invalid_json_raises_load_error() -> None:
    with pytest.raises(LoadError, match="Failed to parse mesh JSON"):
        mesh_from_json("{not json")


def test_schema_mismatch_warns(quadratic_mesh: TMesh) -> None:
    document = json.loads(mesh_to_json(quadratic_mesh))
    document["schema_version"] = "9.9.9"
    with pytest.warns(UserWarning, match="schema version"):
        mesh_from_json(json.dumps(document))


def test_space_json_lists_functions(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    document = space_from_json(space_to_json(space))
    assert document.dim == space.dim == len(document.functions)
    assert document.analysis_suitable
    assert len(document.bezier) == len(space.bezier)


def test_config_json_rejects_unknown_fields() -> None:
    assert config_from_json('{"degree": [3, 3]}').degree == (3, 3)
    with pytest.raises(LoadError):
        config_from_json('{"degree": [3, 3], "colour": "red"}')


def test_report_json_file_roundtrip(tmp_path: Path) -> None:
    report = ExperimentReport(config=ExperimentConfig(), rows=_rows(), warnings=["w"])
    loaded = load_report_json(save_report_json(report, tmp_path / "report.json"))
    assert loaded.rows == report.rows
    assert loaded.warnings == ["w"]


def test_csv_has_the_fixed_header_and_empty_cells() -> None:
    text = rows_to_csv(_rows())
    lines = text.splitlines()
    assert lines[0] == "level,dofs,cond_np,cond_jacobi,cond_sgs,iters_jacobi,iters_sgs"
    assert lines[1] == "2,85,41.25,17.9,,12,"
    assert rows_from_csv(text) == _rows()


def test_csv_file_roundtrip_skips_comments(tmp_path: Path) -> None:
    path = save_rows_csv(_rows(), tmp_path / "results.csv")
    path.write_text("# produced by a test\n" + path.read_text(encoding="utf-8"), encoding="utf-8")
    assert [row.dofs for row in load_rows_csv(path)] == [85, 135]


@pytest.mark.parametrize(
    "payload",
    ["", "# only a comment\n", "level,dofs\n2,85,7\n", "level\n2\n", "level,dofs\nx,85\n"],
)
def test_malformed_csv_raises_load_error(payload: str) -> None:
    with pytest.raises(LoadError):
        rows_from_csv(payload)


def test_read_records_keeps_extra_columns() -> None:
    records = read_records("degree,level,dofs\n2,2,85\n3,2,137\n")
    assert records[1] == {"degree": "3", "level": "2", "dofs": "137"}


def test_matrix_market_and_vector_files(tmp_path: Path) -> None:
    matrix = sp.random(12, 12, density=0.3, random_state=1, format="csr")
    path = save_matrix_market(matrix, tmp_path / "a.mtx", comment="test")
    assert abs(load_matrix_market(path) - matrix).max() < 1e-12
    vector = np.linspace(0.0, 1.0, 7) / 3.0
    assert np.array_equal(load_vector(save_vector(vector, tmp_path / "b.txt")), vector)
