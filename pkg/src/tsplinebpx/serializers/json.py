"""JSON serialization of meshes, spaces, configs and experiment reports.

A mesh is stored as its initial grid plus the bisection history; loading
replays the history, so a round trip reproduces the mesh exactly.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import TypeVar

from pydantic import BaseModel

from ..core.dyadic import DyadicIndex, IndexRect, IndexVec2
from ..core.tmesh import Bisection, Direction, TMesh, replay
from ..core.tspline import TSplineSpace
from ..exceptions import LoadError, MeshError
from ..models import (
    CONFIG_SCHEMA_VERSION,
    DOCUMENT_SCHEMA_VERSION,
    REPORT_SCHEMA_VERSION,
    BisectionRecord,
    ExperimentConfig,
    ExperimentReport,
    FunctionRecord,
    MeshDocument,
    SpaceDocument,
)

Model = TypeVar("Model", bound=BaseModel)


def _pair(value: DyadicIndex) -> tuple[int, int]:
    num, exp = value.to_pair()
    return num, exp


def _rect_pairs(rect: IndexRect) -> tuple[tuple[int, int], ...]:
    return _pair(rect.lo.x), _pair(rect.lo.y), _pair(rect.hi.x), _pair(rect.hi.y)


def _rect_from_pairs(pairs: tuple[tuple[int, int], ...]) -> IndexRect:
    x0, y0, x1, y1 = (DyadicIndex(num, exp) for num, exp in pairs)
    return IndexRect(IndexVec2(x0, y0), IndexVec2(x1, y1))


def _parse(model: type[Model], payload: str, what: str, version: str) -> Model:
    try:
        document = model.model_validate_json(payload)
    except (json.JSONDecodeError, ValueError, Exception) as exc:
        raise LoadError(f"Failed to parse {what} JSON: {exc}") from exc
    found = getattr(document, "schema_version", version)
    if found != version:
        warnings.warn(
            f"{what.capitalize()} schema version {found!r} differs from "
            f"current {version!r}. "
            "Some fields may be missing or ignored.",
            stacklevel=3,
        )
    return document


# -- meshes ------------------------------------------------------------------


def mesh_to_document(mesh: TMesh) -> MeshDocument:
    return MeshDocument(
        degree=mesh.degree,
        n=mesh.n,
        history=[
            BisectionRecord(
                parent=_rect_pairs(record.parent),
                direction=record.direction.value,
                generation=record.generation,
            )
            for record in mesh.history
        ],
        element_count=len(mesh),
        max_generation=mesh.max_generation,
    )


def mesh_from_document(document: MeshDocument) -> TMesh:
    """Replay the stored history; a history naming missing elements raises ``LoadError``."""
    records = [
        Bisection(_rect_from_pairs(r.parent), Direction(r.direction), r.generation, ())
        for r in document.history
    ]
    try:
        mesh = replay(document.degree, document.n, records)
    except MeshError as exc:
        raise LoadError(f"Mesh history does not replay: {exc}") from exc
    if document.element_count is not None and document.element_count != len(mesh):
        raise LoadError(
            f"Mesh document claims {document.element_count} elements, replay gave {len(mesh)}"
        )
    return mesh


def mesh_to_json(mesh: TMesh, *, indent: int | None = 2) -> str:
    return mesh_to_document(mesh).model_dump_json(indent=indent)


def mesh_from_json(payload: str) -> TMesh:
    """Parse a mesh document and replay it.

    Raises ``LoadError`` on invalid input; warns on a schema version mismatch.
    """
    document = _parse(MeshDocument, payload, "mesh", DOCUMENT_SCHEMA_VERSION)
    return mesh_from_document(document)


def save_mesh_json(mesh: TMesh, path: str | Path, *, indent: int | None = 2) -> Path:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(mesh_to_json(mesh, indent=indent), encoding="utf-8")
    return output_path


def load_mesh_json(path: str | Path) -> TMesh:
    return mesh_from_json(Path(path).read_text(encoding="utf-8"))


# -- spaces ------------------------------------------------------------------


def space_to_document(space: TSplineSpace) -> SpaceDocument:
    return SpaceDocument(
        degree=space.degree,
        n=space.mesh.n,
        dim=space.dim,
        analysis_suitable=space.analysis_suitable,
        functions=[
            FunctionRecord(
                anchor=_rect_pairs(f.anchor.location),
                hv=[_pair(v) for v in f.hv],
                vv=[_pair(v) for v in f.vv],
                knots_x=list(f.knots_x),
                knots_y=list(f.knots_y),
                generation=f.generation,
            )
            for f in space.functions
        ],
        bezier=[cell.rect for cell in space.bezier],
    )


def space_to_json(space: TSplineSpace, *, indent: int | None = 2) -> str:
    return space_to_document(space).model_dump_json(indent=indent)


def space_from_json(payload: str) -> SpaceDocument:
    return _parse(SpaceDocument, payload, "space", DOCUMENT_SCHEMA_VERSION)


# -- configs and reports -----------------------------------------------------


def config_from_json(payload: str) -> ExperimentConfig:
    return _parse(ExperimentConfig, payload, "config", CONFIG_SCHEMA_VERSION)


def load_config_json(path: str | Path) -> ExperimentConfig:
    """Load an experiment config; ``OSError`` if the file is inaccessible."""
    return config_from_json(Path(path).read_text(encoding="utf-8"))


def report_to_json(report: ExperimentReport, *, indent: int | None = 2) -> str:
    return report.model_dump_json(indent=indent)


def report_from_json(payload: str) -> ExperimentReport:
    return _parse(ExperimentReport, payload, "report", REPORT_SCHEMA_VERSION)


def save_report_json(
    report: ExperimentReport, path: str | Path, *, indent: int | None = 2
) -> Path:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(report_to_json(report, indent=indent), encoding="utf-8")
    return output_path


def load_report_json(path: str | Path) -> ExperimentReport:
    return report_from_json(Path(path).read_text(encoding="utf-8"))
