"""tsplinebpx: BPX preconditioning for analysis-suitable T-splines.

Convenience API:
    tsplinebpx.run(degree=3, levels=[2, 3, 4])  -> refine, assemble, estimate, compare
    tsplinebpx.refine(degree=2, level=5)        -> corner-refined T-mesh

Building blocks:
    from tsplinebpx.core import initial_mesh, build_space, level_sets
    from tsplinebpx.multilevel import build_decomposition, BPXPreconditioner
    mesh = initial_mesh((2, 2), (9, 9))
    space = build_space(mesh, level_sets(mesh).generations)
"""

from __future__ import annotations

from collections.abc import Sequence

from .assembly import LinearSystem, MultiPatchSpace, build_curved_L
from .core import (
    ExperimentHook,
    NullHook,
    TMesh,
    TSplineSpace,
    build_space,
    initial_mesh,
    level_sets,
)
from .experiments import ExperimentRunner, mesh_sequence, run_experiment
from .models import (
    DeviationReport,
    ExperimentConfig,
    ExperimentReport,
    RefinementName,
    ResultRow,
    default_elements,
)
from .multilevel import BPXPreconditioner, build_decomposition, estimate_condition, pcg_solve
from .storage import ArtifactStore, FileStore, MemoryStore


def run(
    *,
    degree: int = 2,
    levels: Sequence[int] = (2, 3, 4),
    storage: str | ArtifactStore = "memory",
    hooks: Sequence[ExperimentHook] | None = None,
    **options: object,
) -> ExperimentReport:
    """Run one experiment; ``options`` are further :class:`ExperimentConfig` fields."""
    config = ExperimentConfig.model_validate(
        {"degree": (degree, degree), "levels": list(levels), **options}
    )
    return run_experiment(config, _resolve_storage(storage), hooks)


def refine(
    *,
    degree: int = 2,
    level: int = 2,
    elements: int | None = None,
    refinement: RefinementName = "corner",
) -> TMesh:
    """T-mesh of table level ``level`` for the given refinement driver."""
    count = elements if elements is not None else default_elements(degree, refinement)
    _, mesh = next(mesh_sequence((degree, degree), (count, count), [level], refinement))
    return mesh


def _resolve_storage(storage: str | ArtifactStore) -> ArtifactStore:
    if not isinstance(storage, str):
        return storage
    if storage == "memory":
        return MemoryStore()
    if storage.startswith("file://"):
        return FileStore(storage.removeprefix("file://"))
    raise ValueError(
        "Unsupported storage value. Use 'memory', 'file://<path>', or an ArtifactStore instance."
    )


__all__ = [
    "ArtifactStore",
    "BPXPreconditioner",
    "DeviationReport",
    "ExperimentConfig",
    "ExperimentHook",
    "ExperimentReport",
    "ExperimentRunner",
    "FileStore",
    "LinearSystem",
    "MemoryStore",
    "MultiPatchSpace",
    "NullHook",
    "ResultRow",
    "TMesh",
    "TSplineSpace",
    "build_curved_L",
    "build_decomposition",
    "build_space",
    "estimate_condition",
    "initial_mesh",
    "level_sets",
    "pcg_solve",
    "refine",
    "run",
]
