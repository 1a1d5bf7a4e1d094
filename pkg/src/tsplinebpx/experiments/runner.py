"""End-to-end experiment runs: refine, assemble, precondition, estimate, compare."""

from __future__ import annotations

import logging
import time
import warnings
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from datetime import UTC, datetime

import numpy as np

from ..assembly import (
    LinearSystem,
    MultiPatchSpace,
    apply_dirichlet,
    assemble_multipatch,
    assemble_rhs,
    assemble_stiffness,
    build_curved_L,
)
from ..core.hooks import ExperimentHook
from ..core.levels import LevelSets, level_sets
from ..core.tmesh import TMesh
from ..core.tspline import TSplineSpace, build_space
from ..exceptions import ExperimentError, TSplineBPXError
from ..models import ExperimentConfig, ExperimentReport, ResultRow
from ..multilevel import BPXPreconditioner, build_decomposition, estimate_condition, pcg_solve
from ..renderers.svg import mesh_svg, multipatch_svg
from ..serializers.csv import rows_to_csv
from ..serializers.json import mesh_to_json, report_to_json
from ..storage import ArtifactStore, FileStore, MemoryStore
from .reference import compare_with_reference
from .refinement import mesh_sequence

logger = logging.getLogger(__name__)


def unit_source(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Re-raise library and numerical errors as ``ExperimentError`` tagged ``name``."""
    try:
        yield
    except ExperimentError:
        raise
    except (TSplineBPXError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise ExperimentError(name, f"{type(exc).__name__}: {exc}") from exc


class ExperimentRunner:
    """Runs one :class:`ExperimentConfig` level by level.

    Error-handling contract
    ----------------------
    - Any stage failure aborts the run with an ``ExperimentError`` naming the stage.
    - Hook exceptions and recoverable degradations (Lanczos cap, corner
      fallback) never abort; they are collected in ``ExperimentReport.warnings``.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        storage: ArtifactStore | None = None,
        hooks: Sequence[ExperimentHook] | None = None,
    ) -> None:
        self.config = config
        if storage is None:
            storage = FileStore(config.output_dir) if config.output_dir else MemoryStore()
        self.storage = storage
        self.hooks = list(hooks or [])
        for hook in self.hooks:
            if not isinstance(hook, ExperimentHook):
                raise TypeError(
                    f"{type(hook).__name__} is not an ExperimentHook; "
                    "subclass NullHook to handle only some events"
                )

    # -- hooks ---------------------------------------------------------------

    def _notify(self, event: str, *args: object) -> None:
        for hook in self.hooks:
            try:
                getattr(hook, event)(*args)
            except Exception:
                warnings.warn(f"tsplinebpx: hook error in {event}", stacklevel=2)

    # -- stages --------------------------------------------------------------

    def _space(self, mesh: TMesh, levels: LevelSets) -> TSplineSpace | MultiPatchSpace:
        if self.config.geometry == "curved-L":
            return build_curved_L(mesh, self.config.bend, levels.generations)
        return build_space(mesh, levels.generations)

    def _system(self, space: TSplineSpace | MultiPatchSpace) -> LinearSystem:
        threads = self.config.threads
        if isinstance(space, MultiPatchSpace):
            full = assemble_multipatch(space, unit_source, threads=threads)
        else:
            full = assemble_stiffness(space, threads=threads)
            full.rhs = assemble_rhs(space, None, unit_source)
        return apply_dirichlet(full, space)

    def _condition(self, system: LinearSystem, preconditioner: object = None) -> tuple[float, bool]:
        estimate = estimate_condition(
            system.matrix,
            preconditioner,
            tol=self.config.lanczos_tol,
            maxit=self.config.lanczos_maxit,
            seed=self.config.seed,
        )
        return estimate.condition, estimate.converged

    def run_level(self, level: int, mesh: TMesh) -> ResultRow:
        config = self.config
        start = time.perf_counter()
        with stage("levels"):
            levels = level_sets(mesh)
        with stage("space"):
            space = self._space(mesh, levels)
        with stage("assemble"):
            system = self._system(space)
        dofs = system.shape[0]
        self._notify("on_level_started", level, dofs)
        values: dict[str, object] = {}
        converged = True
        if config.unpreconditioned:
            with stage("condition"):
                values["cond_np"], ok = self._condition(system)
            converged &= ok
        subspaces = None
        if config.smoothers:
            with stage("decompose"):
                decomposition = build_decomposition(config.decomposition, levels, space, system)
            subspaces = len(decomposition)
            for smoother in config.smoothers:
                with stage("precondition"):
                    bpx = BPXPreconditioner.build(decomposition, system.matrix, smoother)
                    values[f"cond_{smoother}"], ok = self._condition(system, bpx)
                converged &= ok
                if config.solve:
                    with stage("solve"):
                        _, report = pcg_solve(
                            system.matrix, system.rhs, bpx, config.tol, config.maxit
                        )
                    values[f"iters_{smoother}"] = report.iterations
                    converged &= report.converged
        row = ResultRow(
            level=level,
            dofs=dofs,
            subspaces=subspaces,
            generation=mesh.max_generation,
            wall_time_s=time.perf_counter() - start,
            converged=converged,
            **values,
        )
        logger.info(
            "level %d: %d dofs, kappa np=%s jacobi=%s sgs=%s",
            level,
            dofs,
            row.cond_np,
            row.cond_jacobi,
            row.cond_sgs,
        )
        if config.svg:
            self._save_figures(level, mesh, space)
        self.storage.save_text(f"meshes/level{level}.json", mesh_to_json(mesh))
        self._notify("on_level_completed", row)
        return row

    def _save_figures(self, level: int, mesh: TMesh, space: TSplineSpace | MultiPatchSpace) -> None:
        with stage("render"):
            self.storage.save_text(f"svg/level{level}-tmesh.svg", mesh_svg(mesh, "tmesh"))
            self.storage.save_text(f"svg/level{level}-bezier.svg", mesh_svg(mesh, "bezier"))
            if isinstance(space, MultiPatchSpace):
                self.storage.save_text(f"svg/level{level}-physical.svg", multipatch_svg(space))

    def run(self) -> ExperimentReport:
        config = self.config
        started = datetime.now(UTC)
        rows: list[ResultRow] = []
        driver = "corner" if config.refinement == "corner" else "alternative"
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            meshes = mesh_sequence(config.degree, config.initial_elements, config.levels, driver)
            while True:
                with stage("refine"):
                    item = next(meshes, None)
                if item is None:
                    break
                rows.append(self.run_level(*item))
            deviation = None
            if config.compare:
                with stage("compare"):
                    deviation = compare_with_reference(config, rows)
        messages = list(dict.fromkeys(str(w.message) for w in caught))
        for message in messages:
            logger.warning(message)
        report = ExperimentReport(
            config=config,
            rows=rows,
            deviation=deviation,
            warnings=messages,
            started_at=started,
            finished_at=datetime.now(UTC),
        )
        self.storage.save_text("results.csv", rows_to_csv(rows))
        report.artifacts = [*self.storage.list_artifacts(), "report.json"]
        self.storage.save_text("report.json", report_to_json(report))
        self._notify("on_experiment_completed", report)
        return report


def run_experiment(
    config: ExperimentConfig,
    storage: ArtifactStore | None = None,
    hooks: Sequence[ExperimentHook] | None = None,
) -> ExperimentReport:
    """Run ``config`` and return its report; artifacts go to ``storage``."""
    return ExperimentRunner(config, storage, hooks).run()
