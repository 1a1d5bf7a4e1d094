"""Solver reports, result rows and comparison reports."""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from .config import ExperimentConfig

REPORT_SCHEMA_VERSION = "0.1.0"

CSV_COLUMNS = (
    "level",
    "dofs",
    "cond_np",
    "cond_jacobi",
    "cond_sgs",
    "iters_jacobi",
    "iters_sgs",
)


class ConditionEstimate(BaseModel):
    """Extreme eigenvalues of a (preconditioned) operator."""

    lambda_min: float
    lambda_max: float
    iterations: int = 0
    converged: bool = True

    @computed_field(return_type=float)
    @property
    def condition(self) -> float:
        return self.lambda_max / self.lambda_min


class SolveReport(BaseModel):
    """Outcome of one PCG run."""

    iterations: int
    converged: bool
    residuals: list[float] = Field(default_factory=list)
    lambda_min: float | None = None
    lambda_max: float | None = None
    elapsed_s: float = 0.0

    @computed_field(return_type=float | None)
    @property
    def condition(self) -> float | None:
        if self.lambda_min is None or self.lambda_max is None or self.lambda_min <= 0.0:
            return None
        return self.lambda_max / self.lambda_min


class ResultRow(BaseModel):
    """One table row: a refinement level and its condition numbers."""

    model_config = ConfigDict(extra="ignore")

    level: int
    dofs: int
    cond_np: float | None = None
    cond_jacobi: float | None = None
    cond_sgs: float | None = None
    iters_jacobi: int | None = None
    iters_sgs: int | None = None
    subspaces: int | None = None
    generation: int | None = None
    wall_time_s: float | None = None
    converged: bool = True

    def value(self, column: str) -> float | int | None:
        return getattr(self, column)


class DeviationCell(BaseModel):
    level: int
    column: str
    value: float | None
    reference: float
    tolerance: float
    exact: bool = False

    @computed_field(return_type=float | None)
    @property
    def relative_error(self) -> float | None:
        if self.value is None:
            return None
        return abs(self.value - self.reference) / abs(self.reference)

    @computed_field(return_type=bool)
    @property
    def passed(self) -> bool:
        if self.value is None:
            return False
        if self.exact:
            return self.value == self.reference
        error = self.relative_error
        return error is not None and error <= self.tolerance


class DeviationReport(BaseModel):
    """Cell-by-cell comparison of a result table with a reference table."""

    reference: str
    cells: list[DeviationCell] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @computed_field(return_type=bool)
    @property
    def passed(self) -> bool:
        return all(cell.passed for cell in self.cells)

    @property
    def failures(self) -> list[DeviationCell]:
        return [cell for cell in self.cells if not cell.passed]


class ExperimentReport(BaseModel):
    """Everything one experiment run produced."""

    schema_version: str = REPORT_SCHEMA_VERSION
    config: ExperimentConfig
    rows: list[ResultRow] = Field(default_factory=list)
    deviation: DeviationReport | None = None
    warnings: list[str] = Field(default_factory=list)
    artifacts: list[str] = Field(default_factory=list)
    started_at: datetime | None = None
    finished_at: datetime | None = None

    @computed_field(return_type=float | None)
    @property
    def duration_s(self) -> float | None:
        if self.started_at is None or self.finished_at is None:
            return None
        return (self.finished_at - self.started_at).total_seconds()

    @model_validator(mode="after")
    def _dofs_increase(self) -> ExperimentReport:
        dofs = [row.dofs for row in self.rows]
        if any(b <= a for a, b in zip(dofs, dofs[1:], strict=False)):
            raise ValueError(f"dofs must increase strictly with the level, got {dofs}")
        return self
