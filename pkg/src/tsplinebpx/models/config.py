"""Experiment configuration."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

CONFIG_SCHEMA_VERSION = "0.1.0"

GeometryName = Literal["square", "curved-L"]
RefinementName = Literal["corner", "alternative"]
DecompositionName = Literal["micro", "aligned", "macro"]
SmootherName = Literal["jacobi", "sgs"]

# Elements per direction of the initial grid of the corner-refinement tables, by degree.
# Other degrees need explicit ``elements``.
DEFAULT_ELEMENTS = {2: 7, 3: 8, 4: 10}
# The quad-split tables start every degree from the same grid.
ALTERNATIVE_ELEMENTS = 8


def default_elements(degree: int, refinement: str = "corner") -> int:
    """Initial elements per direction for ``degree`` under ``refinement``."""
    if refinement == "alternative":
        return ALTERNATIVE_ELEMENTS
    try:
        return DEFAULT_ELEMENTS[degree]
    except KeyError:
        raise ValueError(
            f"no default initial grid for degree {degree}; pass elements explicitly"
        ) from None


class ExperimentConfig(BaseModel):
    """Validated settings of one experiment run.

    ``levels`` are table levels: level ``L`` is the mesh whose finest
    generation is ``L - 1``. An empty ``smoothers`` list runs the
    unpreconditioned estimate only.
    """

    model_config = ConfigDict(extra="forbid")

    schema_version: str = CONFIG_SCHEMA_VERSION
    name: str = ""
    degree: tuple[int, int] = (2, 2)
    elements: tuple[int, int] | None = None
    levels: list[int] = Field(default_factory=lambda: [2, 3, 4])
    geometry: GeometryName = "square"
    refinement: RefinementName = "corner"
    decomposition: DecompositionName = "macro"
    smoothers: list[SmootherName] = Field(default_factory=lambda: ["jacobi", "sgs"])
    unpreconditioned: bool = True
    solve: bool = True
    tol: float = Field(default=1e-6, gt=0.0, lt=1.0)
    maxit: int = Field(default=2000, ge=1)
    lanczos_tol: float = Field(default=1e-4, gt=0.0, lt=1.0)
    lanczos_maxit: int = Field(default=400, ge=2)
    seed: int = 0
    bend: float = Field(default=0.15, ge=0.0, lt=0.5)
    threads: int = Field(default=1, ge=1)
    compare: bool = True
    kappa_tolerance: float = Field(default=0.30, gt=0.0)
    output_dir: str | None = None
    svg: bool = False

    @field_validator("smoothers", mode="before")
    @classmethod
    def _none_means_empty(cls, value: object) -> object:
        if value == "none" or value == ["none"]:
            return []
        if isinstance(value, str):
            return [value]
        return value

    @model_validator(mode="after")
    def _check(self) -> ExperimentConfig:
        if any(p < 1 or p > 5 for p in self.degree):
            raise ValueError(f"degree entries must lie in 1..5, got {self.degree}")
        if not self.levels:
            raise ValueError("at least one level is required")
        if any(level < 1 for level in self.levels):
            raise ValueError("levels start at 1")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:], strict=False)):
            raise ValueError("levels must be strictly increasing")
        if len(set(self.smoothers)) != len(self.smoothers):
            raise ValueError("smoothers must not repeat")
        if self.elements is not None and any(e < 2 for e in self.elements):
            raise ValueError(f"need at least 2 elements per direction, got {self.elements}")
        if self.elements is None:
            for p in self.degree:
                default_elements(p, self.refinement)
        return self

    @property
    def initial_elements(self) -> tuple[int, int]:
        if self.elements is not None:
            return self.elements
        p1, p2 = self.degree
        return default_elements(p1, self.refinement), default_elements(p2, self.refinement)

    @property
    def initial_functions(self) -> tuple[int, int]:
        """Univariate function counts ``n = E + p`` of the initial mesh."""
        (e1, e2), (p1, p2) = self.initial_elements, self.degree
        return e1 + p1, e2 + p2

    @property
    def max_level(self) -> int:
        return self.levels[-1]

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        p1, p2 = self.degree
        return f"{self.geometry}-{self.refinement}-{self.decomposition}-p{p1}{p2}"


def config_schema() -> dict[str, object]:
    """Published JSON schema of :class:`ExperimentConfig`."""
    return ExperimentConfig.model_json_schema()
