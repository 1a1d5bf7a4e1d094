"""Serializable documents for meshes and spaces.

Dyadic indices are stored exactly as ``[numerator, exponent]`` pairs meaning
``numerator / 2**exponent``.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

DOCUMENT_SCHEMA_VERSION = "0.1.0"

DyadicPair = tuple[int, int]


def _check_pair(pair: DyadicPair) -> DyadicPair:
    if pair[1] < 0:
        raise ValueError(f"dyadic exponent must be non-negative, got {pair[1]}")
    return pair


class BisectionRecord(BaseModel):
    """One bisection: parent element (lo-x, lo-y, hi-x, hi-y), direction and label."""

    model_config = ConfigDict(extra="forbid")

    parent: tuple[DyadicPair, DyadicPair, DyadicPair, DyadicPair]
    direction: Literal["x", "y"]
    generation: int = Field(ge=0)

    @field_validator("parent")
    @classmethod
    def _exponents(
        cls, value: tuple[DyadicPair, DyadicPair, DyadicPair, DyadicPair]
    ) -> tuple[DyadicPair, DyadicPair, DyadicPair, DyadicPair]:
        for pair in value:
            _check_pair(pair)
        return value


class MeshDocument(BaseModel):
    """A T-mesh as its initial grid plus the bisection history."""

    model_config = ConfigDict(extra="ignore")

    schema_version: str = DOCUMENT_SCHEMA_VERSION
    degree: tuple[int, int]
    n: tuple[int, int]
    history: list[BisectionRecord] = Field(default_factory=list)
    element_count: int | None = None
    max_generation: int | None = None


class FunctionRecord(BaseModel):
    anchor: tuple[DyadicPair, DyadicPair, DyadicPair, DyadicPair]
    hv: list[DyadicPair]
    vv: list[DyadicPair]
    knots_x: list[float]
    knots_y: list[float]
    generation: int


class SpaceDocument(BaseModel):
    """Basis and Bézier mesh of a T-spline space."""

    model_config = ConfigDict(extra="ignore")

    schema_version: str = DOCUMENT_SCHEMA_VERSION
    degree: tuple[int, int]
    n: tuple[int, int]
    dim: int
    analysis_suitable: bool
    functions: list[FunctionRecord] = Field(default_factory=list)
    bezier: list[tuple[float, float, float, float]] = Field(default_factory=list)
