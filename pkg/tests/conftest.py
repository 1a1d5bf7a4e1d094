from __future__ import annotations

import logging

import pytest

from tsplinebpx.core import IndexVec2, TMesh, initial_mesh


def corner_refined(degree: int = 2, functions: int = 8, steps: int = 4) -> TMesh:
    """Admissibly refine towards the lower-left corner of the parametric domain."""
    mesh = initial_mesh((degree, degree), (functions, functions))
    for _ in range(steps):
        mesh.refine_admissible(mesh.element_containing(IndexVec2.of(degree, degree)))
    return mesh


@pytest.fixture
def quadratic_mesh() -> TMesh:
    return corner_refined(2, 8, 4)


@pytest.fixture
def cubic_mesh() -> TMesh:
    return corner_refined(3, 9, 3)


@pytest.fixture(autouse=True)
def _quiet_logging() -> None:
    logging.getLogger("tsplinebpx").setLevel(logging.WARNING)
