"""Refinement drivers for the experiment meshes.

Both drivers refine towards the corner at the index origin and mutate the
mesh in place. Step ``l`` produces generation ``l``, so the mesh of table
level ``L`` is reached after ``L - 1`` steps.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass

from ..core.dyadic import DyadicIndex, IndexRect, IndexVec2, midpoint
from ..core.tmesh import Bisection, Direction, TMesh, initial_mesh
from ..core.tspline import build_space
from ..exceptions import RefinementError

logger = logging.getLogger(__name__)

ALTERNATIVE_SIDE = 6
MAX_STRIP_CELLS = 8


@dataclass(frozen=True, slots=True)
class RefinementStep:
    """What one driver step did to the mesh."""

    step: int
    side: DyadicIndex | None
    bisections: tuple[Bisection, ...]
    fallback: bool = False
    strip_cells: int = 0


def _corner_square(mesh: TMesh, side: DyadicIndex) -> IndexRect:
    p1, p2 = mesh.degree
    return IndexRect(IndexVec2.of(0, 0), IndexVec2(side + p1, side + p2))


def _line_order(tau: IndexRect, direction: Direction) -> tuple[DyadicIndex, DyadicIndex]:
    """Sort key putting bisections that add collinear edges next to each other."""
    axis = direction.axis
    return midpoint(tau.lo[axis], tau.hi[axis]), tau.lo[1 - axis]


def _previous_side(mesh: TMesh) -> DyadicIndex:
    g = mesh.max_generation
    if g == 0:
        return DyadicIndex(min(mesh.element_counts))
    p1, p2 = mesh.degree
    newest = [tau for tau, label in mesh.elements.items() if label == g]
    return min(
        max(tau.hi.x for tau in newest) - p1,
        max(tau.hi.y for tau in newest) - p2,
    )


def corner_candidates(mesh: TMesh, side: DyadicIndex) -> list[IndexRect]:
    """Finest-generation elements inside the corner square of the given side."""
    g = mesh.max_generation
    inside = mesh.elements_inside(_corner_square(mesh, side))
    return [tau for tau in inside if mesh.generation(tau) == g]


def corner_sides(mesh: TMesh) -> list[DyadicIndex]:
    """Candidate square sides, largest first, on the grid of the finest cell height."""
    g = mesh.max_generation
    step = DyadicIndex(1, g // 2)
    limit = _previous_side(mesh)
    sides = []
    k = 1
    while step * k < limit:
        sides.append(step * k)
        k += 1
    return sides[::-1]


def corner_refinement_step(mesh: TMesh) -> RefinementStep:
    """Bisect every finest element in the largest admissible corner square.

    The side is the largest grid value below the previous side for which every
    bisection is admissible in the current mesh, so no closure is needed. When
    no side works the corner element is refined with its admissible closure.
    """
    step = mesh.max_generation + 1
    direction = Direction.X if (step - 1) % 2 == 0 else Direction.Y
    for side in corner_sides(mesh):
        candidates = corner_candidates(mesh, side)
        if candidates and all(mesh.is_admissible_bisection(t) for t in candidates):
            candidates.sort(key=lambda t: _line_order(t, direction))
            done = tuple(mesh.bisect_element(tau) for tau in candidates)
            logger.info("corner step %d: side %s, %d bisections", step, side, len(done))
            return RefinementStep(step, side, done)
    p1, p2 = mesh.degree
    corner = mesh.element_containing(IndexVec2.of(p1, p2))
    message = f"corner step {step}: no admissible square, refining {corner} with closure"
    logger.warning(message)
    warnings.warn(message, stacklevel=2)
    return RefinementStep(step, None, tuple(mesh.refine_admissible(corner)), fallback=True)


def alternative_side(step: int, initial: int = ALTERNATIVE_SIDE) -> DyadicIndex:
    """Square side of an alternative step: shrinks by the previous cell size each step."""
    side = DyadicIndex(initial)
    for previous in range(1, step):
        side = side - DyadicIndex(1, previous)
    return side


def _quad_split(mesh: TMesh, tau: IndexRect, label: int) -> list[Bisection]:
    first = mesh.split(tau, Direction.X, label)
    return [first, *(mesh.split(child, Direction.Y, label) for child in first.children)]


def _strip_split(
    mesh: TMesh, strip: IndexRect, direction: Direction, label: int
) -> list[Bisection]:
    hits = [tau for tau in mesh.elements_touching(strip) if tau.overlaps(strip)]
    hits.sort(key=lambda t: _line_order(t, direction))
    return [mesh.split(tau, direction, label) for tau in hits]


def _closure(mesh: TMesh, corner: IndexVec2, width: DyadicIndex, label: int) -> list[Bisection]:
    m1, m2 = mesh.extent
    zero = DyadicIndex(0)
    right = IndexRect(
        IndexVec2(corner.x, zero), IndexVec2(min(corner.x + width, DyadicIndex(m1)), corner.y)
    )
    top = IndexRect(
        IndexVec2(zero, corner.y), IndexVec2(corner.x, min(corner.y + width, DyadicIndex(m2)))
    )
    return [
        *_strip_split(mesh, right, Direction.Y, label),
        *_strip_split(mesh, top, Direction.X, label),
    ]


def alternative_refinement_step(
    mesh: TMesh, *, initial_side: int = ALTERNATIVE_SIDE
) -> RefinementStep:
    """Split the corner square in four, then close with aligned strips.

    The strips lie outside the right and top sides of the square and are
    ``k`` fine cells wide, ``k = max(1, p // 2)``; ``k`` grows until the mesh is
    dual compatible. Every bisection of the step carries the step number as
    its generation.
    """
    step = mesh.max_generation + 1
    side = alternative_side(step, initial_side)
    square = _corner_square(mesh, side)
    if square.hi.x > mesh.n[0] or square.hi.y > mesh.n[1]:
        raise RefinementError(f"alternative step {step}: square {square} leaves the active region")
    quads: list[Bisection] = []
    for tau in mesh.elements_inside(square):
        quads.extend(_quad_split(mesh, tau, step))
    cell = DyadicIndex(1, step)
    for k in range(max(1, max(mesh.degree) // 2), MAX_STRIP_CELLS + 1):
        trial = mesh.copy()
        strips = _closure(trial, square.hi, cell * k, step)
        if build_space(trial).analysis_suitable:
            _adopt(mesh, trial)
            logger.info(
                "alternative step %d: side %s, %d quad bisections, strips of %d cells",
                step,
                side,
                len(quads),
                k,
            )
            return RefinementStep(step, side, (*quads, *strips), strip_cells=k)
    raise RefinementError(
        f"alternative step {step}: no closure up to {MAX_STRIP_CELLS} cells is dual compatible"
    )


def _adopt(mesh: TMesh, trial: TMesh) -> None:
    for record in trial.history[len(mesh.history) :]:
        mesh.split(record.parent, record.direction, record.generation)


def uniform_refinement_step(mesh: TMesh) -> RefinementStep:
    """Bisect every element of the finest generation."""
    step = mesh.max_generation + 1
    g = step - 1
    targets = [tau for tau, label in sorted(mesh.elements.items()) if label == g]
    direction = Direction.X if g % 2 == 0 else Direction.Y
    targets.sort(key=lambda t: _line_order(t, direction))
    return RefinementStep(step, None, tuple(mesh.bisect_element(t) for t in targets))


Driver = Callable[[TMesh], RefinementStep]

DRIVERS: dict[str, Driver] = {
    "corner": corner_refinement_step,
    "alternative": alternative_refinement_step,
    "uniform": uniform_refinement_step,
}


def refine_to_level(
    mesh: TMesh, level: int, driver: Driver | str = "corner"
) -> list[RefinementStep]:
    """Apply driver steps until the finest generation is ``level - 1``."""
    step_fn = DRIVERS[driver] if isinstance(driver, str) else driver
    done = []
    while mesh.max_generation < level - 1:
        record = step_fn(mesh)
        if not record.bisections:
            raise RefinementError(f"step {record.step} made no progress")
        done.append(record)
    return done


def mesh_sequence(
    degree: tuple[int, int],
    elements: tuple[int, int],
    levels: Sequence[int],
    driver: Driver | str = "corner",
) -> Iterator[tuple[int, TMesh]]:
    """Yield ``(level, mesh copy)`` for each requested table level, coarsest first."""
    n = (elements[0] + degree[0], elements[1] + degree[1])
    mesh = initial_mesh(degree, n)
    for level in sorted(levels):
        refine_to_level(mesh, level, driver)
        yield level, mesh.copy()
