from __future__ import annotations

import pytest
from conftest import corner_refined

from tsplinebpx.core import (
    LevelSetBuilder,
    TMesh,
    build_space,
    initial_mesh,
    level_sets,
    overlap_audit,
    overlap_bounds,
)
from tsplinebpx.exceptions import MeshError


def test_replay_matches_a_full_rebuild(quadratic_mesh: TMesh) -> None:
    levels = level_sets(quadratic_mesh)
    space = build_space(quadratic_mesh, levels.generations)
    assert levels.final == frozenset(f.key for f in space.functions)
    assert len(levels.steps) == len(quadratic_mesh.history) + 1


def test_initial_step_holds_the_tensor_basis() -> None:
    mesh = initial_mesh((2, 2), (6, 6))
    levels = level_sets(mesh)
    assert len(levels.steps) == 1
    assert len(levels.steps[0].added) == 36
    assert levels.snapshots == {0: levels.final}
    assert levels.max_generation == 0


def test_generations_label_new_functions(cubic_mesh: TMesh) -> None:
    levels = level_sets(cubic_mesh)
    space = build_space(cubic_mesh, levels.generations)
    assert {f.generation for f in space.functions} >= {0, cubic_mesh.max_generation}
    for step in levels.steps[1:]:
        for key in step.added:
            assert levels.generations[key] == step.generation
        assert not step.added & step.removed


def test_snapshots_are_nested_by_generation(quadratic_mesh: TMesh) -> None:
    levels = level_sets(quadratic_mesh)
    assert sorted(levels.snapshots) == list(range(quadratic_mesh.max_generation + 1))
    assert levels.snapshot(99) == levels.final
    macro = levels.macro_sets()
    assert macro[0] == levels.snapshots[0]
    assert all(macro[g] for g in macro)
    with pytest.raises(MeshError):
        levels.snapshot(-1)


def test_builder_rejects_out_of_order_generations(quadratic_mesh: TMesh) -> None:
    history = quadratic_mesh.history
    builder = LevelSetBuilder(quadratic_mesh.degree, quadratic_mesh.n)
    builder.extend(history)
    assert history[0].generation < quadratic_mesh.max_generation
    with pytest.raises(MeshError, match="after generation"):
        builder.apply(history[0])


def test_same_generation_overlap_stays_bounded() -> None:
    mesh = corner_refined(2, 8, 6)
    levels = level_sets(mesh, track_regions=True)
    space = build_space(mesh, levels.generations)
    audit = overlap_audit(levels, space)
    assert set(audit) <= set(range(1, mesh.max_generation + 1))
    assert max(omega for omega, _ in audit.values()) > 0
    for generation, (omega, omega_tilde) in audit.items():
        cap, cap_tilde = overlap_bounds((2, 2), generation)
        assert omega <= cap
        assert omega <= omega_tilde <= cap_tilde


def test_overlap_bounds_follow_the_bisection_direction() -> None:
    assert overlap_bounds((2, 3), 1) == (25, 99)
    assert overlap_bounds((2, 3), 2) == (21, 91)
    assert overlap_bounds((3, 3), 1) == overlap_bounds((3, 3), 2) == (35, 143)
