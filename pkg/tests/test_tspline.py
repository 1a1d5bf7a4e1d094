from __future__ import annotations

import numpy as np
import pytest
from scipy.interpolate import BSpline
from conftest import corner_refined

from tsplinebpx.core import (
    AnchorKind,
    Direction,
    FineGrid,
    IndexRect,
    IndexVec2,
    SplineField,
    TMesh,
    anchors,
    bezier_mesh,
    bezier_per_tiled_cell,
    build_space,
    change_of_basis,
    check_dual_compatibility,
    evaluate_space,
    extended_tmesh,
    initial_mesh,
    level_sets,
    projector,
    replay,
    size_comparability,
    tiled_floor_audit,
)
from tsplinebpx.core.tspline import anchor_kind, embedding_matrix, fine_embedding, supports
from tsplinebpx.experiments.refinement import uniform_refinement_step


def _sample(count: int = 60, seed: int = 3) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(count, 2))


@pytest.mark.parametrize(
    ("degree", "kind"),
    [
        ((3, 3), AnchorKind.VERTEX),
        ((2, 2), AnchorKind.ELEMENT),
        ((2, 3), AnchorKind.H_EDGE),
        ((3, 2), AnchorKind.V_EDGE),
    ],
)
def test_anchor_kind_follows_degree_parity(degree: tuple[int, int], kind: AnchorKind) -> None:
    assert anchor_kind(degree) is kind


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_tensor_mesh_gives_tensor_product_space(degree: int) -> None:
    n = degree + 4
    space = build_space(initial_mesh((degree, degree), (n, n)))
    assert space.dim == n * n
    assert len(anchors(space.mesh)) == n * n
    assert len(space.bezier) == 16
    assert space.analysis_suitable
    assert space.extended.crossing_free


def test_refined_space_is_dual_compatible_partition_of_unity(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    assert check_dual_compatibility(space).ok
    values = evaluate_space(space, _sample())
    assert np.allclose(np.asarray(values.sum(axis=1)).ravel(), 1.0)


def test_build_space_does_not_alias_the_mesh(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    before = len(quadratic_mesh)
    quadratic_mesh.bisect_element(quadratic_mesh.element_containing(IndexVec2.of(6, 6)))
    assert len(quadratic_mesh) == before + 1
    assert len(space.mesh) == before


def test_bezier_mesh_tiles_the_parametric_domain(cubic_mesh: TMesh) -> None:
    cells = bezier_mesh(cubic_mesh)
    assert sum(c.area for c in cells) == pytest.approx(1.0)
    assert all(c.area > 0 for c in cells)
    nonempty = [t for t in cubic_mesh if not any(cubic_mesh.is_degenerate(t, d) for d in Direction)]
    assert len(cells) >= len(nonempty)


def test_extended_mesh_of_admissible_mesh_is_crossing_free(cubic_mesh: TMesh) -> None:
    extended = extended_tmesh(cubic_mesh)
    assert extended.junctions
    assert extended.crossing_free
    assert len(extended.horizontal) + len(extended.vertical) == len(extended.extensions)


def test_projector_reproduces_polynomials(cubic_mesh: TMesh) -> None:
    space = build_space(cubic_mesh)

    def poly(x: float, y: float, rx: int, ry: int) -> float:
        fx = [x**3, 3 * x**2, 6 * x, 6.0][rx]
        fy = [y**2 - y, 2 * y - 1, 2.0, 0.0][ry]
        return fx * fy

    field = SplineField(space.functions, projector(space, poly))
    for x, y in _sample(20):
        assert field(x, y) == pytest.approx(x**3 * (y**2 - y), abs=1e-10)


def test_change_of_basis_embeds_coarse_space() -> None:
    coarse = build_space(corner_refined(2, 8, 2))
    fine = build_space(corner_refined(2, 8, 4))
    psi = change_of_basis(coarse.functions, fine)
    points = _sample()
    assert psi.shape == (fine.dim, coarse.dim)
    lhs = (evaluate_space(fine, points) @ psi).toarray()
    assert np.allclose(lhs, evaluate_space(coarse, points).toarray(), atol=1e-10)


def test_support_extension_and_size_comparability(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    ext = supports(space, 0)
    x0, y0, x1, y1 = ext.bounding
    assert len(ext.boxes) == len(space.incidence[0])
    assert x0 <= space.bezier[0].rect[0] and space.bezier[0].rect[2] <= x1
    assert y0 <= space.bezier[0].rect[1] and space.bezier[0].rect[3] <= y1
    assert 1.0 <= size_comparability(space) < np.inf


def test_spline_field_rejects_wrong_coefficient_count(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    with pytest.raises(ValueError):
        SplineField(space.functions, np.zeros(space.dim + 1))


def test_fine_embedding_of_the_initial_space_is_a_permutation() -> None:
    space = build_space(initial_mesh((2, 2), (6, 6)))
    grid = FineGrid(space.degree, space.mesh.n, (0, 0))
    assert grid.total == space.dim
    matrix = embedding_matrix(space.functions, grid).toarray()
    assert np.count_nonzero(matrix) == space.dim
    assert np.allclose(matrix.sum(axis=0), 1.0)
    assert sorted(matrix.argmax(axis=0)) == list(range(space.dim))
    first = fine_embedding(space.functions[0], grid).toarray().ravel()
    assert np.array_equal(first, matrix[:, 0])


def _uniform_basis(points: np.ndarray, grid: FineGrid, axis: int) -> np.ndarray:
    p, n, level = grid.degree[axis], grid.n[axis], grid.levels[axis]
    inner = np.linspace(0.0, 1.0, (n - p) * (1 << level) + 1)
    knots = np.concatenate([np.zeros(p), inner, np.ones(p)])
    return BSpline.design_matrix(points[:, axis], knots, p).toarray()


def test_fine_embedding_agrees_pointwise(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    grid = FineGrid.covering(quadratic_mesh, space.functions)
    matrix = embedding_matrix(space.functions, grid).toarray()
    coeffs = matrix.reshape(grid.size(0), grid.size(1), space.dim)
    points = _sample(40)
    bx, by = _uniform_basis(points, grid, 0), _uniform_basis(points, grid, 1)
    assert bx.shape[1] == grid.size(0) and by.shape[1] == grid.size(1)
    fine = np.einsum("ka,abj,kb->kj", bx, coeffs, by)
    assert np.allclose(fine, evaluate_space(space, points).toarray(), atol=1e-12)


def _uniform_spline(degree: tuple[int, int], n: tuple[int, int], level: int) -> SplineField:
    mesh = initial_mesh(degree, n)
    for _ in range(level):
        uniform_refinement_step(mesh)
    space = build_space(mesh)
    coeffs = np.random.default_rng(level).normal(size=space.dim)
    return SplineField(space.functions, coeffs)


def test_projector_difference_vanishes_on_coarser_uniform_splines() -> None:
    mesh = corner_refined(2, 8, 3)
    level = 1
    v = _uniform_spline(mesh.degree, mesh.n, level)
    points = _sample(25)
    history = sorted(mesh.history, key=lambda r: r.generation)
    checked = 0
    for k, record in enumerate(history, start=1):
        if record.generation <= level or record.is_degenerate:
            continue
        before = build_space(replay(mesh.degree, mesh.n, history[: k - 1]))
        after = build_space(replay(mesh.degree, mesh.n, history[:k]))
        coarse = SplineField(before.functions, projector(before, v)).values(points)
        fine = SplineField(after.functions, projector(after, v)).values(points)
        assert np.allclose(fine, coarse, atol=1e-10)
        checked += 1
        if checked == 8:
            break
    assert checked > 0


def _crossing_mesh() -> TMesh:
    # a vertical and a horizontal edge whose cubic extensions cross at (5.5, 4.5)
    mesh = initial_mesh((3, 3), (10, 10))
    mesh.split(IndexRect.of(5, 6, 6, 7), Direction.X)
    mesh.split(IndexRect.of(6, 4, 7, 5), Direction.Y)
    return mesh


def test_crossing_extensions_break_dual_compatibility() -> None:
    mesh = _crossing_mesh()
    space = build_space(mesh)
    extended = extended_tmesh(mesh)
    assert extended.crossings
    assert not space.analysis_suitable
    assert not check_dual_compatibility(space).ok


@pytest.mark.parametrize("refined", ["crossing", "corner"])
def test_dual_compatibility_matches_extension_crossings(refined: str) -> None:
    mesh = _crossing_mesh() if refined == "crossing" else corner_refined(3, 9, 3)
    report = check_dual_compatibility(build_space(mesh))
    assert report.ok == extended_tmesh(mesh).crossing_free


@pytest.mark.parametrize(("degree", "functions", "steps"), [(2, 8, 5), (3, 9, 4)])
def test_tiled_floor_cells_follow_the_generation(degree: int, functions: int, steps: int) -> None:
    mesh = corner_refined(degree, functions, steps)
    levels = level_sets(mesh)
    space = build_space(mesh, levels.generations)
    assert tiled_floor_audit(space, levels.generations) == []
    assert 1 <= bezier_per_tiled_cell(space) <= 2
