from __future__ import annotations

import numpy as np
import pytest

from tsplinebpx.assembly import (
    BentPatch,
    IdentityMap,
    apply_dirichlet,
    assemble_rhs,
    assemble_stiffness,
    boundary_functions,
    l2_error,
    resolve_threads,
    solve_poisson,
    symmetry_defect,
)
from tsplinebpx.assembly.geometry import checked_jacobian
from tsplinebpx.assembly.poisson import THREADS_ENV
from tsplinebpx.core import TMesh, build_space, initial_mesh
from tsplinebpx.exceptions import AssemblyError


def _tensor_space(degree: int, elements: int):
    n = elements + degree
    return build_space(initial_mesh((degree, degree), (n, n)))


@pytest.fixture(autouse=True)
def _no_thread_override(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(THREADS_ENV, raising=False)


def test_bilinear_stiffness_matches_the_five_point_values() -> None:
    system = assemble_stiffness(_tensor_space(1, 2))
    dense = system.matrix.toarray()
    assert system.shape == (9, 9)
    assert dense.diagonal().max() == pytest.approx(8 / 3)
    assert dense.diagonal().min() == pytest.approx(2 / 3)
    assert np.sort(dense[np.argmax(dense.diagonal())])[:1] == pytest.approx([-1 / 3])


def test_stiffness_is_symmetric_with_constants_in_the_kernel(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    system = assemble_stiffness(space)
    assert symmetry_defect(system.matrix) < 1e-12
    assert np.abs(system.matrix @ np.ones(space.dim)).max() < 1e-10
    eigenvalues = np.linalg.eigvalsh(system.matrix.toarray())
    assert eigenvalues.min() > -1e-10


def test_dirichlet_removes_functions_with_boundary_trace() -> None:
    space = _tensor_space(2, 3)
    system = assemble_stiffness(space)
    system.rhs = assemble_rhs(space, None, lambda x, y: np.ones_like(x))
    boundary = boundary_functions(space)
    reduced = apply_dirichlet(system, space)
    assert boundary.size == 16
    assert reduced.shape == (9, 9)
    assert reduced.reduced
    assert reduced.extend(np.ones(9)).sum() == 9
    assert np.allclose(reduced.restrict(np.arange(25.0)), reduced.dofs)
    assert np.linalg.eigvalsh(reduced.matrix.toarray()).min() > 0


def test_load_vector_integrates_the_source(cubic_mesh: TMesh) -> None:
    space = build_space(cubic_mesh)
    rhs = assemble_rhs(space, None, lambda x, y: np.ones_like(x))
    assert rhs.sum() == pytest.approx(1.0)
    assert (rhs >= 0).all()


def test_bent_geometry_preserves_area_integral() -> None:
    space = _tensor_space(2, 3)
    patch = BentPatch(1, (1, 1), 0.15)
    rhs = assemble_rhs(space, patch, lambda x, y: np.ones_like(x))
    # area of G([0,1]^2) = int (1 + c y^2)(1 + c x^2) - 4 c^2 x^2 y^2
    c = 0.15
    area = (1 + c / 3) ** 2 - 4 * c**2 / 9
    assert rhs.sum() == pytest.approx(area)


def test_threaded_assembly_matches_serial(quadratic_mesh: TMesh) -> None:
    space = build_space(quadratic_mesh)
    serial = assemble_stiffness(space, threads=1).matrix
    threaded = assemble_stiffness(space, threads=3).matrix
    assert abs(serial - threaded).max() < 1e-13


def test_thread_count_resolution(monkeypatch: pytest.MonkeyPatch) -> None:
    assert resolve_threads() == 1
    assert resolve_threads(4) == 4
    with pytest.raises(ValueError):
        resolve_threads(0)
    monkeypatch.setenv(THREADS_ENV, "2")
    assert resolve_threads(8) == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ValueError, match=THREADS_ENV):
        resolve_threads()


def test_low_quadrature_order_is_rejected() -> None:
    with pytest.raises(ValueError, match="quadrature order"):
        assemble_stiffness(_tensor_space(3, 2), quad_order=2)


def test_singular_geometry_raises() -> None:
    class Collapsed(IdentityMap):
        def jacobian(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
            return np.zeros((np.asarray(u).size, 2, 2))

    with pytest.raises(AssemblyError, match="singular Jacobian"):
        checked_jacobian(Collapsed(), np.array([0.5]), np.array([0.5]))


def test_bent_patch_jacobian_matches_finite_differences() -> None:
    patch = BentPatch(2, (-1, 1), 0.2)
    u, v, h = np.array([0.3]), np.array([0.7]), 1e-6
    jac = patch.jacobian(u, v)[0]
    du = (patch(u + h, v) - patch(u - h, v))[0] / (2 * h)
    dv = (patch(u, v + h) - patch(u, v - h))[0] / (2 * h)
    assert np.allclose(jac[:, 0], du, atol=1e-8)
    assert np.allclose(jac[:, 1], dv, atol=1e-8)
    with pytest.raises(ValueError):
        BentPatch(1, (1, 2))


def test_manufactured_solution_converges_at_optimal_rate() -> None:
    def exact(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 2 * np.pi**2 * exact(x, y)

    errors = []
    for elements in (8, 16):
        space = _tensor_space(2, elements)
        coeffs, _ = solve_poisson(space, source)
        errors.append(l2_error(space, None, coeffs, exact))
    rate = np.log2(errors[0] / errors[1])
    assert rate == pytest.approx(3.0, abs=0.25)
