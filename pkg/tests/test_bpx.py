from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from tsplinebpx.assembly import apply_dirichlet, assemble_rhs, assemble_stiffness
from tsplinebpx.core import TMesh, build_space, level_sets
from tsplinebpx.experiments.refinement import mesh_sequence
from tsplinebpx.multilevel import (
    BPXPreconditioner,
    bpx_apply,
    build_decomposition,
    dense_condition,
    estimate_condition,
    pcg_solve,
)


def _problem(mesh: TMesh, kind: str = "macro"):
    levels = level_sets(mesh)
    space = build_space(mesh, levels.generations)
    system = assemble_stiffness(space)
    system.rhs = assemble_rhs(space, None, lambda x, y: np.ones_like(x))
    system = apply_dirichlet(system, space)
    return system, build_decomposition(kind, levels, space, system)


def test_jacobi_bpx_is_the_scaled_sum_of_subspace_projections(quadratic_mesh: TMesh) -> None:
    system, decomposition = _problem(quadratic_mesh)
    bpx = BPXPreconditioner.build(decomposition, system.matrix, "jacobi")
    stacked = decomposition.stacked.toarray()
    expected = stacked @ np.diag(1.0 / bpx.blocks.diagonal()) @ stacked.T
    dense = np.column_stack([bpx(e) for e in np.eye(system.shape[0])])
    assert np.allclose(dense, expected)
    assert np.allclose(dense, dense.T)


@pytest.mark.parametrize("smoother", ["jacobi", "sgs"])
def test_bpx_is_symmetric_positive_definite(quadratic_mesh: TMesh, smoother: str) -> None:
    system, decomposition = _problem(quadratic_mesh, "micro")
    bpx = BPXPreconditioner.build(decomposition, system.matrix, smoother)
    dense = np.column_stack([bpx.apply(e) for e in np.eye(system.shape[0])])
    assert np.allclose(dense, dense.T, atol=1e-10)
    assert np.linalg.eigvalsh(0.5 * (dense + dense.T)).min() > 0


def test_subspace_matrices_are_galerkin_projections(quadratic_mesh: TMesh) -> None:
    system, decomposition = _problem(quadratic_mesh)
    bpx = BPXPreconditioner.build(decomposition, system.matrix)
    basis = decomposition.subspaces[1].basis
    expected = (basis.T @ system.matrix @ basis).toarray()
    assert np.allclose(bpx.subspace_matrix(1).toarray(), expected)
    r = np.ones(system.shape[0])
    assert np.allclose(bpx_apply(decomposition, system.matrix, r), bpx(r))
    assert bpx.as_operator().shape == system.shape


def test_shape_mismatch_is_rejected(quadratic_mesh: TMesh) -> None:
    system, decomposition = _problem(quadratic_mesh)
    with pytest.raises(ValueError, match="does not match"):
        BPXPreconditioner.build(decomposition, sp.identity(system.shape[0] + 1))


def test_lanczos_estimate_agrees_with_dense_oracle(quadratic_mesh: TMesh) -> None:
    system, decomposition = _problem(quadratic_mesh)
    bpx = BPXPreconditioner.build(decomposition, system.matrix, "sgs")
    estimate = estimate_condition(system.matrix, bpx)
    oracle = dense_condition(system.matrix, bpx)
    assert estimate.condition == pytest.approx(oracle.condition, rel=0.05)


def test_preconditioned_pcg_solves_the_poisson_system(quadratic_mesh: TMesh) -> None:
    system, decomposition = _problem(quadratic_mesh)
    bpx = BPXPreconditioner.build(decomposition, system.matrix, "jacobi")
    x, report = pcg_solve(system.matrix, system.rhs, bpx, tol=1e-10)
    direct = spla.spsolve(system.matrix.tocsc(), system.rhs)
    assert report.converged
    assert np.allclose(x, direct, atol=1e-8 * np.abs(direct).max())


@pytest.mark.slow
def test_bpx_condition_number_grows_slower_than_the_plain_one() -> None:
    plain, jacobi, sgs = [], [], []
    for _, mesh in mesh_sequence((2, 2), (7, 7), [2, 3, 4, 5, 6], "corner"):
        system, decomposition = _problem(mesh)
        plain.append(estimate_condition(system.matrix).condition)
        for smoother, values in (("jacobi", jacobi), ("sgs", sgs)):
            bpx = BPXPreconditioner.build(decomposition, system.matrix, smoother)
            values.append(estimate_condition(system.matrix, bpx).condition)
    plain_growth = plain[-1] / plain[0]
    assert plain_growth > 4
    assert jacobi[-1] / jacobi[0] < plain_growth / 2
    assert sgs[-1] / sgs[0] < plain_growth / 2
    assert jacobi[-1] < plain[-1] / 3
    assert sgs[-1] < jacobi[-1]


def test_condition_number_does_not_depend_on_the_source(quadratic_mesh: TMesh) -> None:
    levels = level_sets(quadratic_mesh)
    space = build_space(quadratic_mesh, levels.generations)
    estimates = []
    for source in (lambda x, y: np.ones_like(x), lambda x, y: np.sin(3 * x) * np.exp(y)):
        system = assemble_stiffness(space)
        system.rhs = assemble_rhs(space, None, source)
        system = apply_dirichlet(system, space)
        decomposition = build_decomposition("macro", levels, space, system)
        bpx = BPXPreconditioner.build(decomposition, system.matrix, "sgs")
        estimates.append(estimate_condition(system.matrix, bpx, seed=3).condition)
    assert estimates[0] == pytest.approx(estimates[1], rel=1e-12)


@pytest.mark.parametrize("smoother", ["jacobi", "sgs"])
def test_macro_condition_number_does_not_exceed_aligned(smoother: str) -> None:
    for _, mesh in mesh_sequence((2, 2), (7, 7), [3, 4], "corner"):
        conditions = {}
        for kind in ("macro", "aligned"):
            system, decomposition = _problem(mesh, kind)
            bpx = BPXPreconditioner.build(decomposition, system.matrix, smoother)
            conditions[kind] = dense_condition(system.matrix, bpx).condition
        assert conditions["macro"] <= conditions["aligned"] * (1 + 1e-9)


@pytest.mark.slow
def test_lanczos_matches_dense_eigenvalues_on_a_large_system() -> None:
    ((_, mesh),) = mesh_sequence((2, 2), (7, 7), [8], "corner")
    system, decomposition = _problem(mesh)
    assert system.shape[0] == 1690
    for smoother in ("jacobi", "sgs"):
        bpx = BPXPreconditioner.build(decomposition, system.matrix, smoother)
        estimate = estimate_condition(system.matrix, bpx)
        oracle = dense_condition(system.matrix, bpx)
        assert estimate.condition == pytest.approx(oracle.condition, rel=0.05)
