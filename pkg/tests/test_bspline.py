from __future__ import annotations

import numpy as np
import pytest

from tsplinebpx.core import (
    KnotVector,
    dual_functional,
    eval_derivative,
    eval_local,
    eval_local_array,
    knot_insertion_matrix,
)
from tsplinebpx.core.bspline import dual_of_bspline, eval_all_nonzero, refine_local
from tsplinebpx.exceptions import BasisError


def _basis(kv: KnotVector, xs: np.ndarray) -> np.ndarray:
    return np.array([eval_local_array(kv.local(i), xs) for i in range(kv.size)])


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_open_uniform_partition_of_unity(degree: int) -> None:
    kv = KnotVector.open_uniform(degree, 5)
    xs = np.linspace(0.0, 1.0, 41)
    assert kv.size == 5 + degree
    assert np.allclose(_basis(kv, xs).sum(axis=0), 1.0)


def test_last_function_interpolates_right_end() -> None:
    kv = KnotVector.open_uniform(2, 3)
    assert eval_local(kv.local(kv.size - 1), 1.0) == pytest.approx(1.0)
    assert eval_local(kv.local(0), 0.0) == pytest.approx(1.0)
    assert eval_local((0.0, 0.25, 0.5, 0.75), 0.9) == 0.0


def test_eval_all_nonzero_matches_cox_de_boor() -> None:
    kv = KnotVector((0, 0, 0, 0.2, 0.5, 0.7, 1, 1, 1), 2)
    for x in (0.0, 0.1, 0.5, 0.65, 1.0):
        first, values = eval_all_nonzero(kv, x)
        expected = [eval_local(kv.local(first + j), x) for j in range(3)]
        assert np.allclose(values, expected)
        assert values.sum() == pytest.approx(1.0)


def test_derivatives_match_finite_differences() -> None:
    lkv = (0.0, 0.25, 0.5, 0.75, 1.0)
    x, h = 0.4, 1e-5
    slope = (eval_local(lkv, x + h) - eval_local(lkv, x - h)) / (2 * h)
    curvature = (eval_local(lkv, x + h) - 2 * eval_local(lkv, x) + eval_local(lkv, x - h)) / h**2
    assert eval_derivative(lkv, x, 1) == pytest.approx(slope, rel=1e-6)
    assert eval_derivative(lkv, x, 2) == pytest.approx(curvature, rel=1e-3)
    assert eval_derivative((0.0, 0.5, 1.0), 0.25, 2) == 0.0
    with pytest.raises(ValueError):
        eval_derivative(lkv, x, 3)


def test_knot_insertion_matrix_reproduces_coarse_basis() -> None:
    coarse = KnotVector.open_uniform(3, 2)
    fine = KnotVector.open_uniform(3, 4)
    matrix = knot_insertion_matrix(coarse, fine).toarray()
    xs = np.linspace(0.0, 1.0, 33)
    assert matrix.shape == (fine.size, coarse.size)
    assert np.allclose(matrix.T @ _basis(fine, xs), _basis(coarse, xs))


def test_knot_insertion_rejects_non_nested_vectors() -> None:
    coarse = KnotVector.open_uniform(2, 3)
    fine = KnotVector.open_uniform(2, 4)
    with pytest.raises(BasisError):
        knot_insertion_matrix(coarse, fine)


def test_refine_local_expands_one_function() -> None:
    lkv = (0.0, 0.25, 0.5, 0.75)
    knots, coeffs = refine_local(lkv, [0.375])
    xs = np.linspace(0.0, 0.75, 25)
    pieces = sum(c * eval_local_array(knots[j : j + 4], xs) for j, c in enumerate(coeffs))
    assert len(coeffs) == 2
    assert np.allclose(pieces, eval_local_array(lkv, xs))


def test_dual_functionals_are_biorthogonal() -> None:
    kv = KnotVector.open_uniform(3, 4)
    for i in range(kv.size):
        for j in range(kv.size):
            value = dual_of_bspline(kv.local(i), kv.local(j))
            assert value == pytest.approx(1.0 if i == j else 0.0, abs=1e-10)


def test_dual_functional_reproduces_polynomial_coefficients() -> None:
    kv = KnotVector.open_uniform(2, 3)

    def linear(x: float, order: int) -> float:
        return [x, 1.0, 0.0][order]

    # Greville abscissae are the coefficients of x.
    greville = [sum(kv.local(i)[1:-1]) / 2 for i in range(kv.size)]
    coeffs = [dual_functional(kv.local(i), linear) for i in range(kv.size)]
    assert np.allclose(coeffs, greville)


def test_knot_vector_validation() -> None:
    with pytest.raises(BasisError):
        KnotVector((0.0, 1.0), 2)
    with pytest.raises(BasisError):
        KnotVector((0.0, 0.5, 0.2, 1.0), 1)
