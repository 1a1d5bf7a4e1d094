"""One-sweep subspace smoothers: Jacobi and symmetric Gauss-Seidel."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from ..exceptions import SolverBreakdownError


class SmootherKind(StrEnum):
    JACOBI = "jacobi"
    SGS = "sgs"


def _diagonal(matrix: sp.spmatrix) -> np.ndarray:
    diag = np.asarray(matrix.diagonal(), dtype=float)
    zero = np.nonzero(diag == 0.0)[0]
    if zero.size:
        raise SolverBreakdownError(f"zero diagonal entry at row {int(zero[0])}")
    return diag


@dataclass(frozen=True)
class Smoother:
    """Factor data of one smoother for a fixed SPD matrix.

    ``jacobi`` applies ``D^{-1}``; ``sgs`` applies ``(D + U)^{-1} D (D + L)^{-1}``,
    one forward followed by one backward sweep.
    """

    kind: SmootherKind
    diagonal: np.ndarray
    lower: sp.csr_matrix | None = None
    upper: sp.csr_matrix | None = None

    @classmethod
    def build(cls, kind: SmootherKind | str, matrix: sp.spmatrix) -> Smoother:
        kind = SmootherKind(kind)
        csr = sp.csr_matrix(matrix)
        diag = _diagonal(csr)
        if kind is SmootherKind.JACOBI:
            return cls(kind, diag)
        return cls(kind, diag, sp.tril(csr, format="csr"), sp.triu(csr, format="csr"))

    @property
    def size(self) -> int:
        return self.diagonal.size

    def apply(self, residual: np.ndarray) -> np.ndarray:
        r = np.asarray(residual, dtype=float)
        if r.shape[0] != self.size:
            raise ValueError(f"expected a vector of length {self.size}, got {r.shape[0]}")
        if self.kind is SmootherKind.JACOBI:
            return r / self.diagonal
        forward = spsolve_triangular(self.lower, r, lower=True)
        return spsolve_triangular(self.upper, self.diagonal * forward, lower=False)

    def dense(self) -> np.ndarray:
        """The smoother as a dense matrix (small sizes only)."""
        return np.column_stack([self.apply(e) for e in np.eye(self.size)])


def smoother_apply(
    kind: SmootherKind | str, matrix: sp.spmatrix, residual: np.ndarray
) -> np.ndarray:
    """One application of the ``kind`` smoother of ``matrix`` to ``residual``."""
    return Smoother.build(kind, matrix).apply(residual)
