"""Additive subspace correction ``B = sum_i Psi_i R_i Psi_i^T``.

All subspace matrices ``A_i = Psi_i^T A Psi_i`` are kept in one block-diagonal
matrix, so a single smoother application on the stacked coefficient vector
performs every subspace correction at once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .decomposition import SubspaceDecomposition
from .smoothers import Smoother, SmootherKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BPXPreconditioner:
    decomposition: SubspaceDecomposition
    stacked: sp.csr_matrix
    blocks: sp.csr_matrix
    smoother: Smoother

    @classmethod
    def build(
        cls,
        decomposition: SubspaceDecomposition,
        matrix: sp.spmatrix,
        kind: SmootherKind | str = SmootherKind.JACOBI,
    ) -> BPXPreconditioner:
        if matrix.shape != (decomposition.size, decomposition.size):
            raise ValueError(
                f"matrix of shape {matrix.shape} does not match a decomposition of "
                f"size {decomposition.size}"
            )
        csr = sp.csr_matrix(matrix)
        local = [(s.basis.T @ csr @ s.basis) for s in decomposition.subspaces]
        blocks = sp.block_diag(local, format="csr") if local else sp.csr_matrix((0, 0))
        stacked = decomposition.stacked.tocsr()
        smoother = Smoother.build(kind, blocks)
        logger.debug(
            "bpx: %d subspaces, %d stacked dofs, smoother=%s",
            len(decomposition),
            blocks.shape[0],
            smoother.kind,
        )
        return cls(decomposition, stacked, blocks, smoother)

    @property
    def shape(self) -> tuple[int, int]:
        return self.decomposition.size, self.decomposition.size

    def apply(self, residual: np.ndarray) -> np.ndarray:
        coarse = self.stacked.T @ np.asarray(residual, dtype=float)
        return self.stacked @ self.smoother.apply(coarse)

    def __call__(self, residual: np.ndarray) -> np.ndarray:
        return self.apply(residual)

    def as_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.apply, rmatvec=self.apply, dtype=float)

    def subspace_matrix(self, index: int) -> sp.csr_matrix:
        start = sum(self.decomposition.block_sizes[:index])
        stop = start + self.decomposition.block_sizes[index]
        return self.blocks[start:stop, start:stop].tocsr()


def bpx_apply(
    decomposition: SubspaceDecomposition,
    matrix: sp.spmatrix,
    residual: np.ndarray,
    kind: SmootherKind | str = SmootherKind.JACOBI,
) -> np.ndarray:
    """One application of the BPX preconditioner (builds the operator each call)."""
    return BPXPreconditioner.build(decomposition, matrix, kind).apply(residual)
