"""MatrixMarket export of assembled systems."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from ..exceptions import LoadError


def save_matrix_market(
    matrix: sp.spmatrix, path: str | Path, *, comment: str = ""
) -> Path:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(output_path), sp.coo_matrix(matrix), comment=comment, symmetry="general")
    return output_path


def load_matrix_market(path: str | Path) -> sp.csr_matrix:
    """Read a sparse matrix; raises ``LoadError`` on malformed content."""
    try:
        loaded = scipy.io.mmread(str(path))
    except ValueError as exc:
        raise LoadError(f"Failed to parse MatrixMarket file {path}: {exc}") from exc
    return sp.csr_matrix(loaded)


def save_vector(values: np.ndarray, path: str | Path) -> Path:
    """One value per line, full double precision."""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(output_path, np.asarray(values, dtype=float).ravel(), fmt="%.17g")
    return output_path


def load_vector(path: str | Path) -> np.ndarray:
    try:
        return np.atleast_1d(np.loadtxt(path, dtype=float))
    except ValueError as exc:
        raise LoadError(f"Failed to parse vector file {path}: {exc}") from exc
