"""BPX preconditioning: space decompositions, smoothers, PCG and Lanczos."""

from .bpx import BPXPreconditioner, bpx_apply
from .decomposition import (
    DecompositionKind,
    FunctionGroup,
    Subspace,
    SubspaceDecomposition,
    aligned_groups,
    aligned_micro_decomposition,
    build_decomposition,
    macro_decomposition,
    macro_groups,
    micro_decomposition,
    micro_groups,
    span_residual,
)
from .krylov import cg_tridiagonal, dense_condition, estimate_condition, pcg_solve
from .smoothers import Smoother, SmootherKind, smoother_apply

__all__ = [
    "BPXPreconditioner",
    "DecompositionKind",
    "FunctionGroup",
    "Smoother",
    "SmootherKind",
    "Subspace",
    "SubspaceDecomposition",
    "aligned_groups",
    "aligned_micro_decomposition",
    "bpx_apply",
    "build_decomposition",
    "cg_tridiagonal",
    "dense_condition",
    "estimate_condition",
    "macro_decomposition",
    "macro_groups",
    "micro_decomposition",
    "micro_groups",
    "pcg_solve",
    "smoother_apply",
    "span_residual",
]
