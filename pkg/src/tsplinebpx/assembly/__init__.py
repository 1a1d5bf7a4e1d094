"""Galerkin assembly of the Poisson problem on single- and multi-patch domains."""

from .geometry import BentPatch, GeometryMap, IdentityMap, curved_l_patches
from .multipatch import (
    CURVED_L_BOUNDARY,
    CURVED_L_INTERFACES,
    Connectivity,
    Interface,
    MultiPatchSpace,
    assemble_multipatch,
    build_curved_L,
    build_multipatch,
    glue,
    interface_defect,
    l2_error_multipatch,
)
from .poisson import (
    LinearSystem,
    apply_dirichlet,
    assemble_rhs,
    assemble_stiffness,
    boundary_functions,
    eliminate,
    l2_error,
    resolve_threads,
    solve_poisson,
    symmetry_defect,
)

__all__ = [
    "CURVED_L_BOUNDARY",
    "CURVED_L_INTERFACES",
    "BentPatch",
    "Connectivity",
    "GeometryMap",
    "IdentityMap",
    "Interface",
    "LinearSystem",
    "MultiPatchSpace",
    "apply_dirichlet",
    "assemble_multipatch",
    "assemble_rhs",
    "assemble_stiffness",
    "boundary_functions",
    "build_curved_L",
    "build_multipatch",
    "curved_l_patches",
    "eliminate",
    "glue",
    "interface_defect",
    "l2_error",
    "l2_error_multipatch",
    "resolve_threads",
    "solve_poisson",
    "symmetry_defect",
]
