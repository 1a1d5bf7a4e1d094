"""Core spline machinery: dyadic indices, B-splines, T-meshes, T-spline spaces."""

from .bspline import (
    KnotVector,
    dual_functional,
    eval_derivative,
    eval_local,
    eval_local_array,
    knot_insertion_matrix,
)
from .dyadic import DyadicIndex, IndexRect, IndexVec2, componentwise_dist, dy, midpoint
from .hooks import ExperimentHook, NullHook
from .levels import LevelSetBuilder, LevelSets, LevelStep, level_sets, overlap_audit, overlap_bounds
from .tmesh import (
    Bisection,
    Direction,
    Segment,
    TMesh,
    bisect_element,
    bisection_edge,
    check_admissible,
    generation_gap_audit,
    initial_mesh,
    neighborhood,
    refine_admissible,
    replay,
)
from .tspline import (
    Anchor,
    AnchorKind,
    BezierElement,
    FineGrid,
    SplineField,
    TSplineFunction,
    TSplineSpace,
    anchors,
    bezier_mesh,
    bezier_per_tiled_cell,
    build_space,
    change_of_basis,
    check_dual_compatibility,
    evaluate_space,
    extended_tmesh,
    index_vectors,
    projector,
    size_comparability,
    supports,
    tiled_floor_audit,
)

__all__ = [
    "Anchor",
    "AnchorKind",
    "BezierElement",
    "Bisection",
    "Direction",
    "DyadicIndex",
    "ExperimentHook",
    "FineGrid",
    "IndexRect",
    "IndexVec2",
    "KnotVector",
    "LevelSetBuilder",
    "LevelSets",
    "LevelStep",
    "NullHook",
    "Segment",
    "SplineField",
    "TMesh",
    "TSplineFunction",
    "TSplineSpace",
    "anchors",
    "bezier_mesh",
    "bezier_per_tiled_cell",
    "bisect_element",
    "bisection_edge",
    "build_space",
    "change_of_basis",
    "check_admissible",
    "check_dual_compatibility",
    "componentwise_dist",
    "dual_functional",
    "dy",
    "eval_derivative",
    "eval_local",
    "eval_local_array",
    "evaluate_space",
    "extended_tmesh",
    "generation_gap_audit",
    "index_vectors",
    "initial_mesh",
    "knot_insertion_matrix",
    "level_sets",
    "midpoint",
    "neighborhood",
    "overlap_audit",
    "overlap_bounds",
    "projector",
    "refine_admissible",
    "replay",
    "size_comparability",
    "supports",
    "tiled_floor_audit",
]
