"""Refinement drivers, experiment runs and published reference tables."""

from .reference import (
    REFERENCES,
    ReferenceSpec,
    compare_rows,
    compare_with_reference,
    load_reference,
    parse_reference,
    read_table,
    table_names,
)
from .refinement import (
    DRIVERS,
    RefinementStep,
    alternative_refinement_step,
    alternative_side,
    corner_candidates,
    corner_refinement_step,
    corner_sides,
    mesh_sequence,
    refine_to_level,
    uniform_refinement_step,
)
from .runner import ExperimentRunner, run_experiment, stage, unit_source

__all__ = [
    "DRIVERS",
    "REFERENCES",
    "ExperimentRunner",
    "ReferenceSpec",
    "RefinementStep",
    "alternative_refinement_step",
    "alternative_side",
    "compare_rows",
    "compare_with_reference",
    "corner_candidates",
    "corner_refinement_step",
    "corner_sides",
    "load_reference",
    "mesh_sequence",
    "parse_reference",
    "read_table",
    "refine_to_level",
    "run_experiment",
    "stage",
    "table_names",
    "uniform_refinement_step",
    "unit_source",
]
