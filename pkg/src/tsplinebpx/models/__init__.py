"""Data models: experiment configuration, results and serialized documents."""

from .config import (
    ALTERNATIVE_ELEMENTS,
    CONFIG_SCHEMA_VERSION,
    DEFAULT_ELEMENTS,
    DecompositionName,
    ExperimentConfig,
    GeometryName,
    RefinementName,
    SmootherName,
    config_schema,
    default_elements,
)
from .documents import (
    DOCUMENT_SCHEMA_VERSION,
    BisectionRecord,
    FunctionRecord,
    MeshDocument,
    SpaceDocument,
)
from .results import (
    CSV_COLUMNS,
    REPORT_SCHEMA_VERSION,
    ConditionEstimate,
    DeviationCell,
    DeviationReport,
    ExperimentReport,
    ResultRow,
    SolveReport,
)

__all__ = [
    "ALTERNATIVE_ELEMENTS",
    "CONFIG_SCHEMA_VERSION",
    "CSV_COLUMNS",
    "DEFAULT_ELEMENTS",
    "DOCUMENT_SCHEMA_VERSION",
    "REPORT_SCHEMA_VERSION",
    "BisectionRecord",
    "ConditionEstimate",
    "DecompositionName",
    "DeviationCell",
    "DeviationReport",
    "ExperimentConfig",
    "ExperimentReport",
    "FunctionRecord",
    "GeometryName",
    "MeshDocument",
    "RefinementName",
    "ResultRow",
    "SmootherName",
    "SolveReport",
    "SpaceDocument",
    "config_schema",
    "default_elements",
]
