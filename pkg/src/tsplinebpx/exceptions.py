"""Public exception types for tsplinebpx."""

from __future__ import annotations


class TSplineBPXError(Exception):
    """Base class for all tsplinebpx exceptions."""


class DyadicOverflowError(TSplineBPXError):
    """Raised when a dyadic index needs an exponent above the supported cap."""


class MeshError(TSplineBPXError):
    """Raised on invalid T-mesh input or an inconsistent mesh operation."""


class NotAnalysisSuitableError(TSplineBPXError):
    """Raised when an operation requires a dual-compatible T-spline space."""


class BasisError(TSplineBPXError):
    """Raised on invalid knot vectors or a failed change of basis."""


class AssemblyError(TSplineBPXError):
    """Raised when the Galerkin system cannot be assembled."""


class InterfaceMismatchError(AssemblyError):
    """Raised when multipatch interface knot lines do not match."""


class SolverBreakdownError(TSplineBPXError):
    """Raised when PCG meets non-positive curvature."""


class RefinementError(TSplineBPXError):
    """Raised when a refinement driver cannot produce a valid mesh."""


class LoadError(TSplineBPXError):
    """Raised when a JSON or CSV document cannot be loaded or parsed."""


class ExperimentError(TSplineBPXError):
    """Raised when an experiment stage fails; ``stage`` names the failing stage."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
