"""Event hook protocol for observing experiment runs."""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    from ..models import ExperimentReport, ResultRow


@runtime_checkable
class ExperimentHook(Protocol):
    """Protocol for receiving experiment lifecycle events.

    Hook methods must not raise; exceptions are swallowed by the runner with a
    warning.
    """

    def on_level_started(self, level: int, dofs: int) -> None: ...
    def on_level_completed(self, row: ResultRow) -> None: ...
    def on_experiment_completed(self, report: ExperimentReport) -> None: ...


class NullHook:
    """No-op hook. Subclass it to handle only some events."""

    def on_level_started(self, level: int, dofs: int) -> None:
        pass

    def on_level_completed(self, row: ResultRow) -> None:
        pass

    def on_experiment_completed(self, report: ExperimentReport) -> None:
        pass
