"""Artifact storage abstractions."""

from __future__ import annotations

from typing import Protocol, runtime_checkable


@runtime_checkable
class ArtifactStore(Protocol):
    """Protocol for persisting text artifacts (CSV, JSON, SVG) by relative name."""

    def save_text(self, name: str, text: str) -> str: ...
    def load_text(self, name: str) -> str | None: ...
    def list_artifacts(self) -> list[str]: ...
