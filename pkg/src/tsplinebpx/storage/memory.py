"""In-memory artifact storage."""

from __future__ import annotations


class MemoryStore:
    """In-memory store. Good for tests and dry runs."""

    def __init__(self) -> None:
        self._artifacts: dict[str, str] = {}

    def save_text(self, name: str, text: str) -> str:
        self._artifacts[name] = text
        return name

    def load_text(self, name: str) -> str | None:
        return self._artifacts.get(name)

    def list_artifacts(self) -> list[str]:
        return sorted(self._artifacts)
