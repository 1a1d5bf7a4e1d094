"""Storage backends."""

from .base import ArtifactStore
from .file import FileStore
from .memory import MemoryStore

__all__ = ["ArtifactStore", "FileStore", "MemoryStore"]
