from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar

T = TypeVar("T")


class ArtifactRepository(ABC, Generic[T]):
    """Directory-backed storage for one artifact kind."""

    @abstractmethod
    def save(self, artifact: T, directory: Path) -> Path:
        """Write ``artifact`` under ``directory`` and return the directory."""

    @abstractmethod
    def load(self, directory: Path) -> T:
        """Read the artifact back; bit-exact with what ``save`` wrote."""

    @abstractmethod
    def exists(self, directory: Path) -> bool:
        """Whether ``directory`` holds a complete artifact."""
