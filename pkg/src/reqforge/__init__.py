"""reqforge: a multi-agent requirements-development pipeline.

Six role-playing agents coordinate through a shared, event-emitting
artifacts pool to turn a one-line product idea into a Software
Requirements Specification plus all intermediate artifacts.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .pool import Artifact, ArtifactKind, ArtifactPool, Change, PoolEvent, PoolSnapshot

__all__ = [
    "__version__",
    "Artifact",
    "ArtifactKind",
    "ArtifactPool",
    "Change",
    "PoolEvent",
    "PoolSnapshot",
]
