"""Exception hierarchy shared across the engine.

Every error that can surface at the CLI boundary maps to a stable exit
code (see cli.EXIT_CODES); everything else is a plain ReqForgeError.
"""

from __future__ import annotations


class ReqForgeError(Exception):
    """Base class for all engine errors."""


class ConfigError(ReqForgeError):
    """Invalid configuration, flags, or input values."""


class PoolError(ReqForgeError):
    """Artifact pool misuse (bad provenance, empty content, ...)."""


class UnknownArtifactError(PoolError):
    """Lookup of an artifact id or version that does not exist."""


class UnknownKindError(PoolError):
    """A name that is not a member of the closed ArtifactKind set."""


class PromptRenderError(ReqForgeError):
    """Unresolved placeholder or missing input while rendering a prompt."""


class BackendError(ReqForgeError):
    """Completion backend failure: exhausted retries, fixture/cassette miss,
    empty response, malformed reply."""


class CassetteMissError(BackendError):
    """Replay or scripted lookup found no entry for a request key."""

    def __init__(self, key: str):
        super().__init__(f"no recorded response for request key {key!r}")
        self.key = key


class ValidationFailure(ReqForgeError):
    """Artifact draft failed structural validation after the repair re-prompt."""


class ProtocolError(ReqForgeError):
    """Dialogue session misuse: wrong speaker, closed session, bad dispatch."""


class DeadlockError(ReqForgeError):
    """Event log drained while the pipeline is incomplete."""


class WorkspaceError(ReqForgeError):
    """Workspace I/O failure."""


class WorkspaceCorruptionError(WorkspaceError):
    """Digest mismatch or unreadable state during load."""
