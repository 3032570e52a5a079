"""Versioned artifacts pool: the shared store that coordinates the agents.

Agents never talk to each other directly. They commit artifacts here, and
every commit appends exactly one event to a gapless, multi-consumer log.
Each consumer keeps its own cursor; reads are non-destructive.

Provenance is recorded per version as (artifact id, version) pairs, which
keeps the version-level graph acyclic by construction: a new version can
only reference pairs that already exist.
"""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from .errors import PoolError, UnknownArtifactError, UnknownKindError

__all__ = [
    "ArtifactKind",
    "Change",
    "Artifact",
    "PoolEvent",
    "SnapshotEntry",
    "PoolSnapshot",
    "ArtifactPool",
]


class ArtifactKind(enum.Enum):
    """Closed set of artifact kinds the pipeline knows about."""

    BRIEF_DESCRIPTION = "BriefDescription"
    PRODUCT_ANALYSIS_REPORT = "ProductAnalysisReport"
    INTERVIEW_QUESTION_LIST = "InterviewQuestionList"
    INTERVIEW_RECORD = "InterviewRecord"
    USER_REQUIREMENTS_LIST = "UserRequirementsList"
    CLASSIFICATION_REPORT = "ClassificationReport"
    OPERATING_ENVIRONMENT_LIST = "OperatingEnvironmentList"
    SYSTEM_REQUIREMENTS_LIST = "SystemRequirementsList"
    REQUIREMENTS_MODEL = "RequirementsModel"
    SOFTWARE_REQUIREMENTS_SPECIFICATION = "SoftwareRequirementsSpecification"
    REVIEW_COMMENTS = "ReviewComments"
    VALIDATION_REPORT = "ValidationReport"
    DIALOGUE_TRANSCRIPT = "DialogueTranscript"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "ArtifactKind":
        """Resolve a kind from its canonical name or a common abbreviation.

        Unknown names are rejected; the kind set is closed.
        """
        try:
            return cls(name)
        except ValueError:
            pass
        alias = _KIND_ALIASES.get(name.strip().upper())
        if alias is not None:
            return alias
        raise UnknownKindError(f"unknown artifact kind {name!r}")


_KIND_ALIASES: dict[str, ArtifactKind] = {
    "BRIEF": ArtifactKind.BRIEF_DESCRIPTION,
    "PAR": ArtifactKind.PRODUCT_ANALYSIS_REPORT,
    "IQL": ArtifactKind.INTERVIEW_QUESTION_LIST,
    "IR": ArtifactKind.INTERVIEW_RECORD,
    "URL": ArtifactKind.USER_REQUIREMENTS_LIST,
    "CR": ArtifactKind.CLASSIFICATION_REPORT,
    "OEL": ArtifactKind.OPERATING_ENVIRONMENT_LIST,
    "SRL": ArtifactKind.SYSTEM_REQUIREMENTS_LIST,
    "RM": ArtifactKind.REQUIREMENTS_MODEL,
    "SRS": ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION,
    "RC": ArtifactKind.REVIEW_COMMENTS,
    "VR": ArtifactKind.VALIDATION_REPORT,
    "DT": ArtifactKind.DIALOGUE_TRANSCRIPT,
}


class Change(enum.Enum):
    ADDED = "added"
    UPDATED = "updated"

    def __str__(self) -> str:
        return self.value


Provenance = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Artifact:
    """Immutable view of one artifact version.

    ``stale`` applies to the latest version only; views of historical
    versions always carry ``stale=False``.
    """

    id: str
    kind: ArtifactKind
    version: int
    title: str
    content: str
    producer: str
    producing_action: str
    created_at: float
    updated_at: float
    inputs: Provenance
    stale: bool

    @property
    def ref(self) -> tuple[str, int]:
        return (self.id, self.version)


@dataclass(frozen=True)
class PoolEvent:
    seq: int
    change: Change
    artifact_id: str
    kind: ArtifactKind
    version: int

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "change": self.change.value,
            "artifact_id": self.artifact_id,
            "kind": self.kind.value,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PoolEvent":
        return cls(
            seq=int(d["seq"]),
            change=Change(d["change"]),
            artifact_id=d["artifact_id"],
            kind=ArtifactKind(d["kind"]),
            version=int(d["version"]),
        )


@dataclass(frozen=True)
class SnapshotEntry:
    artifact_id: str
    version: int
    stale: bool


@dataclass(frozen=True)
class PoolSnapshot:
    """Point-in-time view: latest (id, version, stale) per kind."""

    entries: Mapping[ArtifactKind, SnapshotEntry]
    last_seq: int

    def has(self, kind: ArtifactKind) -> bool:
        return kind in self.entries


@dataclass
class _Version:
    version: int
    content: str
    title: str
    producer: str
    producing_action: str
    inputs: Provenance
    created_at: float


@dataclass
class _Record:
    id: str
    kind: ArtifactKind
    versions: list[_Version] = field(default_factory=list)
    stale: bool = False
    # artifact ids that list any version of this artifact as an input
    dependents: set[str] = field(default_factory=set)


class ArtifactPool:
    """Thread-safe versioned artifact store with an append-only event log.

    Commits are serialized through one lock; snapshots and event reads may
    run concurrently with commits and never observe partial state.
    """

    def __init__(self, clock: Callable[[], float] = time.time):
        self._lock = threading.Lock()
        self._clock = clock
        self._records: dict[str, _Record] = {}
        self._order: list[str] = []  # ids in first-commit order
        self._events: list[PoolEvent] = []
        # kind -> id of the most recently committed artifact of that kind
        self._latest_of_kind: dict[ArtifactKind, str] = {}

    # -- commits -----------------------------------------------------------

    def add(
        self,
        kind: ArtifactKind,
        content: str,
        *,
        producer: str,
        producing_action: str,
        inputs: Iterable[tuple[str, int]] = (),
        title: str = "",
    ) -> tuple[Artifact, PoolEvent]:
        if not isinstance(kind, ArtifactKind):
            raise UnknownKindError(f"not an ArtifactKind: {kind!r}")
        prov = tuple((str(i), int(v)) for i, v in inputs)
        with self._lock:
            self._check_content(kind, content)
            self._check_provenance(prov)
            seq = len(self._events) + 1
            artifact_id = f"{kind.value}-{seq:04d}"
            if artifact_id in self._records:  # internal invariant
                raise PoolError(f"duplicate artifact id {artifact_id}")
            now = self._clock()
            rec = _Record(id=artifact_id, kind=kind)
            rec.versions.append(
                _Version(1, content, title or kind.value, producer, producing_action, prov, now)
            )
            self._records[artifact_id] = rec
            self._order.append(artifact_id)
            self._latest_of_kind[kind] = artifact_id
            for dep_id, _ in prov:
                self._records[dep_id].dependents.add(artifact_id)
            event = PoolEvent(seq, Change.ADDED, artifact_id, kind, 1)
            self._events.append(event)
            return self._view(rec, 1), event

    def update(
        self,
        artifact_id: str,
        new_content: str,
        *,
        producer: str,
        producing_action: str,
        inputs: Iterable[tuple[str, int]] = (),
        title: str | None = None,
    ) -> tuple[Artifact, PoolEvent]:
        prov = tuple((str(i), int(v)) for i, v in inputs)
        with self._lock:
            rec = self._records.get(artifact_id)
            if rec is None:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            self._check_content(rec.kind, new_content)
            self._check_provenance(prov)
            version = len(rec.versions) + 1
            now = self._clock()
            rec.versions.append(
                _Version(
                    version,
                    new_content,
                    title if title is not None else rec.versions[-1].title,
                    producer,
                    producing_action,
                    prov,
                    now,
                )
            )
            rec.stale = False  # a fresh version supersedes staleness
            self._latest_of_kind[rec.kind] = artifact_id
            for dep_id, _ in prov:
                self._records[dep_id].dependents.add(artifact_id)
            seq = len(self._events) + 1
            event = PoolEvent(seq, Change.UPDATED, artifact_id, rec.kind, version)
            self._events.append(event)
            return self._view(rec, version), event

    def _check_content(self, kind: ArtifactKind, content: str) -> None:
        if not isinstance(content, str):
            raise PoolError("artifact content must be text")
        if not content and kind is not ArtifactKind.BRIEF_DESCRIPTION:
            raise PoolError(f"empty content for {kind.value}")

    def _check_provenance(self, prov: Provenance) -> None:
        for dep_id, dep_ver in prov:
            rec = self._records.get(dep_id)
            if rec is None or not (1 <= dep_ver <= len(rec.versions)):
                raise PoolError(
                    f"provenance reference ({dep_id!r}, {dep_ver}) does not exist in the pool"
                )

    # -- reads -------------------------------------------------------------

    def get(self, artifact_id: str, version: int | None = None) -> Artifact:
        with self._lock:
            rec = self._records.get(artifact_id)
            if rec is None:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            v = len(rec.versions) if version is None else version
            if not (1 <= v <= len(rec.versions)):
                raise UnknownArtifactError(f"{artifact_id} has no version {version}")
            return self._view(rec, v)

    def latest(self, kind: ArtifactKind) -> Artifact | None:
        with self._lock:
            artifact_id = self._latest_of_kind.get(kind)
            if artifact_id is None:
                return None
            rec = self._records[artifact_id]
            return self._view(rec, len(rec.versions))

    def all_of_kind(self, kind: ArtifactKind) -> list[Artifact]:
        """Latest version of every artifact of a kind, in first-commit order."""
        with self._lock:
            out = []
            for artifact_id in self._order:
                rec = self._records[artifact_id]
                if rec.kind is kind:
                    out.append(self._view(rec, len(rec.versions)))
            return out

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._order)

    def is_stale(self, artifact_id: str) -> bool:
        with self._lock:
            rec = self._records.get(artifact_id)
            if rec is None:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            return rec.stale

    def version_count(self, artifact_id: str) -> int:
        with self._lock:
            rec = self._records.get(artifact_id)
            if rec is None:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            return len(rec.versions)

    def _view(self, rec: _Record, version: int) -> Artifact:
        ver = rec.versions[version - 1]
        is_latest = version == len(rec.versions)
        return Artifact(
            id=rec.id,
            kind=rec.kind,
            version=ver.version,
            title=ver.title,
            content=ver.content,
            producer=ver.producer,
            producing_action=ver.producing_action,
            created_at=rec.versions[0].created_at,
            updated_at=ver.created_at,
            inputs=ver.inputs,
            stale=rec.stale if is_latest else False,
        )

    # -- snapshot and events -------------------------------------------------

    def snapshot(self) -> PoolSnapshot:
        with self._lock:
            entries = {
                kind: SnapshotEntry(
                    artifact_id=aid,
                    version=len(self._records[aid].versions),
                    stale=self._records[aid].stale,
                )
                for kind, aid in self._latest_of_kind.items()
            }
            return PoolSnapshot(entries=MappingProxyType(entries), last_seq=len(self._events))

    def next_event(self, cursor: int) -> PoolEvent | None:
        """Earliest event with seq > cursor, or None. Non-destructive."""
        if cursor < 0:
            raise PoolError("cursor must be >= 0")
        with self._lock:
            if cursor < len(self._events):
                return self._events[cursor]
            return None

    def events(self) -> list[PoolEvent]:
        with self._lock:
            return list(self._events)

    @property
    def last_seq(self) -> int:
        with self._lock:
            return len(self._events)

    # -- staleness ----------------------------------------------------------

    def downstream_ids(self, artifact_id: str) -> frozenset[str]:
        """Transitive closure over forward provenance edges, source excluded."""
        with self._lock:
            if artifact_id not in self._records:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            return frozenset(self._closure(artifact_id))

    def mark_stale_downstream(self, artifact_id: str) -> frozenset[str]:
        with self._lock:
            if artifact_id not in self._records:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            reached = self._closure(artifact_id)
            for rid in reached:
                self._records[rid].stale = True
            return frozenset(reached)

    def _closure(self, source: str) -> set[str]:
        seen: set[str] = set()
        frontier = [source]
        while frontier:
            current = frontier.pop()
            for dep in self._records[current].dependents:
                if dep not in seen:
                    seen.add(dep)
                    frontier.append(dep)
        seen.discard(source)
        return seen

    def set_stale(self, artifact_id: str, value: bool) -> None:
        """Directly set the stale flag (used by workspace restore)."""
        with self._lock:
            rec = self._records.get(artifact_id)
            if rec is None:
                raise UnknownArtifactError(f"unknown artifact id {artifact_id!r}")
            rec.stale = value

    # -- restore -------------------------------------------------------------

    @classmethod
    def restore(
        cls,
        events: list[PoolEvent],
        artifacts: Mapping[str, Mapping],
        contents: Mapping[tuple[str, int], str],
    ) -> "ArtifactPool":
        """Rebuild a pool from persisted state.

        ``artifacts`` maps id -> {kind, stale, versions: [{version, title,
        producer, producing_action, inputs}]}; ``contents`` maps
        (id, version) -> text. Events drive ordering so the rebuilt pool is
        byte-equivalent to the one that was saved.
        """
        pool = cls()
        for ev in events:
            meta = artifacts[ev.artifact_id]
            vmeta = None
            for v in meta["versions"]:
                if int(v["version"]) == ev.version:
                    vmeta = v
                    break
            if vmeta is None:
                raise PoolError(
                    f"event {ev.seq} references missing version "
                    f"{ev.artifact_id} v{ev.version}"
                )
            content = contents[(ev.artifact_id, ev.version)]
            inputs = tuple((i, int(n)) for i, n in vmeta.get("inputs", []))
            version = _Version(
                version=ev.version,
                content=content,
                title=vmeta.get("title", ev.kind.value),
                producer=vmeta.get("producer", "unknown"),
                producing_action=vmeta.get("producing_action", "unknown"),
                inputs=inputs,
                created_at=0.0,  # wall time is not persisted
            )
            if ev.change is Change.ADDED:
                rec = _Record(id=ev.artifact_id, kind=ev.kind)
                rec.versions.append(version)
                pool._records[ev.artifact_id] = rec
                pool._order.append(ev.artifact_id)
            else:
                rec = pool._records[ev.artifact_id]
                if len(rec.versions) + 1 != ev.version:
                    raise PoolError(
                        f"event {ev.seq} restores out-of-order version "
                        f"{ev.version} for {ev.artifact_id}"
                    )
                rec.versions.append(version)
            pool._latest_of_kind[ev.kind] = ev.artifact_id
            for dep_id, _ in inputs:
                pool._records[dep_id].dependents.add(ev.artifact_id)
            pool._events.append(ev)
        for artifact_id, meta in artifacts.items():
            if meta.get("stale"):
                pool._records[artifact_id].stale = True
        return pool
