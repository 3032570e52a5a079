"""On-disk run layout: manifest, artifact files, transcripts, cassettes.

A run directory is the single source of truth for a run. Everything needed
to resume or audit lives under it:

    runs/<run-id>/
        manifest.json       run state: events, artifact index, trace, sessions
        config.snapshot     the configuration the run started with
        artifacts/          one markdown file per artifact version
        transcripts/        rendered dialogue transcripts
        cassettes/          recorded backend exchanges

Writes are single-writer: only the engine that owns the run mutates it.
Readers may poll concurrently because every file lands via atomic replace.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import WorkspaceCorruptionError, WorkspaceError
from .pool import ArtifactPool, PoolEvent

__all__ = [
    "MANIFEST_NAME",
    "CONFIG_SNAPSHOT_NAME",
    "RestoredRun",
    "Workspace",
    "artifact_filename",
    "canonical_json",
    "load_run",
    "make_run_id",
    "sha256_text",
]

MANIFEST_NAME = "manifest.json"
CONFIG_SNAPSHOT_NAME = "config.snapshot"
ARTIFACTS_DIR = "artifacts"
TRANSCRIPTS_DIR = "transcripts"
CASSETTES_DIR = "cassettes"


def canonical_json(obj: Any) -> str:
    """Serialize to the one canonical byte form used for files and digests.

    Sorted keys and fixed indentation mean equal states always produce
    equal bytes, which is what makes manifest round-trips comparable.
    """
    try:
        text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)
    except (TypeError, ValueError) as exc:
        raise WorkspaceError(f"state is not serializable: {exc}") from exc
    return text + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and atomic rename."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def make_run_id(
    now: float | None = None, rng: random.Random | None = None
) -> str:
    """UTC timestamp plus a short random suffix, filesystem-safe."""
    stamp = time.strftime(
        "%Y%m%dT%H%M%SZ", time.gmtime(time.time() if now is None else now)
    )
    r = rng if rng is not None else random
    suffix = "".join(r.choice("0123456789abcdef") for _ in range(6))
    return f"{stamp}-{suffix}"


def artifact_filename(kind: str, ordinal: int, version: int) -> str:
    """File name for one artifact version.

    The first artifact of a kind keeps the plain name; later siblings get
    an ordinal so their versions never collide on disk.
    """
    if ordinal < 1 or version < 1:
        raise WorkspaceError(
            f"ordinal and version must be >= 1, got {ordinal}/{version}"
        )
    if ordinal == 1:
        return f"{kind}-v{version}.md"
    return f"{kind}-{ordinal}-v{version}.md"


@dataclass
class RestoredRun:
    """Everything load_run recovers from disk."""

    run_id: str
    manifest: dict
    snapshot: dict
    volatile: dict
    pool: ArtifactPool
    events: list[PoolEvent] = field(default_factory=list)


class Workspace:
    """Owns one run directory and all reads/writes inside it."""

    def __init__(self, root: str | Path, run_id: str):
        self.root = Path(root)
        self.run_id = run_id
        self.run_dir = self.root / run_id

    # -- layout ----------------------------------------------------------

    @property
    def manifest_path(self) -> Path:
        return self.run_dir / MANIFEST_NAME

    @property
    def config_snapshot_path(self) -> Path:
        return self.run_dir / CONFIG_SNAPSHOT_NAME

    @property
    def artifacts_dir(self) -> Path:
        return self.run_dir / ARTIFACTS_DIR

    @property
    def transcripts_dir(self) -> Path:
        return self.run_dir / TRANSCRIPTS_DIR

    @property
    def cassettes_dir(self) -> Path:
        return self.run_dir / CASSETTES_DIR

    def cassette_path(self, name: str = "run") -> Path:
        return self.cassettes_dir / f"{name}.json"

    def initialize(self) -> None:
        if self.manifest_path.exists():
            raise WorkspaceError(
                f"run directory already initialized: {self.run_dir}"
            )
        for d in (
            self.run_dir,
            self.artifacts_dir,
            self.transcripts_dir,
            self.cassettes_dir,
        ):
            d.mkdir(parents=True, exist_ok=True)

    # -- config snapshot ---------------------------------------------------

    def write_config_snapshot(self, snapshot: dict, volatile: dict) -> str:
        """Persist the run configuration; returns the snapshot digest.

        Only ``snapshot`` feeds the digest. ``volatile`` holds settings
        that may legitimately differ between a recording run and its
        replay (backend mode, file paths) without changing run identity.
        """
        digested = canonical_json(snapshot)
        digest = sha256_text(digested)
        doc = {"snapshot": snapshot, "volatile": volatile}
        atomic_write_text(self.config_snapshot_path, canonical_json(doc))
        return digest

    def read_config_snapshot(self) -> tuple[dict, dict, str]:
        """Returns (snapshot, volatile, digest-of-snapshot)."""
        path = self.config_snapshot_path
        if not path.exists():
            raise WorkspaceError(f"missing config snapshot: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise WorkspaceCorruptionError(
                f"corrupt config snapshot {path}: {exc}"
            ) from exc
        snapshot = doc.get("snapshot", {})
        volatile = doc.get("volatile", {})
        return snapshot, volatile, sha256_text(canonical_json(snapshot))

    # -- artifacts ---------------------------------------------------------

    def persist_pool(self, pool: ArtifactPool) -> dict:
        """Write every artifact version to disk; return the artifact index.

        Idempotent: files already present are rewritten with identical
        bytes. The returned index maps artifact id to kind, ordinal,
        staleness, and per-version metadata including relative file path
        and content digest.
        """
        ordinals: dict[str, int] = {}
        index: dict[str, dict] = {}
        for artifact_id in pool.ids():
            head = pool.get(artifact_id)
            kind_name = head.kind.value
            ordinal = ordinals.get(kind_name, 0) + 1
            ordinals[kind_name] = ordinal
            versions = []
            for v in range(1, pool.version_count(artifact_id) + 1):
                art = pool.get(artifact_id, v)
                rel = f"{ARTIFACTS_DIR}/{artifact_filename(kind_name, ordinal, v)}"
                path = self.run_dir / rel
                atomic_write_text(path, art.content)
                versions.append(
                    {
                        "version": v,
                        "title": art.title,
                        "path": rel,
                        "digest": sha256_text(art.content),
                        "producer": art.producer,
                        "producing_action": art.producing_action,
                        "inputs": [list(ref) for ref in art.inputs],
                    }
                )
            index[artifact_id] = {
                "kind": kind_name,
                "ordinal": ordinal,
                "stale": pool.is_stale(artifact_id),
                "versions": versions,
            }
        return index

    # -- transcripts -------------------------------------------------------

    def write_transcript(self, name: str, text: str) -> str:
        """Store a rendered transcript; returns the run-relative path."""
        rel = f"{TRANSCRIPTS_DIR}/{name}.md"
        atomic_write_text(self.run_dir / rel, text)
        return rel

    # -- manifest ----------------------------------------------------------

    def write_manifest(self, manifest: Mapping) -> None:
        atomic_write_text(self.manifest_path, canonical_json(dict(manifest)))

    def read_manifest(self) -> dict:
        path = self.manifest_path
        if not path.exists():
            raise WorkspaceError(f"missing manifest: {path}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise WorkspaceCorruptionError(
                f"corrupt manifest {path}: {exc}"
            ) from exc


def _verify_and_collect(
    ws: Workspace, manifest: Mapping
) -> tuple[dict, dict[tuple[str, int], str]]:
    """Check every recorded digest against the file on disk."""
    artifacts = manifest.get("artifacts", {})
    contents: dict[tuple[str, int], str] = {}
    for artifact_id, meta in artifacts.items():
        for vmeta in meta.get("versions", []):
            rel = vmeta["path"]
            path = ws.run_dir / rel
            if not path.exists():
                raise WorkspaceCorruptionError(
                    f"missing artifact file: {path}"
                )
            text = path.read_text(encoding="utf-8")
            if sha256_text(text) != vmeta["digest"]:
                raise WorkspaceCorruptionError(
                    f"digest mismatch in {path}: content does not match "
                    f"the manifest record for {artifact_id} "
                    f"v{vmeta['version']}"
                )
            contents[(artifact_id, int(vmeta["version"]))] = text
    return dict(artifacts), contents


def load_run(root: str | Path, run_id: str) -> RestoredRun:
    """Rebuild run state from disk, verifying integrity along the way.

    Raises WorkspaceCorruptionError naming the offending file when any
    content digest disagrees with the manifest, and WorkspaceError when
    required files are absent.
    """
    ws = Workspace(root, run_id)
    manifest = ws.read_manifest()
    snapshot, volatile, digest = ws.read_config_snapshot()
    recorded = manifest.get("config_digest")
    if recorded is not None and recorded != digest:
        raise WorkspaceCorruptionError(
            f"digest mismatch in {ws.config_snapshot_path}: config "
            "snapshot does not match the manifest record"
        )
    if manifest.get("run_id") != run_id:
        raise WorkspaceCorruptionError(
            f"digest mismatch in {ws.manifest_path}: manifest names run "
            f"{manifest.get('run_id')!r}, directory is {run_id!r}"
        )
    artifacts, contents = _verify_and_collect(ws, manifest)
    events = [PoolEvent.from_dict(e) for e in manifest.get("events", [])]
    pool = ArtifactPool.restore(events, artifacts, contents)
    return RestoredRun(
        run_id=run_id,
        manifest=manifest,
        snapshot=snapshot,
        volatile=volatile,
        pool=pool,
        events=events,
    )
