"""Command-line front end: run, resume, show, replay, validate-config.

Results go to standard output; progress and diagnostics go to standard
error. Every failure path maps to a stable exit code (EXIT_CODES).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Mapping

from .backend import BackendConfig, BackendMode, ScriptedBackend
from .errors import (
    BackendError,
    ConfigError,
    DeadlockError,
    ReqForgeError,
    WorkspaceError,
)
from .orchestrator import Engine, RunConfig, RunResult, RunStatus, _config_from_snapshot
from .pool import ArtifactKind
from .workspace import MANIFEST_NAME, Workspace, load_run

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_DEADLOCK = 4
EXIT_IO = 5

EXIT_CODES = {
    "ConfigError": EXIT_CONFIG,
    "PromptRenderError": EXIT_CONFIG,
    "BackendError": EXIT_BACKEND,
    "CassetteMissError": EXIT_BACKEND,
    "DeadlockError": EXIT_DEADLOCK,
    "WorkspaceError": EXIT_IO,
    "WorkspaceCorruptionError": EXIT_IO,
}

# short selectors accepted by `show --kind`
KIND_ALIASES = {
    "brief": ArtifactKind.BRIEF_DESCRIPTION,
    "par": ArtifactKind.PRODUCT_ANALYSIS_REPORT,
    "iql": ArtifactKind.INTERVIEW_QUESTION_LIST,
    "ir": ArtifactKind.INTERVIEW_RECORD,
    "url": ArtifactKind.USER_REQUIREMENTS_LIST,
    "cr": ArtifactKind.CLASSIFICATION_REPORT,
    "oel": ArtifactKind.OPERATING_ENVIRONMENT_LIST,
    "srl": ArtifactKind.SYSTEM_REQUIREMENTS_LIST,
    "rm": ArtifactKind.REQUIREMENTS_MODEL,
    "srs": ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION,
    "rc": ArtifactKind.REVIEW_COMMENTS,
    "vr": ArtifactKind.VALIDATION_REPORT,
    "dt": ArtifactKind.DIALOGUE_TRANSCRIPT,
    "transcript": ArtifactKind.DIALOGUE_TRANSCRIPT,
}

log = logging.getLogger(__name__)

# engine options a config file may set (flags still win)
_FILE_ENGINE_KEYS = {
    "interview_rounds",
    "review_rounds",
    "max_feedback_iterations",
    "enable_classify",
    "enable_check_run_env",
    "feedback_scope",
    "research",
    "workspace",
    "interactive_end_user",
    "run_id",
    "max_actions",
}


def parse_kind(name: str) -> ArtifactKind:
    lowered = name.strip().lower()
    if lowered in KIND_ALIASES:
        return KIND_ALIASES[lowered]
    for kind in ArtifactKind:
        if kind.value.lower() == lowered:
            return kind
    raise ConfigError(f"unknown artifact kind {name!r}")


def _load_config_file(path: str) -> dict[str, Any]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _reject_inline_credentials(data: Mapping[str, Any]) -> None:
    # credential only via environment variable, never in config files
    for key in data:
        if "api_key" in key.lower() and key != "api_key_env":
            raise ConfigError(
                "credentials are read from the REQFORGE_API_KEY environment "
                "variable and must not appear in config files"
            )


def resolve_fixtures_path(selector: str) -> str:
    """Accept a fixtures file, or a directory holding exactly one .json file."""
    path = Path(selector)
    if path.is_file():
        return str(path)
    if path.is_dir():
        preferred = path / "golden.json"
        if preferred.is_file():
            return str(preferred)
        found = sorted(path.glob("*.json"))
        if len(found) == 1:
            return str(found[0])
        if not found:
            raise ConfigError(f"no .json fixture file inside {path}")
        names = ", ".join(p.name for p in found)
        raise ConfigError(f"ambiguous fixtures in {path} ({names}); point at one file")
    raise ConfigError(f"fixtures path not found: {selector}")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    _reject_inline_credentials(file_cfg)
    backend_d = dict(file_cfg.pop("backend", {}) or {})
    _reject_inline_credentials(backend_d)

    unknown = set(file_cfg) - _FILE_ENGINE_KEYS
    if unknown:
        raise ConfigError(f"unknown config file option(s): {', '.join(sorted(unknown))}")

    if getattr(args, "backend", None):
        backend_d["mode"] = args.backend
    if getattr(args, "model", None):
        backend_d["model"] = args.model
    if getattr(args, "temperature", None) is not None:
        backend_d["temperature"] = args.temperature
    if getattr(args, "fixtures", None):
        backend_d["fixtures_path"] = resolve_fixtures_path(args.fixtures)
    if getattr(args, "cassette", None):
        backend_d["cassette_path"] = args.cassette
    backend = BackendConfig.from_dict(backend_d)

    engine_d: dict[str, Any] = dict(file_cfg)
    for key in (
        "workspace",
        "run_id",
        "interview_rounds",
        "review_rounds",
        "max_feedback_iterations",
        "feedback_scope",
        "research",
        "max_actions",
    ):
        value = getattr(args, key, None)
        if value is not None:
            engine_d[key] = value
    for key in ("enable_classify", "enable_check_run_env", "interactive_end_user"):
        if getattr(args, key, False):
            engine_d[key] = True
    return RunConfig(backend=backend, **engine_d).validate()


def _print_result(result: RunResult) -> int:
    print(f"run {result.run_id}")
    print(f"status {result.status.value}")
    if result.srs is not None:
        path = _artifact_file(result, *result.srs)
        if path is not None:
            print(f"srs {path}")
    if result.status is RunStatus.COMPLETED:
        return EXIT_OK
    if result.status is RunStatus.PAUSED:
        log.info("paused after %d actions; resume to continue", len(result.trace))
        return EXIT_OK
    return _exit_for_error(result.error)


def _exit_for_error(error: str | None) -> int:
    if not error:
        return EXIT_FAILURE
    print(f"error: {error}", file=sys.stderr)
    name = error.split(":", 1)[0]
    return EXIT_CODES.get(name, EXIT_FAILURE)


def _artifact_file(result: RunResult, artifact_id: str, version: int) -> Path | None:
    manifest = json.loads(result.manifest_path.read_text(encoding="utf-8"))
    entry = manifest.get("artifacts", {}).get(artifact_id)
    if not entry:
        return None
    for v in entry["versions"]:
        if v["version"] == version:
            return (result.run_dir / v["path"]).resolve()
    return None


def _read_brief(args: argparse.Namespace) -> str:
    if args.brief_file:
        try:
            return Path(args.brief_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise WorkspaceError(f"cannot read brief file {args.brief_file}: {exc}") from exc
    if args.brief is not None:
        return args.brief
    raise ConfigError("provide a brief description (positional) or --brief-file")


def cmd_run(args: argparse.Namespace) -> int:
    brief = _read_brief(args)
    config = build_run_config(args)
    engine = Engine(config, input_fn=input)
    return _print_result(engine.run(brief))


def cmd_resume(args: argparse.Namespace) -> int:
    engine = Engine.resume(
        args.workspace, args.run_id, max_actions=args.max_actions
    )
    return _print_result(engine.continue_run())


def _latest_run_id(root: Path) -> str | None:
    if not root.is_dir():
        return None
    runs = sorted(p.name for p in root.iterdir() if (p / MANIFEST_NAME).is_file())
    return runs[-1] if runs else None


def cmd_show(args: argparse.Namespace) -> int:
    root = Path(args.workspace)
    run_id = args.run or _latest_run_id(root)
    if run_id is None:
        print("no artifacts")
        return EXIT_OK
    restored = load_run(root, run_id)
    pool = restored.pool
    if args.kind is None:
        ids = pool.ids()
        if not ids:
            print("no artifacts")
            return EXIT_OK
        for artifact_id in ids:
            art = pool.get(artifact_id)
            flag = "stale" if pool.is_stale(artifact_id) else "fresh"
            print(f"{art.id} v{art.version} {flag} {art.title}")
        return EXIT_OK
    kind = parse_kind(args.kind)
    latest = pool.latest(kind)
    if latest is None:
        print("no artifacts")
        return EXIT_OK
    if args.version is not None:
        try:
            latest = pool.get(latest.id, args.version)
        except ReqForgeError as exc:
            raise ConfigError(str(exc)) from exc
    print(latest.content, end="" if latest.content.endswith("\n") else "\n")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    root = Path(args.workspace)
    restored = load_run(root, args.run_id)
    cassette = Workspace(root, args.run_id).cassette_path()
    if not cassette.is_file():
        raise ConfigError(f"no cassette recorded under {cassette.parent}")
    brief_art = restored.pool.latest(ArtifactKind.BRIEF_DESCRIPTION)
    if brief_art is None:
        raise ConfigError(f"run {args.run_id} holds no brief to replay")
    brief = restored.pool.get(brief_art.id, 1).content

    into = Path(args.into) if args.into else root / f"{args.run_id}-replay"
    config = _config_from_snapshot(
        restored,
        workspace=str(into),
        backend_overrides={
            "mode": "replay",
            "cassette_path": str(cassette),
            "fixtures_path": None,
        },
    )
    result = Engine(config).run(brief)
    if result.status is not RunStatus.COMPLETED:
        return _exit_for_error(result.error)

    original = (root / args.run_id / MANIFEST_NAME).read_bytes()
    fresh = result.manifest_path.read_bytes()
    old_digest = restored.manifest.get("config_digest", "")
    new_digest = json.loads(fresh).get("config_digest", "")
    if old_digest != new_digest:
        log.warning("config digest changed since the recording; comparing anyway")
    if original == fresh:
        print("match")
        return EXIT_OK
    print("mismatch")
    print(f"replayed manifest differs: {result.manifest_path}", file=sys.stderr)
    return EXIT_FAILURE


def cmd_validate_config(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    if config.backend.mode is BackendMode.SCRIPTED and config.backend.fixtures_path:
        ScriptedBackend.from_file(config.backend.fixtures_path)
    print("ok")
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of defaults (flags still win)")
    p.add_argument("--backend", choices=["http", "scripted", "record", "replay"])
    p.add_argument("--fixtures", help="fixtures file, or directory holding one")
    p.add_argument("--cassette", help="cassette file for record/replay")
    p.add_argument("--workspace", help="directory holding run workspaces")
    p.add_argument("--run-id", dest="run_id", help="pin the run id (else timestamped)")
    p.add_argument("--interview-rounds", dest="interview_rounds", type=int)
    p.add_argument("--review-rounds", dest="review_rounds", type=int)
    p.add_argument(
        "--max-feedback-iterations", dest="max_feedback_iterations", type=int
    )
    p.add_argument("--feedback-scope", dest="feedback_scope", choices=["full", "revise-only"])
    p.add_argument("--research", help='"default", "none", or a fixture file path')
    p.add_argument("--max-actions", dest="max_actions", type=int)
    p.add_argument("--enable-classify", dest="enable_classify", action="store_true")
    p.add_argument(
        "--enable-check-run-env", dest="enable_check_run_env", action="store_true"
    )
    p.add_argument(
        "--interactive-end-user", dest="interactive_end_user", action="store_true"
    )
    p.add_argument("--model", help="completion model name")
    p.add_argument("--temperature", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqforge",
        description="Drive a multi-agent requirements pipeline from one brief line.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="start a new run from a brief description")
    p_run.add_argument("brief", nargs="?", help="the product idea, in one line")
    p_run.add_argument("--brief-file", dest="brief_file", help="read the brief from a file")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_resume = sub.add_parser("resume", help="continue a paused or updated run")
    p_resume.add_argument("run_id")
    p_resume.add_argument("--workspace", default="runs")
    p_resume.add_argument("--max-actions", dest="max_actions", type=int)
    p_resume.set_defaults(func=cmd_resume)

    p_show = sub.add_parser("show", help="list pool artifacts or print one body")
    p_show.add_argument("--workspace", default="runs")
    p_show.add_argument("--run", help="run id (default: most recent)")
    p_show.add_argument("--kind", help="artifact kind or alias such as srs, url, rm")
    p_show.add_argument("--version", type=int, help="specific version (default: latest)")
    p_show.set_defaults(func=cmd_show)

    p_replay = sub.add_parser(
        "replay", help="re-run a recorded run from its cassette and compare"
    )
    p_replay.add_argument("run_id")
    p_replay.add_argument("--workspace", default="runs")
    p_replay.add_argument("--into", help="target workspace for the fresh run")
    p_replay.set_defaults(func=cmd_replay)

    p_val = sub.add_parser("validate-config", help="check flags and config file")
    _add_config_flags(p_val)
    p_val.set_defaults(func=cmd_validate_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except DeadlockError as exc:
        print(f"deadlock: {exc}", file=sys.stderr)
        return EXIT_DEADLOCK
    except (WorkspaceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ReqForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
