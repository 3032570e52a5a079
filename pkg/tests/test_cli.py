"""Exit codes, stream separation, and end-to-end command flows."""

import json
from pathlib import Path

import pytest

from reqforge.backend import BackendConfig, BackendMode
from reqforge.cli import main
from reqforge.errors import DeadlockError
from reqforge.orchestrator import Engine, RunConfig

BRIEF = "I want to develop an insurance management system."

FIXTURES_PATH = (
    Path(__file__).resolve().parent.parent
    / "src"
    / "reqforge"
    / "data"
    / "fixtures"
    / "golden.json"
)


def run_cli(*argv):
    return main(["--quiet", *argv])


def test_run_completes_and_prints_srs_path(tmp_path, capsys):
    code = run_cli("run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-x")
    out = capsys.readouterr().out
    assert code == 0
    assert "run run-x" in out and "status Completed" in out
    srs_line = next(line for line in out.splitlines() if line.startswith("srs "))
    srs_path = Path(srs_line.split(" ", 1)[1])
    assert srs_path.name == "SoftwareRequirementsSpecification-v2.md"
    assert "## Introduction" in srs_path.read_text()


def test_progress_goes_to_stderr_results_to_stdout(tmp_path, capsys):
    code = main(["run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-x"])
    captured = capsys.readouterr()
    assert code == 0
    assert "dispatch" in captured.err
    assert "dispatch" not in captured.out
    code = main(
        ["--quiet", "run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-y"]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "dispatch" not in captured.err


def test_empty_brief_exits_config_code(tmp_path, capsys):
    assert run_cli("run", "", "--workspace", str(tmp_path)) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_brief_exits_config_code(tmp_path, capsys):
    assert run_cli("run", "--workspace", str(tmp_path)) == 2
    assert "brief" in capsys.readouterr().err


def test_brief_file_flag_reads_the_brief(tmp_path, capsys):
    brief_file = tmp_path / "brief.txt"
    brief_file.write_text(BRIEF + "\n")
    code = run_cli(
        "run",
        "--brief-file",
        str(brief_file),
        "--workspace",
        str(tmp_path / "runs"),
        "--run-id",
        "run-x",
    )
    assert code == 0
    assert "status Completed" in capsys.readouterr().out


def test_http_without_credential_is_config_error(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("REQFORGE_API_KEY", raising=False)
    code = run_cli("run", BRIEF, "--backend", "http", "--workspace", str(tmp_path))
    assert code == 2
    assert "REQFORGE_API_KEY" in capsys.readouterr().err
    assert not (tmp_path / "runs").exists()  # failed before any run directory


def test_unknown_command_and_flag_are_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["run", BRIEF, "--no-such-flag"])
    assert exc.value.code == 2


def test_show_summary_then_kind_then_version(tmp_path, capsys):
    assert run_cli("run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-x") == 0
    capsys.readouterr()

    assert run_cli("show", "--workspace", str(tmp_path)) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 15  # every pool artifact, one line each
    srs_lines = [l for l in lines if l.startswith("SoftwareRequirementsSpecification")]
    assert srs_lines and "v2 fresh" in srs_lines[0]

    assert run_cli("show", "--workspace", str(tmp_path), "--kind", "srs") == 0
    body = capsys.readouterr().out
    assert "## Introduction" in body and "SYS-13" in body  # v2 is the revision

    assert (
        run_cli("show", "--workspace", str(tmp_path), "--kind", "SRS", "--version", "1")
        == 0
    )
    v1 = capsys.readouterr().out
    assert "SYS-13" not in v1


def test_show_on_empty_or_missing_workspace(tmp_path, capsys):
    assert run_cli("show", "--workspace", str(tmp_path)) == 0
    assert capsys.readouterr().out.strip() == "no artifacts"
    assert run_cli("show", "--workspace", str(tmp_path / "nowhere")) == 0
    assert capsys.readouterr().out.strip() == "no artifacts"


def test_show_bad_selector_is_config_error(tmp_path, capsys):
    assert run_cli("run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-x") == 0
    capsys.readouterr()
    assert run_cli("show", "--workspace", str(tmp_path), "--kind", "nope") == 2
    assert "unknown artifact kind" in capsys.readouterr().err


def test_pause_then_resume_matches_single_shot(tmp_path, capsys):
    code = run_cli(
        "run", BRIEF, "--workspace", str(tmp_path / "a"), "--run-id", "run-x",
        "--max-actions", "10",
    )
    assert code == 0
    assert "status Paused" in capsys.readouterr().out
    assert run_cli("resume", "run-x", "--workspace", str(tmp_path / "a")) == 0
    assert "status Completed" in capsys.readouterr().out

    assert run_cli("run", BRIEF, "--workspace", str(tmp_path / "b"), "--run-id", "run-x") == 0
    a = (tmp_path / "a" / "run-x" / "manifest.json").read_bytes()
    b = (tmp_path / "b" / "run-x" / "manifest.json").read_bytes()
    assert a == b


def test_resume_of_unknown_run_is_io_error(tmp_path, capsys):
    assert run_cli("resume", "run-gone", "--workspace", str(tmp_path)) == 5
    assert "error:" in capsys.readouterr().err


def record_golden_run(root: Path, run_id: str = "run-x") -> Path:
    """Drive a record-mode run with a canned transport; returns the run dir."""
    fixtures = json.loads(FIXTURES_PATH.read_text(encoding="utf-8"))
    scripted = Engine(
        RunConfig(workspace=str(root / "ref"), run_id=run_id)
    ).run(BRIEF)
    steps: dict[str, int] = {}
    replies = []
    for t in scripted.trace:
        key = f"{t.agent}/{t.action}"
        steps[key] = steps.get(key, 0) + 1
        replies.append(fixtures[f"{key}/{steps[key]}"])
    calls = iter(replies)

    def transport(url, headers, body, timeout):
        return 200, {"choices": [{"message": {"content": next(calls)}}]}

    engine = Engine(
        RunConfig(
            workspace=str(root / "rec"),
            run_id=run_id,
            backend=BackendConfig(mode=BackendMode.RECORD),
        ),
        transport=transport,
        env={"REQFORGE_API_KEY": "k"},
    )
    result = engine.run(BRIEF)
    assert result.status.value == "Completed"
    return result.run_dir


def test_replay_of_recorded_run_matches(tmp_path, capsys):
    record_golden_run(tmp_path)
    code = run_cli("replay", "run-x", "--workspace", str(tmp_path / "rec"))
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.strip() == "match"


def test_replay_without_cassette_is_config_error(tmp_path, capsys):
    assert run_cli("run", BRIEF, "--workspace", str(tmp_path), "--run-id", "run-x") == 0
    capsys.readouterr()
    assert run_cli("replay", "run-x", "--workspace", str(tmp_path)) == 2
    assert "cassette" in capsys.readouterr().err


def test_replay_cassette_miss_is_backend_error(tmp_path, capsys):
    run_dir = record_golden_run(tmp_path)
    cassette = run_dir / "cassettes" / "run.json"
    data = json.loads(cassette.read_text())
    dropped = data["entries"].pop()
    cassette.write_text(json.dumps(data))
    code = run_cli(
        "replay", "run-x", "--workspace", str(tmp_path / "rec"),
        "--into", str(tmp_path / "again"),
    )
    captured = capsys.readouterr()
    assert code == 3
    assert dropped["key"] in captured.err


def test_validate_config_accepts_and_rejects(tmp_path, capsys):
    assert run_cli("validate-config", "--backend", "scripted") == 0
    assert capsys.readouterr().out.strip() == "ok"

    assert run_cli("validate-config", "--temperature", "9") == 2
    capsys.readouterr()

    secret = tmp_path / "bad.json"
    secret.write_text(json.dumps({"backend": {"api_key": "sk-oops"}}))
    assert run_cli("validate-config", "--config", str(secret)) == 2
    assert "environment" in capsys.readouterr().err

    unknown = tmp_path / "odd.json"
    unknown.write_text(json.dumps({"interview_round": 3}))
    assert run_cli("validate-config", "--config", str(unknown)) == 2
    assert "interview_round" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run_cli("validate-config", "--config", str(broken)) == 2
    capsys.readouterr()


def test_config_file_drives_the_run_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps({"interview_rounds": 2, "review_rounds": 2, "workspace": "ignored"})
    )
    code = run_cli(
        "run", BRIEF, "--config", str(cfg),
        "--workspace", str(tmp_path / "runs"),  # flag beats the file
        "--run-id", "run-short",
    )
    assert code == 0
    assert "status Completed" in capsys.readouterr().out
    manifest = json.loads(
        (tmp_path / "runs" / "run-short" / "manifest.json").read_text()
    )
    actions = [t["action"] for t in manifest["trace"]]
    assert actions.count("StartInterview") == 2
    assert actions.count("ReviewAsk") == 2
    assert actions.count("WriteReviewComs") == 2
    assert not (tmp_path / "ignored").exists()


def test_deadlock_maps_to_exit_four(tmp_path, capsys, monkeypatch):
    def boom(self, brief):
        raise DeadlockError("nothing can produce ValidationReport")

    monkeypatch.setattr(Engine, "run", boom)
    code = run_cli("run", BRIEF, "--workspace", str(tmp_path))
    assert code == 4
    assert "deadlock" in capsys.readouterr().err


def test_fixtures_flag_accepts_file_and_directory(tmp_path, capsys):
    code = run_cli(
        "run", BRIEF, "--fixtures", str(FIXTURES_PATH),
        "--workspace", str(tmp_path / "a"), "--run-id", "run-x",
    )
    assert code == 0
    capsys.readouterr()
    code = run_cli(
        "run", BRIEF, "--fixtures", str(FIXTURES_PATH.parent),
        "--workspace", str(tmp_path / "b"), "--run-id", "run-x",
    )
    assert code == 0
    capsys.readouterr()
    a = (tmp_path / "a" / "run-x" / "manifest.json").read_bytes()
    b = (tmp_path / "b" / "run-x" / "manifest.json").read_bytes()
    assert a == b
    assert run_cli("run", BRIEF, "--fixtures", str(tmp_path / "missing")) == 2
