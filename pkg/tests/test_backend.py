"""Backend behavior: defaults, fixtures, retries, cassette record/replay."""

import hashlib
import json
import threading

import pytest
import requests

from reqforge.backend import (
    BackendConfig,
    BackendMode,
    Cassette,
    CompletionRequest,
    HttpBackend,
    RecordBackend,
    ReplayBackend,
    RequestTag,
    ScriptedBackend,
    make_backend,
    prompt_digest,
    validate_config,
)
from reqforge.errors import BackendError, CassetteMissError, ConfigError


def req(agent="Interviewer", action="ConductResearch", step=1, user="hello", **kw):
    return CompletionRequest(
        messages=(("system", "You are a researcher."), ("user", user)),
        tag=RequestTag(agent, action, step),
        **kw,
    )


def test_sampling_defaults_match_pinned_settings():
    r = req()
    assert r.model == "gpt-4-turbo-2024-04-09"
    assert r.temperature == 0.3
    assert r.top_p == 1.0
    assert r.max_tokens == 4096
    assert r.frequency_penalty == 0.0
    assert r.presence_penalty == 0.0
    cfg = validate_config(BackendConfig())
    assert (cfg.model, cfg.temperature, cfg.top_p, cfg.max_tokens) == (
        "gpt-4-turbo-2024-04-09", 0.3, 1.0, 4096,
    )
    assert cfg.frequency_penalty == 0.0 and cfg.presence_penalty == 0.0


def test_request_range_validation():
    with pytest.raises(ConfigError):
        req(temperature=-1.0)
    with pytest.raises(ConfigError):
        req(temperature=2.5)
    with pytest.raises(ConfigError):
        req(top_p=0.0)
    with pytest.raises(ConfigError):
        req(max_tokens=0)
    with pytest.raises(ConfigError):
        CompletionRequest(messages=(), tag=RequestTag("A", "B", 1))
    with pytest.raises(ConfigError):
        CompletionRequest(messages=(("narrator", "x"),), tag=RequestTag("A", "B", 1))


def test_validate_config_rejects_bad_values_and_missing_cassette(tmp_path):
    with pytest.raises(ConfigError):
        validate_config(BackendConfig(temperature=-1.0))
    with pytest.raises(ConfigError):
        validate_config(BackendConfig(max_attempts=0))
    with pytest.raises(ConfigError):
        validate_config(
            BackendConfig(mode=BackendMode.REPLAY, cassette_path=str(tmp_path / "absent.json"))
        )
    # trailing slash is normalized away
    cfg = validate_config(BackendConfig(base_url="https://example.test/v1/"))
    assert cfg.base_url == "https://example.test/v1"


def test_prompt_digest_is_sha256_of_message_blob():
    r = req(user="ping")
    blob = json.dumps(
        [["system", "You are a researcher."], ["user", "ping"]],
        ensure_ascii=False,
        separators=(",", ":"),
    ).encode("utf-8")
    assert prompt_digest(r) == hashlib.sha256(blob).hexdigest()


def test_scripted_lookup_by_tag_then_digest_then_error():
    r = req(step=1)
    backend = ScriptedBackend({"Interviewer/ConductResearch/1": "fixture text"})
    assert backend.complete(r) == "fixture text"

    by_digest = ScriptedBackend({prompt_digest(r): "digest text"})
    assert by_digest.complete(r) == "digest text"

    with pytest.raises(CassetteMissError) as err:
        ScriptedBackend({}).complete(r)
    assert "Interviewer/ConductResearch/1" in str(err.value)

    with pytest.raises(BackendError):
        ScriptedBackend({"Interviewer/ConductResearch/1": "   "}).complete(r)


def _ok_body(text):
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def test_http_missing_credential_fails_before_any_network():
    calls = []

    def transport(*a):
        calls.append(a)
        raise AssertionError("network must not be touched")

    with pytest.raises(ConfigError) as err:
        HttpBackend(BackendConfig(mode=BackendMode.HTTP), transport=transport, env={})
    assert "REQFORGE_API_KEY" in str(err.value)
    assert calls == []


def test_http_success_parses_first_choice():
    seen = {}

    def transport(url, headers, body, timeout):
        seen.update(url=url, headers=headers, body=body, timeout=timeout)
        return 200, _ok_body("the reply")

    backend = HttpBackend(
        BackendConfig(mode=BackendMode.HTTP, base_url="https://example.test/v1"),
        transport=transport,
        env={"REQFORGE_API_KEY": "sk-test"},
    )
    assert backend.complete(req()) == "the reply"
    assert seen["url"] == "https://example.test/v1/chat/completions"
    assert seen["headers"]["Authorization"] == "Bearer sk-test"
    assert seen["body"]["model"] == "gpt-4-turbo-2024-04-09"
    assert seen["body"]["messages"][0] == {"role": "system", "content": "You are a researcher."}


def test_http_retries_transient_failures_with_exponential_backoff():
    attempts = []
    delays = []

    def transport(url, headers, body, timeout):
        attempts.append(1)
        if len(attempts) == 1:
            raise requests.ConnectionError("boom")
        if len(attempts) == 2:
            return 503, {"error": {"message": "overloaded"}}
        return 200, _ok_body("finally")

    backend = HttpBackend(
        BackendConfig(mode=BackendMode.HTTP),
        transport=transport,
        sleep=delays.append,
        env={"REQFORGE_API_KEY": "k"},
    )
    assert backend.complete(req()) == "finally"
    assert len(attempts) == 3
    assert delays == [1.0, 2.0]


def test_http_exhausted_retries_and_nonretryable_client_error():
    def always_500(url, headers, body, timeout):
        return 500, "server sad"

    backend = HttpBackend(
        BackendConfig(mode=BackendMode.HTTP),
        transport=always_500,
        sleep=lambda _: None,
        env={"REQFORGE_API_KEY": "k"},
    )
    with pytest.raises(BackendError) as err:
        backend.complete(req())
    assert "after 3 attempts" in str(err.value)

    calls = []

    def bad_request(url, headers, body, timeout):
        calls.append(1)
        return 400, {"error": {"message": "bad schema"}}

    backend = HttpBackend(
        BackendConfig(mode=BackendMode.HTTP),
        transport=bad_request,
        sleep=lambda _: None,
        env={"REQFORGE_API_KEY": "k"},
    )
    with pytest.raises(BackendError) as err:
        backend.complete(req())
    assert "bad schema" in str(err.value)
    assert calls == [1]  # no retry on a non-transient client error


def test_http_empty_content_is_an_error():
    backend = HttpBackend(
        BackendConfig(mode=BackendMode.HTTP),
        transport=lambda *a: (200, _ok_body("")),
        sleep=lambda _: None,
        env={"REQFORGE_API_KEY": "k"},
    )
    with pytest.raises(BackendError):
        backend.complete(req())


def test_cassette_round_trip_and_replay(tmp_path):
    cassette = Cassette(meta={"run_id": "r1"})
    r1, r2 = req(step=1, user="one"), req(step=2, user="two")
    cassette.append(r1, "first")
    cassette.append(r2, "second")
    with pytest.raises(BackendError):
        cassette.append(r1, "dup")

    path = tmp_path / "run.json"
    cassette.save(path)
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n")
    loaded = Cassette.load(path)
    assert loaded.meta == {"run_id": "r1"}
    assert len(loaded) == 2

    replay = ReplayBackend(loaded)
    assert replay.complete(r1) == "first"
    assert replay.complete(r2) == "second"
    with pytest.raises(CassetteMissError) as err:
        replay.complete(req(step=3, user="three"))
    assert "Interviewer/ConductResearch/3" in str(err.value)


def test_replay_digest_drift_warns_unless_strict(caplog):
    cassette = Cassette()
    cassette.append(req(step=1, user="original"), "kept")
    drifted = req(step=1, user="edited prompt")

    with caplog.at_level("WARNING"):
        assert ReplayBackend(cassette).complete(drifted) == "kept"
    assert any("drift" in rec.message for rec in caplog.records)

    with pytest.raises(BackendError):
        ReplayBackend(cassette, strict=True).complete(drifted)


def test_record_wraps_inner_and_replaying_serves_every_request():
    inner = ScriptedBackend(
        {f"Interviewer/ConductResearch/{i}": f"text {i}" for i in range(1, 6)}
    )
    recorder = RecordBackend(inner)
    requests_made = [req(step=i, user=f"u{i}") for i in range(1, 6)]
    originals = [recorder.complete(r) for r in requests_made]

    replay = ReplayBackend(recorder.cassette, strict=True)
    assert [replay.complete(r) for r in requests_made] == originals


def test_record_appends_are_thread_safe():
    inner = ScriptedBackend({f"A/Act/{i}": "x" for i in range(40)})
    recorder = RecordBackend(inner)

    def worker(base):
        for i in range(base, base + 10):
            recorder.complete(
                CompletionRequest(messages=(("user", "u"),), tag=RequestTag("A", "Act", i))
            )

    threads = [threading.Thread(target=worker, args=(b,)) for b in (0, 10, 20, 30)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(recorder.cassette) == 40
    assert len({e["key"] for e in recorder.cassette.entries}) == 40


def test_scripted_and_replay_touch_no_network(monkeypatch):
    def explode(*a, **kw):
        raise AssertionError("network call attempted")

    monkeypatch.setattr(requests, "post", explode)
    monkeypatch.setattr(requests, "get", explode)

    scripted = ScriptedBackend({"A/B/1": "ok"})
    r = CompletionRequest(messages=(("user", "u"),), tag=RequestTag("A", "B", 1))
    assert scripted.complete(r) == "ok"

    cassette = Cassette()
    cassette.append(r, "ok")
    assert ReplayBackend(cassette).complete(r) == "ok"


def test_make_backend_dispatch(tmp_path):
    scripted = make_backend(BackendConfig(), fixtures={"A/B/1": "t"})
    assert isinstance(scripted, ScriptedBackend)

    with pytest.raises(ConfigError):
        make_backend(BackendConfig())  # scripted with no fixtures at all

    fix = tmp_path / "fix.json"
    fix.write_text(json.dumps({"A/B/1": "from file"}), encoding="utf-8")
    from_file = make_backend(BackendConfig(fixtures_path=str(fix)))
    r = CompletionRequest(messages=(("user", "u"),), tag=RequestTag("A", "B", 1))
    assert from_file.complete(r) == "from file"

    http = make_backend(
        BackendConfig(mode=BackendMode.HTTP), env={"REQFORGE_API_KEY": "k"}
    )
    assert isinstance(http, HttpBackend)

    record = make_backend(
        BackendConfig(mode=BackendMode.RECORD), env={"REQFORGE_API_KEY": "k"}
    )
    assert isinstance(record, RecordBackend)
    assert isinstance(record.inner, HttpBackend)

    cassette = Cassette()
    cassette.append(r, "saved")
    cas_path = tmp_path / "cas.json"
    cassette.save(cas_path)
    replay = make_backend(
        BackendConfig(mode=BackendMode.REPLAY, cassette_path=str(cas_path))
    )
    assert isinstance(replay, ReplayBackend)
    assert replay.complete(r) == "saved"


def test_backend_mode_parse():
    assert BackendMode.parse("HTTP") is BackendMode.HTTP
    assert BackendMode.parse(" replay ") is BackendMode.REPLAY
    with pytest.raises(ConfigError):
        BackendMode.parse("telnet")
