"""Completion backends: live HTTP endpoint, scripted fixtures, record/replay.

Four interchangeable modes sit behind one ``complete(request) -> text``
surface. Http talks to an OpenAI-compatible chat-completions endpoint;
Scripted serves canned fixture text keyed by request tag; Record wraps
Http and captures every exchange into a cassette; Replay serves a saved
cassette and never touches the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol

import requests

from .errors import BackendError, CassetteMissError, ConfigError

__all__ = [
    "BackendMode",
    "RequestTag",
    "CompletionRequest",
    "BackendConfig",
    "validate_config",
    "prompt_digest",
    "Backend",
    "ScriptedBackend",
    "HttpBackend",
    "Cassette",
    "RecordBackend",
    "ReplayBackend",
    "make_backend",
]

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4-turbo-2024-04-09"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_API_KEY_ENV = "REQFORGE_API_KEY"

_ROLES = ("system", "user", "assistant")


class BackendMode(Enum):
    HTTP = "http"
    SCRIPTED = "scripted"
    RECORD = "record"
    REPLAY = "replay"

    @classmethod
    def parse(cls, name: str) -> "BackendMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown backend mode {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class RequestTag:
    """Stable identity of one completion call: who asked, doing what, which step.

    The step index counts calls per (agent, action) pair across the whole
    run, so repeated executions of the same action get distinct keys.
    """

    agent: str
    action: str
    step: int

    @property
    def key(self) -> str:
        return f"{self.agent}/{self.action}/{self.step}"


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[tuple[str, str], ...]  # (role, content) pairs, in order
    tag: RequestTag
    model: str = DEFAULT_MODEL
    temperature: float = 0.3
    top_p: float = 1.0
    max_tokens: int = 4096
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0

    def __post_init__(self) -> None:
        if not self.messages:
            raise ConfigError("completion request has no messages")
        for role, content in self.messages:
            if role not in _ROLES:
                raise ConfigError(f"unknown message role {role!r}")
            if not isinstance(content, str):
                raise ConfigError("message content must be text")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        if not 0.0 < self.top_p <= 1.0:
            raise ConfigError(f"top_p {self.top_p} outside (0, 1]")
        if self.max_tokens < 1:
            raise ConfigError(f"max_tokens {self.max_tokens} < 1")

    def body(self) -> dict[str, Any]:
        """Wire-format JSON body for the chat-completions endpoint."""
        return {
            "model": self.model,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "frequency_penalty": self.frequency_penalty,
            "presence_penalty": self.presence_penalty,
        }


def prompt_digest(request: CompletionRequest) -> str:
    """sha256 over the rendered messages; guards cassettes against drift."""
    blob = json.dumps(
        [[r, c] for r, c in request.messages],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class BackendConfig:
    mode: BackendMode = BackendMode.SCRIPTED
    base_url: str = DEFAULT_BASE_URL
    api_key_env: str = DEFAULT_API_KEY_ENV
    model: str = DEFAULT_MODEL
    temperature: float = 0.3
    top_p: float = 1.0
    max_tokens: int = 4096
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_attempts: int = 3
    backoff_base: float = 1.0
    timeout: float = 60.0
    fixtures_path: str | None = None
    cassette_path: str | None = None
    strict_replay: bool = False

    def request(self, messages: tuple[tuple[str, str], ...], tag: RequestTag) -> CompletionRequest:
        return CompletionRequest(
            messages=messages,
            tag=tag,
            model=self.model,
            temperature=self.temperature,
            top_p=self.top_p,
            max_tokens=self.max_tokens,
            frequency_penalty=self.frequency_penalty,
            presence_penalty=self.presence_penalty,
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BackendConfig":
        """Build from a plain mapping (config file / CLI), filling defaults."""
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown backend option(s): {', '.join(sorted(unknown))}")
        kwargs = dict(data)
        if "mode" in kwargs and not isinstance(kwargs["mode"], BackendMode):
            kwargs["mode"] = BackendMode.parse(str(kwargs["mode"]))
        try:
            cfg = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad backend config: {exc}") from None
        return validate_config(cfg)


def validate_config(config: BackendConfig) -> BackendConfig:
    """Range-check and normalize; Replay additionally needs a readable cassette."""
    if not config.model:
        config = replace(config, model=DEFAULT_MODEL)
    if not 0.0 <= config.temperature <= 2.0:
        raise ConfigError(f"temperature {config.temperature} outside [0, 2]")
    if not 0.0 < config.top_p <= 1.0:
        raise ConfigError(f"top_p {config.top_p} outside (0, 1]")
    if config.max_tokens < 1:
        raise ConfigError(f"max_tokens {config.max_tokens} < 1")
    if config.max_attempts < 1:
        raise ConfigError(f"max_attempts {config.max_attempts} < 1")
    if config.backoff_base < 0:
        raise ConfigError(f"backoff_base {config.backoff_base} < 0")
    if config.timeout <= 0:
        raise ConfigError(f"timeout {config.timeout} must be positive")
    if config.base_url.endswith("/"):
        config = replace(config, base_url=config.base_url.rstrip("/"))
    if config.mode is BackendMode.REPLAY:
        if not config.cassette_path:
            raise ConfigError("replay mode needs a cassette path")
        if not Path(config.cassette_path).is_file():
            raise ConfigError(f"cassette not found: {config.cassette_path}")
    return config


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


def _require_text(text: Any, key: str) -> str:
    if not isinstance(text, str) or not text.strip():
        raise BackendError(f"empty response for request {key}")
    return text


class ScriptedBackend:
    """Deterministic fixture table. Zero network, bit-stable across runs.

    Fixtures are keyed "Agent/Action/step"; a sha256 prompt digest is
    accepted as a fallback key so content-addressed fixtures also work.
    """

    def __init__(self, fixtures: Mapping[str, str]):
        self._fixtures = dict(fixtures)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load fixtures from {path}: {exc}") from exc
        if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
            raise ConfigError(f"fixture file {path} must map request keys to reply text")
        return cls(data)

    def complete(self, request: CompletionRequest) -> str:
        key = request.tag.key
        text = self._fixtures.get(key)
        if text is None:
            text = self._fixtures.get(prompt_digest(request))
        if text is None:
            raise CassetteMissError(key)
        return _require_text(text, key)


# transport: (url, headers, json_body, timeout) -> (status code, parsed JSON body)
Transport = Callable[[str, dict[str, str], dict[str, Any], float], tuple[int, Any]]


def _requests_transport(url: str, headers: dict[str, str], body: dict[str, Any], timeout: float) -> tuple[int, Any]:
    resp = requests.post(url, headers=headers, json=body, timeout=timeout)
    try:
        parsed = resp.json()
    except ValueError:
        parsed = resp.text
    return resp.status_code, parsed


class HttpBackend:
    """OpenAI-compatible chat-completions client with bounded retries.

    The credential is read from the configured environment variable at
    construction time, so a missing key fails before any network activity.
    """

    def __init__(
        self,
        config: BackendConfig,
        *,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        env: Mapping[str, str] | None = None,
    ):
        env = os.environ if env is None else env
        api_key = env.get(config.api_key_env, "")
        if not api_key:
            raise ConfigError(
                f"missing API credential: set the {config.api_key_env} environment variable"
            )
        self._config = config
        self._url = config.base_url.rstrip("/") + "/chat/completions"
        self._headers = {
            "Authorization": f"Bearer {api_key}",
            "Content-Type": "application/json",
        }
        self._transport = transport or _requests_transport
        self._sleep = sleep

    def complete(self, request: CompletionRequest) -> str:
        key = request.tag.key
        last_error: str = "no attempt made"
        for attempt in range(1, self._config.max_attempts + 1):
            try:
                status, parsed = self._transport(
                    self._url, self._headers, request.body(), self._config.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
            else:
                if status == 200:
                    return _require_text(self._extract(parsed, key), key)
                last_error = f"HTTP {status}: {_error_detail(parsed)}"
                if status not in (429,) and not 500 <= status < 600:
                    # client errors other than rate limits will not heal on retry
                    raise BackendError(f"request {key} failed: {last_error}")
            if attempt < self._config.max_attempts:
                delay = self._config.backoff_base * (2 ** (attempt - 1))
                log.warning("request %s attempt %d failed (%s); retrying in %.1fs",
                            key, attempt, last_error, delay)
                self._sleep(delay)
        raise BackendError(
            f"request {key} failed after {self._config.max_attempts} attempts: {last_error}"
        )

    @staticmethod
    def _extract(parsed: Any, key: str) -> str:
        try:
            return parsed["choices"][0]["message"]["content"]
        except (TypeError, KeyError, IndexError):
            raise BackendError(f"malformed response body for request {key}") from None


def _error_detail(parsed: Any) -> str:
    if isinstance(parsed, dict):
        err = parsed.get("error")
        if isinstance(err, dict) and err.get("message"):
            return str(err["message"])
    text = str(parsed)
    return text[:200] if text else "no body"


class Cassette:
    """Ordered record of completion exchanges; one JSON document per run.

    Lookup is tag-first: the request key finds the entry, then the prompt
    digest is compared to catch template drift. A digest mismatch warns
    (or errors in strict mode); a missing key is always a hard error.
    """

    def __init__(self, meta: dict[str, Any] | None = None):
        self.meta: dict[str, Any] = dict(meta or {})
        self.entries: list[dict[str, Any]] = []
        self._by_key: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, request: CompletionRequest, response: str) -> None:
        entry = {
            "key": request.tag.key,
            "digest": prompt_digest(request),
            "request": request.body(),
            "response": response,
        }
        with self._lock:
            if entry["key"] in self._by_key:
                raise BackendError(f"duplicate cassette key {entry['key']!r}")
            self.entries.append(entry)
            self._by_key[entry["key"]] = entry

    def lookup(self, request: CompletionRequest, *, strict: bool = False) -> str:
        key = request.tag.key
        entry = self._by_key.get(key)
        if entry is None:
            raise CassetteMissError(key)
        digest = prompt_digest(request)
        if digest != entry["digest"]:
            if strict:
                raise BackendError(
                    f"prompt drift for request {key}: digest {digest[:12]} != recorded {entry['digest'][:12]}"
                )
            log.warning("prompt drift for request %s; serving recorded response anyway", key)
        return _require_text(entry["response"], key)

    def save(self, path: str | Path) -> None:
        doc = {"meta": self.meta, "entries": self.entries}
        text = json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        Path(path).write_text(text, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Cassette":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load cassette from {path}: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
            raise ConfigError(f"cassette file {path} has no entry list")
        cassette = cls(meta=doc.get("meta") or {})
        for entry in doc["entries"]:
            if not isinstance(entry, dict) or "key" not in entry or "response" not in entry:
                raise ConfigError(f"cassette file {path} has a malformed entry")
            if entry["key"] in cassette._by_key:
                raise ConfigError(f"cassette file {path} repeats key {entry['key']!r}")
            cassette.entries.append(entry)
            cassette._by_key[entry["key"]] = entry
        return cassette


class RecordBackend:
    """Forwards to an inner backend and captures each exchange."""

    def __init__(self, inner: Backend, cassette: Cassette | None = None):
        self.inner = inner
        self.cassette = cassette if cassette is not None else Cassette()

    def complete(self, request: CompletionRequest) -> str:
        text = self.inner.complete(request)
        self.cassette.append(request, text)
        return text


class ReplayBackend:
    """Serves a recorded cassette; never performs network activity."""

    def __init__(self, cassette: Cassette, *, strict: bool = False):
        self.cassette = cassette
        self._strict = strict

    def complete(self, request: CompletionRequest) -> str:
        return self.cassette.lookup(request, strict=self._strict)


def make_backend(
    config: BackendConfig,
    *,
    fixtures: Mapping[str, str] | None = None,
    transport: Transport | None = None,
    sleep: Callable[[float], None] = time.sleep,
    env: Mapping[str, str] | None = None,
) -> Backend:
    """Construct the backend the config asks for.

    Record mode returns a RecordBackend whose ``cassette`` attribute the
    caller persists at the end of the run.
    """
    config = validate_config(config)
    if config.mode is BackendMode.SCRIPTED:
        if fixtures is not None:
            return ScriptedBackend(fixtures)
        if config.fixtures_path:
            return ScriptedBackend.from_file(config.fixtures_path)
        raise ConfigError("scripted mode needs fixtures (mapping or fixtures_path)")
    if config.mode is BackendMode.HTTP:
        return HttpBackend(config, transport=transport, sleep=sleep, env=env)
    if config.mode is BackendMode.RECORD:
        inner = HttpBackend(config, transport=transport, sleep=sleep, env=env)
        return RecordBackend(inner)
    if config.mode is BackendMode.REPLAY:
        assert config.cassette_path is not None  # validate_config guarantees
        return ReplayBackend(Cassette.load(config.cassette_path), strict=config.strict_replay)
    raise ConfigError(f"unhandled backend mode {config.mode!r}")
