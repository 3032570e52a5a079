"""The dispatch engine that turns a one-line brief into an SRS.

Control flow is a single logical thread. Each dispatch cycle executes at
most one action, chosen in this order:

1. an open dialogue session advances by one turn;
2. otherwise the head of the work queue runs (review write-ups, refresh
   plans from the feedback loop);
3. otherwise the earliest unconsumed pool event is scanned against every
   agent in registration order, and the first eligible plan executes.

The event cursor only moves past an event once no agent is eligible on
it, so several actions may fire on one event across consecutive cycles.
After every executed action the whole run state is checkpointed to the
workspace, which is what makes kill-and-resume loss-free.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from . import __version__ as ENGINE_VERSION
from .agents import (
    ActionSpec,
    AgentRegistry,
    AgentSpec,
    FiringHistory,
    PlannerMode,
    _trigger_key,
    eligible_actions,
    execute_action,
    plan_next,
    render_prompt,
    resolve_inputs,
)
from .backend import (
    Backend,
    BackendConfig,
    BackendMode,
    RecordBackend,
    RequestTag,
    make_backend,
    validate_config,
)
from .builtin import (
    ANALYST,
    ARCHIVIST,
    DEPLOYER,
    END_USER,
    INTERVIEWER,
    REVIEWER,
    build_default_registry,
    check_run_env_guard,
    oel_postprocess,
    par_postprocess,
    srs_postprocess,
    title_postprocess,
    validator_for,
)
from .dialogue import (
    DEFAULT_INTERVIEW_ROUNDS,
    DEFAULT_REVIEW_ROUNDS,
    DialogueMove,
    DialogueSession,
    MoveKind,
    SessionKind,
    SessionState,
    open_session,
    render_transcript,
)
from .errors import ConfigError, DeadlockError, ReqForgeError
from .pool import Artifact, ArtifactKind, ArtifactPool, Change, PoolEvent
from .research import (
    FixtureResearchProvider,
    NullResearchProvider,
    ResearchProvider,
)
from .schema import DEFAULT_TITLES
from .workspace import RestoredRun, Workspace, load_run, make_run_id

__all__ = [
    "ENGINE_VERSION",
    "Engine",
    "RunConfig",
    "RunResult",
    "RunStatus",
    "Termination",
    "TraceEntry",
]

log = logging.getLogger(__name__)

# move kind -> responding action name (the asker side is fixed per session kind)
_RESPONSE_ACTION = {
    MoveKind.RESPOND: "StartRespond",
    MoveKind.RESPOND_TO_RECOMMEND: "RespondToRecommend",
    MoveKind.RESPOND_TO_REFLECTION: "RespondToReflection",
    MoveKind.REVIEW_ANSWER: "ReviewAnswer",
}

_ASK_ACTION = {SessionKind.INTERVIEW: "StartInterview", SessionKind.REVIEW: "ReviewAsk"}

# artifact kinds the feedback loop never re-produces: dialogue byproducts
# and the review/validation record of a superseded draft
_NO_REFRESH = frozenset(
    {
        ArtifactKind.BRIEF_DESCRIPTION,
        ArtifactKind.DIALOGUE_TRANSCRIPT,
        ArtifactKind.REVIEW_COMMENTS,
        ArtifactKind.VALIDATION_REPORT,
    }
)

_FEEDBACK_SCOPES = ("full", "revise-only")


class RunStatus(Enum):
    NEW = "New"
    RUNNING = "Running"
    PAUSED = "Paused"
    COMPLETED = "Completed"
    ABORTED = "Aborted"
    DEADLOCKED = "Deadlocked"


class Termination(Enum):
    CONTINUE = "Continue"
    DONE = "Done"
    DEADLOCK = "Deadlock"


@dataclass(frozen=True)
class TraceEntry:
    """One executed action: who did what, and what it committed (if anything)."""

    index: int
    agent: str
    action: str
    kind: str | None = None
    artifact_id: str | None = None
    version: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "agent": self.agent,
            "action": self.action,
            "kind": self.kind,
            "artifact_id": self.artifact_id,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TraceEntry":
        return cls(
            index=int(d["index"]),
            agent=d["agent"],
            action=d["action"],
            kind=d.get("kind"),
            artifact_id=d.get("artifact_id"),
            version=int(d["version"]) if d.get("version") is not None else None,
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs beyond the brief text itself."""

    interview_rounds: int = DEFAULT_INTERVIEW_ROUNDS
    review_rounds: int = DEFAULT_REVIEW_ROUNDS
    max_feedback_iterations: int = 1
    enable_classify: bool = False
    enable_check_run_env: bool = False
    feedback_scope: str = "full"
    research: str = "default"  # "default" | "none" | path to a fixture file
    workspace: str = "runs"
    interactive_end_user: bool = False
    planner_mode: PlannerMode = PlannerMode.RULE
    backend: BackendConfig = field(default_factory=BackendConfig)
    registry: AgentRegistry | None = None
    run_id: str | None = None
    max_actions: int | None = None

    def validate(self) -> "RunConfig":
        if self.interview_rounds < 1:
            raise ConfigError(f"interview_rounds must be >= 1, got {self.interview_rounds}")
        if self.review_rounds < 1:
            raise ConfigError(f"review_rounds must be >= 1, got {self.review_rounds}")
        if self.max_feedback_iterations < 0:
            raise ConfigError(
                f"max_feedback_iterations must be >= 0, got {self.max_feedback_iterations}"
            )
        if self.feedback_scope not in _FEEDBACK_SCOPES:
            raise ConfigError(
                f"feedback_scope must be one of {_FEEDBACK_SCOPES}, got {self.feedback_scope!r}"
            )
        if self.max_actions is not None and self.max_actions < 1:
            raise ConfigError(f"max_actions must be >= 1, got {self.max_actions}")
        return replace(self, backend=validate_config(self.backend))

    def snapshot_dict(self, registry: AgentRegistry) -> dict:
        """The digested part of the config: everything that shapes content.

        Backend mode and file locations are excluded on purpose so that a
        recording run and its replay share one config digest.
        """
        return {
            "engine_version": ENGINE_VERSION,
            "interview_rounds": self.interview_rounds,
            "review_rounds": self.review_rounds,
            "max_feedback_iterations": self.max_feedback_iterations,
            "enable_classify": self.enable_classify,
            "enable_check_run_env": self.enable_check_run_env,
            "feedback_scope": self.feedback_scope,
            "research": self.research,
            "interactive_end_user": self.interactive_end_user,
            "planner_mode": self.planner_mode.value,
            "model": {
                "model": self.backend.model,
                "temperature": self.backend.temperature,
                "top_p": self.backend.top_p,
                "max_tokens": self.backend.max_tokens,
                "frequency_penalty": self.backend.frequency_penalty,
                "presence_penalty": self.backend.presence_penalty,
            },
            "registry": registry.to_dict(),
        }

    def volatile_dict(self) -> dict:
        return {
            "mode": self.backend.mode.value,
            "base_url": self.backend.base_url,
            "api_key_env": self.backend.api_key_env,
            "max_attempts": self.backend.max_attempts,
            "backoff_base": self.backend.backoff_base,
            "timeout": self.backend.timeout,
            "fixtures_path": self.backend.fixtures_path,
            "cassette_path": self.backend.cassette_path,
            "strict_replay": self.backend.strict_replay,
            "workspace": str(self.workspace),
            "max_actions": self.max_actions,
        }


@dataclass
class RunResult:
    status: RunStatus
    run_id: str
    run_dir: Path
    manifest_path: Path
    srs: tuple[str, int] | None
    trace: list[TraceEntry]
    error: str | None = None


def _default_fixtures_path() -> Path:
    return Path(__file__).parent / "data" / "fixtures" / "golden.json"


def build_research_provider(selection: str) -> ResearchProvider:
    if selection == "none":
        return NullResearchProvider()
    if selection == "default":
        return FixtureResearchProvider.default()
    return FixtureResearchProvider.from_file(selection)


class Engine:
    """Owns one run: pool, registry, backend, workspace, and scheduler state."""

    def __init__(
        self,
        config: RunConfig,
        *,
        fixtures: Mapping[str, str] | None = None,
        transport: Callable | None = None,
        env: Mapping[str, str] | None = None,
        sleep: Callable[[float], None] | None = None,
        input_fn: Callable[[str], str] | None = None,
    ):
        self.config = config.validate()
        self.registry = self.config.registry or build_default_registry(
            review_rounds=self.config.review_rounds,
            max_feedback_iterations=self.config.max_feedback_iterations,
            enable_classify=self.config.enable_classify,
            enable_check_run_env=self.config.enable_check_run_env,
            planner_mode=self.config.planner_mode,
        )
        self.provider = build_research_provider(self.config.research)
        self.run_id = self.config.run_id or make_run_id()
        self.ws = Workspace(self.config.workspace, self.run_id)

        backend_cfg = self.config.backend
        if backend_cfg.mode is BackendMode.SCRIPTED and fixtures is None and not backend_cfg.fixtures_path:
            backend_cfg = replace(backend_cfg, fixtures_path=str(_default_fixtures_path()))
        if backend_cfg.mode is BackendMode.RECORD and not backend_cfg.cassette_path:
            backend_cfg = replace(backend_cfg, cassette_path=str(self.ws.cassette_path()))
        self.backend_config = backend_cfg
        kwargs: dict[str, Any] = {"fixtures": fixtures, "transport": transport, "env": env}
        if sleep is not None:
            kwargs["sleep"] = sleep
        self.backend: Backend = make_backend(backend_cfg, **kwargs)
        self._input_fn = input_fn if input_fn is not None else input

        self.pool = ArtifactPool()
        self.history = FiringHistory()
        self.cursor = 0
        self.work_queue: list[dict] = []
        self.session: DialogueSession | None = None
        self.session_meta: dict | None = None
        self.sessions: list[dict] = []
        self.session_counters: dict[str, int] = {}
        self.request_steps: dict[str, int] = {}
        self.refresh_used: dict[str, int] = {}
        self.scratch: dict[str, str] = {}
        self.trace: list[TraceEntry] = []
        self.status = RunStatus.NEW
        self.config_digest = ""

    # -- plumbing ----------------------------------------------------------

    def _tagger(self, agent: str, action: str) -> Callable[[], RequestTag]:
        key = f"{agent}/{action}"

        def next_tag() -> RequestTag:
            self.request_steps[key] = self.request_steps.get(key, 0) + 1
            return RequestTag(agent=agent, action=action, step=self.request_steps[key])

        return next_tag

    def _postprocess_for(self, action: ActionSpec) -> Callable[[str], str] | None:
        name = action.name
        if name == "ConductResearch":
            brief = self.pool.latest(ArtifactKind.BRIEF_DESCRIPTION)
            query = brief.content if brief else ""
            return par_postprocess(self.provider, query)
        if name == "WriteRunEnv":
            return oel_postprocess(self.scratch.get("run_env_findings"))
        if name == "WriteReqSpecs":
            oel = self.pool.latest(ArtifactKind.OPERATING_ENVIRONMENT_LIST)
            srl = self.pool.latest(ArtifactKind.SYSTEM_REQUIREMENTS_LIST)
            rm = self.pool.latest(ArtifactKind.REQUIREMENTS_MODEL)
            return srs_postprocess(
                oel.content if oel else "",
                srl.content if srl else "",
                rm.content if rm else "",
            )
        if action.produces is not None:
            return title_postprocess(action.produces)
        return None

    def _log_dispatch(self, agent: str, action: str, produced: str) -> None:
        log.info("dispatch %d %s/%s -> %s", len(self.trace), agent, action, produced)

    def _record(self, agent: str, action: str, artifact: Artifact | None) -> None:
        self.trace.append(
            TraceEntry(
                index=len(self.trace) + 1,
                agent=agent,
                action=action,
                kind=artifact.kind.value if artifact else None,
                artifact_id=artifact.id if artifact else None,
                version=artifact.version if artifact else None,
            )
        )
        self.history.record_execution(action)
        self._log_dispatch(
            agent, action, f"{artifact.id} v{artifact.version}" if artifact else "(no artifact)"
        )

    # -- artifact-producing actions -----------------------------------------

    def _execute_artifact_action(
        self,
        role: str,
        action: ActionSpec,
        *,
        extra: Mapping[str, str] | None = None,
        updates: str | None = None,
    ) -> Artifact:
        agent = self.registry.agent(role)
        inputs = resolve_inputs(action, self.pool)
        draft = execute_action(
            agent,
            action,
            inputs,
            self.backend,
            self.backend_config,
            self._tagger(role, action.name),
            extra=extra,
            postprocess=self._postprocess_for(action),
            validator=validator_for(action, self.pool),
        )
        target_id = updates
        if target_id is None and action.updates_existing:
            existing = self.pool.latest(action.produces)
            target_id = existing.id if existing else None
        if target_id is not None:
            # a fresh version also clears the target's stale flag
            artifact, _ = self.pool.update(
                target_id,
                draft.content,
                producer=role,
                producing_action=action.name,
                inputs=draft.provenance,
            )
        else:
            artifact, _ = self.pool.add(
                draft.kind,
                draft.content,
                producer=role,
                producing_action=action.name,
                inputs=draft.provenance,
                title=draft.title,
            )
        self._record(role, action.name, artifact)
        return artifact

    def _execute_side_effect_action(self, role: str, action: ActionSpec) -> None:
        """Actions without an output artifact park their reply in scratch."""
        agent = self.registry.agent(role)
        if action.name == "CheckRunEnvReq":
            url = self.pool.latest(ArtifactKind.USER_REQUIREMENTS_LIST)
            check_run_env_guard(url.content if url else "")
        inputs = resolve_inputs(action, self.pool)
        rendered = render_prompt(action, agent, inputs, None)
        reply = self.backend.complete(
            self.backend_config.request(rendered.messages, self._tagger(role, action.name)())
        )
        self.scratch["run_env_findings" if action.name == "CheckRunEnvReq" else action.name] = reply
        self._record(role, action.name, None)

    # -- dialogue sessions ---------------------------------------------------

    def _open_dialogue(self, role: str, action: ActionSpec) -> None:
        kind = SessionKind.INTERVIEW if action.opens_session == "interview" else SessionKind.REVIEW
        n = self.session_counters.get(action.opens_session, 0) + 1
        self.session_counters[action.opens_session] = n
        if kind is SessionKind.INTERVIEW:
            participants = (INTERVIEWER, END_USER)
            max_rounds = self.config.interview_rounds
        else:
            participants = (REVIEWER, INTERVIEWER, ANALYST, DEPLOYER, END_USER)
            max_rounds = self.config.review_rounds
        inputs = resolve_inputs(action, self.pool)
        self.session = open_session(
            kind, participants, max_rounds, session_id=f"{action.opens_session}-{n}"
        )
        self.session_meta = {
            "ask_action": action.name,
            "input_refs": [list(a.ref) for a in inputs],
        }

    def _session_inputs(self, action: ActionSpec, is_asker: bool) -> list[Artifact]:
        if is_asker:
            assert self.session_meta is not None
            return [self.pool.get(i, int(v)) for i, v in self.session_meta["input_refs"]]
        if action.consumes:
            return resolve_inputs(action, self.pool)
        return []

    def _session_extra(self, session: DialogueSession, move_kind: MoveKind) -> dict[str, str]:
        transcript = render_transcript(session) if session.turns else "(no turns yet)"
        extra = {
            "round": str(session.current_round),
            "max_rounds": str(session.max_rounds),
            "move_kind": move_kind.value,
            "transcript": transcript,
        }
        if session.turns and len(session.turns) % 2 == 1:
            extra["ask"] = session.turns[-1].content
        if session.kind is SessionKind.REVIEW:
            extra["participant"] = session.reviewee(session.current_round)
            extra["role"] = session.next_speaker()
        return extra

    def _session_turn(self) -> None:
        session = self.session
        assert session is not None and self.session_meta is not None
        speaker = session.next_speaker()
        move_kind = session.expected_move_kind()
        is_asker = speaker == session.asker
        action_name = (
            self.session_meta["ask_action"] if is_asker else _RESPONSE_ACTION[move_kind]
        )
        agent = self.registry.agent(speaker)
        action = agent.action(action_name)

        interactive = (
            self.config.interactive_end_user
            and session.kind is SessionKind.INTERVIEW
            and speaker == END_USER
        )
        if interactive:
            ask = session.turns[-1].content if session.turns else ""
            print(f"\n[{session.id} round {session.current_round}] {ask}", file=sys.stderr)
            content = self._input_fn(f"{END_USER}> ")
        else:
            inputs = self._session_inputs(action, is_asker)
            extra = self._session_extra(session, move_kind)
            rendered = render_prompt(action, agent, inputs, extra)
            content = self.backend.complete(
                self.backend_config.request(
                    rendered.messages, self._tagger(speaker, action_name)()
                )
            )
        session.append(
            DialogueMove(
                speaker=speaker,
                move_kind=move_kind,
                content=content,
                round=session.current_round,
            )
        )
        self._record(speaker, action_name, None)
        if session.state is SessionState.CLOSED:
            self._close_dialogue()

    def _close_dialogue(self) -> None:
        session = self.session
        assert session is not None and self.session_meta is not None
        transcript = session.close()
        transcript_path = self.ws.write_transcript(session.id, transcript)
        committed: str | None = None
        if session.kind is SessionKind.INTERVIEW:
            artifact, _ = self.pool.add(
                ArtifactKind.DIALOGUE_TRANSCRIPT,
                transcript,
                producer=session.asker,
                producing_action=self.session_meta["ask_action"],
                inputs=tuple((i, int(v)) for i, v in self.session_meta["input_refs"]),
                title=DEFAULT_TITLES[ArtifactKind.DIALOGUE_TRANSCRIPT],
            )
            committed = artifact.id
        else:
            for round_no in range(1, session.completed_rounds + 1):
                ask = session.turns[2 * round_no - 2]
                answer = session.turns[2 * round_no - 1]
                exchange = (
                    f"{ask.speaker}: {ask.content}\n\n{answer.speaker}: {answer.content}"
                )
                self.work_queue.append(
                    {
                        "type": "action",
                        "agent": REVIEWER,
                        "action": "WriteReviewComs",
                        "extra": {
                            "round": str(round_no),
                            "participant": session.reviewee(round_no),
                            "exchange": exchange,
                        },
                    }
                )
            if session.completed_rounds < session.max_rounds:
                # early-terminated review: the round-count gate on the
                # validation report can never be met, so queue it directly
                self.work_queue.append(
                    {"type": "action", "agent": REVIEWER, "action": "WriteValidReport"}
                )
        self.sessions.append(
            {
                "session": session.to_dict(),
                "meta": self.session_meta,
                "transcript_path": transcript_path,
                "committed": committed,
                "active": False,
            }
        )
        self.session = None
        self.session_meta = None

    # -- work queue ----------------------------------------------------------

    def _run_queue_item(self, item: dict) -> None:
        role = item["agent"]
        action = self.registry.agent(role).action(item["action"])
        if item.get("type") == "refresh":
            self._execute_artifact_action(role, action, updates=item["updates"])
        else:
            self._execute_artifact_action(role, action, extra=item.get("extra"))

    # -- dispatch --------------------------------------------------------------

    def dispatch_once(self) -> bool:
        """Execute at most one action; returns whether anything ran."""
        if self.session is not None:
            self._session_turn()
            return True
        if self.work_queue:
            item = self.work_queue.pop(0)
            self._run_queue_item(item)
            return True
        snap = self.pool.snapshot()
        event = self.pool.next_event(self.cursor)
        while event is not None:
            for agent in self.registry.agents:
                candidates = eligible_actions(agent, snap, event, self.history)
                chosen = self._plan(agent, candidates)
                if chosen is None:
                    continue
                key = _trigger_key(chosen.trigger, snap, event) if chosen.trigger else None
                self.history.record_firing(agent.role, chosen.name, key)
                if chosen.opens_session:
                    self._open_dialogue(agent.role, chosen)
                    self._session_turn()
                elif chosen.produces is None:
                    self._execute_side_effect_action(agent.role, chosen)
                else:
                    self._execute_artifact_action(agent.role, chosen)
                return True
            self.cursor = event.seq
            event = self.pool.next_event(self.cursor)
        return False

    def _plan(self, agent: AgentSpec, candidates: Sequence[ActionSpec]) -> ActionSpec | None:
        if not candidates:
            return None
        if agent.planner_mode is PlannerMode.RULE:
            return plan_next(agent, candidates)
        return plan_next(
            agent,
            candidates,
            backend=self.backend,
            config=self.backend_config,
            tagger=self._tagger(agent.role, "Plan"),
        )

    # -- termination -------------------------------------------------------------

    def check_termination(self) -> Termination:
        if (
            self.session is not None
            or self.work_queue
            or self.pool.next_event(self.cursor) is not None
        ):
            return Termination.CONTINUE
        srs = self.pool.latest(ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION)
        vr = self.pool.latest(ArtifactKind.VALIDATION_REPORT)
        if srs is not None and vr is not None and self._srs_settled(srs):
            return Termination.DONE
        return Termination.DEADLOCK

    def _srs_settled(self, srs: Artifact) -> bool:
        if not self.pool.is_stale(srs.id):
            return True
        producer = self.pool.get(srs.id).producing_action
        return self.refresh_used.get(producer, 0) >= self.config.max_feedback_iterations

    def _deadlock_diagnostic(self) -> str:
        chain = [
            ArtifactKind.PRODUCT_ANALYSIS_REPORT,
            ArtifactKind.INTERVIEW_QUESTION_LIST,
            ArtifactKind.DIALOGUE_TRANSCRIPT,
            ArtifactKind.USER_REQUIREMENTS_LIST,
            ArtifactKind.INTERVIEW_RECORD,
            ArtifactKind.OPERATING_ENVIRONMENT_LIST,
            ArtifactKind.SYSTEM_REQUIREMENTS_LIST,
            ArtifactKind.REQUIREMENTS_MODEL,
            ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION,
            ArtifactKind.REVIEW_COMMENTS,
            ArtifactKind.VALIDATION_REPORT,
        ]
        snap = self.pool.snapshot()
        missing = [k.value for k in chain if not snap.has(k)]
        reasons = []
        for agent in self.registry.agents:
            for action in agent.actions:
                t = action.trigger
                if t is None or action.produces is None:
                    continue
                if action.produces.value not in missing:
                    continue
                why = []
                for k in sorted(t.requires_present, key=lambda k: k.value):
                    if not snap.has(k):
                        why.append(f"needs {k.value} present")
                if t.requires_executions:
                    name, minimum = t.requires_executions
                    have = self.history.executions(name)
                    if have < minimum:
                        why.append(f"needs {name} executed {minimum}x (have {have})")
                if t.on_event is not None:
                    why.append(f"waits for {t.on_event[0].value}({t.on_event[1].value})")
                reasons.append(f"{agent.role}/{action.name}: " + "; ".join(why))
        detail = "; ".join(reasons) if reasons else "no producer is registered for them"
        return (
            f"dispatch stalled at event {self.cursor} with the pipeline incomplete. "
            f"Missing artifact kinds: {', '.join(missing) or '(none)'}. "
            f"Blocked producers: {detail}"
        )

    # -- feedback loop --------------------------------------------------------

    def handle_update(self, event: PoolEvent) -> list[dict]:
        """React to a manual artifact update: propagate staleness, plan refreshes.

        Returns the refresh items actually scheduled (budget permitting).
        Engine-produced revisions never come through here; only explicit
        update calls do, which is what keeps the loop bounded.
        """
        if event.change is not Change.UPDATED:
            raise ConfigError(f"handle_update expects an Updated event, got {event.change.value}")
        self.pool.mark_stale_downstream(event.artifact_id)
        scheduled: list[dict] = []
        srs = self.pool.latest(ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION)
        for artifact_id in self.pool.ids():
            if not self.pool.is_stale(artifact_id):
                continue
            head = self.pool.get(artifact_id)
            if head.kind in _NO_REFRESH:
                continue
            if self.config.feedback_scope == "revise-only" and (
                srs is None or artifact_id != srs.id
            ):
                continue
            action_name = head.producing_action
            used = self.refresh_used.get(action_name, 0)
            if used >= self.config.max_feedback_iterations:
                log.warning(
                    "feedback budget exhausted for %s (%d used); %s stays stale",
                    action_name,
                    used,
                    artifact_id,
                )
                continue
            self.refresh_used[action_name] = used + 1
            item = {
                "type": "refresh",
                "agent": head.producer,
                "action": action_name,
                "updates": artifact_id,
            }
            self.work_queue.append(item)
            scheduled.append(item)
        return scheduled

    def apply_update(
        self,
        artifact_id: str,
        new_content: str,
        *,
        producer: str = "Human",
        producing_action: str = "ManualUpdate",
    ) -> list[dict]:
        """Commit a manual edit and run the staleness/refresh machinery."""
        _, event = self.pool.update(
            artifact_id, new_content, producer=producer, producing_action=producing_action
        )
        scheduled = self.handle_update(event)
        self.checkpoint()
        return scheduled

    # -- persistence ------------------------------------------------------------

    def _manifest_dict(self) -> dict:
        sessions = list(self.sessions)
        if self.session is not None:
            sessions = sessions + [
                {
                    "session": self.session.to_dict(),
                    "meta": self.session_meta,
                    "transcript_path": None,
                    "committed": None,
                    "active": True,
                }
            ]
        return {
            "run_id": self.run_id,
            "engine_version": ENGINE_VERSION,
            "status": self.status.value,
            "config_digest": self.config_digest,
            "events": [e.to_dict() for e in self.pool.events()],
            "artifacts": self.ws.persist_pool(self.pool),
            "trace": [t.to_dict() for t in self.trace],
            "sessions": sessions,
            "engine_state": {
                "cursor": self.cursor,
                "work_queue": self.work_queue,
                "request_steps": self.request_steps,
                "firing_history": self.history.to_dict(),
                "refresh_used": self.refresh_used,
                "scratch": self.scratch,
                "session_counters": self.session_counters,
            },
        }

    def checkpoint(self) -> None:
        self.ws.write_manifest(self._manifest_dict())
        if isinstance(self.backend, RecordBackend) and self.backend_config.cassette_path:
            self.backend.cassette.save(self.backend_config.cassette_path)

    def _result(self, error: str | None = None) -> RunResult:
        srs = self.pool.latest(ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION)
        return RunResult(
            status=self.status,
            run_id=self.run_id,
            run_dir=self.ws.run_dir,
            manifest_path=self.ws.manifest_path,
            srs=srs.ref if srs else None,
            trace=list(self.trace),
            error=error,
        )

    # -- top-level control -------------------------------------------------------

    def run(self, brief_text: str) -> RunResult:
        if self.status is not RunStatus.NEW:
            raise ConfigError(f"run() on a {self.status.value} engine; use continue_run()")
        if not brief_text or not brief_text.strip():
            raise ConfigError("brief text is empty; nothing to develop")
        self.ws.initialize()
        self.config_digest = self.ws.write_config_snapshot(
            self.config.snapshot_dict(self.registry), self.config.volatile_dict()
        )
        self.status = RunStatus.RUNNING
        self.pool.add(
            ArtifactKind.BRIEF_DESCRIPTION,
            brief_text,
            producer="Human",
            producing_action="ProvideBrief",
            title=DEFAULT_TITLES[ArtifactKind.BRIEF_DESCRIPTION],
        )
        self.checkpoint()
        return self._drain()

    def continue_run(self) -> RunResult:
        """Pick the run back up after a pause, resume, or manual update."""
        if self.status in (RunStatus.COMPLETED, RunStatus.ABORTED, RunStatus.DEADLOCKED):
            if self.check_termination() is Termination.CONTINUE:
                self.status = RunStatus.RUNNING
            else:
                return self._result()
        else:
            self.status = RunStatus.RUNNING
        return self._drain()

    def _drain(self) -> RunResult:
        while True:
            if (
                self.config.max_actions is not None
                and len(self.trace) >= self.config.max_actions
            ):
                self.status = RunStatus.PAUSED
                self.checkpoint()
                return self._result()
            try:
                progressed = self.dispatch_once()
            except ReqForgeError as exc:
                self.status = RunStatus.ABORTED
                self.checkpoint()
                log.error("run aborted: %s", exc)
                return self._result(error=f"{type(exc).__name__}: {exc}")
            if progressed:
                self.checkpoint()
                continue
            term = self.check_termination()
            if term is Termination.DONE:
                self.status = RunStatus.COMPLETED
                self.checkpoint()
                return self._result()
            diagnostic = self._deadlock_diagnostic()
            self.status = RunStatus.DEADLOCKED
            self.checkpoint()
            raise DeadlockError(diagnostic)

    # -- resume --------------------------------------------------------------

    @classmethod
    def resume(
        cls,
        workspace: str | Path,
        run_id: str,
        *,
        fixtures: Mapping[str, str] | None = None,
        transport: Callable | None = None,
        env: Mapping[str, str] | None = None,
        sleep: Callable[[float], None] | None = None,
        input_fn: Callable[[str], str] | None = None,
        backend_overrides: Mapping[str, Any] | None = None,
        max_actions: int | None = None,
    ) -> "Engine":
        """Rebuild an engine from a run directory, ready to continue_run()."""
        restored = load_run(workspace, run_id)
        config = _config_from_snapshot(
            restored, workspace=str(workspace), backend_overrides=backend_overrides
        )
        if max_actions is not None:
            config = replace(config, max_actions=max_actions)
        engine = cls(
            config,
            fixtures=fixtures,
            transport=transport,
            env=env,
            sleep=sleep,
            input_fn=input_fn,
        )
        engine._hydrate(restored)
        return engine

    def _hydrate(self, restored: RestoredRun) -> None:
        manifest = restored.manifest
        self.pool = restored.pool
        self.config_digest = manifest.get("config_digest", "")
        self.status = RunStatus(manifest.get("status", "Paused"))
        state = manifest.get("engine_state", {})
        self.cursor = int(state.get("cursor", 0))
        self.work_queue = list(state.get("work_queue", []))
        self.request_steps = {k: int(v) for k, v in state.get("request_steps", {}).items()}
        self.history = FiringHistory.from_dict(state.get("firing_history", {}))
        self.refresh_used = {k: int(v) for k, v in state.get("refresh_used", {}).items()}
        self.scratch = dict(state.get("scratch", {}))
        self.session_counters = {
            k: int(v) for k, v in state.get("session_counters", {}).items()
        }
        self.trace = [TraceEntry.from_dict(t) for t in manifest.get("trace", [])]
        self.sessions = [s for s in manifest.get("sessions", []) if not s.get("active")]
        self.session = None
        self.session_meta = None
        for entry in manifest.get("sessions", []):
            if entry.get("active"):
                self.session = DialogueSession.from_dict(entry["session"])
                self.session_meta = entry.get("meta")


def _config_from_snapshot(
    restored: RestoredRun,
    *,
    workspace: str,
    backend_overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    snap = restored.snapshot
    vol = dict(restored.volatile)
    if backend_overrides:
        vol.update(backend_overrides)
    model = snap.get("model", {})
    backend = BackendConfig(
        mode=BackendMode.parse(str(vol.get("mode", "scripted"))),
        base_url=vol.get("base_url", BackendConfig.base_url),
        api_key_env=vol.get("api_key_env", BackendConfig.api_key_env),
        model=model.get("model", BackendConfig.model),
        temperature=model.get("temperature", BackendConfig.temperature),
        top_p=model.get("top_p", BackendConfig.top_p),
        max_tokens=model.get("max_tokens", BackendConfig.max_tokens),
        frequency_penalty=model.get("frequency_penalty", BackendConfig.frequency_penalty),
        presence_penalty=model.get("presence_penalty", BackendConfig.presence_penalty),
        max_attempts=vol.get("max_attempts", BackendConfig.max_attempts),
        backoff_base=vol.get("backoff_base", BackendConfig.backoff_base),
        timeout=vol.get("timeout", BackendConfig.timeout),
        fixtures_path=vol.get("fixtures_path"),
        cassette_path=vol.get("cassette_path"),
        strict_replay=bool(vol.get("strict_replay", False)),
    )
    registry = AgentRegistry.from_dict(snap["registry"]) if "registry" in snap else None
    return RunConfig(
        interview_rounds=int(snap.get("interview_rounds", DEFAULT_INTERVIEW_ROUNDS)),
        review_rounds=int(snap.get("review_rounds", DEFAULT_REVIEW_ROUNDS)),
        max_feedback_iterations=int(snap.get("max_feedback_iterations", 1)),
        enable_classify=bool(snap.get("enable_classify", False)),
        enable_check_run_env=bool(snap.get("enable_check_run_env", False)),
        feedback_scope=snap.get("feedback_scope", "full"),
        research=snap.get("research", "default"),
        workspace=workspace,
        interactive_end_user=bool(snap.get("interactive_end_user", False)),
        planner_mode=PlannerMode(snap.get("planner_mode", "rule")),
        backend=backend,
        registry=registry,
        run_id=restored.run_id,
    )
