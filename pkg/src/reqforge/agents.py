"""Agent model: roles, actions, trigger rules, prompts, and execution.

An agent is a role with a functionality blurb, an ordered list of actions,
attached knowledge bundles, and a planning mode. Trigger evaluation is a
pure function of (snapshot, event, firing history), so rule-mode planning
is deterministic by construction. Action execution renders a knowledge-
injected prompt, calls the completion backend, and wraps the reply into a
draft the orchestrator commits to the pool.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

from .backend import Backend, BackendConfig, RequestTag
from .errors import BackendError, ConfigError, PromptRenderError, ProtocolError, ValidationFailure
from .pool import Artifact, ArtifactKind, ArtifactPool, Change, PoolEvent, PoolSnapshot
from .schema import DEFAULT_TITLES, document_title

__all__ = [
    "ROLE_ORDER",
    "PlannerMode",
    "FiresAtMost",
    "KnowledgeKind",
    "KnowledgeBundle",
    "TriggerRule",
    "ActionSpec",
    "AgentSpec",
    "AgentRegistry",
    "FiringHistory",
    "RenderedPrompt",
    "Draft",
    "eligible_actions",
    "plan_next",
    "resolve_inputs",
    "render_prompt",
    "execute_action",
]

log = logging.getLogger(__name__)

# fixed registration order; simultaneous eligibility resolves in this order
ROLE_ORDER = ("Interviewer", "EndUser", "Deployer", "Analyst", "Archivist", "Reviewer")


class PlannerMode(Enum):
    RULE = "rule"
    LLM_ASSISTED = "llm"


class FiresAtMost(Enum):
    ONCE = "once"
    PER_NEW_VERSION = "per_new_version"


class KnowledgeKind(Enum):
    RESEARCH_TEMPLATE = "ResearchTemplate"
    REQUIREMENTS_TEMPLATE = "RequirementsTemplate"
    SRS_TEMPLATE = "SrsTemplate"
    DOMAIN_KNOWLEDGE = "DomainKnowledge"
    PERSONA_PROFILE = "PersonaProfile"
    REVIEW_GUIDELINE = "ReviewGuideline"


@dataclass(frozen=True)
class KnowledgeBundle:
    id: str
    kind: KnowledgeKind
    body: str
    source: str = ""

    def __post_init__(self) -> None:
        if not self.body.strip():
            raise ConfigError(f"knowledge bundle {self.id!r} has an empty body")

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "kind": self.kind.value, "body": self.body, "source": self.source}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "KnowledgeBundle":
        return cls(
            id=d["id"],
            kind=KnowledgeKind(d["kind"]),
            body=d["body"],
            source=d.get("source", ""),
        )


@dataclass(frozen=True)
class TriggerRule:
    """When an action becomes eligible.

    ``on_event`` filters on the (change, kind) of the event under scan;
    without it the rule is presence-only and can pass on any event, which
    lets an action fire on a later pass once its inputs have all arrived.
    ``requires_executions`` gates on another action having completed at
    least N times. ``max_firings`` caps total firings (1 is implied by
    fires_at_most=Once).
    """

    requires_present: frozenset[ArtifactKind] = frozenset()
    requires_absent: frozenset[ArtifactKind] = frozenset()
    on_event: tuple[Change, ArtifactKind] | None = None
    fires_at_most: FiresAtMost = FiresAtMost.ONCE
    max_firings: int | None = None
    requires_executions: tuple[str, int] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "requires_present": sorted(k.value for k in self.requires_present),
            "requires_absent": sorted(k.value for k in self.requires_absent),
            "on_event": [self.on_event[0].value, self.on_event[1].value] if self.on_event else None,
            "fires_at_most": self.fires_at_most.value,
            "max_firings": self.max_firings,
            "requires_executions": list(self.requires_executions) if self.requires_executions else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TriggerRule":
        on_event = d.get("on_event")
        reqx = d.get("requires_executions")
        return cls(
            requires_present=frozenset(ArtifactKind(k) for k in d.get("requires_present", ())),
            requires_absent=frozenset(ArtifactKind(k) for k in d.get("requires_absent", ())),
            on_event=(Change(on_event[0]), ArtifactKind(on_event[1])) if on_event else None,
            fires_at_most=FiresAtMost(d.get("fires_at_most", "once")),
            max_firings=d.get("max_firings"),
            requires_executions=(reqx[0], int(reqx[1])) if reqx else None,
        )


@dataclass(frozen=True)
class ActionSpec:
    """One predefined capability of an agent.

    ``produces`` is a single artifact kind; None marks dialogue-turn
    actions whose output is a move inside a session, not a commit.
    ``trigger`` None means the action never self-triggers (it is run by a
    session or scheduled explicitly). ``consume_all_of`` widens input
    resolution from the latest artifact of a kind to every artifact of it.
    ``updates_existing`` commits the draft as a new version of the latest
    artifact of the produced kind instead of adding a fresh artifact.
    """

    name: str
    prompt_template: str
    consumes: tuple[ArtifactKind, ...] = ()
    produces: ArtifactKind | None = None
    trigger: TriggerRule | None = None
    priority: int = 100
    session_bound: bool = False
    opens_session: str | None = None  # "interview" | "review"
    consume_all_of: frozenset[ArtifactKind] = frozenset()
    updates_existing: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("action needs a name")
        if self.opens_session not in (None, "interview", "review"):
            raise ConfigError(f"action {self.name!r}: unknown session kind {self.opens_session!r}")
        extra = self.consume_all_of - set(self.consumes)
        if extra:
            names = ", ".join(sorted(k.value for k in extra))
            raise ConfigError(f"action {self.name!r}: consume_all_of kinds not in consumes: {names}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "prompt_template": self.prompt_template,
            "consumes": [k.value for k in self.consumes],
            "produces": self.produces.value if self.produces else None,
            "trigger": self.trigger.to_dict() if self.trigger else None,
            "priority": self.priority,
            "session_bound": self.session_bound,
            "opens_session": self.opens_session,
            "consume_all_of": sorted(k.value for k in self.consume_all_of),
            "updates_existing": self.updates_existing,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ActionSpec":
        return cls(
            name=d["name"],
            prompt_template=d["prompt_template"],
            consumes=tuple(ArtifactKind(k) for k in d.get("consumes", ())),
            produces=ArtifactKind(d["produces"]) if d.get("produces") else None,
            trigger=TriggerRule.from_dict(d["trigger"]) if d.get("trigger") else None,
            priority=int(d.get("priority", 100)),
            session_bound=bool(d.get("session_bound", False)),
            opens_session=d.get("opens_session"),
            consume_all_of=frozenset(ArtifactKind(k) for k in d.get("consume_all_of", ())),
            updates_existing=bool(d.get("updates_existing", False)),
        )


@dataclass(frozen=True)
class AgentSpec:
    role: str
    functionality: str
    actions: tuple[ActionSpec, ...]
    knowledge: tuple[KnowledgeBundle, ...] = ()
    planner_mode: PlannerMode = PlannerMode.RULE

    def __post_init__(self) -> None:
        names = [a.name for a in self.actions]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ConfigError(f"agent {self.role!r} repeats action name(s): {', '.join(dupes)}")

    def action(self, name: str) -> ActionSpec:
        for a in self.actions:
            if a.name == name:
                return a
        raise ConfigError(f"agent {self.role!r} has no action {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "functionality": self.functionality,
            "planner_mode": self.planner_mode.value,
            "knowledge": [k.to_dict() for k in self.knowledge],
            "actions": [a.to_dict() for a in self.actions],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AgentSpec":
        return cls(
            role=d["role"],
            functionality=d["functionality"],
            actions=tuple(ActionSpec.from_dict(a) for a in d.get("actions", ())),
            knowledge=tuple(KnowledgeBundle.from_dict(k) for k in d.get("knowledge", ())),
            planner_mode=PlannerMode(d.get("planner_mode", "rule")),
        )


class AgentRegistry:
    """Ordered, immutable collection of agents; order breaks eligibility ties."""

    def __init__(self, agents: Sequence[AgentSpec]):
        roles = [a.role for a in agents]
        if len(roles) != len(set(roles)):
            dupes = sorted({r for r in roles if roles.count(r) > 1})
            raise ConfigError(f"registry repeats role(s): {', '.join(dupes)}")
        self._agents = tuple(agents)
        self._by_role = {a.role: a for a in self._agents}

    @property
    def agents(self) -> tuple[AgentSpec, ...]:
        return self._agents

    def __iter__(self):
        return iter(self._agents)

    def __len__(self) -> int:
        return len(self._agents)

    def agent(self, role: str) -> AgentSpec:
        try:
            return self._by_role[role]
        except KeyError:
            raise ConfigError(f"no agent registered for role {role!r}") from None

    def action(self, role: str, name: str) -> ActionSpec:
        return self.agent(role).action(name)

    def to_dict(self) -> dict[str, Any]:
        return {"agents": [a.to_dict() for a in self._agents]}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AgentRegistry":
        return cls([AgentSpec.from_dict(a) for a in d.get("agents", ())])


class FiringHistory:
    """Mutable record of trigger firings and completed executions.

    Firings count the moments a trigger passed and its action was chosen;
    executions count completed runs (one action execution may take several
    backend calls). Both feed back into trigger evaluation.
    """

    def __init__(self) -> None:
        self._firings: dict[tuple[str, str], int] = {}
        self._fired_keys: dict[tuple[str, str], set[tuple[str, int]]] = {}
        self._executions: dict[str, int] = {}

    def firings(self, role: str, action: str) -> int:
        return self._firings.get((role, action), 0)

    def fired_for(self, role: str, action: str, key: tuple[str, int]) -> bool:
        return key in self._fired_keys.get((role, action), ())

    def record_firing(self, role: str, action: str, key: tuple[str, int] | None = None) -> None:
        slot = (role, action)
        self._firings[slot] = self._firings.get(slot, 0) + 1
        if key is not None:
            self._fired_keys.setdefault(slot, set()).add(key)

    def executions(self, action: str) -> int:
        return self._executions.get(action, 0)

    def record_execution(self, action: str) -> None:
        self._executions[action] = self._executions.get(action, 0) + 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "firings": [[role, action, n] for (role, action), n in sorted(self._firings.items())],
            "fired_keys": [
                [role, action, sorted([list(k) for k in keys])]
                for (role, action), keys in sorted(self._fired_keys.items())
            ],
            "executions": dict(sorted(self._executions.items())),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FiringHistory":
        hist = cls()
        for role, action, n in d.get("firings", ()):
            hist._firings[(role, action)] = int(n)
        for role, action, keys in d.get("fired_keys", ()):
            hist._fired_keys[(role, action)] = {(k[0], int(k[1])) for k in keys}
        hist._executions = {k: int(v) for k, v in d.get("executions", {}).items()}
        return hist


def _trigger_key(trigger: TriggerRule, snap: PoolSnapshot, event: PoolEvent | None) -> tuple[str, int] | None:
    """Identity of this firing opportunity, for PerNewVersion bookkeeping."""
    if trigger.on_event is not None and event is not None:
        return (event.artifact_id, event.version)
    if trigger.requires_present:
        parts = sorted(
            (snap.entries[k].artifact_id, snap.entries[k].version)
            for k in trigger.requires_present
            if k in snap.entries
        )
        return ("+".join(f"{i}@{v}" for i, v in parts), 0)
    return None


def trigger_passes(
    role: str,
    action: ActionSpec,
    snap: PoolSnapshot,
    event: PoolEvent | None,
    history: FiringHistory,
) -> bool:
    t = action.trigger
    if t is None:
        return False
    if t.on_event is not None:
        if event is None:
            return False
        change, kind = t.on_event
        if event.change is not change or event.kind is not kind:
            return False
    for kind in t.requires_present:
        if not snap.has(kind):
            return False
    for kind in t.requires_absent:
        if snap.has(kind):
            return False
    if t.requires_executions is not None:
        name, minimum = t.requires_executions
        if history.executions(name) < minimum:
            return False
    fired = history.firings(role, action.name)
    if t.fires_at_most is FiresAtMost.ONCE and fired >= 1:
        return False
    if t.max_firings is not None and fired >= t.max_firings:
        return False
    if t.fires_at_most is FiresAtMost.PER_NEW_VERSION:
        key = _trigger_key(t, snap, event)
        if key is not None and history.fired_for(role, action.name, key):
            return False
    return True


def eligible_actions(
    agent: AgentSpec,
    snap: PoolSnapshot,
    event: PoolEvent | None,
    history: FiringHistory,
) -> list[ActionSpec]:
    """Triggerable actions for this agent, sorted by priority (stable)."""
    hits = [
        a for a in agent.actions
        if not a.session_bound and trigger_passes(agent.role, a, snap, event, history)
    ]
    return sorted(hits, key=lambda a: a.priority)


_PLANNER_TEMPLATE = (
    "You may execute exactly one of these actions next:\n{names}\n"
    "Reply with the single action name and nothing else."
)


def plan_next(
    agent: AgentSpec,
    candidates: Sequence[ActionSpec],
    *,
    backend: Backend | None = None,
    config: BackendConfig | None = None,
    tagger: Callable[[], RequestTag] | None = None,
) -> ActionSpec | None:
    """Pick the next action. Rule mode takes the first candidate.

    LLM-assisted mode asks the backend to name one candidate; any reply
    that names none, or a backend failure, falls back to the rule choice.
    """
    if not candidates:
        return None
    rule_choice = candidates[0]
    if agent.planner_mode is PlannerMode.RULE or backend is None or config is None or tagger is None:
        return rule_choice
    names = "\n".join(f"- {a.name}" for a in candidates)
    request = config.request(
        messages=(
            ("system", f"You are the {agent.role}. {agent.functionality}"),
            ("user", _PLANNER_TEMPLATE.format(names=names)),
        ),
        tag=tagger(),
    )
    try:
        reply = backend.complete(request)
    except BackendError as exc:
        log.warning("%s planner call failed (%s); using rule choice %s",
                    agent.role, exc, rule_choice.name)
        return rule_choice
    text = reply.strip()
    for a in candidates:
        if text == a.name:
            return a
    for a in candidates:
        if a.name in text:
            return a
    log.warning("%s planner reply named no candidate; using rule choice %s",
                agent.role, rule_choice.name)
    return rule_choice


def resolve_inputs(action: ActionSpec, pool: ArtifactPool) -> list[Artifact]:
    """Latest artifact per consumed kind (every artifact for consume_all_of)."""
    inputs: list[Artifact] = []
    for kind in action.consumes:
        if kind in action.consume_all_of:
            found = pool.all_of_kind(kind)
            if not found:
                raise PromptRenderError(
                    f"action {action.name!r} needs a {kind.value} but the pool has none"
                )
            inputs.extend(found)
        else:
            artifact = pool.latest(kind)
            if artifact is None:
                raise PromptRenderError(
                    f"action {action.name!r} needs a {kind.value} but the pool has none"
                )
            inputs.append(artifact)
    return inputs


@dataclass(frozen=True)
class RenderedPrompt:
    agent: str
    action: str
    system: str
    user: str

    @property
    def messages(self) -> tuple[tuple[str, str], ...]:
        return (("system", self.system), ("user", self.user))


class _StrictMap(dict):
    def __missing__(self, key: str):
        raise PromptRenderError(f"unresolved placeholder {{{key}}} in prompt template")


def render_prompt(
    action: ActionSpec,
    agent: AgentSpec,
    inputs: Sequence[Artifact],
    extra: Mapping[str, str] | None = None,
) -> RenderedPrompt:
    """Knowledge-injected prompt: system carries functionality + knowledge,
    user carries the instantiated template plus each input body verbatim."""
    provided = {a.kind for a in inputs}
    for kind in action.consumes:
        if kind not in provided:
            raise PromptRenderError(
                f"action {action.name!r} is missing its {kind.value} input"
            )

    system_parts = [f"You are the {agent.role}. {agent.functionality}".rstrip()]
    for bundle in agent.knowledge:
        system_parts.append(f"## Knowledge: {bundle.id} ({bundle.kind.value})\n\n{bundle.body.strip()}")
    system = "\n\n".join(system_parts)

    values = _StrictMap({"role": agent.role, "action": action.name})
    if extra:
        values.update(extra)
    try:
        body = action.prompt_template.format_map(values)
    except (IndexError, ValueError) as exc:
        raise PromptRenderError(f"bad placeholder syntax in {action.name!r} template: {exc}") from None

    sections = [body.rstrip()]
    for artifact in inputs:
        sections.append(
            f"### Input: {artifact.kind.value} [{artifact.id} v{artifact.version}] {artifact.title}\n\n"
            f"{artifact.content.strip()}"
        )
    user = "\n\n".join(sections) + "\n"
    return RenderedPrompt(agent=agent.role, action=action.name, system=system, user=user)


@dataclass(frozen=True)
class Draft:
    kind: ArtifactKind
    title: str
    content: str
    provenance: tuple[tuple[str, int], ...]


_REPAIR_TEMPLATE = (
    "Your previous draft was rejected for these problems:\n{problems}\n\n"
    "Produce the corrected, complete document. Output the full document only."
)


def execute_action(
    agent: AgentSpec,
    action: ActionSpec,
    inputs: Sequence[Artifact],
    backend: Backend,
    config: BackendConfig,
    tagger: Callable[[], RequestTag],
    *,
    extra: Mapping[str, str] | None = None,
    postprocess: Callable[[str], str] | None = None,
    validator: Callable[[str], list[str]] | None = None,
) -> Draft:
    """Run one artifact-producing action end to end.

    The reply goes through ``postprocess`` (deterministic assembly), then
    ``validator``; on problems the backend gets exactly one repair
    re-prompt before the draft is rejected with ValidationFailure.
    """
    if action.produces is None:
        raise ProtocolError(f"action {action.name!r} produces a dialogue move, not an artifact")
    rendered = render_prompt(action, agent, inputs, extra)
    reply = backend.complete(config.request(rendered.messages, tagger()))
    content = postprocess(reply) if postprocess else reply
    if validator is not None:
        problems = validator(content)
        if problems:
            bullet = "\n".join(f"- {p}" for p in problems)
            repair_user = f"{rendered.user}\n\n{_REPAIR_TEMPLATE.format(problems=bullet)}"
            log.warning("%s/%s draft rejected (%d problem(s)); re-prompting once",
                        agent.role, action.name, len(problems))
            reply = backend.complete(
                config.request((("system", rendered.system), ("user", repair_user)), tagger())
            )
            content = postprocess(reply) if postprocess else reply
            problems = validator(content)
            if problems:
                raise ValidationFailure(
                    f"{agent.role}/{action.name} draft still invalid after repair: "
                    + "; ".join(problems)
                )
    title = document_title(content) or DEFAULT_TITLES[action.produces]
    return Draft(
        kind=action.produces,
        title=title,
        content=content,
        provenance=tuple(a.ref for a in inputs),
    )
