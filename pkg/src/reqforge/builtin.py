"""The six built-in agents and their action wiring.

Everything the default pipeline needs lives here: functionality texts,
prompt templates, trigger rules, priorities, and the knowledge bundles
loaded from packaged files. The registry builder takes the handful of
run options that change the wiring (round counts, feedback budget, the
two optional actions) and returns a ready AgentRegistry.
"""

from __future__ import annotations

import logging
from importlib import resources
from typing import Callable

from .agents import (
    ActionSpec,
    AgentRegistry,
    AgentSpec,
    FiresAtMost,
    KnowledgeBundle,
    KnowledgeKind,
    PlannerMode,
    TriggerRule,
)
from .errors import ValidationFailure
from .pool import ArtifactKind, ArtifactPool, Change
from .research import ResearchProvider, render_sources
from .schema import (
    DEFAULT_TITLES,
    assemble_srs,
    ensure_title,
    req_ids,
    set_section,
    validate_content,
)

__all__ = [
    "REVIEW_PARTICIPANTS",
    "INTERVIEWER",
    "END_USER",
    "DEPLOYER",
    "ANALYST",
    "ARCHIVIST",
    "REVIEWER",
    "load_knowledge",
    "build_default_registry",
    "par_postprocess",
    "oel_postprocess",
    "srs_postprocess",
    "title_postprocess",
    "validator_for",
]

log = logging.getLogger(__name__)

INTERVIEWER = "Interviewer"
END_USER = "EndUser"
DEPLOYER = "Deployer"
ANALYST = "Analyst"
ARCHIVIST = "Archivist"
REVIEWER = "Reviewer"

# review rotation: one colleague consulted per round, in this order
REVIEW_PARTICIPANTS = (INTERVIEWER, ANALYST, DEPLOYER, END_USER)

BRIEF = ArtifactKind.BRIEF_DESCRIPTION
PAR = ArtifactKind.PRODUCT_ANALYSIS_REPORT
IQL = ArtifactKind.INTERVIEW_QUESTION_LIST
DT = ArtifactKind.DIALOGUE_TRANSCRIPT
IR = ArtifactKind.INTERVIEW_RECORD
URL = ArtifactKind.USER_REQUIREMENTS_LIST
CR = ArtifactKind.CLASSIFICATION_REPORT
OEL = ArtifactKind.OPERATING_ENVIRONMENT_LIST
SRL = ArtifactKind.SYSTEM_REQUIREMENTS_LIST
RM = ArtifactKind.REQUIREMENTS_MODEL
SRS = ArtifactKind.SOFTWARE_REQUIREMENTS_SPECIFICATION
RC = ArtifactKind.REVIEW_COMMENTS
VR = ArtifactKind.VALIDATION_REPORT


_FUNCTIONALITY = {
    INTERVIEWER: (
        "You study the product idea, research comparable products, prepare and "
        "conduct the user interview, and turn what you hear into the interview "
        "record and the user requirements list."
    ),
    END_USER: (
        "You are the customer-side stakeholder. You answer the interviewer's "
        "questions from your own working experience, correct wrong assumptions, "
        "and give additional feedback when asked to reflect."
    ),
    DEPLOYER: (
        "You describe where the system will run. From the user requirements you "
        "derive the operating environment: hardware, software, network, and the "
        "constraints the deployment must respect."
    ),
    ANALYST: (
        "You turn user requirements into system requirements. You classify "
        "entries, draft the canonical system requirements list with traceability "
        "to user requirements, and model the requirements as use-case diagrams."
    ),
    ARCHIVIST: (
        "You are the keeper of the specification. You assemble the Software "
        "Requirements Specification from the upstream documents and revise it "
        "when validation feedback arrives."
    ),
    REVIEWER: (
        "You validate the specification. You consult each colleague about the "
        "draft, write down their comments faithfully, and consolidate everything "
        "into a final validation report."
    ),
}


_TEMPLATES = {
    "ConductResearch": (
        "Analyze the product idea in the brief below. Write a Product Analysis "
        "Report in markdown, titled '# Product Analysis Report', with exactly "
        "these level-2 sections: '## Background', '## Related Products', "
        "'## Candidate Features'. Do not write a Sources section; sourcing is "
        "appended separately."
    ),
    "PrepareInterviewList": (
        "Using the product analysis below, write the Interview Question List: "
        "a markdown document titled '# Interview Question List' containing a "
        "numbered list of questions for the end user. Cover scope, daily "
        "workflows, pain points, environment, and priorities."
    ),
    "StartInterview": (
        "You are conducting round {round} of {max_rounds} of the requirements "
        "interview. Move kind for this round: {move_kind}. For Question rounds, "
        "ask the most important open question from your list. For "
        "RecommendQuestion rounds, recommend a follow-up question informed by "
        "the answers so far. For ReflectPrompt rounds, summarize what you have "
        "heard and invite corrections or additions. If every topic is settled, "
        "write the line [END-OF-INTERVIEW] on its own line after your message.\n\n"
        "Conversation so far:\n{transcript}"
    ),
    "StartRespond": (
        "The interviewer asked you the question below (round {round}). Answer "
        "from your working experience, concretely.\n\nQuestion:\n{ask}\n\n"
        "Conversation so far:\n{transcript}"
    ),
    "RespondToRecommend": (
        "The interviewer recommends discussing the question below (round "
        "{round}). Respond with specifics; push back where the suggestion "
        "misses how your work actually happens.\n\nRecommended question:\n{ask}\n\n"
        "Conversation so far:\n{transcript}"
    ),
    "RespondToReflection": (
        "The interviewer summarized the conversation below (round {round}). "
        "Correct anything wrong, fill gaps, and add requirements that were "
        "missed.\n\nSummary:\n{ask}\n\nConversation so far:\n{transcript}"
    ),
    "WriteReqList": (
        "From the interview transcript below, extract the User Requirements "
        "List: a markdown document titled '# User Requirements List' whose body "
        "is a bullet list of entries '- REQ-n: <statement>', numbered from "
        "REQ-1 with no gaps and no duplicates."
    ),
    "WriteInterviewRecord": (
        "Summarize the interview transcript below into an Interview Record: a "
        "markdown document titled '# Interview Record' that captures, round by "
        "round, what was asked and the substance of each answer."
    ),
    "CheckRunEnvReq": (
        "Check the user requirements below against the intended operating "
        "environment. List findings where a requirement implies an environment "
        "need or conflicts with one, as short bullet points. If nothing stands "
        "out, state that explicitly."
    ),
    "WriteRunEnv": (
        "Derive the Operating Environment List from the user requirements "
        "below: a markdown document titled '# Operating Environment List' with "
        "exactly these level-2 sections: '## Hardware', '## Software', "
        "'## Network', '## Constraints'."
    ),
    "ClassifyUserReqs": (
        "Classify every requirement in the list below. Output a markdown "
        "document titled '# Requirements Classification Report' with one "
        "bullet per entry: '- REQ-n: Functional|NonFunctional, priority "
        "High|Medium|Low'. Classify each REQ id exactly once."
    ),
    "WriteSystemReqs": (
        "Draft the System Requirements List from the user requirements and the "
        "operating environment below: a markdown document titled '# System "
        "Requirements List' whose body is a bullet list of entries "
        "'- SYS-n: <statement> (Traces: REQ-a, REQ-b)'. Every SYS entry must "
        "trace to at least one existing REQ id."
    ),
    "BuildReqModel": (
        "Model the system requirements below as use-case diagrams. Output a "
        "markdown document titled '# Requirements Model' containing one or "
        "more fenced ```plantuml blocks. Each block declares actors and use "
        "cases, then associations between declared names only."
    ),
    "WriteReqSpecs": (
        "Write the opening of the Software Requirements Specification for the "
        "documents below: the '## Introduction' (purpose, scope) and "
        "'## Overall Description' (users, constraints) sections. The remaining "
        "sections are assembled from the inputs automatically."
    ),
    "ReviseReqSpecs": (
        "Revise the Software Requirements Specification below according to the "
        "validation report. Keep the six-section structure intact and output "
        "the complete revised document, not a diff."
    ),
    "ReviewAsk": (
        "You are consulting {participant} in review round {round} of "
        "{max_rounds}. Ask them one focused question about the specification "
        "below, matched to their role. If the review is complete, write the "
        "line [END-OF-REVIEW] on its own line after your question.\n\n"
        "Review so far:\n{transcript}"
    ),
    "ReviewAnswer": (
        "The reviewer asks you, as the {role}, the question below about the "
        "specification. Answer from your role's standpoint, naming concrete "
        "entries or sections.\n\nQuestion:\n{ask}\n\nReview so far:\n{transcript}"
    ),
    "WriteReviewComs": (
        "Write the Review Comments artifact for round {round}, consulting "
        "{participant}. Title it '# Review Comments ({participant})' and record "
        "the concern raised, the answer given, and your own verdict as a short "
        "actionable list.\n\nRound exchange:\n{exchange}"
    ),
    "WriteValidReport": (
        "Consolidate the review comments below into a single Validation "
        "Report: a markdown document titled '# Validation Report' that lists "
        "each confirmed issue once, ordered by severity, each with the change "
        "it demands of the specification."
    ),
}


_KNOWLEDGE_FILES = {
    "research-template": KnowledgeKind.RESEARCH_TEMPLATE,
    "requirements-template": KnowledgeKind.REQUIREMENTS_TEMPLATE,
    "insurance-domain": KnowledgeKind.DOMAIN_KNOWLEDGE,
    "persona-insurance-ops": KnowledgeKind.PERSONA_PROFILE,
    "srs-template": KnowledgeKind.SRS_TEMPLATE,
    "review-guideline": KnowledgeKind.REVIEW_GUIDELINE,
    "deployment-practices": KnowledgeKind.DOMAIN_KNOWLEDGE,
}


def load_knowledge() -> dict[str, KnowledgeBundle]:
    """Load the packaged knowledge files into bundles keyed by id."""
    bundles: dict[str, KnowledgeBundle] = {}
    base = resources.files("reqforge").joinpath("data/knowledge")
    for name, kind in _KNOWLEDGE_FILES.items():
        ref = base.joinpath(f"{name}.md")
        bundles[name] = KnowledgeBundle(
            id=name, kind=kind, body=ref.read_text(encoding="utf-8"), source=f"{name}.md"
        )
    return bundles


def _on_added(kind: ArtifactKind, **kw) -> TriggerRule:
    return TriggerRule(on_event=(Change.ADDED, kind), **kw)


def build_default_registry(
    *,
    review_rounds: int = 4,
    max_feedback_iterations: int = 1,
    enable_classify: bool = False,
    enable_check_run_env: bool = False,
    planner_mode: PlannerMode = PlannerMode.RULE,
    knowledge: dict[str, KnowledgeBundle] | None = None,
) -> AgentRegistry:
    """The six built-in agents wired for one run's options."""
    kn = knowledge if knowledge is not None else load_knowledge()
    t = _TEMPLATES

    interviewer_actions = [
        ActionSpec(
            name="ConductResearch", prompt_template=t["ConductResearch"],
            consumes=(BRIEF,), produces=PAR, trigger=_on_added(BRIEF), priority=10,
        ),
        ActionSpec(
            name="PrepareInterviewList", prompt_template=t["PrepareInterviewList"],
            consumes=(PAR,), produces=IQL, trigger=_on_added(PAR), priority=10,
        ),
        ActionSpec(
            name="StartInterview", prompt_template=t["StartInterview"],
            consumes=(IQL,), produces=DT, trigger=_on_added(IQL), priority=10,
            opens_session="interview",
        ),
        ActionSpec(
            name="WriteReqList", prompt_template=t["WriteReqList"],
            consumes=(DT,), produces=URL, trigger=_on_added(DT), priority=10,
        ),
        ActionSpec(
            name="WriteInterviewRecord", prompt_template=t["WriteInterviewRecord"],
            consumes=(DT,), produces=IR, trigger=_on_added(DT), priority=20,
        ),
        ActionSpec(
            name="ReviewAnswer", prompt_template=t["ReviewAnswer"],
            consumes=(SRS,), session_bound=True,
        ),
    ]

    end_user_actions = [
        ActionSpec(name="StartRespond", prompt_template=t["StartRespond"], session_bound=True),
        ActionSpec(
            name="RespondToRecommend", prompt_template=t["RespondToRecommend"], session_bound=True,
        ),
        ActionSpec(
            name="RespondToReflection", prompt_template=t["RespondToReflection"], session_bound=True,
        ),
        ActionSpec(
            name="ReviewAnswer", prompt_template=t["ReviewAnswer"],
            consumes=(SRS,), session_bound=True,
        ),
    ]

    deployer_actions = []
    if enable_check_run_env:
        deployer_actions.append(
            ActionSpec(
                name="CheckRunEnvReq", prompt_template=t["CheckRunEnvReq"],
                consumes=(URL,), trigger=_on_added(URL), priority=5,
            )
        )
    deployer_actions.extend([
        ActionSpec(
            name="WriteRunEnv", prompt_template=t["WriteRunEnv"],
            consumes=(URL,), produces=OEL, trigger=_on_added(URL), priority=10,
        ),
        ActionSpec(
            name="ReviewAnswer", prompt_template=t["ReviewAnswer"],
            consumes=(SRS,), session_bound=True,
        ),
    ])

    analyst_actions = []
    if enable_classify:
        analyst_actions.append(
            ActionSpec(
                name="ClassifyUserReqs", prompt_template=t["ClassifyUserReqs"],
                consumes=(URL,), produces=CR, trigger=_on_added(URL), priority=10,
            )
        )
    analyst_actions.extend([
        ActionSpec(
            name="WriteSystemReqs", prompt_template=t["WriteSystemReqs"],
            consumes=(URL, OEL), produces=SRL,
            trigger=TriggerRule(requires_present=frozenset({URL, OEL})), priority=20,
        ),
        ActionSpec(
            name="BuildReqModel", prompt_template=t["BuildReqModel"],
            consumes=(SRL,), produces=RM, trigger=_on_added(SRL), priority=10,
        ),
        ActionSpec(
            name="ReviewAnswer", prompt_template=t["ReviewAnswer"],
            consumes=(SRS,), session_bound=True,
        ),
    ])

    archivist_actions = [
        ActionSpec(
            name="WriteReqSpecs", prompt_template=t["WriteReqSpecs"],
            consumes=(OEL, SRL, RM), produces=SRS,
            trigger=TriggerRule(requires_present=frozenset({OEL, SRL, RM})), priority=10,
        ),
        ActionSpec(
            name="ReviseReqSpecs", prompt_template=t["ReviseReqSpecs"],
            consumes=(SRS, VR), produces=SRS, updates_existing=True,
            trigger=_on_added(
                VR,
                fires_at_most=FiresAtMost.PER_NEW_VERSION,
                max_firings=max_feedback_iterations,
            ),
            priority=20,
        ),
    ]

    reviewer_actions = [
        ActionSpec(
            name="ReviewAsk", prompt_template=t["ReviewAsk"],
            consumes=(SRS,), trigger=_on_added(SRS), priority=10,
            opens_session="review",
        ),
        ActionSpec(
            name="WriteReviewComs", prompt_template=t["WriteReviewComs"],
            consumes=(SRS,), produces=RC,
        ),
        ActionSpec(
            name="WriteValidReport", prompt_template=t["WriteValidReport"],
            consumes=(RC,), produces=VR, consume_all_of=frozenset({RC}),
            trigger=_on_added(RC, requires_executions=("WriteReviewComs", review_rounds)),
            priority=20,
        ),
    ]

    agents = [
        AgentSpec(
            role=INTERVIEWER, functionality=_FUNCTIONALITY[INTERVIEWER],
            actions=tuple(interviewer_actions),
            knowledge=(kn["research-template"], kn["insurance-domain"], kn["requirements-template"]),
            planner_mode=planner_mode,
        ),
        AgentSpec(
            role=END_USER, functionality=_FUNCTIONALITY[END_USER],
            actions=tuple(end_user_actions),
            knowledge=(kn["persona-insurance-ops"],),
            planner_mode=planner_mode,
        ),
        AgentSpec(
            role=DEPLOYER, functionality=_FUNCTIONALITY[DEPLOYER],
            actions=tuple(deployer_actions),
            knowledge=(kn["deployment-practices"],),
            planner_mode=planner_mode,
        ),
        AgentSpec(
            role=ANALYST, functionality=_FUNCTIONALITY[ANALYST],
            actions=tuple(analyst_actions),
            knowledge=(kn["requirements-template"], kn["insurance-domain"]),
            planner_mode=planner_mode,
        ),
        AgentSpec(
            role=ARCHIVIST, functionality=_FUNCTIONALITY[ARCHIVIST],
            actions=tuple(archivist_actions),
            knowledge=(kn["srs-template"],),
            planner_mode=planner_mode,
        ),
        AgentSpec(
            role=REVIEWER, functionality=_FUNCTIONALITY[REVIEWER],
            actions=tuple(reviewer_actions),
            knowledge=(kn["review-guideline"],),
            planner_mode=planner_mode,
        ),
    ]
    return AgentRegistry(agents)


# -- post-processing hooks (deterministic assembly around backend text) ------

def par_postprocess(provider: ResearchProvider, query: str) -> Callable[[str], str]:
    """Title the report and build its Sources section from the provider.

    A provider failure degrades to an empty Sources section with a warning;
    the report itself still commits.
    """

    def post(reply: str) -> str:
        try:
            results = provider.search(query)
        except Exception as exc:  # provider failure must not sink the action
            log.warning("research provider failed (%s); Sources left empty", exc)
            results = []
        doc = ensure_title(reply, DEFAULT_TITLES[PAR])
        return set_section(doc, "Sources", render_sources(results))

    return post


def oel_postprocess(findings: str | None) -> Callable[[str], str]:
    """Title the OEL; append environment-check findings as a Notes section."""

    def post(reply: str) -> str:
        doc = ensure_title(reply, DEFAULT_TITLES[OEL])
        if findings and findings.strip():
            doc = set_section(doc, "Notes", findings.strip())
        return doc

    return post


def srs_postprocess(oel_body: str, srl_body: str, rm_body: str) -> Callable[[str], str]:
    def post(reply: str) -> str:
        return assemble_srs(reply, oel_body=oel_body, srl_body=srl_body, rm_body=rm_body)

    return post


def title_postprocess(kind: ArtifactKind) -> Callable[[str], str]:
    def post(reply: str) -> str:
        return ensure_title(reply, DEFAULT_TITLES[kind])

    return post


def validator_for(action: ActionSpec, pool: ArtifactPool) -> Callable[[str], list[str]] | None:
    """Structural validator for an action's draft, bound to current inputs."""
    kind = action.produces
    if kind is None:
        return None
    if kind in (SRL, CR):
        url = pool.latest(URL)
        url_content = url.content if url else ""
        return lambda text: validate_content(kind, text, url_content=url_content)
    return lambda text: validate_content(kind, text)


def check_run_env_guard(url_content: str) -> None:
    """CheckRunEnvReq demands a URL with at least one requirement entry."""
    if not req_ids(url_content):
        raise ValidationFailure("user requirements list has no REQ entries to check")
