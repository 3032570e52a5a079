"""Bounded multi-turn sessions: the interview and the review round-table.

A session is a strict ask/answer protocol. One round is one ask plus one
answer, so a session holds at most 2 x max_rounds turns. Interviews pair
the Interviewer with the EndUser; reviews rotate the Reviewer through the
other participants, one per round. The asker can cut a session short by
emitting an exact marker line; the session still finishes that round's
answer before closing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping

from .errors import ConfigError, ProtocolError

__all__ = [
    "MoveKind",
    "SessionKind",
    "SessionState",
    "DialogueMove",
    "DialogueSession",
    "open_session",
    "step",
    "interview_move_schedule",
    "response_kind_for",
    "render_transcript",
    "END_OF_INTERVIEW",
    "END_OF_REVIEW",
]

END_OF_INTERVIEW = "[END-OF-INTERVIEW]"
END_OF_REVIEW = "[END-OF-REVIEW]"

DEFAULT_INTERVIEW_ROUNDS = 7
DEFAULT_REVIEW_ROUNDS = 4


class MoveKind(Enum):
    QUESTION = "Question"
    RECOMMEND_QUESTION = "RecommendQuestion"
    REFLECT_PROMPT = "ReflectPrompt"
    RESPOND = "Respond"
    RESPOND_TO_RECOMMEND = "RespondToRecommend"
    RESPOND_TO_REFLECTION = "RespondToReflection"
    REVIEW_ASK = "ReviewAsk"
    REVIEW_ANSWER = "ReviewAnswer"


class SessionKind(Enum):
    INTERVIEW = "Interview"
    REVIEW = "Review"


class SessionState(Enum):
    OPEN = "Open"
    CLOSED = "Closed"


# each ask kind demands its matching answer kind
_RESPONSE_FOR = {
    MoveKind.QUESTION: MoveKind.RESPOND,
    MoveKind.RECOMMEND_QUESTION: MoveKind.RESPOND_TO_RECOMMEND,
    MoveKind.REFLECT_PROMPT: MoveKind.RESPOND_TO_REFLECTION,
    MoveKind.REVIEW_ASK: MoveKind.REVIEW_ANSWER,
}

_ASK_KINDS = {
    SessionKind.INTERVIEW: frozenset(
        {MoveKind.QUESTION, MoveKind.RECOMMEND_QUESTION, MoveKind.REFLECT_PROMPT}
    ),
    SessionKind.REVIEW: frozenset({MoveKind.REVIEW_ASK}),
}

_MARKER = {
    SessionKind.INTERVIEW: END_OF_INTERVIEW,
    SessionKind.REVIEW: END_OF_REVIEW,
}


def response_kind_for(ask_kind: MoveKind) -> MoveKind:
    try:
        return _RESPONSE_FOR[ask_kind]
    except KeyError:
        raise ProtocolError(f"{ask_kind.value} is not an ask kind") from None


def interview_move_schedule(round_no: int, max_rounds: int) -> MoveKind:
    """Ask kind per interview round: open with a direct question, close the
    last two rounds with reflection prompts, recommend in between."""
    if round_no < 1 or round_no > max_rounds:
        raise ProtocolError(f"round {round_no} outside 1..{max_rounds}")
    if round_no == 1:
        return MoveKind.QUESTION
    if round_no > max_rounds - 2:
        return MoveKind.REFLECT_PROMPT
    return MoveKind.RECOMMEND_QUESTION


@dataclass(frozen=True)
class DialogueMove:
    speaker: str
    move_kind: MoveKind
    content: str
    round: int

    def __post_init__(self) -> None:
        if self.round < 1:
            raise ProtocolError(f"move round must be positive, got {self.round}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "speaker": self.speaker,
            "move_kind": self.move_kind.value,
            "content": self.content,
            "round": self.round,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DialogueMove":
        return cls(
            speaker=d["speaker"],
            move_kind=MoveKind(d["move_kind"]),
            content=d["content"],
            round=int(d["round"]),
        )


@dataclass
class DialogueSession:
    id: str
    kind: SessionKind
    participants: tuple[str, ...]
    max_rounds: int
    turns: list[DialogueMove] = field(default_factory=list)
    state: SessionState = SessionState.OPEN

    # -- protocol queries ---------------------------------------------------

    @property
    def asker(self) -> str:
        return self.participants[0]

    @property
    def completed_rounds(self) -> int:
        return len(self.turns) // 2

    @property
    def current_round(self) -> int:
        return self.completed_rounds + 1

    def reviewee(self, round_no: int) -> str:
        rotation = self.participants[1:]
        return rotation[(round_no - 1) % len(rotation)]

    def next_speaker(self) -> str:
        if len(self.turns) % 2 == 0:
            return self.asker
        if self.kind is SessionKind.INTERVIEW:
            return self.participants[1]
        return self.reviewee(self.current_round)

    def next_ask_kind(self) -> MoveKind:
        if self.kind is SessionKind.INTERVIEW:
            return interview_move_schedule(self.current_round, self.max_rounds)
        return MoveKind.REVIEW_ASK

    def expected_move_kind(self) -> MoveKind:
        if len(self.turns) % 2 == 0:
            return self.next_ask_kind()
        return response_kind_for(self.turns[-1].move_kind)

    def has_early_marker(self) -> bool:
        marker = _MARKER[self.kind]
        return any(
            any(line.strip() == marker for line in move.content.splitlines())
            for move in self.turns[::2]
        )

    def close_eligible(self) -> bool:
        if len(self.turns) == 2 * self.max_rounds:
            return True
        # a marked round still gets its answer before the session ends
        return len(self.turns) % 2 == 0 and len(self.turns) > 0 and self.has_early_marker()

    # -- mutation -----------------------------------------------------------

    def append(self, move: DialogueMove) -> None:
        if self.state is not SessionState.OPEN:
            raise ProtocolError(f"session {self.id} is closed")
        if len(self.turns) >= 2 * self.max_rounds:
            raise ProtocolError(f"session {self.id} already has {len(self.turns)} turns")
        expected = self.next_speaker()
        if move.speaker != expected:
            raise ProtocolError(
                f"session {self.id}: expected {expected} to speak, got {move.speaker}"
            )
        if move.round != self.current_round:
            raise ProtocolError(
                f"session {self.id}: expected round {self.current_round}, got {move.round}"
            )
        if len(self.turns) % 2 == 0:
            if move.move_kind not in _ASK_KINDS[self.kind]:
                raise ProtocolError(
                    f"session {self.id}: {move.move_kind.value} cannot open a round"
                )
        else:
            required = response_kind_for(self.turns[-1].move_kind)
            if move.move_kind is not required:
                raise ProtocolError(
                    f"session {self.id}: answer must be {required.value}, got {move.move_kind.value}"
                )
        self.turns.append(move)
        if self.close_eligible():
            self.state = SessionState.CLOSED

    def close(self) -> str:
        """Render the final transcript, marking the session Closed.

        Idempotent: a closed session renders the same text again.
        """
        if self.state is SessionState.OPEN:
            if not self.close_eligible():
                raise ProtocolError(
                    f"session {self.id}: {self.completed_rounds}/{self.max_rounds} rounds done "
                    "and no early-termination marker"
                )
            self.state = SessionState.CLOSED
        return render_transcript(self)

    # -- persistence --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "participants": list(self.participants),
            "max_rounds": self.max_rounds,
            "state": self.state.value,
            "turns": [m.to_dict() for m in self.turns],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "DialogueSession":
        return cls(
            id=d["id"],
            kind=SessionKind(d["kind"]),
            participants=tuple(d["participants"]),
            max_rounds=int(d["max_rounds"]),
            turns=[DialogueMove.from_dict(m) for m in d.get("turns", ())],
            state=SessionState(d.get("state", "Open")),
        )


def open_session(
    kind: SessionKind,
    participants: tuple[str, ...] | list[str],
    max_rounds: int | None = None,
    *,
    session_id: str = "",
) -> DialogueSession:
    participants = tuple(participants)
    if max_rounds is None:
        max_rounds = (
            DEFAULT_INTERVIEW_ROUNDS if kind is SessionKind.INTERVIEW else DEFAULT_REVIEW_ROUNDS
        )
    if max_rounds < 1:
        raise ConfigError(f"max_rounds must be >= 1, got {max_rounds}")
    if kind is SessionKind.INTERVIEW:
        if len(participants) != 2:
            raise ProtocolError(
                f"an interview needs exactly two participants, got {len(participants)}"
            )
    else:
        if len(participants) < 2:
            raise ProtocolError("a review needs the Reviewer plus at least one reviewee")
    if len(set(participants)) != len(participants):
        raise ProtocolError("session participants must be distinct")
    return DialogueSession(
        id=session_id or f"{kind.value.lower()}-session",
        kind=kind,
        participants=participants,
        max_rounds=max_rounds,
    )


# speak(speaker, move_kind, session) -> move content
Speak = Callable[[str, MoveKind, "DialogueSession"], str]


def step(session: DialogueSession, speak: Speak) -> DialogueMove:
    """Advance the session by exactly one turn.

    The protocol decides who speaks and with which move kind; ``speak``
    supplies only the content (a backend call, or a console read in
    interactive mode). Auto-closes when the turn completes the session.
    """
    if session.state is not SessionState.OPEN:
        raise ProtocolError(f"session {session.id} is closed")
    speaker = session.next_speaker()
    kind = session.expected_move_kind()
    content = speak(speaker, kind, session)
    move = DialogueMove(speaker=speaker, move_kind=kind, content=content, round=session.current_round)
    session.append(move)
    return move


def render_transcript(session: DialogueSession, title: str | None = None) -> str:
    """Markdown turn log: one `### Round N — Speaker (kind)` heading per turn."""
    if title is None:
        title = f"{session.kind.value} Transcript"
    lines = [f"# {title}", ""]
    for move in session.turns:
        lines.append(f"### Round {move.round} — {move.speaker} ({move.move_kind.value})")
        lines.append("")
        lines.append(move.content.rstrip("\n"))
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"
