"""Session protocol: alternation, rounds, early exit, transcript format."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reqforge.dialogue import (
    END_OF_INTERVIEW,
    END_OF_REVIEW,
    DialogueMove,
    DialogueSession,
    MoveKind,
    SessionKind,
    SessionState,
    interview_move_schedule,
    open_session,
    render_transcript,
    response_kind_for,
    step,
)
from reqforge.errors import ConfigError, ProtocolError

INTERVIEW_PAIR = ("Interviewer", "EndUser")
REVIEW_TABLE = ("Reviewer", "Interviewer", "Analyst", "Deployer", "EndUser")


def scripted_speak(lines=None):
    log = []

    def speak(speaker, kind, session):
        text = f"{speaker} says ({kind.value})"
        if lines:
            key = (session.current_round, speaker)
            text = lines.get(key, text)
        log.append((speaker, kind))
        return text

    speak.log = log
    return speak


def test_open_session_guards_and_defaults():
    interview = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR)
    assert interview.max_rounds == 7
    review = open_session(SessionKind.REVIEW, REVIEW_TABLE)
    assert review.max_rounds == 4
    assert interview.state is SessionState.OPEN and interview.turns == []

    with pytest.raises(ProtocolError):
        open_session(SessionKind.INTERVIEW, ("Interviewer",))
    with pytest.raises(ProtocolError):
        open_session(SessionKind.INTERVIEW, ("Interviewer", "EndUser", "Extra"))
    with pytest.raises(ProtocolError):
        open_session(SessionKind.REVIEW, ("Reviewer",))
    with pytest.raises(ConfigError):
        open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR, max_rounds=0)
    with pytest.raises(ProtocolError):
        open_session(SessionKind.REVIEW, ("Reviewer", "Reviewer"))


def test_interview_move_schedule_shape():
    kinds = [interview_move_schedule(r, 7) for r in range(1, 8)]
    assert kinds == [
        MoveKind.QUESTION,
        MoveKind.RECOMMEND_QUESTION,
        MoveKind.RECOMMEND_QUESTION,
        MoveKind.RECOMMEND_QUESTION,
        MoveKind.RECOMMEND_QUESTION,
        MoveKind.REFLECT_PROMPT,
        MoveKind.REFLECT_PROMPT,
    ]
    assert interview_move_schedule(1, 1) is MoveKind.QUESTION
    assert [interview_move_schedule(r, 2) for r in (1, 2)] == [
        MoveKind.QUESTION, MoveKind.REFLECT_PROMPT,
    ]
    with pytest.raises(ProtocolError):
        interview_move_schedule(8, 7)


def test_response_kind_mapping():
    assert response_kind_for(MoveKind.QUESTION) is MoveKind.RESPOND
    assert response_kind_for(MoveKind.RECOMMEND_QUESTION) is MoveKind.RESPOND_TO_RECOMMEND
    assert response_kind_for(MoveKind.REFLECT_PROMPT) is MoveKind.RESPOND_TO_REFLECTION
    assert response_kind_for(MoveKind.REVIEW_ASK) is MoveKind.REVIEW_ANSWER
    with pytest.raises(ProtocolError):
        response_kind_for(MoveKind.RESPOND)


def test_full_interview_alternation_and_auto_close():
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR)
    speak = scripted_speak()
    while session.state is SessionState.OPEN:
        step(session, speak)
    assert len(session.turns) == 14
    assert session.completed_rounds == 7
    assert session.state is SessionState.CLOSED
    for i, move in enumerate(session.turns):
        assert move.speaker == ("Interviewer" if i % 2 == 0 else "EndUser")
        assert move.round == i // 2 + 1
    # ask kinds follow the schedule; answers match their asks
    asks = [m.move_kind for m in session.turns[::2]]
    assert asks == [interview_move_schedule(r, 7) for r in range(1, 8)]
    answers = [m.move_kind for m in session.turns[1::2]]
    assert answers == [response_kind_for(k) for k in asks]
    with pytest.raises(ProtocolError):
        step(session, speak)


def test_review_rotation_covers_each_participant_once():
    session = open_session(SessionKind.REVIEW, REVIEW_TABLE)
    speak = scripted_speak()
    while session.state is SessionState.OPEN:
        step(session, speak)
    assert len(session.turns) == 8
    askers = [m.speaker for m in session.turns[::2]]
    answerers = [m.speaker for m in session.turns[1::2]]
    assert askers == ["Reviewer"] * 4
    assert answerers == ["Interviewer", "Analyst", "Deployer", "EndUser"]
    assert all(m.move_kind is MoveKind.REVIEW_ASK for m in session.turns[::2])
    assert all(m.move_kind is MoveKind.REVIEW_ANSWER for m in session.turns[1::2])


def test_early_marker_closes_after_the_answer():
    lines = {(3, "Interviewer"): f"Enough.\n{END_OF_INTERVIEW}\n"}
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR)
    speak = scripted_speak(lines)
    while session.state is SessionState.OPEN:
        step(session, speak)
    assert len(session.turns) == 6  # the marked round still gets its answer
    assert session.state is SessionState.CLOSED
    assert session.turns[-1].speaker == "EndUser"


def test_marker_must_be_its_own_line():
    lines = {(2, "Interviewer"): f"inline {END_OF_INTERVIEW} mention"}
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR, max_rounds=3)
    speak = scripted_speak(lines)
    while session.state is SessionState.OPEN:
        step(session, speak)
    assert len(session.turns) == 6  # marker embedded mid-line does not count


def test_review_early_marker():
    lines = {(1, "Reviewer"): f"All good.\n{END_OF_REVIEW}"}
    session = open_session(SessionKind.REVIEW, REVIEW_TABLE)
    speak = scripted_speak(lines)
    while session.state is SessionState.OPEN:
        step(session, speak)
    assert len(session.turns) == 2


def test_append_guards():
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR, max_rounds=2)
    with pytest.raises(ProtocolError):  # wrong opening speaker
        session.append(DialogueMove("EndUser", MoveKind.RESPOND, "hi", 1))
    with pytest.raises(ProtocolError):  # answer kind cannot open a round
        session.append(DialogueMove("Interviewer", MoveKind.RESPOND, "hi", 1))
    session.append(DialogueMove("Interviewer", MoveKind.QUESTION, "q", 1))
    with pytest.raises(ProtocolError):  # wrong answer kind for this ask
        session.append(DialogueMove("EndUser", MoveKind.RESPOND_TO_RECOMMEND, "a", 1))
    with pytest.raises(ProtocolError):  # wrong round number
        session.append(DialogueMove("EndUser", MoveKind.RESPOND, "a", 2))
    session.append(DialogueMove("EndUser", MoveKind.RESPOND, "a", 1))
    with pytest.raises(ProtocolError):
        DialogueMove("EndUser", MoveKind.RESPOND, "a", 0)


def test_close_requires_completion_or_marker_and_is_idempotent():
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR, max_rounds=2)
    with pytest.raises(ProtocolError):
        session.close()
    speak = scripted_speak()
    while session.state is SessionState.OPEN:
        step(session, speak)
    first = session.close()
    again = session.close()
    assert first == again
    assert session.state is SessionState.CLOSED


def test_transcript_format():
    session = open_session(SessionKind.INTERVIEW, INTERVIEW_PAIR, max_rounds=1)
    session.append(DialogueMove("Interviewer", MoveKind.QUESTION, "What inventory?\nDetails?", 1))
    session.append(DialogueMove("EndUser", MoveKind.RESPOND, "Policies and claims.", 1))
    text = render_transcript(session)
    lines = text.splitlines()
    assert lines[0] == "# Interview Transcript"
    assert "### Round 1 — Interviewer (Question)" in lines
    assert "### Round 1 — EndUser (Respond)" in lines
    assert "What inventory?" in text and "Details?" in text
    assert "Policies and claims." in text
    assert text.endswith("\n")
    custom = render_transcript(session, title="Review Transcript")
    assert custom.splitlines()[0] == "# Review Transcript"


def test_session_serialization_round_trip_mid_flight():
    session = open_session(SessionKind.REVIEW, REVIEW_TABLE, session_id="review-1")
    speak = scripted_speak()
    step(session, speak)
    step(session, speak)
    step(session, speak)  # mid round 2, ask done
    restored = DialogueSession.from_dict(session.to_dict())
    assert restored == session
    # the restored session continues exactly where the original stopped
    move = step(restored, speak)
    assert move.speaker == "Analyst"
    assert move.round == 2


@settings(max_examples=40)
@given(
    max_rounds=st.integers(min_value=1, max_value=9),
    marker_round=st.one_of(st.none(), st.integers(min_value=1, max_value=9)),
    kind=st.sampled_from([SessionKind.INTERVIEW, SessionKind.REVIEW]),
)
def test_session_invariants_hold_for_any_schedule(max_rounds, marker_round, kind):
    participants = INTERVIEW_PAIR if kind is SessionKind.INTERVIEW else REVIEW_TABLE
    marker = END_OF_INTERVIEW if kind is SessionKind.INTERVIEW else END_OF_REVIEW

    def speak(speaker, move_kind, session):
        if marker_round is not None and session.current_round == marker_round \
                and speaker == session.asker:
            return f"done\n{marker}"
        return "text"

    session = open_session(kind, participants, max_rounds=max_rounds)
    while session.state is SessionState.OPEN:
        step(session, speak)

    turns = session.turns
    assert len(turns) <= 2 * max_rounds
    assert len(turns) % 2 == 0  # every round that starts gets its answer
    assert session.completed_rounds == len(turns) // 2
    for i, move in enumerate(turns):
        if i % 2 == 0:
            assert move.speaker == participants[0]
        else:
            assert move.speaker != participants[0]
    if marker_round is not None and marker_round <= max_rounds:
        assert session.completed_rounds == marker_round
    else:
        assert session.completed_rounds == max_rounds
    # transcript carries exactly one heading per turn
    text = render_transcript(session)
    headings = [l for l in text.splitlines() if l.startswith("### Round ")]
    assert len(headings) == len(turns)
