"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py``; every criterion below
asserts its stated tolerance exactly (byte equality, exact counts, zero
violations) and fails loudly otherwise.
"""

import json
import random
import time
from collections import Counter, defaultdict
from contextlib import contextmanager
from pathlib import Path

from reqforge.backend import BackendConfig, BackendMode
from reqforge.orchestrator import Engine, RunConfig, RunStatus
from reqforge.pool import ArtifactKind as K
from reqforge.pool import ArtifactPool
from reqforge.schema import check_traceability, req_ids, sys_entries
from reqforge.usecase import extract_diagram_blocks, validate_requirements_model

BRIEF = "I want to develop an insurance management system."

FIXTURES_PATH = (
    Path(__file__).resolve().parent.parent
    / "src"
    / "reqforge"
    / "data"
    / "fixtures"
    / "golden.json"
)

GOLDEN_ACTIONS = (
    ["ConductResearch", "PrepareInterviewList"]
    + ["StartInterview", "StartRespond"]
    + ["StartInterview", "RespondToRecommend"] * 4
    + ["StartInterview", "RespondToReflection"] * 2
    + [
        "WriteReqList",
        "WriteInterviewRecord",
        "WriteRunEnv",
        "WriteSystemReqs",
        "BuildReqModel",
        "WriteReqSpecs",
    ]
    + ["ReviewAsk", "ReviewAnswer"] * 4
    + ["WriteReviewComs"] * 4
    + ["WriteValidReport", "ReviseReqSpecs"]
)

GOLDEN_KINDS = (
    [
        "BriefDescription",
        "ProductAnalysisReport",
        "InterviewQuestionList",
        "DialogueTranscript",
        "UserRequirementsList",
        "InterviewRecord",
        "OperatingEnvironmentList",
        "SystemRequirementsList",
        "RequirementsModel",
        "SoftwareRequirementsSpecification",
    ]
    + ["ReviewComments"] * 4
    + ["ValidationReport", "SoftwareRequirementsSpecification"]
)


@contextmanager
def criterion(label):
    try:
        yield
    except BaseException:
        print(f"{label}: FAIL")
        raise
    print(f"{label}: PASS")


def golden_run(root, run_id="run-golden", **overrides):
    engine = Engine(RunConfig(workspace=str(root), run_id=run_id, **overrides))
    result = engine.run(BRIEF)
    assert result.status is RunStatus.COMPLETED
    return engine, result


def test_criterion_1_golden_trace_reproduction(tmp_path):
    with criterion("criterion 1 (golden-trace reproduction, exact, < 5 s)"):
        started = time.monotonic()
        engine, result = golden_run(tmp_path)
        elapsed = time.monotonic() - started
        assert [t.action for t in result.trace] == GOLDEN_ACTIONS
        assert [e.kind.value for e in engine.pool.events()] == GOLDEN_KINDS
        srs = engine.pool.latest(K.SOFTWARE_REQUIREMENTS_SPECIFICATION)
        assert srs.version == 2
        assert elapsed < 5.0, f"golden run took {elapsed:.2f}s"


def test_criterion_2_session_and_model_counts(tmp_path):
    with criterion("criterion 2 (7x2 interview turns, 4 review rounds, 4 diagrams)"):
        engine, _ = golden_run(tmp_path)
        interview, review = engine.sessions
        assert len(interview["session"]["turns"]) == 14
        assert max(t["round"] for t in interview["session"]["turns"]) == 7
        assert len(review["session"]["turns"]) == 8
        assert max(t["round"] for t in review["session"]["turns"]) == 4
        assert len(engine.pool.all_of_kind(K.REVIEW_COMMENTS)) == 4
        rm = engine.pool.latest(K.REQUIREMENTS_MODEL)
        assert len(extract_diagram_blocks(rm.content)) == 4
        assert validate_requirements_model(rm.content, expected_blocks=4) == []


def test_criterion_3_backend_defaults():
    with criterion("criterion 3 (backend defaults, exact)"):
        config = BackendConfig()
        assert config.model == "gpt-4-turbo-2024-04-09"
        assert config.temperature == 0.3
        assert config.top_p == 1.0
        assert config.max_tokens == 4096
        assert config.frequency_penalty == 0.0
        assert config.presence_penalty == 0.0


def test_criterion_4_pool_property_suite():
    with criterion("criterion 4 (1000-op pool properties, zero violations, < 10 s)"):
        started = time.monotonic()
        kinds = list(K)
        for seed in range(5):
            rng = random.Random(seed)
            pool = ArtifactPool(clock=lambda: 0.0)
            ids: list[str] = []
            versions: dict[str, int] = {}
            expected: list[tuple[str, str, int]] = []
            commits = 0
            saved_snapshots = []

            def sample_inputs():
                if not ids:
                    return []
                chosen = rng.sample(ids, k=min(len(ids), rng.randint(0, 3)))
                return [(i, rng.randint(1, versions[i])) for i in chosen]

            for op in range(1000):
                roll = rng.random()
                if roll < 0.55 or not ids:
                    kind = rng.choice(kinds)
                    art, ev = pool.add(
                        kind,
                        f"content {seed}/{op}\n",
                        producer="P",
                        producing_action="A",
                        inputs=sample_inputs(),
                    )
                    commits += 1
                    ids.append(art.id)
                    versions[art.id] = 1
                    assert art.version == 1
                    assert ev.seq == commits, "event log not gapless"
                    expected.append(("added", art.id, 1))
                elif roll < 0.9:
                    target = rng.choice(ids)
                    art, ev = pool.update(
                        target,
                        f"rev {seed}/{op}\n",
                        producer="P",
                        producing_action="A",
                        inputs=sample_inputs(),
                    )
                    commits += 1
                    versions[target] += 1
                    assert art.version == versions[target], "version monotonicity broken"
                    assert ev.seq == commits, "event log not gapless"
                    expected.append(("updated", target, art.version))
                else:
                    pool.mark_stale_downstream(rng.choice(ids))
                if op % 100 == 99:
                    snap = pool.snapshot()
                    frozen = {
                        kind: (e.artifact_id, e.version, e.stale)
                        for kind, e in snap.entries.items()
                    }
                    for kind, (aid, ver, stale) in frozen.items():
                        latest = pool.latest(kind)
                        assert (latest.id, latest.version) == (aid, ver)
                        assert pool.is_stale(aid) == stale
                    assert snap.last_seq == commits
                    saved_snapshots.append((snap, frozen))

            events = pool.events()
            assert len(events) == commits, "event/commit bijection broken"
            assert [e.seq for e in events] == list(range(1, commits + 1))
            assert [(e.change.value, e.artifact_id, e.version) for e in events] == expected

            # old snapshots must be unaffected by later commits
            for snap, frozen in saved_snapshots:
                assert {
                    kind: (e.artifact_id, e.version, e.stale)
                    for kind, e in snap.entries.items()
                } == frozen

            # provenance acyclicity at the (id, version) level: every edge
            # points at a strictly earlier commit, so a topological order exists
            commit_order = {(e.artifact_id, e.version): e.seq for e in events}
            for artifact_id in ids:
                for v in range(1, versions[artifact_id] + 1):
                    art = pool.get(artifact_id, v)
                    for dep in art.inputs:
                        assert commit_order[dep] < commit_order[(artifact_id, v)]
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"property suite took {elapsed:.2f}s"


def test_criterion_5_determinism_and_replay(tmp_path):
    with criterion("criterion 5 (determinism + record/replay, byte equality)"):
        _, first = golden_run(tmp_path / "a", run_id="run-x")
        _, second = golden_run(tmp_path / "b", run_id="run-x")
        assert first.manifest_path.read_bytes() == second.manifest_path.read_bytes()

        fixtures = json.loads(FIXTURES_PATH.read_text(encoding="utf-8"))
        steps: dict[str, int] = {}
        replies = []
        for t in first.trace:
            key = f"{t.agent}/{t.action}"
            steps[key] = steps.get(key, 0) + 1
            replies.append(fixtures[f"{key}/{steps[key]}"])
        calls = iter(replies)

        def transport(url, headers, body, timeout):
            return 200, {"choices": [{"message": {"content": next(calls)}}]}

        recorder = Engine(
            RunConfig(
                workspace=str(tmp_path / "rec"),
                run_id="run-x",
                backend=BackendConfig(mode=BackendMode.RECORD),
            ),
            transport=transport,
            env={"REQFORGE_API_KEY": "k"},
        )
        recorded = recorder.run(BRIEF)
        assert recorded.status is RunStatus.COMPLETED

        # strict replay turns any cassette miss or prompt drift into an error,
        # so completion certifies zero misses
        replayed = Engine(
            RunConfig(
                workspace=str(tmp_path / "rep"),
                run_id="run-x",
                backend=BackendConfig(
                    mode=BackendMode.REPLAY,
                    cassette_path=recorder.backend_config.cassette_path,
                    strict_replay=True,
                ),
            )
        ).run(BRIEF)
        assert replayed.status is RunStatus.COMPLETED
        assert replayed.manifest_path.read_bytes() == recorded.manifest_path.read_bytes()


def test_criterion_6_feedback_loop(tmp_path):
    with criterion("criterion 6 (feedback loop: closure, one rerun each, topo order)"):
        _, result = golden_run(tmp_path, run_id="run-x")
        before = json.loads(result.manifest_path.read_text(encoding="utf-8"))

        # hand-computed id-level provenance closure from the manifest
        dependents = defaultdict(set)
        url_id = None
        for artifact_id, entry in before["artifacts"].items():
            if entry["kind"] == "UserRequirementsList":
                url_id = artifact_id
            for version in entry["versions"]:
                for dep_id, _ in version["inputs"]:
                    dependents[dep_id].add(artifact_id)
        assert url_id is not None
        expected_closure = set()
        frontier = [url_id]
        while frontier:
            for dep in dependents[frontier.pop()]:
                if dep not in expected_closure:
                    expected_closure.add(dep)
                    frontier.append(dep)

        engine = Engine.resume(str(tmp_path), "run-x")
        url = engine.pool.get(url_id)
        engine.apply_update(url.id, url.content + "- REQ-11: Bulk policy renewals.\n")

        stale_ids = {i for i in engine.pool.ids() if engine.pool.is_stale(i)}
        assert stale_ids == expected_closure
        stale_kinds = {engine.pool.get(i).kind for i in stale_ids}
        assert {
            K.SYSTEM_REQUIREMENTS_LIST,
            K.REQUIREMENTS_MODEL,
            K.SOFTWARE_REQUIREMENTS_SPECIFICATION,
        } <= stale_kinds

        final = engine.continue_run()
        assert final.status is RunStatus.COMPLETED
        rerun = [t.action for t in final.trace[len(result.trace) :]]
        assert rerun == [
            "WriteRunEnv",
            "WriteSystemReqs",
            "BuildReqModel",
            "ReviseReqSpecs",
        ], "downstream producers must re-run exactly once, in topological order"
        assert Counter(rerun) == {action: 1 for action in rerun}
        srs = engine.pool.latest(K.SOFTWARE_REQUIREMENTS_SPECIFICATION)
        assert not engine.pool.is_stale(srs.id)


def test_criterion_7_crash_resume_equivalence(tmp_path):
    with criterion("criterion 7 (crash-resume equivalence at every boundary, < 60 s)"):
        started = time.monotonic()
        _, baseline = golden_run(tmp_path / "base", run_id="run-x")
        reference = baseline.manifest_path.read_bytes()
        for boundary in range(1, len(baseline.trace)):
            root = tmp_path / f"cut{boundary}"
            paused = Engine(
                RunConfig(workspace=str(root), run_id="run-x", max_actions=boundary)
            ).run(BRIEF)
            assert paused.status is RunStatus.PAUSED
            final = Engine.resume(str(root), "run-x").continue_run()
            assert final.status is RunStatus.COMPLETED
            assert final.manifest_path.read_bytes() == reference, (
                f"resume after action {boundary} diverged"
            )
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"sweep took {elapsed:.2f}s"


def test_criterion_8_traceability(tmp_path):
    with criterion("criterion 8 (SYS-to-REQ traceability, zero failures)"):
        engine, _ = golden_run(tmp_path)
        srl = engine.pool.latest(K.SYSTEM_REQUIREMENTS_LIST)
        url = engine.pool.latest(K.USER_REQUIREMENTS_LIST)
        known = set(req_ids(url.content))
        entries = sys_entries(srl.content)
        assert entries, "SRL holds no SYS entries"
        for sys_id, traces in entries:
            assert traces, f"{sys_id} references no user requirement"
            assert set(traces) <= known, f"{sys_id} references unknown requirement ids"
        assert check_traceability(srl.content, url.content) == []
