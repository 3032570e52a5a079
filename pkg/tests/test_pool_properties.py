"""Property suite for the artifacts pool.

A reference model (plain dicts, no sharing with the implementation) is run
alongside the pool over randomized operation sequences. The invariants:

  * version monotonicity: versions of an id form exactly 1..n
  * gapless FIFO event delivery for any consumer
  * event/commit bijection (one event per successful commit, right version)
  * snapshot consistency (kind present iff committed at snapshot time)
  * provenance acyclicity at the (id, version) level
"""

from __future__ import annotations

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from reqforge.pool import ArtifactKind, ArtifactPool, Change

KINDS = list(ArtifactKind)


class ModelState:
    """Independent bookkeeping used as the oracle."""

    def __init__(self):
        self.versions: dict[str, int] = {}
        self.commits: list[tuple[str, str, int]] = []  # (change, id, version)
        self.kind_of: dict[str, ArtifactKind] = {}
        self.edges: list[tuple[tuple[str, int], tuple[str, int]]] = []  # child -> parent


def apply_random_ops(pool: ArtifactPool, rng: random.Random, n_ops: int) -> ModelState:
    model = ModelState()
    snapshots = []
    for _ in range(n_ops):
        op = rng.choice(["add", "add", "update", "snapshot", "read"])
        if op == "add" or not model.versions:
            kind = rng.choice(KINDS)
            # pick up to 2 provenance refs from existing (id, version) pairs
            inputs = []
            if model.versions and rng.random() < 0.6:
                for _ in range(rng.randint(1, 2)):
                    dep = rng.choice(list(model.versions))
                    inputs.append((dep, rng.randint(1, model.versions[dep])))
            art, event = pool.add(
                kind, f"content {rng.random()}", producer="agent",
                producing_action="op", inputs=inputs,
            )
            assert event.change is Change.ADDED and event.version == 1
            model.versions[art.id] = 1
            model.kind_of[art.id] = kind
            model.commits.append(("added", art.id, 1))
            for ref in inputs:
                model.edges.append(((art.id, 1), ref))
        elif op == "update":
            target = rng.choice(list(model.versions))
            inputs = []
            if rng.random() < 0.4:
                dep = rng.choice(list(model.versions))
                inputs.append((dep, rng.randint(1, model.versions[dep])))
            art, event = pool.update(
                target, f"content {rng.random()}", producer="agent",
                producing_action="op", inputs=inputs,
            )
            model.versions[target] += 1
            assert event.change is Change.UPDATED
            assert event.version == model.versions[target] == art.version
            model.commits.append(("updated", target, model.versions[target]))
            for ref in inputs:
                model.edges.append(((target, model.versions[target]), ref))
        elif op == "snapshot":
            snapshots.append((pool.snapshot(), dict(model.versions), len(model.commits)))
        else:
            target = rng.choice(list(model.versions))
            art = pool.get(target)
            assert art.version == model.versions[target]

    # -- invariant: version monotonicity -------------------------------------
    for artifact_id, expected_n in model.versions.items():
        observed = [pool.get(artifact_id, v).version for v in range(1, expected_n + 1)]
        assert observed == list(range(1, expected_n + 1))

    # -- invariant: event/commit bijection ------------------------------------
    events = pool.events()
    assert len(events) == len(model.commits)
    for ev, (change, artifact_id, version) in zip(events, model.commits):
        assert ev.change.value == change
        assert ev.artifact_id == artifact_id
        assert ev.version == version

    # -- invariant: gapless FIFO delivery for an independent consumer ---------
    seen = []
    cursor = 0
    while (ev := pool.next_event(cursor)) is not None:
        seen.append(ev.seq)
        cursor = ev.seq
    assert seen == list(range(1, len(model.commits) + 1))

    # -- invariant: snapshot consistency --------------------------------------
    for snap, versions_then, commits_then in snapshots:
        assert snap.last_seq == commits_then
        kinds_then = {model.kind_of[i] for i in versions_then}
        assert set(snap.entries.keys()) == kinds_then

    # -- invariant: provenance acyclicity at the version level ----------------
    # edges go child -> parent; a cycle would need a path parent -> child too.
    adjacency: dict[tuple[str, int], set[tuple[str, int]]] = {}
    for child, parent in model.edges:
        adjacency.setdefault(child, set()).add(parent)
    state: dict[tuple[str, int], int] = {}

    def dfs(node: tuple[str, int]) -> None:
        state[node] = 1
        for nxt in adjacency.get(node, ()):
            mark = state.get(nxt, 0)
            assert mark != 1, f"provenance cycle through {nxt}"
            if mark == 0:
                dfs(nxt)
        state[node] = 2

    for node in list(adjacency):
        if state.get(node, 0) == 0:
            dfs(node)

    return model


def test_thousand_op_randomized_sequence():
    # the acceptance-sized sequence: one deterministic seed, 1000 operations
    pool = ArtifactPool()
    apply_random_ops(pool, random.Random(0xC0FFEE), 1000)


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), n_ops=st.integers(50, 150))
def test_randomized_sequences_uphold_invariants(seed: int, n_ops: int):
    pool = ArtifactPool()
    apply_random_ops(pool, random.Random(seed), n_ops)
