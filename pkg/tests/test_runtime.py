"""Online monitor sessions, traces, counts, and artifact round-trips."""

import random

import pytest

from vtsynth.artifact import (
    artifact_from_json,
    artifact_to_json,
    build_artifact,
    provenance_for,
)
from vtsynth.compiler import determinize, minimize
from vtsynth.errors import DomainError, TraceError
from vtsynth.runtime import MonitorSession, parse_trace, replay
from vtsynth.synth import observability_project, possibility_lift, track_annotations

from oracles import enumerate_language


@pytest.fixture(scope="module")
def email_artifact(email_model):
    monitor = track_annotations(email_model.annotated)
    det = minimize(determinize(monitor), monitor.domain)
    provenance = provenance_for(b"email", ["track", "determinize", "minimize"])
    return build_artifact(det, monitor.domain, relaxed=False, provenance=provenance)


@pytest.fixture(scope="module")
def coffee_artifact(coffee_model):
    tracked = track_annotations(coffee_model.annotated)
    projected = observability_project(
        possibility_lift(tracked), coffee_model.observable_actions()
    )
    det = minimize(determinize(projected), projected.domain)
    provenance = provenance_for(b"coffee", ["track", "lift", "project", "determinize", "minimize"])
    return build_artifact(det, projected.domain, relaxed=False, provenance=provenance)


def test_step_email_sequence(email_artifact):
    domain = email_artifact.domain
    session = MonitorSession(email_artifact)
    first = session.step("sign")
    assert set(domain.configs(first)) == {frozenset({"s", "e"}), frozenset({"s"})}
    second = session.step("enc")
    assert set(domain.configs(second)) == {frozenset({"s", "e"})}


def test_step_coffee_sequence(coffee_artifact):
    session = MonitorSession(coffee_artifact)
    session.step("request")
    verdict = session.step("request")
    assert verdict == frozenset({frozenset({"F_p"})})


def test_strict_out_of_language_absorbs(email_artifact):
    session = MonitorSession(email_artifact, mode="strict")
    assert session.step("send") is None
    assert session.out_of_language
    assert session.step("sign") is None
    assert session.verdict_canonical() == "out-of-language"


def test_relaxed_mode_keeps_state(email_artifact):
    session = MonitorSession(email_artifact, mode="relaxed")
    before = session.verdict()
    assert session.step("send") == before
    assert not session.out_of_language


def test_unknown_action_rejected(email_artifact):
    session = MonitorSession(email_artifact)
    with pytest.raises(TraceError, match="unknown action"):
        session.step("shred")


def test_counts_email(email_artifact):
    session = MonitorSession(email_artifact)
    assert session.counts().percent_ruled_out == 0.0
    session.step("sign")
    counts = session.counts()
    assert counts.possible == 2 and counts.ruled_out == 1
    assert counts.percent_ruled_out == pytest.approx(100.0 / 3.0)
    session.reset()
    session.step("sign")
    session.step("send")
    assert session.counts().percent_ruled_out == pytest.approx(200.0 / 3.0)


def test_counts_require_config_domain(coffee_artifact):
    session = MonitorSession(coffee_artifact)
    with pytest.raises(DomainError):
        session.counts()


def test_replay_email_trace(email_artifact):
    records = list(replay(email_artifact, ["sign", "enc", "send"]))
    assert len(records) == 4
    assert records[0].action is None
    assert [r.canonical for r in records[1:]] == [
        "{{e,s},{s}}", "{{e,s}}", "{{e,s}}",
    ]


def test_replay_empty_trace(email_artifact):
    records = list(replay(email_artifact, []))
    assert len(records) == 1
    assert records[0].canonical == "{{e,s},{e},{s}}"


def test_replay_coffee_burn(coffee_artifact):
    records = list(replay(coffee_artifact, ["request", "burn"]))
    assert records[-1].canonical == "{{F_s}}"


def test_trace_parsing_errors():
    with pytest.raises(TraceError, match="line 2"):
        parse_trace(["sign", "two words"])
    assert parse_trace(["# comment", "", "sign  # trailing"]) == [(3, "sign")]


def test_replay_reports_line_numbers(email_artifact):
    with pytest.raises(TraceError, match="line 2"):
        list(replay(email_artifact, ["sign", "shred"]))


def test_online_offline_coherence(email_artifact, email_model):
    monitor = track_annotations(email_model.annotated)
    rng = random.Random(90)
    words = [w for w in enumerate_language(monitor.ts, 6)]
    for word in rng.sample(words, min(40, len(words))):
        session = MonitorSession(email_artifact)
        for i, action in enumerate(word):
            session.step(action)
            prefix = word[: i + 1]
            assert session.verdict() == email_artifact.monitor.yielded(prefix)
            assert session.verdict() == monitor.yielded(prefix)


def test_deterministic_trajectories(coffee_artifact):
    trace = ["request", "dispense", "request", "request", "request"]
    first = [r.canonical for r in replay(coffee_artifact, trace)]
    second = [r.canonical for r in replay(coffee_artifact, trace)]
    assert first == second


def test_parallel_sessions_share_artifact(coffee_artifact):
    """Many sessions over one immutable artifact, one thread each."""
    import threading

    trace = ["request", "dispense", "request", "request"]
    expected = [r.canonical for r in replay(coffee_artifact, trace)]
    results = {}

    def worker(slot):
        results[slot] = [r.canonical for r in replay(coffee_artifact, trace)]

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(results[i] == expected for i in range(8))


def test_monotonic_artifact_never_widens(email_artifact, email_model):
    assert email_artifact.monotonic
    monitor = track_annotations(email_model.annotated)
    domain = email_artifact.domain
    for word in enumerate_language(monitor.ts, 6):
        session = MonitorSession(email_artifact)
        previous = session.verdict()
        for action in word:
            current = session.step(action)
            assert domain.leq(current, previous)
            previous = current


def test_artifact_round_trip(coffee_artifact):
    text = artifact_to_json(coffee_artifact)
    loaded = artifact_from_json(text)
    assert artifact_to_json(loaded) == text
    assert loaded.monitor.delta == coffee_artifact.monitor.delta
    assert [loaded.domain.canonical(v) for v in loaded.monitor.verdicts] == [
        coffee_artifact.domain.canonical(v) for v in coffee_artifact.monitor.verdicts
    ]
    assert loaded.monotonic == coffee_artifact.monotonic
    assert loaded.relaxed == coffee_artifact.relaxed


def test_provenance_hash_sensitivity():
    base = provenance_for(b"model-bytes", ["track", "determinize"])
    same = provenance_for(b"model-bytes", ["track", "determinize"])
    other_model = provenance_for(b"model-bytes!", ["track", "determinize"])
    other_pipeline = provenance_for(b"model-bytes", ["track", "determinize", "minimize"])
    assert base["hash"] == same["hash"]
    assert base["hash"] != other_model["hash"]
    assert base["hash"] != other_pipeline["hash"]
