"""Yielded verdicts, monotonicity, refinement, and soundness checks."""

import itertools
import random

import pytest

from vtsynth.domains import TRUTH5, DiagnosisDomain, join_all, meet_all
from vtsynth.errors import DomainError, OutOfLanguage
from vtsynth.compiler import determinize
from vtsynth.model import TransitionSystem
from vtsynth.synth import lookahead_refine, track_annotations
from vtsynth.vts import (
    Vts,
    check_sound_complete,
    is_monotonic,
    refines,
    verdict_equivalent,
)

from generators import random_config_vts
from oracles import enumerate_language, naive_yielded


@pytest.fixture(scope="module")
def email_monitor(email_model):
    return track_annotations(email_model.annotated)


def configs_of(monitor, word):
    domain = monitor.domain
    return set(domain.configs(monitor.yielded(word)))


def test_yielded_email_verdicts(email_monitor):
    assert configs_of(email_monitor, ()) == {
        frozenset({"s", "e"}), frozenset({"s"}), frozenset({"e"}),
    }
    assert configs_of(email_monitor, ("sign",)) == {frozenset({"s", "e"}), frozenset({"s"})}
    assert configs_of(email_monitor, ("sign", "enc")) == {frozenset({"s", "e"})}
    assert configs_of(email_monitor, ("sign", "send")) == {frozenset({"s"})}


def test_yielded_out_of_language(email_monitor):
    with pytest.raises(OutOfLanguage):
        email_monitor.yielded(("send",))


def test_yielded_deterministic_equals_single_state(email_monitor):
    # the email monitor happens to be deterministic: one reached state per word
    for word in enumerate_language(email_monitor.ts, 4):
        reached = email_monitor.ts.reachable_states(word)
        assert len(reached) == 1
        (state,) = reached
        assert email_monitor.yielded(word) == email_monitor.verdicts[state]


def test_yielded_invariant_under_renumbering():
    rng = random.Random(99)
    for _ in range(20):
        m = random_config_vts(rng)
        order = list(range(len(m.ts.states)))
        rng.shuffle(order)
        remap = {old: new for new, old in enumerate(order)}
        permuted_ts = TransitionSystem(
            [m.ts.states[old] for old in order],
            m.ts.actions,
            [remap[s] for s in m.ts.initial],
            [(remap[s], a, remap[t]) for (s, a, t) in m.ts.transitions],
        )
        permuted = Vts(permuted_ts, m.domain, [m.verdicts[old] for old in order])
        for word in enumerate_language(m.ts, 4):
            assert m.yielded(word) == permuted.yielded(word)


def test_monotonic_email(email_monitor):
    report = is_monotonic(email_monitor)
    assert report.ok and report.violations == ()


def test_monotonic_truth_monitor(request_monitor_model):
    monitor = track_annotations(request_monitor_model.annotated)
    assert is_monotonic(monitor).ok


def test_non_monotonic_toggle():
    ts = TransitionSystem(["u", "v"], ["x"], [0], [(0, 0, 1), (1, 0, 0)])
    toggling = Vts(ts, TRUTH5, ["tp", "fp"])
    report = is_monotonic(toggling)
    assert not report.ok
    assert set(report.violations) == {0, 1}


def fig6_pair():
    """Branching fixture: initial verdict can be predicted one step early."""
    ts = TransitionSystem(
        ["start", "left", "right"],
        ["alpha", "beta"],
        [0],
        [(0, 0, 1), (0, 1, 2), (1, 0, 1), (2, 1, 2)],
    )
    from vtsynth.domains import ExplicitConfigDomain

    domain = ExplicitConfigDomain(
        ("a", "b", "c"), (frozenset({"a"}), frozenset({"b"}), frozenset({"c"}))
    )
    all3 = domain.top()
    va = domain.verdict_from_configs([frozenset({"a"})])
    vb = domain.verdict_from_configs([frozenset({"b"})])
    coarse = Vts(ts, domain, [all3, va, vb])
    refined = Vts(ts, domain, [domain.join(va, vb), va, vb])
    return coarse, refined


def test_refines_examples():
    coarse, refined = fig6_pair()
    assert refines(lookahead_refine(coarse), coarse)
    assert refines(coarse, coarse)
    assert refines(refined, coarse)
    assert not refines(coarse, refined)


def test_refines_bounded_matches_exact():
    rng = random.Random(5)
    for _ in range(20):
        m = random_config_vts(rng, max_states=5)
        refined = lookahead_refine(m)
        exact = refines(refined, m, depth=None)
        bounded = refines(refined, m, depth=len(m.ts.states) * len(refined.ts.states))
        assert exact == bounded


def test_refines_alphabet_mismatch():
    coarse, _ = fig6_pair()
    other_ts = TransitionSystem(["q"], ["gamma"], [0], [])
    other = Vts(other_ts, coarse.domain, [coarse.domain.top()])
    with pytest.raises(DomainError, match="alphabet"):
        refines(coarse, other)


def test_verdict_equivalent_determinize(email_monitor):
    det = determinize(email_monitor).as_vts(email_monitor.domain)
    assert verdict_equivalent(email_monitor, det)


def test_verdict_equivalent_fails_on_difference():
    coarse, refined = fig6_pair()
    assert not verdict_equivalent(coarse, refined)


def _mutate_verdict(monitor, word, new_verdict):
    (state,) = monitor.ts.reachable_states(word)
    verdicts = list(monitor.verdicts)
    verdicts[state] = new_verdict
    return Vts(monitor.ts, monitor.domain, verdicts)


def test_sound_complete_email(email_model, email_monitor):
    report = check_sound_complete(email_monitor, email_model, depth=6)
    assert report.sound and report.complete


def test_widened_monitor_unsound(email_model, email_monitor):
    domain = email_monitor.domain
    widened = _mutate_verdict(email_monitor, ("sign",), domain.top())
    report = check_sound_complete(widened, email_model, depth=4)
    assert report.complete and not report.sound
    assert ((("sign",), frozenset({"e"})) in
            [(w, c) for w, c in report.soundness_counterexamples])


def test_narrowed_monitor_incomplete(email_model, email_monitor):
    domain = email_monitor.domain
    narrowed = _mutate_verdict(
        email_monitor, ("sign",), domain.verdict_from_configs([frozenset({"s", "e"})])
    )
    report = check_sound_complete(narrowed, email_model, depth=4)
    assert report.sound and not report.complete
    assert ((("sign",), frozenset({"s"})) in
            [(w, c) for w, c in report.completeness_counterexamples])


def test_simple_multivalued_automaton_casts_to_vts():
    """A simple multi-valued acceptor and its VTS cast agree word by word.

    The acceptor marks initial states and transitions as present/absent and
    grades acceptance by a lattice value per state; its per-word value is
    the join over runs of the final state's value, which is exactly the
    VTS semantics.
    """
    domain = DiagnosisDomain(("F0", "F1"))
    states = ["p", "q", "r"]
    initial_marks = {"p": True, "q": False, "r": True}
    transition_marks = {
        ("p", "a", "q"): True,
        ("p", "a", "r"): True,
        ("q", "b", "p"): True,
        ("r", "b", "r"): True,
        ("q", "a", "r"): False,  # absent
    }
    grade = {"p": frozenset(), "q": frozenset({"F0"}), "r": frozenset({"F0", "F1"})}

    triples = [
        (states.index(s), ["a", "b"].index(x), states.index(t))
        for (s, x, t), present in transition_marks.items()
        if present
    ]
    ts = TransitionSystem(states, ["a", "b"], [0, 2], triples)
    cast = Vts(ts, domain, [grade[s] for s in states])

    def runs(word):
        found = []

        def extend(state, rest, path):
            if not rest:
                found.append(path + [state])
                return
            for (s, x, t), present in transition_marks.items():
                if present and s == state and x == rest[0]:
                    extend(t, rest[1:], path + [state])

        for s, marked in initial_marks.items():
            if marked:
                extend(s, list(word), [])
        return found

    for length in range(0, 6):
        for word in itertools.product("ab", repeat=length):
            finals = [run[-1] for run in runs(word)]
            if not finals:
                assert not cast.accepts(word)
                continue
            expected = join_all(domain, [grade[s] for s in finals])
            assert cast.yielded(word) == expected


def test_meet_all_matches_pairwise():
    domain = DiagnosisDomain(("F0", "F1", "F2"))
    rng = random.Random(3)
    for _ in range(50):
        values = [
            frozenset(c for c in domain.classes if rng.random() < 0.5) for _ in range(3)
        ]
        result = meet_all(domain, values)
        assert result == values[0] | values[1] | values[2]


def test_naive_yielded_agrees(email_monitor):
    for word in enumerate_language(email_monitor.ts, 5):
        assert naive_yielded(email_monitor, word) == email_monitor.yielded(word)
