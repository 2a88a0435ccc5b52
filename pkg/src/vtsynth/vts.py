"""Verdict transition systems and their semantic analyses.

A VTS is a transition system whose states carry verdicts from a
join-semilattice; reading a word yields the join of the verdicts over all
reachable states.  Analyses here are pure functions over immutable values.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .domains import ConfigDomain, VerdictDomain, join_all
from .errors import DomainError, ModelError, OutOfLanguage
from .model import Model, TransitionSystem, project_config


class Vts:
    """States with verdicts over a shared domain; immutable by convention."""

    def __init__(self, ts: TransitionSystem, domain: VerdictDomain, verdicts):
        self.ts = ts
        self.domain = domain
        self.verdicts = tuple(verdicts)
        if len(self.verdicts) != len(ts.states):
            raise ModelError("verdict function is not total")
        for v in self.verdicts:
            if not domain.validate(v):
                raise ModelError(f"invalid verdict {v!r}")

    @property
    def states(self):
        return self.ts.states

    @property
    def actions(self):
        return self.ts.actions

    def verdict_of(self, state: int):
        return self.verdicts[state]

    def yielded(self, word: Sequence[str]):
        """Join of the verdicts over all word-reachable states.

        Raises OutOfLanguage when the word is not a trace.
        """
        reached = self.ts.reachable_states(word)
        if not reached:
            raise OutOfLanguage(f"word not in the monitor language: {' '.join(word) or 'ε'}")
        return join_all(self.domain, (self.verdicts[q] for q in sorted(reached)))

    def accepts(self, word: Sequence[str]) -> bool:
        return self.ts.accepts(word)

    def size(self) -> tuple[int, int]:
        return len(self.ts.states), len(self.ts.transitions)


def prune_unreachable(m: Vts) -> Vts:
    """Drop states unreachable from the initial states (order preserved)."""
    ts = m.ts
    seen = set(ts.initial)
    frontier = deque(sorted(seen))
    while frontier:
        state = frontier.popleft()
        for action in range(len(ts.actions)):
            for succ in ts.post_one(state, action):
                if succ not in seen:
                    seen.add(succ)
                    frontier.append(succ)
    if len(seen) == len(ts.states):
        return m
    keep = sorted(seen)
    remap = {old: new for new, old in enumerate(keep)}
    new_ts = TransitionSystem(
        [ts.states[i] for i in keep],
        ts.actions,
        [remap[i] for i in ts.initial],
        [
            (remap[s], a, remap[t])
            for (s, a, t) in ts.transitions
            if s in seen and t in seen
        ],
    )
    return Vts(new_ts, m.domain, [m.verdicts[i] for i in keep])


class MonotonicityReport(NamedTuple):
    ok: bool
    violations: tuple[int, ...]


def is_monotonic(m: Vts) -> MonotonicityReport:
    """Check that every successor verdict is at least as specific.

    Returns the offending states (those with a less specific successor).
    """
    violations = []
    ts = m.ts
    for state in range(len(ts.states)):
        successors = ts.post((state,), range(len(ts.actions)))
        if any(not m.domain.leq(m.verdicts[q], m.verdicts[state]) for q in sorted(successors)):
            violations.append(state)
    return MonotonicityReport(not violations, tuple(violations))


def state_is_monotonic(m: Vts, state: int) -> bool:
    successors = m.ts.post((state,), range(len(m.ts.actions)))
    return all(m.domain.leq(m.verdicts[q], m.verdicts[state]) for q in successors)


def _require_comparable(m: Vts, other: Vts):
    if sorted(m.ts.actions) != sorted(other.ts.actions):
        raise DomainError("alphabet mismatch between compared monitors")
    if not m.domain.compatible_with(other.domain):
        raise DomainError("verdict-domain mismatch between compared monitors")


def refines(m: Vts, other: Vts, depth: int | None = None) -> bool:
    """Same language and at-least-as-specific verdicts on every trace.

    With depth=None the check walks the full product of reachable state
    sets, which is exact; a depth bounds the word length instead.
    """
    _require_comparable(m, other)
    domain = m.domain
    start = (frozenset(m.ts.initial), frozenset(other.ts.initial))
    seen = {start}
    queue = deque([(start, 0)])
    action_names = sorted(m.ts.actions)
    while queue:
        (left, right), dist = queue.popleft()
        left_verdict = join_all(domain, (m.verdicts[q] for q in sorted(left)))
        right_verdict = join_all(domain, (other.verdicts[q] for q in sorted(right)))
        if not domain.leq(left_verdict, right_verdict):
            return False
        if depth is not None and dist >= depth:
            continue
        for name in action_names:
            next_left = m.ts.post(left, (m.ts.action_index(name),))
            next_right = other.ts.post(right, (other.ts.action_index(name),))
            if bool(next_left) != bool(next_right):
                return False
            if not next_left:
                continue
            pair = (next_left, next_right)
            if pair not in seen:
                seen.add(pair)
                queue.append((pair, dist + 1))
    return True


def verdict_equivalent(m: Vts, other: Vts, depth: int | None = None) -> bool:
    """True iff the two monitors refine each other."""
    return refines(m, other, depth) and refines(other, m, depth)


@dataclass
class SoundnessReport:
    sound: bool
    complete: bool
    soundness_counterexamples: list = field(default_factory=list)
    completeness_counterexamples: list = field(default_factory=list)
    words_checked: int = 0

    def summary(self) -> str:
        parts = [
            "sound" if self.sound else f"UNSOUND ({len(self.soundness_counterexamples)} cex)",
            "complete" if self.complete else f"INCOMPLETE ({len(self.completeness_counterexamples)} cex)",
        ]
        return ", ".join(parts) + f" over {self.words_checked} words"


def check_sound_complete(monitor: Vts, model: Model, depth: int) -> SoundnessReport:
    """Bounded soundness/completeness report of a configuration monitor.

    Soundness: every configuration in a yielded verdict has a witnessing
    trace in its variant.  Completeness: every configuration whose variant
    accepts the word appears in the verdict.  All words up to the depth over
    the model's alphabet are checked.
    """
    domain = monitor.domain
    if not isinstance(domain, ConfigDomain):
        raise DomainError("soundness/completeness check needs a configuration monitor")
    if not set(monitor.ts.actions) <= set(model.ts.actions):
        raise DomainError("monitor alphabet exceeds the model alphabet")
    configs = domain.configs(domain.top())
    variants = {config: project_config(model, config) for config in configs}

    report = SoundnessReport(sound=True, complete=True)

    def visit(word, monitor_states, variant_states):
        report.words_checked += 1
        in_monitor = bool(monitor_states)
        if in_monitor:
            verdict = join_all(domain, (monitor.verdicts[q] for q in sorted(monitor_states)))
            reported = set(domain.configs(verdict))
        else:
            reported = set()
        accepted = {config for config, states in variant_states.items() if states}
        if in_monitor:
            for config in sorted(reported - accepted, key=domain.config_label):
                report.sound = False
                report.soundness_counterexamples.append((word, config))
        for config in sorted(accepted, key=domain.config_label):
            if not in_monitor or config not in reported:
                report.complete = False
                report.completeness_counterexamples.append((word, config))
        if len(word) >= depth:
            return
        for name in model.ts.actions:
            next_monitor = (
                monitor.ts.post(monitor_states, (monitor.ts.action_index(name),))
                if in_monitor and monitor.ts.has_action(name)
                else frozenset()
            )
            next_variants = {
                config: variants[config].post(states, (variants[config].action_index(name),))
                for config, states in variant_states.items()
            }
            if not next_monitor and not any(next_variants.values()):
                continue
            visit(word + (name,), next_monitor, next_variants)

    visit(
        (),
        frozenset(monitor.ts.initial),
        {config: frozenset(variants[config].initial) for config in configs},
    )
    return report
