"""Building blocks of the monitor-synthesis pipeline.

Each transformation is a pure function from one VTS (or annotated model) to
a new VTS.  Outputs contain only states reachable from the initial states
and never carry an undefined verdict.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Sequence

from .domains import BoolExprDomain, LiftedDomain, VerdictDomain, join_all
from .errors import DomainError, PipelineError
from .model import AnnotatedTS, TransitionSystem
from .vts import Vts, prune_unreachable


def track_annotations(annotated: AnnotatedTS) -> Vts:
    """Pair model states with the running meet of annotations along executions.

    Only reachable (state, accumulated) pairs are built; pairs whose verdict
    has no meet with the state annotation are dropped, which also drops the
    executions that cannot arise under any single verdict.
    """
    ts = annotated.ts
    domain = annotated.domain
    try:
        top = domain.top()
    except DomainError as exc:
        raise PipelineError(f"annotation tracking needs a domain top: {exc}") from exc

    guard_of = dict(zip(ts.transitions, annotated.trans_annot))

    node_ids: dict[tuple[int, object], int] = {}
    names: list[str] = []
    verdicts: list = []
    origin_count: dict[int, int] = {}
    initial: list[int] = []
    transitions: list[tuple[int, int, int]] = []

    def intern(state: int, accumulated) -> int | None:
        key = (state, accumulated)
        if key in node_ids:
            return node_ids[key]
        verdict = domain.meet(accumulated, annotated.state_annot[state])
        if verdict is None:
            return None
        node = len(names)
        node_ids[key] = node
        serial = origin_count.get(state, 0)
        origin_count[state] = serial + 1
        suffix = f"#{serial}" if serial else ""
        names.append(f"{ts.states[state]}{suffix}")
        verdicts.append(verdict)
        queue.append((node, state, accumulated))
        return node

    queue: deque = deque()
    for state in ts.initial:
        node = intern(state, top)
        if node is not None:
            initial.append(node)
    while queue:
        node, state, accumulated = queue.popleft()
        for action, dst in ts.outgoing(state):
            accumulated_next = domain.meet(accumulated, guard_of[(state, action, dst)])
            if accumulated_next is None:
                continue
            succ = intern(dst, accumulated_next)
            if succ is None:
                continue
            transitions.append((node, action, succ))

    if not initial:
        raise PipelineError("annotation tracking produced no initial state")
    tracked = TransitionSystem(names, ts.actions, initial, transitions)
    return Vts(tracked, domain, verdicts)


def specialize(monitor: Vts, ts: TransitionSystem, sync: Iterable[str]) -> Vts:
    """Synchronous product with a system model over the shared actions.

    The monitor must be action-enabled over the sync actions, so the
    product's language equals the system model's.
    """
    sync = tuple(sorted(set(sync)))
    missing = [a for a in sync if not ts.has_action(a)]
    if missing:
        raise PipelineError(f"sync action(s) not in the system model: {missing}")
    missing = [a for a in sync if not monitor.ts.has_action(a)]
    if missing:
        raise PipelineError(f"sync action(s) not in the monitor: {missing}")
    sync_ids = monitor.ts.action_ids(sync)
    if not monitor.ts.is_action_enabled(sync_ids):
        raise PipelineError("monitor is not action-enabled over the sync actions")
    sync_set = set(sync)

    node_ids: dict[tuple[int, int], int] = {}
    names: list[str] = []
    verdicts: list = []
    initial: list[int] = []
    transitions: list[tuple[int, int, int]] = []
    queue: deque = deque()

    def intern(system_state: int, monitor_state: int) -> int:
        key = (system_state, monitor_state)
        if key in node_ids:
            return node_ids[key]
        node = len(names)
        node_ids[key] = node
        names.append(f"({ts.states[system_state]},{monitor.ts.states[monitor_state]})")
        verdicts.append(monitor.verdicts[monitor_state])
        queue.append(key)
        return node

    for s in ts.initial:
        for q in monitor.ts.initial:
            initial.append(intern(s, q))
    while queue:
        system_state, monitor_state = queue.popleft()
        node = node_ids[(system_state, monitor_state)]
        for action in range(len(ts.actions)):
            name = ts.actions[action]
            for system_next in ts.post_one(system_state, action):
                if name in sync_set:
                    monitor_action = monitor.ts.action_index(name)
                    for monitor_next in monitor.ts.post_one(monitor_state, monitor_action):
                        succ = intern(system_next, monitor_next)
                        transitions.append((node, action, succ))
                else:
                    succ = intern(system_next, monitor_state)
                    transitions.append((node, action, succ))

    product = TransitionSystem(names, ts.actions, initial, transitions)
    return Vts(product, monitor.domain, verdicts)


def lookahead_refine(m: Vts) -> Vts:
    """Refine monotonic states' verdicts with the join of their successors'.

    A state whose successors are all at least as specific (under the
    current verdicts) takes the join of their verdicts; others, and states
    without successors, are left alone.  Iterated to the fixpoint, which is
    stable under re-application; the result refines the input and stays
    monotonic when the input is.
    """
    ts = m.ts
    domain = m.domain
    all_actions = range(len(ts.actions))
    successors = [sorted(ts.post((q,), all_actions)) for q in range(len(ts.states))]
    current = list(m.verdicts)
    changed = True
    while changed:
        changed = False
        updated = list(current)
        for q in range(len(ts.states)):
            if not successors[q]:
                continue
            if not all(domain.leq(current[p], current[q]) for p in successors[q]):
                continue
            joined = join_all(domain, (current[p] for p in successors[q]))
            if joined != current[q]:
                updated[q] = joined
                changed = True
        current = updated
    return prune_unreachable(Vts(ts, domain, current))


def _bounded_closure(ts: TransitionSystem, actions: frozenset[int], bound: int | None):
    """Per-state set of states reachable by at most `bound` steps over `actions`.

    bound=None iterates to the fixpoint (equivalently |states| steps).
    """
    closures = []
    for q in range(len(ts.states)):
        reached = {q}
        frontier = {q}
        steps = 0
        while frontier and (bound is None or steps < bound):
            frontier = set(ts.post(frontier, actions)) - reached
            reached |= frontier
            steps += 1
        closures.append(frozenset(reached))
    return closures


def observability_project(m: Vts, observable: Iterable[str]) -> Vts:
    """Collapse unobservable steps: joins over indistinguishable traces.

    The result reads only observable actions; its verdicts subsume every
    original trace with the same observable projection.
    """
    observable = tuple(a for a in m.ts.actions if a in set(observable))
    unknown = set(observable) - set(m.ts.actions)
    if unknown:
        raise PipelineError(f"observable action(s) not in the alphabet: {sorted(unknown)}")
    ts = m.ts
    unobservable = frozenset(
        i for i, name in enumerate(ts.actions) if name not in set(observable)
    )
    closures = _bounded_closure(ts, unobservable, None)
    verdicts = [
        join_all(m.domain, (m.verdicts[p] for p in sorted(closures[q])))
        for q in range(len(ts.states))
    ]
    new_action_index = {name: i for i, name in enumerate(observable)}
    transitions = set()
    for q in range(len(ts.states)):
        for p in closures[q]:
            for act, dst in ts.outgoing(p):
                name = ts.actions[act]
                if name in new_action_index:
                    transitions.add((q, new_action_index[name], dst))
    projected = TransitionSystem(ts.states, observable, ts.initial, sorted(transitions))
    return prune_unreachable(Vts(projected, m.domain, verdicts))


def delay_robust(m: Vts, bound: int | None) -> Vts:
    """Account for observations arriving up to `bound` steps late.

    Verdicts join over everything reachable within the bound; transitions
    are unchanged.  bound=None handles unbounded delays.
    """
    if bound == 0:
        return m
    ts = m.ts
    closures = _bounded_closure(ts, frozenset(range(len(ts.actions))), bound)
    verdicts = [
        join_all(m.domain, (m.verdicts[p] for p in sorted(closures[q])))
        for q in range(len(ts.states))
    ]
    return prune_unreachable(Vts(ts, m.domain, verdicts))


def loss_robust(m: Vts, bound: int | None) -> Vts:
    """Tolerate runs of up to `bound` consecutive lost observations.

    Like delay robustness but each arriving observation may also be preceded
    by up to `bound` lost steps, so transitions are rewired through the
    bounded closure.  bound=None handles unbounded losses.
    """
    if bound == 0:
        return m
    ts = m.ts
    closures = _bounded_closure(ts, frozenset(range(len(ts.actions))), bound)
    verdicts = [
        join_all(m.domain, (m.verdicts[p] for p in sorted(closures[q])))
        for q in range(len(ts.states))
    ]
    transitions = set(ts.transitions)
    for q in range(len(ts.states)):
        for p in closures[q]:
            for act, dst in ts.outgoing(p):
                transitions.add((q, act, dst))
    rewired = TransitionSystem(ts.states, ts.actions, ts.initial, sorted(transitions))
    return prune_unreachable(Vts(rewired, m.domain, verdicts))


def possibility_lift(m: Vts) -> Vts:
    """Move to sets-of-verdicts so indistinguishable outcomes stay separate."""
    lifted = LiftedDomain(m.domain)
    return prune_unreachable(Vts(m.ts, lifted, [lifted.lift(v) for v in m.verdicts]))


def is_loss_pattern(pattern: Sequence[str], bound: int) -> bool:
    """True iff every maximal run of losses ('L') has length at most bound."""
    run = 0
    for symbol in pattern:
        if symbol == "L":
            run += 1
            if run > bound:
                return False
        elif symbol == "A":
            run = 0
        else:
            raise DomainError(f"loss patterns are over 'L'/'A', got {symbol!r}")
    return True


def loss_patterns(length: int, bound: int) -> Iterator[tuple[str, ...]]:
    """All loss/arrival words of the given length with loss runs ≤ bound."""

    def extend(prefix, run):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        prefix.append("A")
        yield from extend(prefix, 0)
        prefix.pop()
        if run < bound:
            prefix.append("L")
            yield from extend(prefix, run + 1)
            prefix.pop()

    yield from extend([], 0)


def apply_loss_pattern(word: Sequence[str], pattern: Sequence[str]) -> tuple[str, ...]:
    """Remove the observations marked lost; pattern and word must align."""
    if len(word) != len(pattern):
        raise DomainError("loss pattern length must match the word length")
    return tuple(a for a, x in zip(word, pattern) if x == "A")


def modal_query(domain: VerdictDomain, verdict, expression, mode: str) -> bool:
    """Evaluate a necessity/possibility query against a lifted event verdict.

    The verdict's members are sets of possible worlds; the query holds
    necessarily iff every member is contained in the expression's worlds,
    and possibly iff some member is.
    """
    if not isinstance(domain, LiftedDomain) or not isinstance(domain.inner, BoolExprDomain):
        raise DomainError("modal queries need a lifted basic-event domain")
    if mode not in ("necessary", "possible"):
        raise DomainError(f"unknown query mode {mode!r}")
    worlds = domain.inner.expr_models(expression)
    if mode == "necessary":
        return all(member <= worlds for member in verdict)
    return any(member <= worlds for member in verdict)
