"""Determinization and minimization: from a VTS to a runnable monitor."""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .domains import VerdictDomain, join_all
from .errors import ModelError, OutOfLanguage
from .model import TransitionSystem
from .vts import Vts


class DeterministicVts:
    """Compiled monitor: one initial state, one successor per (state, action).

    The transition table may be partial; missing entries mean the action is
    disabled in that state.  State ids are dense; id 0 is the initial state.
    """

    def __init__(self, actions, delta, verdicts, names=None, initial: int = 0):
        self.actions = tuple(actions)
        self.delta = tuple(dict(row) for row in delta)
        self.verdicts = tuple(verdicts)
        self.initial = initial
        self.names = tuple(names) if names is not None else tuple(
            f"q{i}" for i in range(len(self.verdicts))
        )
        n = len(self.verdicts)
        if len(self.delta) != n or len(self.names) != n:
            raise ModelError("inconsistent monitor tables")
        if not 0 <= initial < n:
            raise ModelError("initial state id out of range")
        for row in self.delta:
            for action, target in row.items():
                if not 0 <= action < len(self.actions) or not 0 <= target < n:
                    raise ModelError("monitor transition out of range")

    @property
    def num_states(self) -> int:
        return len(self.verdicts)

    @property
    def num_transitions(self) -> int:
        return sum(len(row) for row in self.delta)

    def size(self) -> tuple[int, int]:
        return self.num_states, self.num_transitions

    def action_index(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise ModelError(f"unknown action {name!r}") from None

    def step(self, state: int, action: int) -> int | None:
        return self.delta[state].get(action)

    def yielded(self, word: Sequence[str]):
        state = self.initial
        for name in word:
            state = self.step(state, self.action_index(name))
            if state is None:
                raise OutOfLanguage(f"word not in the monitor language: {' '.join(word)}")
        return self.verdicts[state]

    def as_vts(self, domain: VerdictDomain) -> Vts:
        transitions = [
            (src, action, dst)
            for src, row in enumerate(self.delta)
            for action, dst in row.items()
        ]
        ts = TransitionSystem(self.names, self.actions, (self.initial,), transitions)
        return Vts(ts, domain, self.verdicts)


def determinize(m: Vts) -> DeterministicVts:
    """Subset construction over reachable state sets.

    A subset's verdict is the join of its members' verdicts, computed once
    per subset; the result yields the same verdict as the input on every
    trace.
    """
    ts = m.ts
    subset_ids: dict[tuple[int, ...], int] = {}
    delta: list[dict[int, int]] = []
    verdicts: list = []
    names: list[str] = []
    queue: deque = deque()

    def intern(subset: tuple[int, ...]) -> int:
        node = subset_ids.get(subset)
        if node is None:
            node = len(verdicts)
            subset_ids[subset] = node
            verdicts.append(join_all(m.domain, (m.verdicts[q] for q in subset)))
            names.append("{" + ",".join(ts.states[q] for q in subset) + "}")
            delta.append({})
            queue.append(subset)
        return node

    intern(tuple(sorted(ts.initial)))
    while queue:
        subset = queue.popleft()
        node = subset_ids[subset]
        for action in range(len(ts.actions)):
            successor = ts.post(subset, (action,))
            if not successor:
                continue
            delta[node][action] = intern(tuple(sorted(successor)))

    return DeterministicVts(ts.actions, delta, verdicts, names)


def _quotient(d: DeterministicVts, blocks: list[tuple[int, ...]]) -> DeterministicVts:
    """Collapse each block to one state; blocks ordered by smallest member."""
    blocks = sorted(blocks, key=min)
    block_of = {}
    for index, block in enumerate(blocks):
        for state in block:
            block_of[state] = index
    delta = []
    verdicts = []
    names = []
    for block in blocks:
        row: dict[int, int] = {}
        for state in block:
            for action, target in d.delta[state].items():
                row[action] = block_of[target]
        delta.append(row)
        verdicts.append(d.verdicts[block[0]])
        names.append(d.names[min(block)])
    initial = block_of[d.initial]
    # Renumber so the initial block is state 0, preserving relative order.
    order = [initial] + [i for i in range(len(blocks)) if i != initial]
    remap = {old: new for new, old in enumerate(order)}
    return DeterministicVts(
        d.actions,
        [{a: remap[t] for a, t in delta[i].items()} for i in order],
        [verdicts[i] for i in order],
        [names[i] for i in order],
    )


def _verdict_partition(d: DeterministicVts, domain: VerdictDomain) -> list[list[int]]:
    groups: dict[str, list[int]] = {}
    for state in range(d.num_states):
        groups.setdefault(domain.canonical(d.verdicts[state]), []).append(state)
    return [groups[key] for key in sorted(groups)]


def minimize(d: DeterministicVts, domain: VerdictDomain) -> DeterministicVts:
    """Language-preserving minimization by partition refinement.

    States start partitioned by verdict and are split until each block is
    closed under successor blocks; a missing transition acts as an implicit
    trap distinct from every live block.  The result is the unique minimal
    monitor yielding the same verdicts on the same language.
    """
    blocks = _verdict_partition(d, domain)
    while True:
        block_of = {}
        for index, block in enumerate(blocks):
            for state in block:
                block_of[state] = index
        groups: dict[tuple, list[int]] = {}
        for state in range(d.num_states):
            # -1 is the implicit trap block for missing transitions
            signature = (
                block_of[state],
                tuple(
                    block_of[d.delta[state][a]] if a in d.delta[state] else -1
                    for a in range(len(d.actions))
                ),
            )
            groups.setdefault(signature, []).append(state)
        if len(groups) == len(blocks):
            break
        blocks = [groups[key] for key in sorted(groups)]
    return _quotient(d, [tuple(sorted(b)) for b in blocks])


def minimize_relaxed(d: DeterministicVts, domain: VerdictDomain) -> DeterministicVts:
    """Minimization that may grow the language but preserves verdicts on it.

    A block is split by a splitter (action, target block) only when members
    have transitions landing both inside and outside the target; members
    without the action are attached to the inside half.  Splitters are
    scanned in (action, ascending block-minimum) order, so the outcome is
    reproducible.
    """
    blocks = [tuple(sorted(b)) for b in _verdict_partition(d, domain)]
    changed = True
    while changed:
        changed = False
        blocks.sort(key=min)
        for action in range(len(d.actions)):
            target_index = 0
            while target_index < len(blocks):
                target = set(blocks[target_index])
                block_index = 0
                while block_index < len(blocks):
                    block = blocks[block_index]
                    inside, outside, undefined = [], [], []
                    for state in block:
                        succ = d.delta[state].get(action)
                        if succ is None:
                            undefined.append(state)
                        elif succ in target:
                            inside.append(state)
                        else:
                            outside.append(state)
                    if inside and outside:
                        blocks[block_index] = tuple(sorted(inside + undefined))
                        blocks.append(tuple(outside))
                        changed = True
                    block_index += 1
                target_index += 1
    return _quotient(d, blocks)


def strip_self_loops(d: DeterministicVts) -> DeterministicVts:
    """Drop self-loop transitions; a relaxed-mode runtime stays in state anyway."""
    delta = [
        {action: target for action, target in row.items() if target != src}
        for src, row in enumerate(d.delta)
    ]
    return DeterministicVts(d.actions, delta, d.verdicts, d.names, d.initial)
