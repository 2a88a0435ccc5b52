"""Size reports and seeded Monte-Carlo specificity evaluation.

Runs are partitioned by index and every run derives its own random stream
from (seed, tag, run index), so reports are bit-identical across repeat
runs and across worker counts.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
import statistics
from dataclasses import dataclass, field
from multiprocessing import get_context

from .compiler import DeterministicVts, determinize, minimize, minimize_relaxed, strip_self_loops
from .domains import ConfigDomain
from .errors import DomainError, ModelError
from .model import Model, project_config
from .synth import observability_project, track_annotations

DESK_RUNS = 10_000
DESK_STEPS = 200
FULL_RUNS = 160_000
FULL_STEPS = 1_000


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs for the specificity simulation; seeded runs are reproducible."""

    runs: int = DESK_RUNS
    steps: int = DESK_STEPS
    seed: int = 0
    workers: int = 1
    on_dead_end: str = "stop"  # or "resample"
    max_resample_attempts: int = 100


def _derived_rng(seed: int, tag: str, run_index: int, attempt: int) -> random.Random:
    material = f"{seed}:{tag}:{run_index}:{attempt}".encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass
class SizeRow:
    name: str
    config_count: int
    action_count: int
    fts_states: int
    fts_transitions: int
    monitor_states: int
    monitor_transitions: int
    minimized_states: int
    minimized_transitions: int
    relaxed_states: int
    relaxed_transitions: int


def size_report(model: Model, observable=None, name: str = "model") -> SizeRow:
    """One table row: model size, monitor size, and both minimized sizes."""
    domain = model.domain
    if not isinstance(domain, ConfigDomain):
        raise DomainError("size reports are defined for configuration models")
    obs = tuple(observable) if observable is not None else model.observable_actions()
    tracked = track_annotations(model.annotated)
    projected = observability_project(tracked, obs)
    monitor = determinize(projected)
    minimized = minimize(monitor, domain)
    relaxed = strip_self_loops(minimize_relaxed(monitor, domain))
    return SizeRow(
        name=name,
        config_count=domain.universe_count(),
        action_count=len(model.ts.actions),
        fts_states=len(model.ts.states),
        fts_transitions=len(model.ts.transitions),
        monitor_states=monitor.num_states,
        monitor_transitions=monitor.num_transitions,
        minimized_states=minimized.num_states,
        minimized_transitions=minimized.num_transitions,
        relaxed_states=relaxed.num_states,
        relaxed_transitions=relaxed.num_transitions,
    )


class _SimulationContext:
    """Precomputed per-configuration walk tables shared by all runs."""

    def __init__(self, model: Model, monitor: DeterministicVts, observable):
        domain = model.domain
        if not isinstance(domain, ConfigDomain):
            raise DomainError("specificity simulation needs a configuration model")
        missing = [a for a in monitor.actions if not model.ts.has_action(a)]
        if missing:
            raise DomainError(f"monitor/model alphabet mismatch: {missing}")
        self.domain = domain
        self.monitor = monitor
        self.monitor_actions = {name: i for i, name in enumerate(monitor.actions)}
        self.universe = domain.configs(domain.top())
        self.total = len(self.universe)
        ts = model.ts
        self.action_names = ts.actions
        self.initial = tuple(ts.initial)
        # outgoing transition lists of every variant, indexed by configuration
        self.variant_outgoing = []
        for config in self.universe:
            variant = project_config(model, config)
            self.variant_outgoing.append(
                tuple(variant.outgoing(s) for s in range(len(variant.states)))
            )

    def run_percent(self, cfg: SimulationConfig, tag: str, run_index: int) -> float:
        attempt = 0
        while True:
            rng = _derived_rng(cfg.seed, tag, run_index, attempt)
            percent, dead_end = self._walk(rng, cfg.steps)
            if not dead_end or cfg.on_dead_end == "stop":
                return percent
            attempt += 1
            if attempt >= cfg.max_resample_attempts:
                return percent

    def _walk(self, rng: random.Random, steps: int) -> tuple[float, bool]:
        config_index = rng.randrange(self.total)
        outgoing = self.variant_outgoing[config_index]
        state = self.initial[rng.randrange(len(self.initial))]
        monitor_state = self.monitor.initial
        dead_end = False
        for _ in range(steps):
            choices = outgoing[state]
            if not choices:
                dead_end = True
                break
            action, state = choices[rng.randrange(len(choices))]
            name = self.action_names[action]
            monitor_action = self.monitor_actions.get(name)
            if monitor_action is not None:
                successor = self.monitor.step(monitor_state, monitor_action)
                if successor is None:
                    raise DomainError(
                        "monitor rejected a model trace; was it built from this model?"
                    )
                monitor_state = successor
        possible = self.domain.count(self.monitor.verdicts[monitor_state])
        return 100.0 * (self.total - possible) / self.total, dead_end


@dataclass
class SpecificityResult:
    mean: float
    stderr: float
    runs: int
    steps: int
    per_run: list[float] = field(default_factory=list)


_WORKER_STATE: dict = {}


def _worker_init(context, cfg, tag):
    _WORKER_STATE["context"] = context
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["tag"] = tag


def _worker_chunk(bounds):
    start, stop = bounds
    context = _WORKER_STATE["context"]
    cfg = _WORKER_STATE["cfg"]
    tag = _WORKER_STATE["tag"]
    return [context.run_percent(cfg, tag, i) for i in range(start, stop)]


def simulate_specificity(
    model: Model,
    monitor: DeterministicVts,
    cfg: SimulationConfig,
    tag: str = "",
) -> SpecificityResult:
    """Expected ruled-out percentage after random walks through the model.

    Each run samples a configuration uniformly, walks the variant choosing
    uniformly among enabled transitions, feeds the monitor the actions it
    observes, and records the final ruled-out percentage.  Dead ends end a
    run early (or trigger a resample, per the config).
    """
    context = _SimulationContext(model, monitor, monitor.actions)
    per_run: list[float] = []
    if cfg.workers <= 1:
        for i in range(cfg.runs):
            per_run.append(context.run_percent(cfg, tag, i))
    else:
        chunk = math.ceil(cfg.runs / cfg.workers)
        bounds = [
            (start, min(start + chunk, cfg.runs)) for start in range(0, cfg.runs, chunk)
        ]
        ctx = get_context("fork")
        with ctx.Pool(
            processes=cfg.workers, initializer=_worker_init, initargs=(context, cfg, tag)
        ) as pool:
            for chunk_result in pool.map(_worker_chunk, bounds):
                per_run.extend(chunk_result)
    mean = statistics.fmean(per_run) if per_run else 0.0
    stderr = (
        statistics.stdev(per_run) / math.sqrt(len(per_run)) if len(per_run) > 1 else 0.0
    )
    return SpecificityResult(mean, stderr, cfg.runs, cfg.steps, per_run)


@dataclass
class SubsetRow:
    observable: tuple[str, ...]
    mean: float
    stderr: float


@dataclass
class SweepResult:
    k: int
    rows: list[SubsetRow]
    partial: bool = False

    @property
    def best(self) -> SubsetRow:
        return max(self.rows, key=lambda r: (r.mean, r.observable))

    @property
    def worst(self) -> SubsetRow:
        return min(self.rows, key=lambda r: (r.mean, r.observable))


def synthesize_projection_monitor(model: Model, observable) -> DeterministicVts:
    """track → project(observable) → determinize; enough for running traces."""
    tracked = track_annotations(model.annotated)
    projected = observability_project(tracked, observable)
    return determinize(projected)


def sweep_observability(
    model: Model,
    k: int,
    cfg: SimulationConfig,
    budget: int | None = None,
) -> SweepResult:
    """Specificity extremes over all k-subsets of the alphabet.

    One monitor is synthesized per subset.  If a budget is given and the
    number of subsets exceeds it, only the first subsets (in sorted order)
    are evaluated and the report is flagged partial.
    """
    actions = sorted(model.ts.actions)
    if not 0 <= k <= len(actions):
        raise ModelError(f"k={k} out of range for {len(actions)} actions")
    subsets = list(itertools.combinations(actions, k))
    partial = False
    if budget is not None and len(subsets) > budget:
        subsets = subsets[:budget]
        partial = True
    rows = []
    for subset in subsets:
        monitor = synthesize_projection_monitor(model, subset)
        result = simulate_specificity(model, monitor, cfg, tag="|".join(subset))
        rows.append(SubsetRow(subset, result.mean, result.stderr))
    return SweepResult(k=k, rows=rows, partial=partial)
