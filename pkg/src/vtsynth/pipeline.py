"""Pipeline specifications: ordered transformation stages with parameters.

A pipeline starts from an annotated model, applies VTS transformations, and
must end deterministic so the result can be written as a monitor artifact.
Presets encode the standard recipes; a free-form stage list covers the
rest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import synth
from .compiler import DeterministicVts, determinize, minimize, minimize_relaxed, strip_self_loops
from .errors import PipelineError
from .model import Model, load_model
from .vts import Vts

PRESETS = {
    "config-monitor": "track,project,determinize,minimize",
    "diagnoser": "track,lift,project,determinize,minimize",
    "predictive-diagnoser": "track,lookahead,lift,project,determinize,minimize",
}

_STAGE_RE = re.compile(r"^([a-z][a-z0-9-]*)(?:\(([^)]*)\))?$")

_KNOWN = {
    "track": 0,
    "specialize": 1,
    "lookahead": 0,
    "project": None,  # optional argument
    "delay": 1,
    "loss": 1,
    "lift": 0,
    "determinize": 0,
    "minimize": 0,
    "minimize-relaxed": 0,
    "strip-self-loops": 0,
}


@dataclass
class Stage:
    name: str
    arg: str | None = None

    def render(self) -> str:
        return self.name if self.arg is None else f"{self.name}({self.arg})"


def parse_pipeline(text: str) -> list[Stage]:
    """Parse a comma-separated stage list like ``track,project(a|b),determinize``."""
    if text in PRESETS:
        text = PRESETS[text]
    stages = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise PipelineError("empty pipeline stage")
        match = _STAGE_RE.match(part)
        if match is None:
            raise PipelineError(f"cannot parse pipeline stage {part!r}")
        name, arg = match.group(1), match.group(2)
        if name not in _KNOWN:
            raise PipelineError(f"unknown pipeline stage {name!r}")
        arity = _KNOWN[name]
        if arity == 0 and arg is not None:
            raise PipelineError(f"stage {name!r} takes no argument")
        if arity == 1 and arg is None:
            raise PipelineError(f"stage {name!r} needs an argument")
        stages.append(Stage(name, arg))
    if not stages:
        raise PipelineError("empty pipeline")
    return stages


def validate_pipeline(stages: list[Stage]) -> None:
    """Static shape check: track first, determinize before minimization stages."""
    if stages[0].name != "track":
        raise PipelineError("pipelines must start with 'track'")
    if any(stage.name == "track" for stage in stages[1:]):
        raise PipelineError("'track' is only valid as the first stage")
    status = "vts"
    for stage in stages[1:]:
        if stage.name in ("minimize", "minimize-relaxed", "strip-self-loops"):
            if status != "det":
                raise PipelineError(
                    f"stage {stage.name!r} requires 'determinize' earlier in the pipeline"
                )
        elif stage.name == "determinize":
            status = "det"
        elif stage.name in ("project", "loss", "specialize"):
            # may introduce nondeterminism
            status = "vts"
        # lookahead, delay, lift preserve determinism
    if status != "det":
        raise PipelineError("pipelines must end deterministic: add 'determinize'")


def _parse_bound(text: str) -> int | None:
    text = text.strip()
    if text in ("inf", "unbounded"):
        return None
    try:
        value = int(text)
    except ValueError:
        raise PipelineError(f"bad bound {text!r} (expected a natural number or 'inf')") from None
    if value < 0:
        raise PipelineError("bounds must be non-negative")
    return value


@dataclass
class PipelineRun:
    monitor: DeterministicVts
    domain: object
    stages: list[str] = field(default_factory=list)
    log: list[tuple[str, int, int]] = field(default_factory=list)
    relaxed: bool = False


def run_pipeline(
    model: Model,
    stages: list[Stage],
    observable_override=None,
    model_dir=None,
    backend: str = "auto",
) -> PipelineRun:
    """Execute a validated pipeline on a parsed model."""
    validate_pipeline(stages)
    current: Vts | DeterministicVts | None = None
    run = PipelineRun(monitor=None, domain=model.domain)  # type: ignore[arg-type]

    def as_vts(value) -> Vts:
        if isinstance(value, DeterministicVts):
            return value.as_vts(run.domain)
        return value

    def observables_for(stage: Stage):
        if stage.arg:
            return tuple(a.strip() for a in re.split(r"[|+]", stage.arg) if a.strip())
        if observable_override is not None:
            return tuple(observable_override)
        return model.observable_actions()

    for stage in stages:
        name = stage.name
        if name == "track":
            current = synth.track_annotations(model.annotated)
        elif name == "specialize":
            path = stage.arg
            if model_dir is not None:
                from pathlib import Path

                candidate = Path(model_dir) / path
                if candidate.exists():
                    path = candidate
            system = load_model(path, backend=backend)
            monitor_vts = as_vts(current)
            current = synth.specialize(monitor_vts, system.ts, monitor_vts.ts.actions)
        elif name == "lookahead":
            current = synth.lookahead_refine(as_vts(current))
        elif name == "project":
            current = synth.observability_project(as_vts(current), observables_for(stage))
        elif name == "delay":
            current = synth.delay_robust(as_vts(current), _parse_bound(stage.arg))
        elif name == "loss":
            current = synth.loss_robust(as_vts(current), _parse_bound(stage.arg))
        elif name == "lift":
            lifted = synth.possibility_lift(as_vts(current))
            run.domain = lifted.domain
            current = lifted
        elif name == "determinize":
            current = determinize(as_vts(current))
        elif name == "minimize":
            current = minimize(current, run.domain)
        elif name == "minimize-relaxed":
            current = minimize_relaxed(current, run.domain)
            run.relaxed = True
        elif name == "strip-self-loops":
            current = strip_self_loops(current)
            run.relaxed = True
        else:  # pragma: no cover - guarded by parse_pipeline
            raise PipelineError(f"unknown stage {name!r}")
        states, transitions = current.size()
        rendered = stage.render()
        if name == "project" and stage.arg is None:
            rendered = f"project({'|'.join(observables_for(stage))})"
        run.stages.append(rendered)
        run.log.append((rendered, states, transitions))

    if not isinstance(current, DeterministicVts):  # pragma: no cover - validated above
        raise PipelineError("pipeline did not end deterministic")
    run.monitor = current
    return run
