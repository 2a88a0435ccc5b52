"""Monitor synthesis from annotated transition-system models.

The library turns annotated models (configurable-system models, fault
models, truth-annotated monitors) into minimal deterministic monitors that
report join-semilattice verdicts online, with transformations for partial
observability, delayed and lost observations, and predictive refinement.
"""

from .artifact import Artifact, build_artifact, load_artifact, save_artifact
from .compiler import (
    DeterministicVts,
    determinize,
    minimize,
    minimize_relaxed,
    strip_self_loops,
)
from .domains import (
    BoolExprDomain,
    ConfigDomain,
    DiagnosisDomain,
    ExplicitConfigDomain,
    LiftedDomain,
    SymbolicConfigDomain,
    TRUTH3,
    TRUTH5,
    VerdictDomain,
    join_all,
    meet_all,
)
from .errors import (
    DomainError,
    ModelError,
    OutOfLanguage,
    PipelineError,
    TraceError,
    VtsynthError,
)
from .evaluate import (
    SimulationConfig,
    simulate_specificity,
    size_report,
    sweep_observability,
)
from .model import (
    AnnotatedTS,
    FeatureModel,
    Model,
    TransitionSystem,
    load_model,
    parse_model,
    project_config,
    serialize_model,
    word_projection,
)
from .pipeline import PRESETS, parse_pipeline, run_pipeline
from .runtime import MonitorSession, replay
from .synth import (
    delay_robust,
    lookahead_refine,
    loss_robust,
    modal_query,
    observability_project,
    possibility_lift,
    specialize,
    track_annotations,
)
from .vts import (
    Vts,
    check_sound_complete,
    is_monotonic,
    refines,
    verdict_equivalent,
)

__version__ = "0.1.0"
