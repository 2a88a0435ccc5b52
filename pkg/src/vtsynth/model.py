"""Transition systems, feature models, annotated models, and their file format.

Model files are structured-object (JSON) documents with sections for
features, validity, states, actions, transitions, and faults; guards can be
feature formulas or explicit configuration lists.  Parsed models are
immutable and freely shareable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .boolform import eval_formula, formula_vars, parse_formula
from .domains import (
    BoolExprDomain,
    ConfigDomain,
    DiagnosisDomain,
    ExplicitConfigDomain,
    SymbolicConfigDomain,
    TRUTH3,
    TRUTH5,
    VerdictDomain,
)
from .errors import DomainError, ModelError

# Universes up to this size use the explicit bitset backend under "auto".
AUTO_EXPLICIT_LIMIT = 4096


class TransitionSystem:
    """Finite transition system with dense integer state ids.

    State and action ids follow declaration order; all derived sets iterate
    in id order so downstream constructions are reproducible.  Instances are
    immutable by convention.
    """

    def __init__(self, states, actions, initial, transitions):
        self.states = tuple(states)
        self.actions = tuple(actions)
        self.initial = tuple(sorted(set(initial)))
        self.transitions = tuple(sorted(set(transitions)))
        self._validate()
        self._post = {}
        self._outgoing = {s: [] for s in range(len(self.states))}
        for src, act, dst in self.transitions:
            self._post.setdefault((src, act), []).append(dst)
            self._outgoing[src].append((act, dst))
        self._post = {key: tuple(sorted(dsts)) for key, dsts in self._post.items()}
        self._outgoing = {src: tuple(out) for src, out in self._outgoing.items()}
        self._state_index = {name: i for i, name in enumerate(self.states)}
        self._action_index = {name: i for i, name in enumerate(self.actions)}

    def _validate(self):
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate state names")
        if len(set(self.actions)) != len(self.actions):
            raise ModelError("duplicate action names")
        if not self.initial:
            raise ModelError("no initial state")
        n, m = len(self.states), len(self.actions)
        for s in self.initial:
            if not 0 <= s < n:
                raise ModelError(f"initial state id {s} out of range")
        for src, act, dst in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise ModelError(f"transition endpoint out of range: {(src, act, dst)}")
            if not 0 <= act < m:
                raise ModelError(f"transition action out of range: {(src, act, dst)}")

    def state_index(self, name: str) -> int:
        try:
            return self._state_index[name]
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self._action_index[name]
        except KeyError:
            raise ModelError(f"unknown action {name!r}") from None

    def action_ids(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self.action_index(a) for a in names)

    def has_action(self, name: str) -> bool:
        return name in self._action_index

    def post(self, state_set: Iterable[int], action_set: Iterable[int]) -> frozenset[int]:
        """All action_set-successors of state_set."""
        actions = sorted(set(action_set))
        result = set()
        for s in sorted(set(state_set)):
            for a in actions:
                result.update(self._post.get((s, a), ()))
        return frozenset(result)

    def post_one(self, state: int, action: int) -> tuple[int, ...]:
        return self._post.get((state, action), ())

    def outgoing(self, state: int) -> tuple[tuple[int, int], ...]:
        """Outgoing (action, target) pairs of a state, in declaration order."""
        return self._outgoing[state]

    def reachable_states(self, word: Sequence[str]) -> frozenset[int]:
        """States reachable by reading the word from the initial states."""
        current = frozenset(self.initial)
        for name in word:
            current = self.post(current, (self.action_index(name),))
            if not current:
                return frozenset()
        return current

    def accepts(self, word: Sequence[str]) -> bool:
        return bool(self.reachable_states(word))

    def enabled_actions(self, state: int) -> frozenset[int]:
        return frozenset(a for (s, a) in self._post if s == state)

    def is_deterministic(self) -> bool:
        if len(self.initial) != 1:
            return False
        return all(len(dsts) <= 1 for dsts in self._post.values())

    def is_action_enabled(self, actions: Iterable[int] | None = None) -> bool:
        """True iff every (given) action is enabled in every state."""
        check = range(len(self.actions)) if actions is None else sorted(set(actions))
        return all(
            self._post.get((s, a)) for s in range(len(self.states)) for a in check
        )


def word_projection(word: Sequence[str], keep: Iterable[str]) -> tuple[str, ...]:
    """Remove the symbols not in keep, preserving order."""
    keep = frozenset(keep)
    return tuple(a for a in word if a in keep)


class FeatureModel:
    """Ordered feature list plus a validity constraint.

    Validity is either a boolean formula over the features or an explicit
    list of valid configurations; both compile to either ConfigSet backend.
    """

    def __init__(self, features, validity_ast=None, validity_text=None, explicit_configs=None):
        self.features = tuple(features)
        if len(set(self.features)) != len(self.features):
            raise ModelError("duplicate feature names")
        if (validity_ast is None) == (explicit_configs is None):
            raise ModelError("feature model needs a validity formula or a config list")
        self.validity_ast = validity_ast
        self.validity_text = validity_text
        if explicit_configs is not None:
            configs = [frozenset(c) for c in explicit_configs]
            for config in configs:
                bad = config - set(self.features)
                if bad:
                    raise ModelError(f"unknown feature(s) in configuration: {sorted(bad)}")
            if len(set(configs)) != len(configs):
                raise ModelError("duplicate configurations in validity list")
            if not configs:
                raise ModelError("validity list is empty")
            self.explicit_configs = tuple(configs)
        else:
            unknown = formula_vars(validity_ast) - set(self.features)
            if unknown:
                raise ModelError(f"unknown feature(s) in validity: {sorted(unknown)}")
            self.explicit_configs = None

    def is_valid(self, config: frozenset) -> bool:
        if self.explicit_configs is not None:
            return frozenset(config) in self.explicit_configs
        return eval_formula(self.validity_ast, frozenset(config))

    def build_domain(self, backend: str = "auto") -> ConfigDomain:
        if backend not in ("auto", "explicit", "symbolic"):
            raise ModelError(f"unknown backend {backend!r}")
        if self.explicit_configs is not None:
            if backend == "symbolic":
                return SymbolicConfigDomain.from_configs(self.features, self.explicit_configs)
            return ExplicitConfigDomain(self.features, self.explicit_configs, self.validity_text)
        if backend == "symbolic":
            return SymbolicConfigDomain(self.features, self.validity_ast, self.validity_text)
        symbolic = SymbolicConfigDomain(self.features, self.validity_ast, self.validity_text)
        if backend == "explicit" or symbolic.universe_count() <= AUTO_EXPLICIT_LIMIT:
            return ExplicitConfigDomain(
                self.features, symbolic.configs(symbolic.top()), self.validity_text
            )
        return symbolic


class AnnotatedTS:
    """Transition system with total verdict annotations on states and transitions."""

    def __init__(self, ts: TransitionSystem, domain: VerdictDomain, state_annot, trans_annot):
        self.ts = ts
        self.domain = domain
        self.state_annot = tuple(state_annot)
        self.trans_annot = tuple(trans_annot)
        if len(self.state_annot) != len(ts.states):
            raise ModelError("state annotation is not total")
        if len(self.trans_annot) != len(ts.transitions):
            raise ModelError("transition annotation is not total")
        for v in self.state_annot:
            if not domain.validate(v):
                raise ModelError(f"invalid state annotation {v!r}")
        for v in self.trans_annot:
            if not domain.validate(v):
                raise ModelError(f"invalid transition annotation {v!r}")

    def annotation_of(self, transition_index: int):
        return self.trans_annot[transition_index]


@dataclass
class Model:
    """A parsed model file: annotated system plus format-level metadata."""

    annotated: AnnotatedTS
    domain_kind: str
    feature_model: FeatureModel | None = None
    observable: tuple[str, ...] = ()
    faults: dict[str, str] = field(default_factory=dict)
    source: dict | None = None

    @property
    def ts(self) -> TransitionSystem:
        return self.annotated.ts

    @property
    def domain(self) -> VerdictDomain:
        return self.annotated.domain

    def observable_actions(self) -> tuple[str, ...]:
        """Marked observable actions, or the whole alphabet if none marked."""
        return self.observable if self.observable else self.ts.actions


def project_config(model: Model, config: frozenset) -> TransitionSystem:
    """The variant of an FTS under one configuration: keep guarded-in transitions."""
    domain = model.domain
    if not isinstance(domain, ConfigDomain):
        raise ModelError("projection by configuration needs a configuration domain")
    config = frozenset(config)
    if not domain.is_valid_config(config):
        raise ModelError(f"invalid configuration {set(config)}")
    ts = model.ts
    keep = [
        t
        for t, verdict in zip(ts.transitions, model.annotated.trans_annot)
        if domain.contains(verdict, config)
    ]
    return TransitionSystem(ts.states, ts.actions, ts.initial, keep)


def _normalize_entries(raw, what, flags):
    """Normalize a states/actions section: strings or objects with flags."""
    names = []
    info = []
    for entry in raw:
        if isinstance(entry, str):
            names.append(entry)
            info.append({})
        elif isinstance(entry, dict):
            if "name" not in entry:
                raise ModelError(f"{what} entry missing 'name': {entry!r}")
            unknown = set(entry) - {"name", *flags}
            if unknown:
                raise ModelError(f"unknown {what} field(s) {sorted(unknown)}")
            names.append(entry["name"])
            info.append(entry)
        else:
            raise ModelError(f"bad {what} entry: {entry!r}")
    return names, info


def _infer_domain_kind(doc: dict) -> str:
    declared = doc.get("domain")
    if declared is not None:
        if declared not in ("config", "diagnosis", "boolexpr", "truth3", "truth5"):
            raise ModelError(f"unknown domain {declared!r}")
        return declared
    if "features" in doc:
        return "config"
    if "faults" in doc or "fault_classes" in doc:
        return "diagnosis"
    if "events" in doc:
        return "boolexpr"
    raise ModelError("cannot infer the model's verdict domain; add a 'domain' field")


def _config_verdict(domain: ConfigDomain, value, where: str):
    if isinstance(value, str):
        verdict = domain.verdict_from_formula(parse_formula(value))
        if verdict is None:
            raise ModelError(f"empty guard after validity restriction: {value!r} ({where})")
        return verdict
    if isinstance(value, list):
        try:
            return domain.verdict_from_configs(frozenset(c) for c in value)
        except DomainError as exc:
            raise ModelError(f"{exc} ({where})") from exc
    raise ModelError(f"bad configuration guard {value!r} ({where})")


def _verdict_from_doc(kind: str, domain, value, where: str):
    try:
        if kind == "config":
            return _config_verdict(domain, value, where)
        if kind == "diagnosis":
            if not isinstance(value, list):
                raise ModelError(f"diagnosis annotation must be a class list ({where})")
            verdict = frozenset(value)
            if not domain.validate(verdict):
                raise ModelError(f"unknown fault class in annotation ({where})")
            return verdict
        if kind == "boolexpr":
            if isinstance(value, str):
                return domain.verdict_from_expr(value)
            if isinstance(value, list):
                verdict = domain.verdict_from_json(value)
                if not domain.validate(verdict):
                    raise ModelError(f"bad event annotation ({where})")
                return verdict
            raise ModelError(f"event annotation must be a formula ({where})")
        if kind in ("truth3", "truth5"):
            return domain.parse_verdict(value)
    except DomainError as exc:
        raise ModelError(f"{exc} ({where})") from exc
    raise ModelError(f"no annotation syntax for domain {kind!r}")


def parse_model(source: str | dict, backend: str = "auto") -> Model:
    """Parse and validate a model document (JSON text or an equivalent dict)."""
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ModelError("model document must be an object")

    known = {
        "domain", "features", "validity", "events", "fault_classes",
        "states", "actions", "transitions", "faults",
    }
    unknown = set(doc) - known
    if unknown:
        raise ModelError(f"unknown model section(s): {sorted(unknown)}")

    kind = _infer_domain_kind(doc)

    state_names, state_info = _normalize_entries(
        doc.get("states", ()), "state", ("initial", "annot")
    )
    action_names, action_info = _normalize_entries(
        doc.get("actions", ()), "action", ("observable",)
    )
    if not state_names:
        raise ModelError("model declares no states")
    if not action_names:
        raise ModelError("model declares no actions")

    state_idx = {name: i for i, name in enumerate(state_names)}
    action_idx = {name: i for i, name in enumerate(action_names)}
    initial = [i for i, info in enumerate(state_info) if info.get("initial")]

    raw_transitions = doc.get("transitions", ())
    triples = []
    guards = []
    for pos, entry in enumerate(raw_transitions):
        where = f"transition {pos}"
        if isinstance(entry, list):
            if len(entry) != 3:
                raise ModelError(f"{where} must be [source, action, target]")
            src_name, act_name, dst_name = entry
            guard_value = None
        elif isinstance(entry, dict):
            extra = set(entry) - {"source", "action", "target", "guard", "annot"}
            if extra:
                raise ModelError(f"unknown field(s) {sorted(extra)} in {where}")
            if "guard" in entry and "annot" in entry:
                raise ModelError(f"{where} has both 'guard' and 'annot'")
            src_name, act_name, dst_name = entry["source"], entry["action"], entry["target"]
            guard_value = entry.get("guard", entry.get("annot"))
        else:
            raise ModelError(f"bad transition entry: {entry!r}")
        if src_name not in state_idx:
            raise ModelError(f"unknown state {src_name!r} in {where}")
        if dst_name not in state_idx:
            raise ModelError(f"unknown state {dst_name!r} in {where}")
        if act_name not in action_idx:
            raise ModelError(f"unknown action {act_name!r} in {where}")
        triples.append((state_idx[src_name], action_idx[act_name], state_idx[dst_name]))
        guards.append(guard_value)

    ts = TransitionSystem(state_names, action_names, initial, triples)
    # Re-align guards with the sorted transition order.
    guard_of = {}
    for triple, guard in zip(triples, guards):
        if triple in guard_of and guard_of[triple] != guard:
            raise ModelError(f"conflicting annotations for duplicate transition {triple}")
        guard_of[triple] = guard
    guards = [guard_of[t] for t in ts.transitions]

    feature_model = None
    faults = {}

    if kind == "config":
        if "features" not in doc:
            raise ModelError("configuration model needs a 'features' section")
        features = list(doc["features"])
        validity = doc.get("validity")
        if validity is None:
            # default: at least one feature enabled
            if not features:
                raise ModelError("empty feature list")
            validity = " | ".join(features)
        if isinstance(validity, list):
            feature_model = FeatureModel(features, explicit_configs=validity)
        else:
            feature_model = FeatureModel(
                features, validity_ast=parse_formula(validity), validity_text=validity
            )
        domain = feature_model.build_domain(backend)
    elif kind == "diagnosis":
        faults = dict(doc.get("faults", {}))
        for action in faults:
            if action not in action_idx:
                raise ModelError(f"unknown action {action!r} in faults section")
        classes = doc.get("fault_classes")
        if classes is None:
            classes = sorted(set(faults.values()))
        if not classes:
            raise ModelError("diagnosis model declares no fault classes")
        domain = DiagnosisDomain(classes)
    elif kind == "boolexpr":
        if "events" not in doc:
            raise ModelError("boolexpr model needs an 'events' section")
        domain = BoolExprDomain(doc["events"])
    elif kind == "truth3":
        domain = TRUTH3
    else:
        domain = TRUTH5

    top = domain.top()

    state_annot = []
    for i, info in enumerate(state_info):
        if "annot" in info:
            state_annot.append(
                _verdict_from_doc(kind, domain, info["annot"], f"state {state_names[i]!r}")
            )
        else:
            state_annot.append(top)

    trans_annot = []
    for triple, guard in zip(ts.transitions, guards):
        src, act, dst = triple
        where = f"transition {ts.states[src]} -{ts.actions[act]}-> {ts.states[dst]}"
        if guard is not None:
            trans_annot.append(_verdict_from_doc(kind, domain, guard, where))
        elif kind == "diagnosis" and ts.actions[act] in faults:
            trans_annot.append(frozenset((faults[ts.actions[act]],)))
        else:
            trans_annot.append(top)

    observable = tuple(
        name for name, info in zip(action_names, action_info) if info.get("observable")
    )

    annotated = AnnotatedTS(ts, domain, state_annot, trans_annot)
    return Model(
        annotated=annotated,
        domain_kind=kind,
        feature_model=feature_model,
        observable=observable,
        faults=faults,
        source=doc,
    )


def load_model(path, backend: str = "auto") -> Model:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read(), backend=backend)


def serialize_model(model: Model) -> str:
    """Canonical JSON text for a parsed model; parse(serialize(m)) ≅ m."""
    doc: dict = {"domain": model.domain_kind}
    kind = model.domain_kind
    domain = model.domain
    if kind == "config":
        fm = model.feature_model
        doc["features"] = list(fm.features)
        if fm.explicit_configs is not None:
            doc["validity"] = [sorted(c) for c in fm.explicit_configs]
        else:
            doc["validity"] = fm.validity_text
    elif kind == "diagnosis":
        doc["fault_classes"] = list(domain.classes)
    elif kind == "boolexpr":
        doc["events"] = list(domain.events)

    ts = model.ts
    top = domain.top()
    initial = set(ts.initial)
    states = []
    for i, name in enumerate(ts.states):
        entry: dict = {"name": name}
        if i in initial:
            entry["initial"] = True
        annot = model.annotated.state_annot[i]
        if annot != top:
            entry["annot"] = domain.verdict_to_json(annot)
        states.append(entry)
    doc["states"] = states

    observable = set(model.observable)
    doc["actions"] = [
        {"name": name, "observable": True} if name in observable else {"name": name}
        for name in ts.actions
    ]

    transitions = []
    for triple, annot in zip(ts.transitions, model.annotated.trans_annot):
        src, act, dst = triple
        entry = {"source": ts.states[src], "action": ts.actions[act], "target": ts.states[dst]}
        default = top
        if kind == "diagnosis" and ts.actions[act] in model.faults:
            default = frozenset((model.faults[ts.actions[act]],))
        if annot != default:
            entry["guard" if kind == "config" else "annot"] = domain.verdict_to_json(annot)
        transitions.append(entry)
    doc["transitions"] = transitions
    if model.faults:
        doc["faults"] = dict(sorted(model.faults.items()))
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def export_model_dot(model: Model) -> str:
    """Graph-description text (DOT) with verdict-labeled states and action edges."""
    ts = model.ts
    domain = model.domain
    top = domain.top()
    lines = ["digraph model {", "  rankdir=LR;"]
    initial = set(ts.initial)
    for i, name in enumerate(ts.states):
        annot = model.annotated.state_annot[i]
        label = name if annot == top else f"{name}\\n{domain.canonical(annot)}"
        shape = "doublecircle" if i in initial else "circle"
        lines.append(f'  s{i} [label="{label}", shape={shape}];')
    for triple, annot in zip(ts.transitions, model.annotated.trans_annot):
        src, act, dst = triple
        label = ts.actions[act]
        if annot != top:
            label += f" : {domain.canonical(annot)}"
        lines.append(f'  s{src} -> s{dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
