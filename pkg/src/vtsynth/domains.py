"""Verdict domains: join-semilattices ordering verdicts by specificity.

Every domain provides a partial order ``leq`` (more specific ≤ less
specific), the least upper bound ``join``, and a partial greatest lower
bound ``meet`` that returns ``None`` exactly when no lower bound exists in
the domain.  The internal sentinel used by annotation tracking never leaks
out of this module: callers only ever see ``None``.

Verdict values are immutable and hashable; equal values compare equal, and
``canonical`` renders a stable textual form (used for hashing monitors,
artifact files, and CLI output).
"""

from __future__ import annotations

import abc
from typing import Iterable

from .bdd import Bdd
from .boolform import eval_formula, formula_to_bdd, formula_vars, parse_formula
from .errors import DomainError

# Symbolic configuration sets are enumerated in canonical output only up to
# this many configurations; beyond it a structural encoding is emitted.
ENUMERATION_LIMIT = 100_000


class VerdictDomain(abc.ABC):
    """Join-semilattice of verdicts ordered by specificity."""

    @abc.abstractmethod
    def leq(self, a, b) -> bool:
        """True iff a is at least as specific as b."""

    @abc.abstractmethod
    def join(self, a, b):
        """Least upper bound (most-specific common subsumer)."""

    @abc.abstractmethod
    def meet(self, a, b):
        """Greatest lower bound, or None if the two verdicts have none."""

    @abc.abstractmethod
    def top(self):
        """Least specific verdict; raises DomainError if the domain has none."""

    @abc.abstractmethod
    def canonical(self, v) -> str:
        """Stable textual form; equal iff the verdicts are equal."""

    @abc.abstractmethod
    def validate(self, v) -> bool:
        """True iff v is a value of this domain."""

    @abc.abstractmethod
    def describe(self) -> dict:
        """JSON-compatible domain metadata (round-trips via domain_from_json)."""

    @abc.abstractmethod
    def verdict_to_json(self, v):
        """JSON-compatible encoding of a verdict."""

    @abc.abstractmethod
    def verdict_from_json(self, data):
        """Inverse of verdict_to_json."""

    def compatible_with(self, other: "VerdictDomain") -> bool:
        return self is other or self.describe() == other.describe()


def join_all(domain: VerdictDomain, verdicts: Iterable):
    """Least upper bound of a non-empty collection; order-insensitive."""
    result = None
    empty = True
    for v in verdicts:
        empty = False
        result = v if result is None else domain.join(result, v)
        # identical values short-circuit join(v, v) = v via domain impls
    if empty:
        raise DomainError("empty join")
    return result


def meet_all(domain: VerdictDomain, verdicts: Iterable):
    """Greatest lower bound of a non-empty collection, or None if undefined."""
    result = None
    empty = True
    for v in verdicts:
        empty = False
        if result is None:
            result = v
        else:
            result = domain.meet(result, v)
            if result is None:
                return None
    if empty:
        raise DomainError("empty meet")
    return result


class _TruthDomain(VerdictDomain):
    """Shared machinery for the finite truth-value orders."""

    values: tuple[str, ...] = ()
    _up: dict[str, frozenset] = {}
    _down: dict[str, frozenset] = {}
    _rank: dict[str, int] = {}
    kind = ""

    def _check(self, v):
        if v not in self._up:
            raise DomainError(f"not a {self.kind} verdict: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return b in self._up[a]

    def join(self, a, b):
        self._check(a)
        self._check(b)
        common = self._up[a] & self._up[b]
        return max(common, key=lambda v: self._rank[v])

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        common = self._down[a] & self._down[b]
        if not common:
            return None
        return min(common, key=lambda v: self._rank[v])

    def top(self):
        return "?"

    def canonical(self, v):
        self._check(v)
        return v

    def validate(self, v):
        return v in self._up

    def describe(self):
        return {"type": self.kind}

    def verdict_to_json(self, v):
        self._check(v)
        return v

    def verdict_from_json(self, data):
        self._check(data)
        return data

    def parse_verdict(self, text: str):
        v = text.strip()
        self._check(v)
        return v


class TruthDomain3(_TruthDomain):
    """Three truth values: definite t and f below the inconclusive ?."""

    kind = "truth3"
    values = ("t", "?", "f")
    _up = {"t": frozenset({"t", "?"}), "f": frozenset({"f", "?"}), "?": frozenset({"?"})}
    _down = {"t": frozenset({"t"}), "f": frozenset({"f"}), "?": frozenset({"t", "?", "f"})}
    _rank = {"t": 2, "f": 2, "?": 0}


class TruthDomain5(_TruthDomain):
    """Five truth values: t ⊑ tp ⊑ ? and f ⊑ fp ⊑ ?."""

    kind = "truth5"
    values = ("t", "tp", "?", "fp", "f")
    _up = {
        "t": frozenset({"t", "tp", "?"}),
        "tp": frozenset({"tp", "?"}),
        "?": frozenset({"?"}),
        "fp": frozenset({"fp", "?"}),
        "f": frozenset({"f", "fp", "?"}),
    }
    _down = {
        "t": frozenset({"t"}),
        "tp": frozenset({"t", "tp"}),
        "?": frozenset({"t", "tp", "?", "fp", "f"}),
        "fp": frozenset({"f", "fp"}),
        "f": frozenset({"f"}),
    }
    _rank = {"t": 2, "f": 2, "tp": 1, "fp": 1, "?": 0}


TRUTH3 = TruthDomain3()
TRUTH5 = TruthDomain5()


class DiagnosisDomain(VerdictDomain):
    """Sets of fault classes ordered by ⊇: more classes = more specific.

    The annotation domain for fault tracking; join is intersection (classes
    common to all possibilities) and meet is union (always defined).
    """

    def __init__(self, classes: Iterable[str]):
        self.classes = tuple(classes)
        if len(set(self.classes)) != len(self.classes):
            raise DomainError("duplicate fault class names")
        self._universe = frozenset(self.classes)

    def _check(self, v):
        if not isinstance(v, frozenset) or not v <= self._universe:
            raise DomainError(f"not a fault-class set over {self.classes}: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return a >= b

    def join(self, a, b):
        self._check(a)
        self._check(b)
        return a & b

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        return a | b

    def top(self):
        return frozenset()

    def canonical(self, v):
        self._check(v)
        return "{" + ",".join(sorted(v)) + "}"

    def validate(self, v):
        return isinstance(v, frozenset) and v <= self._universe

    def describe(self):
        return {"type": "diagnosis", "classes": list(self.classes)}

    def verdict_to_json(self, v):
        self._check(v)
        return sorted(v)

    def verdict_from_json(self, data):
        v = frozenset(data)
        self._check(v)
        return v


class BoolExprDomain(VerdictDomain):
    """Boolean expressions over basic events, compared by assignment sets.

    A verdict is the non-empty set of satisfying assignments, each encoded
    as a bitmask over the declared event order; expressions denoting the
    same assignment set are the same verdict.  The unsatisfiable expression
    is excluded, so conjoining contradictory verdicts has no meet.
    """

    MAX_EVENTS = 16

    def __init__(self, events: Iterable[str]):
        self.events = tuple(events)
        if not self.events:
            raise DomainError("boolexpr domain needs at least one event")
        if len(set(self.events)) != len(self.events):
            raise DomainError("duplicate event names")
        if len(self.events) > self.MAX_EVENTS:
            raise DomainError(f"too many events (max {self.MAX_EVENTS})")
        self._all_masks = frozenset(range(1 << len(self.events)))

    def _check(self, v):
        if not isinstance(v, frozenset) or not v or not v <= self._all_masks:
            raise DomainError(f"not a boolexpr verdict: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return a <= b

    def join(self, a, b):
        self._check(a)
        self._check(b)
        return a | b

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        both = a & b
        return both if both else None

    def top(self):
        return self._all_masks

    def expr_models(self, text_or_ast) -> frozenset[int]:
        """Assignment set of an expression; may be empty (used by queries)."""
        ast = parse_formula(text_or_ast) if isinstance(text_or_ast, str) else text_or_ast
        unknown = formula_vars(ast) - set(self.events)
        if unknown:
            raise DomainError(f"unknown event(s) in expression: {sorted(unknown)}")
        masks = []
        for mask in range(1 << len(self.events)):
            true_events = {e for i, e in enumerate(self.events) if mask >> i & 1}
            if eval_formula(ast, true_events):
                masks.append(mask)
        return frozenset(masks)

    def verdict_from_expr(self, text_or_ast) -> frozenset[int]:
        v = self.expr_models(text_or_ast)
        if not v:
            raise DomainError("unsatisfiable expression denotes no verdict")
        return v

    def _term(self, mask: int) -> str:
        return "&".join(
            e if mask >> i & 1 else "!" + e for i, e in enumerate(self.events)
        )

    def canonical(self, v):
        self._check(v)
        if v == self._all_masks:
            return "true"
        return "|".join(self._term(mask) for mask in sorted(v))

    def validate(self, v):
        return isinstance(v, frozenset) and bool(v) and v <= self._all_masks

    def describe(self):
        return {"type": "boolexpr", "events": list(self.events)}

    def verdict_to_json(self, v):
        self._check(v)
        return sorted(v)

    def verdict_from_json(self, data):
        v = frozenset(int(m) for m in data)
        self._check(v)
        return v


class LiftedDomain(VerdictDomain):
    """Finite non-empty sets of inner verdicts ordered by ⊆; join is union.

    Keeps indistinguishable outcomes as separate possibilities instead of
    collapsing them into the inner join.
    """

    def __init__(self, inner: VerdictDomain):
        self.inner = inner

    def _check(self, v):
        if not isinstance(v, frozenset) or not v:
            raise DomainError(f"not a lifted verdict: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return a <= b

    def join(self, a, b):
        self._check(a)
        self._check(b)
        return a | b

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        both = a & b
        return both if both else None

    def top(self):
        raise DomainError("lifted domain has no computable top")

    def lift(self, inner_verdict) -> frozenset:
        return frozenset((inner_verdict,))

    def canonical(self, v):
        self._check(v)
        return "{" + ",".join(sorted(self.inner.canonical(x) for x in v)) + "}"

    def validate(self, v):
        return (
            isinstance(v, frozenset)
            and bool(v)
            and all(self.inner.validate(x) for x in v)
        )

    def describe(self):
        return {"type": "lifted", "inner": self.inner.describe()}

    def verdict_to_json(self, v):
        self._check(v)
        encoded = [self.inner.verdict_to_json(x) for x in v]
        return sorted(encoded, key=lambda item: repr(item))

    def verdict_from_json(self, data):
        v = frozenset(self.inner.verdict_from_json(item) for item in data)
        self._check(v)
        return v


class ConfigDomain(VerdictDomain):
    """Non-empty sets of valid configurations ordered by ⊆.

    A configuration is a frozenset of enabled feature names.  Two backends
    implement the same interface: an explicit bitset over the enumerated
    universe and a symbolic decision-diagram representation.
    """

    features: tuple[str, ...] = ()

    @abc.abstractmethod
    def count(self, v) -> int:
        """Number of valid configurations in the verdict."""

    @abc.abstractmethod
    def universe_count(self) -> int:
        """Total number of valid configurations."""

    @abc.abstractmethod
    def configs(self, v) -> tuple[frozenset[str], ...]:
        """Enumerate the verdict's configurations, sorted by label."""

    @abc.abstractmethod
    def contains(self, v, config: frozenset) -> bool: ...

    @abc.abstractmethod
    def verdict_from_configs(self, configs: Iterable[frozenset]): ...

    @abc.abstractmethod
    def verdict_from_formula(self, ast): ...

    @abc.abstractmethod
    def sample_config(self, v, draw) -> frozenset[str]:
        """Uniformly draw a configuration; draw(n) returns an int in [0, n)."""

    @staticmethod
    def config_label(config: frozenset) -> str:
        return "{" + ",".join(sorted(config)) + "}"

    def is_valid_config(self, config: frozenset) -> bool:
        return self.contains(self.top(), config)


def _enumerate_universe(features, validity_ast) -> tuple[frozenset, ...]:
    manager = Bdd(features)
    node = formula_to_bdd(validity_ast, manager)
    configs = sorted(manager.models(node), key=ConfigDomain.config_label)
    return tuple(configs)


class ExplicitConfigDomain(ConfigDomain):
    """Bitset backend over an enumerated configuration universe."""

    def __init__(self, features, universe: Iterable[frozenset], validity_text=None):
        self.features = tuple(features)
        self.universe = tuple(sorted(set(universe), key=self.config_label))
        if not self.universe:
            raise DomainError("configuration universe is empty")
        for config in self.universe:
            if not config <= set(self.features):
                raise DomainError(f"configuration {set(config)} uses undeclared features")
        self._index = {config: i for i, config in enumerate(self.universe)}
        self._full = (1 << len(self.universe)) - 1
        self.validity_text = validity_text

    @classmethod
    def from_validity(cls, features, validity_ast, validity_text=None):
        return cls(features, _enumerate_universe(features, validity_ast), validity_text)

    def _check(self, v):
        if not isinstance(v, int) or v <= 0 or v > self._full:
            raise DomainError(f"not a configuration verdict: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return a & b == a

    def join(self, a, b):
        self._check(a)
        self._check(b)
        return a | b

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        both = a & b
        return both if both else None

    def top(self):
        return self._full

    def count(self, v):
        self._check(v)
        return v.bit_count()

    def universe_count(self):
        return len(self.universe)

    def configs(self, v):
        self._check(v)
        return tuple(c for i, c in enumerate(self.universe) if v >> i & 1)

    def contains(self, v, config):
        self._check(v)
        idx = self._index.get(frozenset(config))
        return idx is not None and bool(v >> idx & 1)

    def verdict_from_configs(self, configs):
        mask = 0
        for config in configs:
            idx = self._index.get(frozenset(config))
            if idx is None:
                raise DomainError(f"invalid configuration {set(config)}")
            mask |= 1 << idx
        if mask == 0:
            raise DomainError("empty configuration set")
        return mask

    def verdict_from_formula(self, ast):
        unknown = formula_vars(ast) - set(self.features)
        if unknown:
            raise DomainError(f"unknown feature(s): {sorted(unknown)}")
        mask = 0
        for i, config in enumerate(self.universe):
            if eval_formula(ast, config):
                mask |= 1 << i
        if mask == 0:
            return None
        return mask

    def sample_config(self, v, draw):
        self._check(v)
        members = self.configs(v)
        return members[draw(len(members))]

    def canonical(self, v):
        return "{" + ",".join(self.config_label(c) for c in self.configs(v)) + "}"

    def validate(self, v):
        return isinstance(v, int) and 0 < v <= self._full

    def describe(self):
        return {
            "type": "config",
            "backend": "explicit",
            "features": list(self.features),
            "configs": [sorted(c) for c in self.universe],
        }

    def verdict_to_json(self, v):
        return [sorted(c) for c in self.configs(v)]

    def verdict_from_json(self, data):
        return self.verdict_from_configs(frozenset(item) for item in data)


class SymbolicConfigDomain(ConfigDomain):
    """Decision-diagram backend; verdicts are functions conjoined with validity.

    The node store is confined to this domain instance; verdicts from one
    instance must not be mixed with another's.  Canonicity of the diagram
    gives O(1) verdict equality.
    """

    def __init__(self, features, validity_ast, validity_text=None):
        self.features = tuple(features)
        self.manager = Bdd(self.features)
        self._validity = formula_to_bdd(validity_ast, self.manager)
        if self._validity == self.manager.FALSE:
            raise DomainError("validity constraint is unsatisfiable")
        self.validity_text = validity_text

    @classmethod
    def from_configs(cls, features, universe: Iterable[frozenset]):
        domain = cls.__new__(cls)
        domain.features = tuple(features)
        domain.manager = Bdd(domain.features)
        node = domain.manager.FALSE
        for config in universe:
            node = domain.manager.lor(node, domain._config_node_for(config))
        if node == domain.manager.FALSE:
            raise DomainError("configuration universe is empty")
        domain._validity = node
        domain.validity_text = None
        return domain

    def _config_node_for(self, config):
        node = self.manager.TRUE
        config = frozenset(config)
        unknown = config - set(self.features)
        if unknown:
            raise DomainError(f"configuration uses undeclared features {sorted(unknown)}")
        for feature in self.features:
            literal = self.manager.var(feature)
            if feature not in config:
                literal = self.manager.lnot(literal)
            node = self.manager.land(node, literal)
        return node

    def _check(self, v):
        if not isinstance(v, int) or v == self.manager.FALSE:
            raise DomainError(f"not a configuration verdict: {v!r}")

    def leq(self, a, b):
        self._check(a)
        self._check(b)
        return self.manager.implies(a, b)

    def join(self, a, b):
        self._check(a)
        self._check(b)
        return self.manager.lor(a, b)

    def meet(self, a, b):
        self._check(a)
        self._check(b)
        both = self.manager.land(a, b)
        return both if both != self.manager.FALSE else None

    def top(self):
        return self._validity

    def count(self, v):
        self._check(v)
        return self.manager.satcount(v)

    def universe_count(self):
        return self.manager.satcount(self._validity)

    def configs(self, v):
        self._check(v)
        if self.count(v) > ENUMERATION_LIMIT:
            raise DomainError("configuration set too large to enumerate")
        return tuple(sorted(self.manager.models(v), key=self.config_label))

    def contains(self, v, config):
        self._check(v)
        return self.manager.eval(v, frozenset(config))

    def verdict_from_configs(self, configs):
        node = self.manager.FALSE
        for config in configs:
            single = self._config_node_for(config)
            if self.manager.land(single, self._validity) == self.manager.FALSE:
                raise DomainError(f"invalid configuration {set(config)}")
            node = self.manager.lor(node, single)
        if node == self.manager.FALSE:
            raise DomainError("empty configuration set")
        return node

    def verdict_from_formula(self, ast):
        unknown = formula_vars(ast) - set(self.features)
        if unknown:
            raise DomainError(f"unknown feature(s): {sorted(unknown)}")
        node = self.manager.land(formula_to_bdd(ast, self.manager), self._validity)
        if node == self.manager.FALSE:
            return None
        return node

    def sample_config(self, v, draw):
        self._check(v)
        return self.manager.sample(v, draw)

    def canonical(self, v):
        self._check(v)
        if self.count(v) <= ENUMERATION_LIMIT:
            return "{" + ",".join(self.config_label(c) for c in self.configs(v)) + "}"
        return "bdd:" + repr(self.manager.struct(v))

    def validate(self, v):
        return isinstance(v, int) and v != self.manager.FALSE

    def describe(self):
        meta = {"type": "config", "backend": "symbolic", "features": list(self.features)}
        if self.validity_text is not None:
            meta["validity"] = self.validity_text
        else:
            meta["configs"] = [sorted(c) for c in self.configs(self._validity)]
        return meta

    def verdict_to_json(self, v):
        self._check(v)
        if self.count(v) <= ENUMERATION_LIMIT:
            return [sorted(c) for c in self.configs(v)]
        root, order = self.manager.struct(v)
        return {"bdd": {"root": root, "nodes": [list(n) for n in order]}}

    def verdict_from_json(self, data):
        if isinstance(data, dict) and "bdd" in data:
            root = data["bdd"]["root"]
            order = tuple((n[0], n[1], n[2]) for n in data["bdd"]["nodes"])
            node = self.manager.from_struct((root, order))
        else:
            node = self.verdict_from_configs(frozenset(item) for item in data)
        self._check(node)
        return node


def domain_from_json(meta: dict) -> VerdictDomain:
    """Rebuild a domain from its describe() metadata."""
    kind = meta.get("type")
    if kind == "truth3":
        return TRUTH3
    if kind == "truth5":
        return TRUTH5
    if kind == "diagnosis":
        return DiagnosisDomain(meta["classes"])
    if kind == "boolexpr":
        return BoolExprDomain(meta["events"])
    if kind == "lifted":
        return LiftedDomain(domain_from_json(meta["inner"]))
    if kind == "config":
        features = meta["features"]
        if meta.get("backend") == "symbolic":
            if "validity" in meta:
                return SymbolicConfigDomain(
                    features, parse_formula(meta["validity"]), meta["validity"]
                )
            return SymbolicConfigDomain.from_configs(
                features, (frozenset(c) for c in meta["configs"])
            )
        return ExplicitConfigDomain(features, (frozenset(c) for c in meta["configs"]))
    raise DomainError(f"unknown domain metadata: {meta!r}")
