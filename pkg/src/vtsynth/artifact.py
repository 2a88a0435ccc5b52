"""Monitor artifact files: versioned, round-trip-stable monitor documents.

An artifact bundles the compiled deterministic monitor with its domain
metadata, per-state canonical verdicts, the monotonicity flag, the step
mode implied by how it was minimized, and provenance (pipeline stages plus
the input model hash).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .compiler import DeterministicVts
from .domains import VerdictDomain, domain_from_json
from .errors import ModelError
from .vts import is_monotonic

ARTIFACT_FORMAT = "vts-monitor"
ARTIFACT_VERSION = 1


@dataclass
class Artifact:
    monitor: DeterministicVts
    domain: VerdictDomain
    monotonic: bool
    relaxed: bool
    provenance: dict

    @property
    def actions(self):
        return self.monitor.actions


def provenance_for(model_bytes: bytes, pipeline: list[str], parameters: dict | None = None) -> dict:
    """Provenance record; its hash changes iff model bytes or pipeline change."""
    model_sha = hashlib.sha256(model_bytes).hexdigest()
    parameters = dict(parameters or {})
    material = json.dumps(
        {"model_sha256": model_sha, "pipeline": pipeline, "parameters": parameters},
        sort_keys=True,
    )
    return {
        "model_sha256": model_sha,
        "pipeline": list(pipeline),
        "parameters": parameters,
        "hash": hashlib.sha256(material.encode("utf-8")).hexdigest(),
    }


def artifact_to_json(artifact: Artifact) -> str:
    monitor = artifact.monitor
    domain = artifact.domain
    doc = {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "domain": domain.describe(),
        "actions": list(monitor.actions),
        "states": monitor.num_states,
        "initial": monitor.initial,
        "names": list(monitor.names),
        "transitions": [
            {str(a): t for a, t in sorted(row.items())} for row in monitor.delta
        ],
        "verdicts": [domain.verdict_to_json(v) for v in monitor.verdicts],
        "canonical_verdicts": [domain.canonical(v) for v in monitor.verdicts],
        "monotonic": artifact.monotonic,
        "relaxed": artifact.relaxed,
        "provenance": artifact.provenance,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def artifact_from_json(text: str) -> Artifact:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"artifact is not valid JSON: {exc}") from exc
    if doc.get("format") != ARTIFACT_FORMAT:
        raise ModelError("not a monitor artifact")
    if doc.get("version") != ARTIFACT_VERSION:
        raise ModelError(f"unsupported artifact version {doc.get('version')!r}")
    domain = domain_from_json(doc["domain"])
    verdicts = [domain.verdict_from_json(v) for v in doc["verdicts"]]
    delta = [
        {int(a): int(t) for a, t in row.items()} for row in doc["transitions"]
    ]
    monitor = DeterministicVts(
        doc["actions"], delta, verdicts, doc.get("names"), doc.get("initial", 0)
    )
    return Artifact(
        monitor=monitor,
        domain=domain,
        monotonic=bool(doc.get("monotonic", False)),
        relaxed=bool(doc.get("relaxed", False)),
        provenance=dict(doc.get("provenance", {})),
    )


def build_artifact(
    monitor: DeterministicVts,
    domain: VerdictDomain,
    relaxed: bool,
    provenance: dict,
) -> Artifact:
    monotonic = is_monotonic(monitor.as_vts(domain)).ok
    return Artifact(
        monitor=monitor,
        domain=domain,
        monotonic=monotonic,
        relaxed=relaxed,
        provenance=provenance,
    )


def save_artifact(artifact: Artifact, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(artifact_to_json(artifact))


def load_artifact(path) -> Artifact:
    with open(path, "r", encoding="utf-8") as handle:
        return artifact_from_json(handle.read())


def is_artifact_file(path) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            head = json.loads(handle.read())
        return isinstance(head, dict) and head.get("format") == ARTIFACT_FORMAT
    except (OSError, json.JSONDecodeError):
        return False


def export_artifact_dot(artifact: Artifact) -> str:
    """Graph-description text (DOT) of a compiled monitor."""
    monitor = artifact.monitor
    domain = artifact.domain
    lines = ["digraph monitor {", "  rankdir=LR;"]
    for state in range(monitor.num_states):
        label = f"{monitor.names[state]}\\n{domain.canonical(monitor.verdicts[state])}"
        shape = "doublecircle" if state == monitor.initial else "circle"
        lines.append(f'  s{state} [label="{label}", shape={shape}];')
    for src, row in enumerate(monitor.delta):
        for action, dst in sorted(row.items()):
            lines.append(f'  s{src} -> s{dst} [label="{monitor.actions[action]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
