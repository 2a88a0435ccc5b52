"""Shared test utilities: isomorphism signatures and fixture paths."""

from __future__ import annotations

from pathlib import Path

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"
BENCHMARKS_DIR = Path(__file__).resolve().parent.parent / "benchmarks"


def model_path(name: str) -> Path:
    return MODELS_DIR / name


def canonical_signature(monitor, domain):
    """BFS-normal form of a deterministic monitor; equal iff isomorphic."""
    order = [monitor.initial]
    seen = {monitor.initial}
    i = 0
    while i < len(order):
        state = order[i]
        i += 1
        for action in range(len(monitor.actions)):
            target = monitor.delta[state].get(action)
            if target is not None and target not in seen:
                seen.add(target)
                order.append(target)
    remap = {old: new for new, old in enumerate(order)}
    delta = tuple(
        tuple(sorted((action, remap[target]) for action, target in monitor.delta[q].items()
                     if target in remap))
        for q in order
    )
    verdicts = tuple(domain.canonical(monitor.verdicts[q]) for q in order)
    return (len(order), monitor.actions, delta, verdicts)
