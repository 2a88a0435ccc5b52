"""Online execution of compiled monitors.

A session consumes observations one at a time and exposes the current
verdict.  Strict mode reports and then absorbs out-of-language input;
relaxed mode treats a disabled action as staying in place (the convention
that allows removing self loops).  One session is single-threaded; any
number of sessions may share one immutable artifact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .artifact import Artifact
from .domains import ConfigDomain
from .errors import DomainError, TraceError

OUT_OF_LANGUAGE = "out-of-language"


@dataclass
class CountReport:
    possible: int
    ruled_out: int
    percent_ruled_out: float


class MonitorSession:
    """Stateful cursor over a deterministic monitor artifact."""

    def __init__(self, artifact: Artifact, mode: str | None = None):
        if mode is None:
            mode = "relaxed" if artifact.relaxed else "strict"
        if mode not in ("strict", "relaxed"):
            raise TraceError(f"unknown step mode {mode!r}")
        self.artifact = artifact
        self.mode = mode
        self._action_index = {name: i for i, name in enumerate(artifact.monitor.actions)}
        self.reset()

    def reset(self) -> None:
        self.state: int | None = self.artifact.monitor.initial
        self.steps = 0

    @property
    def out_of_language(self) -> bool:
        return self.state is None

    def verdict(self):
        if self.state is None:
            return None
        return self.artifact.monitor.verdicts[self.state]

    def verdict_canonical(self) -> str:
        if self.state is None:
            return OUT_OF_LANGUAGE
        return self.artifact.domain.canonical(self.verdict())

    def step(self, action: str):
        """Consume one observation; returns the new verdict or None.

        Unknown action names are errors in both modes; a known but disabled
        action takes strict sessions out of language (absorbing) and leaves
        relaxed sessions in place.
        """
        index = self._action_index.get(action)
        if index is None:
            raise TraceError(f"unknown action {action!r}")
        self.steps += 1
        if self.state is None:
            return None
        successor = self.artifact.monitor.step(self.state, index)
        if successor is None:
            if self.mode == "strict":
                self.state = None
                return None
            return self.verdict()
        self.state = successor
        return self.verdict()

    def counts(self) -> CountReport:
        """Possible/ruled-out configuration counts for configuration monitors."""
        domain = self.artifact.domain
        if not isinstance(domain, ConfigDomain):
            raise DomainError("configuration counts need a configuration-domain artifact")
        total = domain.universe_count()
        verdict = self.verdict()
        if verdict is None:
            raise DomainError("no verdict: session is out of language")
        possible = domain.count(verdict)
        ruled_out = total - possible
        return CountReport(possible, ruled_out, 100.0 * ruled_out / total)


def parse_trace(lines: Iterable[str]) -> list[tuple[int, str]]:
    """Read one action name per line; '#' starts a comment; blanks skipped."""
    actions = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if len(text.split()) != 1:
            raise TraceError(f"line {lineno}: expected one action name, got {text!r}")
        actions.append((lineno, text))
    return actions


@dataclass
class StepRecord:
    index: int
    action: str | None
    verdict: object | None
    canonical: str
    out_of_language: bool
    counts: CountReport | None


def replay(
    artifact: Artifact,
    lines: Iterable[str],
    mode: str | None = None,
    with_counts: bool = False,
) -> Iterator[StepRecord]:
    """Run a trace through a fresh session, one record per observation.

    The first record (index 0, no action) reports the initial verdict.
    """
    session = MonitorSession(artifact, mode)
    config_domain = isinstance(artifact.domain, ConfigDomain)

    def record(index, action):
        counts = None
        if with_counts and config_domain and not session.out_of_language:
            counts = session.counts()
        return StepRecord(
            index=index,
            action=action,
            verdict=session.verdict(),
            canonical=session.verdict_canonical(),
            out_of_language=session.out_of_language,
            counts=counts,
        )

    yield record(0, None)
    for index, (lineno, action) in enumerate(parse_trace(lines), start=1):
        try:
            session.step(action)
        except TraceError as exc:
            raise TraceError(f"line {lineno}: {exc}") from exc
        yield record(index, action)
