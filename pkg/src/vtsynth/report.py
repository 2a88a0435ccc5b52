"""Figure rendering for evaluation reports.

Figures are written next to the delimited output; PNG metadata is pinned so
seeded reports stay byte-identical across runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_PNG_METADATA = {"Software": "vtsynth"}


def save_specificity_figure(result, path, title: str = "") -> None:
    """Histogram of per-run ruled-out percentages."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.hist(result.per_run, bins=25, range=(0.0, 100.0), color="#4878d0", edgecolor="white")
    ax.axvline(result.mean, color="#d65f5f", linewidth=1.2,
               label=f"mean {result.mean:.1f}%")
    ax.set_xlabel("ruled-out configurations (%)")
    ax.set_ylabel("runs")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_METADATA)
    plt.close(fig)


def save_sweep_figure(results, path, title: str = "") -> None:
    """Per-subset means by k, with the extremes joined across k values."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ks = [r.k for r in results]
    for result in results:
        means = [row.mean for row in result.rows]
        ax.scatter([result.k] * len(means), means, s=12, color="#b0b0b0", zorder=1)
    ax.plot(ks, [r.best.mean for r in results], "o-", color="#4878d0",
            label="max over subsets", zorder=2)
    ax.plot(ks, [r.worst.mean for r in results], "s--", color="#d65f5f",
            label="min over subsets", zorder=2)
    ax.set_xlabel("observable actions (k)")
    ax.set_ylabel("expected ruled-out configurations (%)")
    ax.set_xticks(ks)
    ax.set_ylim(-2.0, 102.0)
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_METADATA)
    plt.close(fig)
