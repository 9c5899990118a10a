"""Distribution figures for the ``stats`` report."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGSIZE = (5.0, 3.2)


def _bar(ax, counts: dict, xlabel: str, color: str):
    xs = sorted(counts)
    ax.bar([str(x) for x in xs], [counts[x] for x in xs], color=color, edgecolor="black", linewidth=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("questions")
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def plot_distributions(stats, outdir) -> list:
    """Write answers-per-question and triples-per-graph bar charts as PNGs.

    Returns the written paths. Metadata is pinned so reruns produce identical files.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, counts, xlabel, color in (
        ("answers_per_question.png", stats.answers_per_question, "answers per question", "#4c72b0"),
        ("triples_per_graph.png", stats.triples_per_graph, "triples per graph", "#dd8452"),
    ):
        fig, ax = plt.subplots(figsize=FIGSIZE)
        _bar(ax, counts, xlabel, color)
        fig.tight_layout()
        path = os.path.join(outdir, name)
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
