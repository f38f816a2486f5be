"""PNG rendering for view tables and benchmark reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import PHASE_AGGREGATION, PHASE_CALCULATION, BenchRow
from .views import ViewTable


def render_view_png(table: ViewTable, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    if table.columns == ("group", "binLow", "binHigh", "count"):
        labels = [f"{row[0]}\n[{row[1]:g}, {row[2]:g})" for row in table.rows]
        counts = [row[3] for row in table.rows]
        ax.bar(range(len(counts)), counts, color="#4878a8")
        ax.set_xticks(range(len(counts)))
        ax.set_xticklabels(labels, fontsize=8)
        ax.set_ylabel("count")
    else:
        labels = [row[0] for row in table.rows]
        values = [row[1] for row in table.rows]
        ax.bar(range(len(values)), values, color="#4878a8")
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(labels)
        ax.set_ylabel(table.columns[1])
        for i, row in enumerate(table.rows):
            ax.annotate(f"n={row[2]}", (i, values[i]), ha="center", va="bottom", fontsize=8)
    ax.set_title(table.name)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_bench_png(rows: list[BenchRow], path: str | Path) -> None:
    sizes = sorted({r.population_size for r in rows})
    by_key = {(r.population_size, r.phase): r for r in rows}

    fig, ax = plt.subplots(figsize=(8, 4.5))
    x = np.arange(len(sizes), dtype=float)
    width = 0.38
    colors = {"retrieve": "#4878a8", "reasoning": "#e1913d"}
    for offset, phase in ((-width / 2, PHASE_AGGREGATION), (width / 2, PHASE_CALCULATION)):
        retrieve = [by_key[(s, phase)].retrieve_seconds for s in sizes]
        reasoning = [by_key[(s, phase)].reasoning_seconds for s in sizes]
        ax.bar(x + offset, retrieve, width, color=colors["retrieve"],
               label=f"{phase}: retrieve" if phase == PHASE_AGGREGATION else None)
        ax.bar(x + offset, reasoning, width, bottom=retrieve, color=colors["reasoning"],
               label=f"{phase}: reasoning" if phase == PHASE_AGGREGATION else None)
    ax.set_xticks(x)
    ax.set_xticklabels([str(s) for s in sizes])
    ax.set_xlabel("population size")
    ax.set_ylabel("seconds (median of runs)")
    ax.set_title("aggregation and calculation scaling")
    ax.legend(["retrieve data", "reasoning"])
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
