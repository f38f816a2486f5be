"""Scaling benchmark over pre-built record caches.

Two phases per population size, each split into a data-retrieval and a
reasoning step:

* Aggregation: load the cached per-patient graphs (retrieve), union them
  into one population graph (reasoning).
* Calculation: pull the view inputs out of the population graph (retrieve),
  compute the configured summaries (reasoning).

Each step is timed as the median of `repeats` runs.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pipeline import CacheMissing, Pipeline
from .terms import Graph
from .views import ViewSpec, evaluate_view, person_ages, person_values, view_spec_from_dict

PHASE_AGGREGATION = "Aggregation"
PHASE_CALCULATION = "Calculation"


@dataclass(frozen=True)
class BenchRow:
    population_size: int
    phase: str
    retrieve_seconds: float
    reasoning_seconds: float


def default_sizes(limit: int) -> list[int]:
    """10, 20, 40, ... doubling while the cache can cover the size."""
    sizes = []
    n = 10
    while n <= limit:
        sizes.append(n)
        n *= 2
    return sizes


def _median_timed(fn, repeats: int):
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def run_benchmark(
    pipeline: Pipeline,
    sizes: list[int] | None = None,
    *,
    repeats: int = 3,
) -> list[BenchRow]:
    ids = pipeline.cached_patient_ids()
    if sizes is None:
        sizes = default_sizes(len(ids))
    if sizes and max(sizes) > len(ids):
        raise CacheMissing(pipeline.cache_path)

    specs = [view_spec_from_dict(raw) for raw in pipeline.config.views] or [
        ViewSpec(name="bmi_mean", metric="mean", group_by_age=True)
    ]

    rows: list[BenchRow] = []
    for size in sizes:
        subset = ids[:size]

        load_s, graphs = _median_timed(
            lambda: [pipeline.load_record_graph(pid) for pid in subset], repeats
        )
        union_s, population = _median_timed(lambda: Graph().union(*graphs), repeats)
        rows.append(BenchRow(size, PHASE_AGGREGATION, load_s, union_s))

        def extract():
            return (
                person_ages(population),
                [person_values(population, spec.value_path) for spec in specs],
            )

        extract_s, _ = _median_timed(extract, repeats)
        summarize_s, _ = _median_timed(
            lambda: [evaluate_view(population, spec) for spec in specs], repeats
        )
        rows.append(BenchRow(size, PHASE_CALCULATION, extract_s, summarize_s))
    return rows


def write_bench_csv(rows: list[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["populationSize", "phase", "retrieveDataSeconds", "reasoningSeconds"]
        )
        for r in rows:
            writer.writerow(
                [r.population_size, r.phase, f"{r.retrieve_seconds:.6f}", f"{r.reasoning_seconds:.6f}"]
            )


def aggregation_totals(rows: list[BenchRow]) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted(
        (r.population_size, r.retrieve_seconds + r.reasoning_seconds)
        for r in rows
        if r.phase == PHASE_AGGREGATION
    )
    xs = np.array([p[0] for p in pairs], dtype=float)
    ys = np.array([p[1] for p in pairs], dtype=float)
    return xs, ys


def linear_fit_r2(xs: np.ndarray, ys: np.ndarray) -> float:
    """R-squared of the least-squares line through (xs, ys)."""
    if len(xs) < 2:
        raise ValueError("need at least two sizes to fit")
    coeffs = np.polyfit(xs, ys, 1)
    predicted = np.polyval(coeffs, xs)
    ss_res = float(np.sum((ys - predicted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot
