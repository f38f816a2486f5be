import csv

import numpy as np
import pytest

from semlift.bench import (
    PHASE_AGGREGATION,
    PHASE_CALCULATION,
    aggregation_totals,
    default_sizes,
    linear_fit_r2,
    run_benchmark,
    write_bench_csv,
)
from semlift.pipeline import CacheMissing, Pipeline, load_config


class TestSizes:
    def test_doubling_series(self):
        assert default_sizes(1280) == [10, 20, 40, 80, 160, 320, 640, 1280]

    def test_limit_cuts_the_series(self):
        assert default_sizes(50) == [10, 20, 40]

    def test_tiny_cache_gives_no_sizes(self):
        assert default_sizes(7) == []


class TestFit:
    def test_perfect_line(self):
        xs = np.array([1.0, 2.0, 3.0, 4.0])
        assert linear_fit_r2(xs, 2.5 * xs + 1.0) == pytest.approx(1.0)

    def test_noisy_line_stays_high(self):
        rng = np.random.default_rng(0)
        xs = np.linspace(10, 1280, 8)
        ys = 0.001 * xs + rng.normal(0, 0.01, xs.shape)
        assert linear_fit_r2(xs, ys) > 0.9

    def test_flat_series_counts_as_perfect(self):
        xs = np.array([1.0, 2.0, 3.0])
        assert linear_fit_r2(xs, np.zeros(3)) == 1.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            linear_fit_r2(np.array([1.0]), np.array([1.0]))


class TestRun:
    def test_requires_a_built_cache(self, demo_dir):
        _, config_path = demo_dir
        pipe = Pipeline(load_config(config_path))
        with pytest.raises(CacheMissing):
            run_benchmark(pipe, [2])

    def test_rows_cover_both_phases(self, demo_dir):
        _, config_path = demo_dir
        pipe = Pipeline(load_config(config_path))
        pipe.build_all()
        rows = run_benchmark(pipe, [2, 4], repeats=1)
        phases = [(r.population_size, r.phase) for r in rows]
        assert phases == [
            (2, PHASE_AGGREGATION),
            (2, PHASE_CALCULATION),
            (4, PHASE_AGGREGATION),
            (4, PHASE_CALCULATION),
        ]
        assert all(r.retrieve_seconds >= 0 and r.reasoning_seconds >= 0 for r in rows)

    def test_oversized_request_is_refused(self, demo_dir):
        _, config_path = demo_dir
        pipe = Pipeline(load_config(config_path))
        pipe.build_all()
        with pytest.raises(CacheMissing):
            run_benchmark(pipe, [100])

    def test_csv_output(self, demo_dir, tmp_path):
        _, config_path = demo_dir
        pipe = Pipeline(load_config(config_path))
        pipe.build_all()
        rows = run_benchmark(pipe, [2], repeats=1)
        out = tmp_path / "bench.csv"
        write_bench_csv(rows, out)
        with open(out, newline="", encoding="utf-8") as fh:
            parsed = list(csv.reader(fh))
        assert parsed[0] == [
            "populationSize", "phase", "retrieveDataSeconds", "reasoningSeconds",
        ]
        assert len(parsed) == 3

    def test_aggregation_totals_sorted_by_size(self, demo_dir):
        _, config_path = demo_dir
        pipe = Pipeline(load_config(config_path))
        pipe.build_all()
        rows = run_benchmark(pipe, [4, 2], repeats=1)
        xs, ys = aggregation_totals(rows)
        assert xs.tolist() == [2.0, 4.0]
        assert len(ys) == 2
