"""Command line entry points.

Exit codes: 0 success, 1 usage, 2 rejected input or missing data,
3 unexpected internal failure.
"""

from __future__ import annotations

import argparse
import json
import sqlite3
import sys
from contextlib import closing
from pathlib import Path

from . import kb
from .bench import aggregation_totals, linear_fit_r2, run_benchmark, write_bench_csv
from .n3 import N3ParseError, load_n3, serialize_n3
from .pipeline import Pipeline, PipelineError, load_config
from .query import (
    ConstructQuery,
    QueryCompileError,
    QueryParseError,
    compile_to_sql,
    execute_construct,
    execute_select,
    load_query,
)
from .reasoner import (
    LimitExceeded,
    Limits,
    RuleValidationError,
    StrictBuiltinError,
    forward_chain,
    validate_rules,
    write_trace,
)
from .schema import ManifestError, generate_ddo, load_manifest
from .synthetic import GeneratorConfig, seed_databases
from .terms import Iri, Literal, merge_graphs
from .views import ViewError, evaluate_view, view_spec_from_dict, write_view_csv

_DATA_ERRORS = (
    ManifestError,
    N3ParseError,
    QueryParseError,
    QueryCompileError,
    PipelineError,
    RuleValidationError,
    LimitExceeded,
    StrictBuiltinError,
    ViewError,
    FileNotFoundError,
    NotADirectoryError,
    sqlite3.DatabaseError,
)


class _Parser(argparse.ArgumentParser):
    """argparse flags usage problems with exit status 2; we reserve 2 for
    data errors, so route usage problems to 1 instead."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _print_diagnostics(diagnostics: list[dict]) -> None:
    for d in diagnostics:
        parts = ", ".join(f"{k}={v}" for k, v in d.items())
        print(f"warning: {parts}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_ddo_gen(args) -> int:
    manifest = load_manifest(args.manifest)
    _write_text(args.out, serialize_n3(generate_ddo(manifest)))
    return 0


def _cmd_query(args) -> int:
    manifest = load_manifest(args.manifest)
    query = load_query(args.query)
    plan = compile_to_sql(query, manifest)
    diagnostics: list[dict] = []
    with closing(sqlite3.connect(args.db)) as conn:
        if isinstance(query, ConstructQuery):
            graph = execute_construct(conn, plan, manifest, diagnostics)
            _write_text(args.out, serialize_n3(graph))
        else:
            rows = execute_select(conn, plan, manifest, diagnostics)
            lines = ["\t".join(query.variables)]
            for row in rows:
                lines.append(
                    "\t".join(_term_cell(row.get(v)) for v in query.variables)
                )
            _write_text(args.out, "\n".join(lines) + "\n")
    _print_diagnostics(diagnostics)
    return 0


def _term_cell(term) -> str:
    if term is None:
        return ""
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, Literal):
        return term.lexical
    return str(term)


def _cmd_reason(args) -> int:
    data = merge_graphs([load_n3(p).graph for p in args.data])
    rules = []
    for p in args.rules:
        rules.extend(load_n3(p).rules)
    validate_rules(rules)
    diagnostics: list[dict] = []
    result, derivations = forward_chain(
        data, rules, strict=args.strict, diagnostics=diagnostics
    )
    _write_text(args.out, serialize_n3(result))
    if args.trace:
        write_trace(derivations, args.trace)
    _print_diagnostics(diagnostics)
    print(
        f"derived {len(result) - len(data)} new triples in "
        f"{len(derivations)} rule firings",
        file=sys.stderr,
    )
    return 0


_DEFAULT_VIEWS = (
    {"name": "bmi_count_by_age", "metric": "count", "groupBy": "age"},
    {"name": "bmi_mean_by_age", "metric": "mean", "groupBy": "age"},
    {"name": "bmi_histogram", "metric": "histogram"},
)

_CIS_TEMPLATES = ("demographics.rq", "birthdate.rq", "cll_weight.rq", "cll_height.rq", "trials.rq")
_CTMS_TEMPLATES = ("trial_enrollment.rq",)


def _cmd_seed(args) -> int:
    import shutil

    cfg = GeneratorConfig(
        n_patients=args.patients,
        seed=args.seed,
        height_missing_rate=args.height_missing_rate,
        weight_missing_rate=args.weight_missing_rate,
        include_reference_patient=not args.no_reference,
    )
    out = Path(args.out_dir)
    seed_databases(cfg, out)

    # copy the shipped manifests and templates so the directory is
    # self-contained and the config can use relative paths
    (out / "manifests").mkdir(exist_ok=True)
    shutil.copy(kb.SOURCES_DIR / "cis_manifest.json", out / "manifests" / "cis.json")
    shutil.copy(kb.SOURCES_DIR / "ctms_manifest.json", out / "manifests" / "ctms.json")
    for system, names in (("cis", _CIS_TEMPLATES), ("ctms", _CTMS_TEMPLATES)):
        tdir = out / "templates" / system
        tdir.mkdir(parents=True, exist_ok=True)
        for name in names:
            shutil.copy(kb.SOURCES_DIR / "templates" / system / name, tdir / name)

    config = {
        "sources": [
            {
                "name": "cis",
                "db": "cis.db",
                "manifest": "manifests/cis.json",
                "templates": [f"templates/cis/{n}" for n in _CIS_TEMPLATES],
                "conversionRules": ["convert_demographics", "convert_height", "convert_trials"],
                "patientTable": "Natperson",
                "patientsSql": "SELECT persnr FROM Natperson ORDER BY persnr",
            },
            {
                "name": "ctms",
                "db": "ctms.db",
                "manifest": "manifests/ctms.json",
                "templates": [f"templates/ctms/{n}" for n in _CTMS_TEMPLATES],
                "conversionRules": ["convert_enrollments"],
            },
        ],
        "analysisRules": ["normalize_units", "derive_age", "analyze_bmi"],
        "views": list(_DEFAULT_VIEWS),
        "limits": {"maxIterations": 10000, "maxTriples": 10000000},
        "cacheDir": "cache",
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    n = args.patients + (0 if args.no_reference else 1)
    print(f"seeded {n} patients into {out} (config.json ready)")
    return 0


def _cmd_build(args) -> int:
    if args.all and (args.out or args.trace):
        print("error: --out/--trace require --patient", file=sys.stderr)
        return 1
    pipeline = Pipeline(load_config(args.config), strict=args.strict)
    if args.patient:
        record = pipeline.build_patient(args.patient)
        pipeline.save_record(record)
        if args.out:
            _write_text(args.out, serialize_n3(record.graph))
        if args.trace:
            write_trace(record.derivations, args.trace)
        _print_diagnostics(record.diagnostics)
        timing = ", ".join(f"{k} {v:.3f}s" for k, v in record.timings.items())
        print(f"built {record.patient_iri.value}: {len(record.graph)} triples ({timing})")
    else:
        records = pipeline.build_all(workers=args.workers)
        diagnostics = [d for r in records for d in r.diagnostics]
        _print_diagnostics(diagnostics)
        print(f"built {len(records)} records into {pipeline.cache_path}")
    return 0


def _cmd_aggregate(args) -> int:
    pipeline = Pipeline(load_config(args.config))
    population = pipeline.aggregate()
    _write_text(args.out, serialize_n3(population))
    print(
        f"aggregated {len(pipeline.cached_patient_ids())} records "
        f"({len(population)} triples)",
        file=sys.stderr,
    )
    return 0


def _cmd_views(args) -> int:
    from .plots import render_view_png

    pipeline = Pipeline(load_config(args.config))
    population = pipeline.aggregate()
    specs = [view_spec_from_dict(raw) for raw in pipeline.config.views] or [
        view_spec_from_dict(raw) for raw in _DEFAULT_VIEWS
    ]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        table = evaluate_view(population, spec)
        write_view_csv(table, out / f"{spec.name}.csv")
        render_view_png(table, out / f"{spec.name}.png")
        print(f"{spec.name}: {len(table.rows)} rows -> {out / spec.name}.csv/.png")
    return 0


def _cmd_bench(args) -> int:
    from .plots import render_bench_png

    pipeline = Pipeline(load_config(args.config))
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    rows = run_benchmark(pipeline, sizes, repeats=args.repeats)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_bench_csv(rows, out / "bench.csv")
    render_bench_png(rows, out / "bench.png")
    xs, ys = aggregation_totals(rows)
    if len(xs) >= 2:
        print(f"aggregation linearity: R^2 = {linear_fit_r2(xs, ys):.4f}")
    print(f"wrote {out / 'bench.csv'} and {out / 'bench.png'}")
    return 0


def _cmd_validate_kb(args) -> int:
    violations = kb.validate_assets()
    if violations:
        for v in violations:
            print(f"{v['asset']}: {v['kind']}: {v['message']}", file=sys.stderr)
        return 2
    n_rules = sum(len(kb.load_asset(a.name).rules) for a in kb.ASSETS)
    print(f"kb assets OK ({n_rules} rules across {len(kb.ASSETS)} files)")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semlift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ddo-gen", help="generate the schema ontology for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="output N3 file (default stdout)")
    p.set_defaults(func=_cmd_ddo_gen)

    p = sub.add_parser("query", help="run a CONSTRUCT (or debugging SELECT) query on a database")
    p.add_argument("--db", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--query", required=True, help="query file")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("reason", help="forward-chain rules over N3 data")
    p.add_argument("--data", action="append", required=True, metavar="N3")
    p.add_argument("--rules", action="append", required=True, metavar="N3")
    p.add_argument("--out", default=None, help="output N3 file (default stdout)")
    p.add_argument("--trace", default=None, help="write rule firings as JSON lines")
    p.add_argument("--strict", action="store_true",
                   help="fail on builtin type errors instead of discarding the match")
    p.set_defaults(func=_cmd_reason)

    p = sub.add_parser("seed", help="generate demo source databases and a config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--patients", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height-missing-rate", type=float, default=0.0)
    p.add_argument("--weight-missing-rate", type=float, default=0.0)
    p.add_argument("--no-reference", action="store_true",
                   help="omit the fixed worked-example patient")
    p.set_defaults(func=_cmd_seed)

    p = sub.add_parser("build", help="build per-patient records into the cache")
    p.add_argument("--config", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--patient", help="build a single patient id")
    group.add_argument("--all", action="store_true", help="build every enumerable patient")
    p.add_argument("--out", default=None, help="with --patient: also write the record N3 here")
    p.add_argument("--trace", default=None, help="with --patient: write rule firings here")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("aggregate", help="union cached records into a population graph")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output N3 file (default stdout)")
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("views", help="compute configured views as CSV plus PNG charts")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_views)

    p = sub.add_parser("bench", help="time aggregation and calculation over growing populations")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sizes", default=None, help="comma-separated population sizes")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("validate-kb", help="check the shipped rule assets against the vocabulary")
    p.set_defaults(func=_cmd_validate_kb)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
