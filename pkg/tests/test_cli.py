import csv
import json
import sqlite3

import pytest

from semlift.cli import main
from semlift.isomorphism import assert_isomorphic
from semlift.n3 import load_n3, parse_n3

from conftest import FIXTURES


def run(*argv) -> int:
    return main(list(argv))


def usage_error(*argv) -> int:
    with pytest.raises(SystemExit) as e:
        run(*argv)
    return e.value.code


class TestUsage:
    def test_no_verb(self):
        assert usage_error() == 1

    def test_unknown_verb(self):
        assert usage_error("frobnicate") == 1

    def test_missing_required_flag(self):
        assert usage_error("ddo-gen") == 1

    def test_build_all_with_out(self, demo_dir, capsys):
        _, config_path = demo_dir
        code = run("build", "--config", str(config_path), "--all", "--out", "x.n3")
        assert code == 1
        assert "--patient" in capsys.readouterr().err


class TestDdoGen:
    def test_writes_parseable_ontology(self, tmp_path, capsys):
        out = tmp_path / "ddo.n3"
        code = run(
            "ddo-gen", "--manifest", str(FIXTURES / "manifest.json"), "--out", str(out)
        )
        assert code == 0
        doc = load_n3(out)
        assert len(doc.graph) == 37

    def test_stdout_default(self, capsys):
        assert run("ddo-gen", "--manifest", str(FIXTURES / "manifest.json")) == 0
        printed = capsys.readouterr().out
        assert "rdfs:Class" in printed

    def test_missing_manifest_is_a_data_error(self, capsys):
        assert run("ddo-gen", "--manifest", "/no/such/file.json") == 2
        assert "error:" in capsys.readouterr().err


class TestQuery:
    def _db(self, tmp_path):
        db = tmp_path / "clinic.db"
        conn = sqlite3.connect(db)
        conn.executescript((FIXTURES / "seed.sql").read_text(encoding="utf-8"))
        conn.close()
        return db

    def test_construct_output_matches_fixture(self, tmp_path, capsys):
        db = self._db(tmp_path)
        code = run(
            "query",
            "--db", str(db),
            "--manifest", str(FIXTURES / "manifest.json"),
            "--query", str(FIXTURES / "sample_query.rq"),
        )
        assert code == 0
        got = parse_n3(capsys.readouterr().out).graph
        assert_isomorphic(load_n3(FIXTURES / "query_expected.n3").graph, got)

    def test_select_writes_tsv(self, tmp_path, capsys):
        db = self._db(tmp_path)
        q = tmp_path / "names.rq"
        q.write_text(
            "PREFIX np: <http://example.org/cis/Natperson#>\n"
            "SELECT ?s ?n WHERE { ?s np:name ?n }\n",
            encoding="utf-8",
        )
        code = run(
            "query",
            "--db", str(db),
            "--manifest", str(FIXTURES / "manifest.json"),
            "--query", str(q),
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "s\tn"
        assert lines[1] == "http://example.org/cis/Natperson/644007#this\tAnonymize"

    def test_bad_query_is_a_data_error(self, tmp_path, capsys):
        db = self._db(tmp_path)
        q = tmp_path / "bad.rq"
        q.write_text("SELECT ?s WHERE { OPTIONAL { ?s ?p ?o } }", encoding="utf-8")
        code = run(
            "query",
            "--db", str(db),
            "--manifest", str(FIXTURES / "manifest.json"),
            "--query", str(q),
        )
        assert code == 2


class TestReason:
    def test_golden_conversion(self, tmp_path, capsys):
        out = tmp_path / "out.n3"
        trace = tmp_path / "trace.jsonl"
        code = run(
            "reason",
            "--data", str(FIXTURES / "conversion_input.n3"),
            "--rules", str(FIXTURES.parents[2] / "src" / "semlift" / "kb" / "convert_demographics.n3"),
            "--out", str(out),
            "--trace", str(trace),
        )
        assert code == 0
        assert "derived 6 new triples" in capsys.readouterr().err
        assert len(load_n3(out).graph) == 14
        for line in trace.read_text(encoding="utf-8").splitlines():
            json.loads(line)

    def test_missing_data_file(self, capsys):
        code = run("reason", "--data", "/no/such.n3", "--rules", "/also/none.n3")
        assert code == 2


class TestValidateKb:
    def test_shipped_assets_are_clean(self, capsys):
        assert run("validate-kb") == 0
        assert "kb assets OK" in capsys.readouterr().out


class TestEndToEnd:
    def test_seed_build_views_bench_chain(self, tmp_path, capsys):
        work = tmp_path / "demo"
        assert run("seed", "--out-dir", str(work), "--patients", "5", "--seed", "3") == 0
        config = work / "config.json"
        assert config.exists()
        # the seeded directory is self-contained: shipped manifests and
        # templates are copied next to the databases
        assert (work / "manifests" / "cis.json").exists()
        assert (work / "templates" / "cis" / "demographics.rq").exists()

        assert run("build", "--config", str(config), "--patient", "644007") == 0
        assert "644007" in capsys.readouterr().out

        assert run("build", "--config", str(config), "--all") == 0
        assert "built 6 records" in capsys.readouterr().out

        agg = tmp_path / "population.n3"
        assert run("aggregate", "--config", str(config), "--out", str(agg)) == 0
        assert len(load_n3(agg).graph) > 0

        views_dir = tmp_path / "views"
        assert run("views", "--config", str(config), "--out-dir", str(views_dir)) == 0
        for name in ("bmi_count_by_age", "bmi_mean_by_age", "bmi_histogram"):
            assert (views_dir / f"{name}.csv").exists()
            png = views_dir / f"{name}.png"
            assert png.exists() and png.stat().st_size > 0

        bench_dir = tmp_path / "bench"
        code = run(
            "bench",
            "--config", str(config),
            "--out-dir", str(bench_dir),
            "--sizes", "2,4",
            "--repeats", "1",
        )
        assert code == 0
        with open(bench_dir / "bench.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 5  # header + 2 phases x 2 sizes
        assert (bench_dir / "bench.png").stat().st_size > 0

    def test_bench_before_build_is_a_data_error(self, demo_dir, tmp_path, capsys):
        _, config_path = demo_dir
        code = run(
            "bench",
            "--config", str(config_path),
            "--out-dir", str(tmp_path / "bench"),
            "--sizes", "2",
        )
        assert code == 2
        assert "semlift build --all" in capsys.readouterr().err

    def test_aggregate_before_build_is_a_data_error(self, demo_dir, capsys):
        _, config_path = demo_dir
        assert run("aggregate", "--config", str(config_path)) == 2
