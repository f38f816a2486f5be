import json
import sqlite3
from pathlib import Path

import pytest

from semlift import load_manifest
from semlift.kb import SOURCES_DIR
from semlift.synthetic import GeneratorConfig, seed_databases

FIXTURES = Path(__file__).parent / "fixtures" / "clinic"

ANALYSIS_RULES = ["normalize_units", "derive_age", "analyze_bmi"]
CIS_RULES = ["convert_demographics", "convert_height", "convert_trials"]
CTMS_RULES = ["convert_enrollments"]

_CIS_TEMPLATES = ("demographics.rq", "birthdate.rq", "cll_weight.rq", "cll_height.rq", "trials.rq")


@pytest.fixture
def clinic_manifest():
    return load_manifest(FIXTURES / "manifest.json")


@pytest.fixture
def clinic_conn():
    conn = sqlite3.connect(":memory:")
    conn.executescript((FIXTURES / "seed.sql").read_text(encoding="utf-8"))
    yield conn
    conn.close()


def write_demo_config(out_dir: Path, **overrides) -> Path:
    """A pipeline config pointing at the shipped manifests/templates and the
    databases seeded into out_dir."""
    config = {
        "sources": [
            {
                "name": "cis",
                "db": "cis.db",
                "manifest": str(SOURCES_DIR / "cis_manifest.json"),
                "templates": [str(SOURCES_DIR / "templates" / "cis" / n) for n in _CIS_TEMPLATES],
                "conversionRules": CIS_RULES,
                "patientTable": "Natperson",
                "patientsSql": "SELECT persnr FROM Natperson ORDER BY persnr",
            },
            {
                "name": "ctms",
                "db": "ctms.db",
                "manifest": str(SOURCES_DIR / "ctms_manifest.json"),
                "templates": [str(SOURCES_DIR / "templates" / "ctms" / "trial_enrollment.rq")],
                "conversionRules": CTMS_RULES,
            },
        ],
        "analysisRules": ANALYSIS_RULES,
        "views": [
            {"name": "bmi_count_by_age", "metric": "count", "groupBy": "age"},
            {"name": "bmi_mean_by_age", "metric": "mean", "groupBy": "age"},
            {"name": "bmi_histogram", "metric": "histogram"},
        ],
        "limits": {"maxIterations": 10000, "maxTriples": 10000000},
        "cacheDir": "cache",
    }
    config.update(overrides)
    path = out_dir / "config.json"
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


def seed_demo(out_dir: Path, cfg: GeneratorConfig) -> Path:
    """Seed the demo databases into out_dir and return a ready config path."""
    seed_databases(cfg, out_dir)
    return write_demo_config(out_dir)


@pytest.fixture
def demo_dir(tmp_path):
    """A small seeded demo (reference patient + 6 synthetic) with config."""
    config_path = seed_demo(tmp_path, GeneratorConfig(n_patients=6, seed=11))
    return tmp_path, config_path
