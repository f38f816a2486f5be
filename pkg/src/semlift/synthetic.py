"""Deterministic synthetic clinic data.

Generates SQL seed scripts for the two demo source systems (admissions and
trial management) from a seeded RNG; the same config always yields
byte-identical SQL.  Used by the `seed` command and the scaling tests.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from random import Random

_SURNAMES = (
    "Andersson", "Bergstrom", "Carlsson", "Dahl", "Ek", "Forsberg",
    "Gustavsson", "Holm", "Isaksson", "Johansson", "Karlsson", "Lindqvist",
    "Magnusson", "Nilsson", "Olofsson", "Persson", "Qvist", "Rosen",
    "Sandberg", "Thorn", "Ulvaeus", "Viklund", "Wallin", "Ygberg", "Zetter",
)

_STATUSES = ("screening", "enrolled", "completed", "withdrawn")

_TRIAL_TITLES = (
    "CLL maintenance therapy study",
    "Adaptive dosing in chronic leukemia",
    "Observational CLL outcomes registry",
    "Second-line CLL combination trial",
    "Minimal residual disease monitoring study",
)

# The worked example from the interface fixtures: one stay, one form that
# carries both measurements.  Kept stable so end-to-end tests can assert
# exact values.
REFERENCE_PERSNR = 644007
REFERENCE_CASEID = 1553541
REFERENCE_FORMID = 359685


@dataclass(frozen=True)
class GeneratorConfig:
    n_patients: int = 100
    seed: int = 0
    height_missing_rate: float = 0.0
    weight_missing_rate: float = 0.0
    birth_year_range: tuple[int, int] = (1920, 1988)
    start: date = date(2010, 1, 1)
    window_days: int = 500
    gap_days_range: tuple[int, int] = (-7, 60)
    n_trials: int = 3
    include_reference_patient: bool = True

    def __post_init__(self) -> None:
        if self.n_patients < 0:
            raise ValueError("n_patients must be >= 0")
        if not 0.0 <= self.height_missing_rate <= 1.0:
            raise ValueError("height_missing_rate must be in [0, 1]")
        if not 0.0 <= self.weight_missing_rate <= 1.0:
            raise ValueError("weight_missing_rate must be in [0, 1]")
        if self.n_trials > len(_TRIAL_TITLES):
            raise ValueError(f"at most {len(_TRIAL_TITLES)} trials supported")


@dataclass(frozen=True)
class _PatientRow:
    persnr: int
    name: str
    birthdate: date
    weight_kg: int | None
    weight_date: date
    height_cm: int | None
    height_date: date
    trials: tuple[int, ...]
    statuses: tuple[str, ...]


def _sample_patients(cfg: GeneratorConfig) -> list[_PatientRow]:
    rng = Random(cfg.seed)
    lo_year, hi_year = cfg.birth_year_range
    lo_gap, hi_gap = cfg.gap_days_range
    patients: list[_PatientRow] = []
    for i in range(cfg.n_patients):
        persnr = 100_000 + i
        name = _SURNAMES[rng.randrange(len(_SURNAMES))]
        birth = date(rng.randint(lo_year, hi_year), rng.randint(1, 12), rng.randint(1, 28))
        height_date = cfg.start + timedelta(days=rng.randint(0, cfg.window_days))
        # weight taken within [lo_gap, hi_gap] days after the height measurement,
        # so weight - height stays inside the derivation gate by default
        weight_date = height_date + timedelta(days=rng.randint(lo_gap, hi_gap))
        weight: int | None = rng.randint(45, 120)
        height: int | None = rng.randint(150, 200)
        if rng.random() < cfg.weight_missing_rate:
            weight = None
        if rng.random() < cfg.height_missing_rate:
            height = None
        k = rng.randint(0, min(2, cfg.n_trials))
        trials = tuple(sorted(rng.sample(range(7001, 7001 + cfg.n_trials), k)))
        statuses = tuple(_STATUSES[rng.randrange(len(_STATUSES))] for _ in trials)
        patients.append(
            _PatientRow(persnr, name, birth, weight, weight_date, height, height_date,
                        trials, statuses)
        )
    return patients


def _sql_opt(v: int | None) -> str:
    return "NULL" if v is None else str(v)


_CIS_DDL = """\
CREATE TABLE HospitalStay (
  caseid INTEGER PRIMARY KEY,
  persnr INTEGER NOT NULL,
  hasCLLForm INTEGER NOT NULL
);
CREATE TABLE Patient (
  persnr INTEGER PRIMARY KEY
);
CREATE TABLE Natperson (
  persnr INTEGER PRIMARY KEY,
  name TEXT,
  birthdate DATE
);
CREATE TABLE cll_form_entry (
  formid INTEGER PRIMARY KEY,
  weight BIGINT,
  height BIGINT,
  date DATE
);
CREATE TABLE TrialParticipation (
  tpid INTEGER PRIMARY KEY,
  persnr INTEGER NOT NULL,
  trial INTEGER NOT NULL
);
CREATE TABLE Trial (
  trialid INTEGER PRIMARY KEY,
  title TEXT
);
"""

_CTMS_DDL = """\
CREATE TABLE Trial (
  trialid INTEGER PRIMARY KEY,
  title TEXT
);
CREATE TABLE Enrollment (
  enrollid INTEGER PRIMARY KEY,
  trial INTEGER NOT NULL,
  persnr INTEGER NOT NULL,
  status TEXT
);
"""


def generate_cis_sql(cfg: GeneratorConfig) -> str:
    patients = _sample_patients(cfg)
    out = [_CIS_DDL]
    for t in range(cfg.n_trials):
        out.append(f"INSERT INTO Trial VALUES ({7001 + t}, '{_TRIAL_TITLES[t]}');\n")
    if cfg.include_reference_patient:
        out.append(f"INSERT INTO Natperson VALUES ({REFERENCE_PERSNR}, 'Anonymize', '1980-06-15');\n")
        out.append(f"INSERT INTO Patient VALUES ({REFERENCE_PERSNR});\n")
        out.append(f"INSERT INTO cll_form_entry VALUES ({REFERENCE_FORMID}, 72, 170, '2012-01-01');\n")
        out.append(f"INSERT INTO HospitalStay VALUES ({REFERENCE_CASEID}, {REFERENCE_PERSNR}, {REFERENCE_FORMID});\n")
    tpid = 800_000
    for i, p in enumerate(patients):
        form_w = 300_000 + 2 * i
        form_h = form_w + 1
        case_w = 500_000 + 2 * i
        case_h = case_w + 1
        out.append(f"INSERT INTO Natperson VALUES ({p.persnr}, '{p.name}', '{p.birthdate.isoformat()}');\n")
        out.append(f"INSERT INTO Patient VALUES ({p.persnr});\n")
        out.append(
            f"INSERT INTO cll_form_entry VALUES ({form_w}, {_sql_opt(p.weight_kg)}, NULL, "
            f"'{p.weight_date.isoformat()}');\n"
        )
        out.append(
            f"INSERT INTO cll_form_entry VALUES ({form_h}, NULL, {_sql_opt(p.height_cm)}, "
            f"'{p.height_date.isoformat()}');\n"
        )
        out.append(f"INSERT INTO HospitalStay VALUES ({case_w}, {p.persnr}, {form_w});\n")
        out.append(f"INSERT INTO HospitalStay VALUES ({case_h}, {p.persnr}, {form_h});\n")
        for trial in p.trials:
            out.append(f"INSERT INTO TrialParticipation VALUES ({tpid}, {p.persnr}, {trial});\n")
            tpid += 1
    return "".join(out)


def generate_ctms_sql(cfg: GeneratorConfig) -> str:
    patients = _sample_patients(cfg)
    out = [_CTMS_DDL]
    for t in range(cfg.n_trials):
        out.append(f"INSERT INTO Trial VALUES ({7001 + t}, '{_TRIAL_TITLES[t]}');\n")
    enrollid = 900_000
    for p in patients:
        for trial, status in zip(p.trials, p.statuses):
            out.append(f"INSERT INTO Enrollment VALUES ({enrollid}, {trial}, {p.persnr}, '{status}');\n")
            enrollid += 1
    return "".join(out)


def build_sqlite(sql_text: str, db_path: str | Path) -> None:
    path = Path(db_path)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    try:
        conn.executescript(sql_text)
        conn.commit()
    finally:
        conn.close()


def seed_databases(cfg: GeneratorConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write cis.sql/ctms.sql and the matching SQLite files into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "cis_sql": out / "cis.sql",
        "ctms_sql": out / "ctms.sql",
        "cis_db": out / "cis.db",
        "ctms_db": out / "ctms.db",
    }
    cis_sql = generate_cis_sql(cfg)
    ctms_sql = generate_ctms_sql(cfg)
    paths["cis_sql"].write_text(cis_sql, encoding="utf-8")
    paths["ctms_sql"].write_text(ctms_sql, encoding="utf-8")
    build_sqlite(cis_sql, paths["cis_db"])
    build_sqlite(ctms_sql, paths["ctms_db"])
    return paths
