"""Shipped rule assets, the demo vocabulary, and host-side oracles.

The oracles (bmi_reference, age_reference, gate_reference) are deliberately
independent of the rule engine: plain Python arithmetic that the engine's
output is tested against.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .builtins import (
    EULER_MAX,
    LOG_DTLIT,
    MATH_DIFFERENCE,
    MATH_EXPONENTIATION,
    MATH_NOT_GREATER_THAN,
    MATH_NOT_LESS_THAN,
    MATH_PRODUCT,
    MATH_QUOTIENT,
    TIME_CALCULATING_AGE,
    TIME_YEARS_BETWEEN,
)
from .n3 import Document, load_n3
from .schema import class_iri, load_manifest, property_index
from .terms import RDF_NS, RDF_TYPE, RDFS_NS, Formula, Graph, Iri, Rule

KB_DIR = Path(__file__).resolve().parent / "kb"
SOURCES_DIR = Path(__file__).resolve().parent / "sources"

HUMAN_NS = "http://example.org/do/human#"
ORGANISM_NS = "http://example.org/do/organism#"
QUANT_NS = "http://example.org/do/quant#"
EVENT_NS = "http://example.org/do/event#"
UNITS_NS = "http://example.org/do/units#"
STUDY_NS = "http://example.org/do/study#"
FOAF_NS = "http://xmlns.com/foaf/0.1/"

VOCAB_PREFIXES = {
    "human": HUMAN_NS,
    "organism": ORGANISM_NS,
    "quant": QUANT_NS,
    "event": EVENT_NS,
    "units": UNITS_NS,
    "study": STUDY_NS,
    "foaf": FOAF_NS,
    "time": "http://www.w3.org/2000/10/swap/time#",
}

BUILTIN_IRIS = frozenset(
    {
        MATH_DIFFERENCE,
        MATH_QUOTIENT,
        MATH_PRODUCT,
        MATH_EXPONENTIATION,
        MATH_NOT_GREATER_THAN,
        MATH_NOT_LESS_THAN,
        EULER_MAX,
        LOG_DTLIT,
        TIME_YEARS_BETWEEN,
        TIME_CALCULATING_AGE,
    }
)


@dataclass(frozen=True)
class RuleAsset:
    name: str
    filename: str
    stage: str  # conversion | normalization | analysis


ASSETS: tuple[RuleAsset, ...] = (
    RuleAsset("convert_demographics", "convert_demographics.n3", "conversion"),
    RuleAsset("convert_height", "convert_height.n3", "conversion"),
    RuleAsset("convert_trials", "convert_trials.n3", "conversion"),
    RuleAsset("convert_enrollments", "convert_enrollments.n3", "conversion"),
    RuleAsset("normalize_units", "normalize_units.n3", "normalization"),
    RuleAsset("derive_age", "derive_age.n3", "analysis"),
    RuleAsset("analyze_bmi", "analyze_bmi.n3", "analysis"),
)

_BY_NAME = {a.name: a for a in ASSETS}


def asset_path(name: str) -> Path:
    try:
        return KB_DIR / _BY_NAME[name].filename
    except KeyError:
        raise KeyError(f"unknown rule asset {name!r}") from None


def load_asset(name: str) -> Document:
    return load_n3(asset_path(name))


def load_rules(names: list[str] | tuple[str, ...]) -> list[Rule]:
    """Rules from named shipped assets, or from explicit .n3 paths."""
    rules: list[Rule] = []
    for name in names:
        if name in _BY_NAME:
            rules.extend(load_asset(name).rules)
        else:
            rules.extend(load_n3(name).rules)
    return rules


def stage_assets(stage: str) -> list[RuleAsset]:
    return [a for a in ASSETS if a.stage == stage]


def load_vocabulary() -> Graph:
    return load_n3(KB_DIR / "vocab.n3").graph


def assets_fingerprint() -> str:
    """Content hash over all shipped assets; keys the pipeline's EHR cache."""
    digest = hashlib.sha256()
    for name in sorted([a.name for a in ASSETS] + ["vocab"]):
        path = KB_DIR / (_BY_NAME[name].filename if name in _BY_NAME else "vocab.n3")
        digest.update(name.encode())
        digest.update(b"\x00")
        digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Host-side oracles
# ---------------------------------------------------------------------------

def bmi_reference(weight_kg: float, height_m: float) -> float:
    if weight_kg <= 0 or height_m <= 0:
        raise ValueError("weight and height must be positive")
    return weight_kg / (height_m * height_m)


def age_reference(birth: date, ref: date) -> int:
    """Full calendar years between birth and ref."""
    if ref < birth:
        raise ValueError("reference date precedes birth date")
    years = ref.year - birth.year
    if (ref.month, ref.day) < (birth.month, birth.day):
        years -= 1
    return years


_SECONDS_PER_DAY = 86_400
_GATE_LOW_S = -7 * _SECONDS_PER_DAY
_GATE_HIGH_S = 2 * 365 * _SECONDS_PER_DAY


def gate_reference(weight_date: date, length_date: date, birth: date) -> bool:
    """Whether a BMI may be derived for this measurement pair: the
    inter-measurement delay within [-7 days, 2 years] (normalized seconds,
    inclusive) and age >= 18 at the later measurement."""
    delta_s = (weight_date - length_date).days * _SECONDS_PER_DAY
    if not (_GATE_LOW_S <= delta_s <= _GATE_HIGH_S):
        return False
    return age_reference(birth, max(weight_date, length_date)) >= 18


# ---------------------------------------------------------------------------
# Asset validation
# ---------------------------------------------------------------------------

def _formula_terms(f: Formula, preds: set[str], type_objects: set[str]) -> None:
    for t in f.patterns:
        if isinstance(t.p, Iri):
            preds.add(t.p.value)
            if t.p.value == RDF_TYPE and isinstance(t.o, Iri):
                type_objects.add(t.o.value)


def _allowed_terms() -> set[str]:
    allowed: set[str] = set()
    for triple in load_vocabulary():
        if isinstance(triple.s, Iri):
            allowed.add(triple.s.value)
    allowed |= BUILTIN_IRIS
    allowed.add(RDF_TYPE)
    allowed.add(RDFS_NS + "label")
    allowed.add(RDF_NS + "Property")
    allowed.add(RDFS_NS + "Class")
    for manifest_file in ("cis_manifest.json", "ctms_manifest.json"):
        m = load_manifest(SOURCES_DIR / manifest_file)
        allowed.update(property_index(m).keys())
        for t in m.tables:
            allowed.add(class_iri(m, t).value)
    return allowed


def validate_assets() -> list[dict]:
    """Parse every shipped asset and check its terms against the closed
    vocabulary (demo vocabulary + generated schema terms + builtins).
    Returns a list of violations; empty for the shipped set."""
    violations: list[dict] = []
    try:
        allowed = _allowed_terms()
    except Exception as exc:  # vocab itself broken: report, nothing else checkable
        return [{"asset": "vocab", "kind": "syntax", "message": str(exc)}]

    for asset in ASSETS:
        try:
            doc = load_asset(asset.name)
        except Exception as exc:
            violations.append(
                {"asset": asset.name, "kind": "syntax", "message": str(exc)}
            )
            continue
        preds: set[str] = set()
        type_objects: set[str] = set()
        for rule in doc.rules:
            _formula_terms(rule.antecedent, preds, type_objects)
            _formula_terms(rule.consequent, preds, type_objects)
        _formula_terms(Formula(tuple(doc.graph)), preds, type_objects)
        for iri in sorted((preds | type_objects) - allowed):
            violations.append(
                {
                    "asset": asset.name,
                    "kind": "vocabulary",
                    "message": f"term {iri} is not declared in the vocabulary or schema",
                }
            )
    return violations
