"""Population views: summary statistics computed host-side over the
aggregated record graph, optionally grouped by age bracket."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .builtins import TIME_CALCULATING_AGE
from .kb import HUMAN_NS, QUANT_NS, VOCAB_PREFIXES
from .terms import Graph, Iri, ListTerm, Literal, Term
from .values import numeric_value, temporal_value

HUMAN_PERSON = Iri(HUMAN_NS + "Person")
DEFAULT_VALUE_PATH = (Iri(HUMAN_NS + "hasBodyMassIndex"), Iri(QUANT_NS + "hasValue"))

_METRICS = ("count", "mean", "min", "max", "histogram")


class ViewError(ValueError):
    pass


@dataclass(frozen=True)
class ViewSpec:
    name: str
    metric: str
    value_path: tuple[Iri, ...] = DEFAULT_VALUE_PATH
    group_by_age: bool = False
    brackets: tuple[int, ...] = (18, 40, 65)
    bins: tuple[float, ...] = (0.0, 18.5, 25.0, 30.0, 100.0)


def _resolve_qname(q: str) -> Iri:
    if q.startswith("http://") or q.startswith("https://"):
        return Iri(q)
    prefix, _, local = q.partition(":")
    if prefix not in VOCAB_PREFIXES or not local:
        raise ViewError(f"cannot resolve {q!r} against the known vocabulary prefixes")
    return Iri(VOCAB_PREFIXES[prefix] + local)


def view_spec_from_dict(raw: dict) -> ViewSpec:
    name = raw.get("name")
    metric = raw.get("metric")
    if not name or metric not in _METRICS:
        raise ViewError(f"view needs a name and a metric from {_METRICS}")
    path = tuple(_resolve_qname(q) for q in raw.get("valuePath", ()))
    group_by = raw.get("groupBy")
    if group_by not in (None, "age"):
        raise ViewError(f"unsupported groupBy {group_by!r}")
    return ViewSpec(
        name=name,
        metric=metric,
        value_path=path or DEFAULT_VALUE_PATH,
        group_by_age=group_by == "age",
        brackets=tuple(raw.get("brackets", (18, 40, 65))),
        bins=tuple(raw.get("bins", (0.0, 18.5, 25.0, 30.0, 100.0))),
    )


# ---------------------------------------------------------------------------
# Graph extraction
# ---------------------------------------------------------------------------

def persons(g: Graph) -> set[Iri]:
    return {s for s in g.subjects_of_type(HUMAN_PERSON) if isinstance(s, Iri)}


def person_ages(g: Graph) -> dict[Iri, int]:
    """Each person's age at their latest derived reference instant."""
    best: dict[Iri, tuple] = {}
    for t in g.by_predicate(Iri(TIME_CALCULATING_AGE)):
        if not (isinstance(t.s, ListTerm) and len(t.s.items) == 2):
            continue
        person, ref = t.s.items
        when = temporal_value(ref)
        age = numeric_value(t.o)
        if not isinstance(person, Iri) or when is None or age is None:
            continue
        prev = best.get(person)
        if prev is None or when > prev[0]:
            best[person] = (when, int(age))
    return {person: age for person, (_, age) in best.items()}


def person_values(g: Graph, path: tuple[Iri, ...]) -> dict[Iri, list[float]]:
    """Follow `path` edges from each person and collect numeric leaf values."""
    out: dict[Iri, list[float]] = {}
    for person in persons(g):
        frontier: list[Term] = [person]
        for edge in path:
            frontier = [
                o
                for node in frontier
                if not isinstance(node, Literal)
                for o in g.objects(node, edge)
            ]
        values = [v for v in (numeric_value(n) for n in frontier) if v is not None]
        if values:
            out[person] = [float(v) for v in values]
    return out


def bracket_label(age: int, brackets: tuple[int, ...]) -> str | None:
    """Label for the bracket containing `age`; None when below the lowest."""
    edges = sorted(brackets)
    if not edges or age < edges[0]:
        return None
    for lo, hi in zip(edges, edges[1:]):
        if lo <= age < hi:
            return f"{lo}-{hi - 1}"
    return f"{edges[-1]}+"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ViewTable:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def _grouped_values(g: Graph, spec: ViewSpec) -> dict[str, list[float]]:
    values = person_values(g, spec.value_path)
    if not spec.group_by_age:
        flat = [v for vs in values.values() for v in vs]
        return {"all": flat} if flat else {}
    ages = person_ages(g)
    groups: dict[str, list[float]] = {}
    for person, vs in values.items():
        age = ages.get(person)
        if age is None:
            continue
        label = bracket_label(age, spec.brackets)
        if label is None:
            continue
        groups.setdefault(label, []).extend(vs)
    return groups


def _group_order(spec: ViewSpec, groups: dict[str, list[float]]) -> list[str]:
    if not spec.group_by_age:
        return sorted(groups)
    edges = sorted(spec.brackets)
    order = [f"{lo}-{hi - 1}" for lo, hi in zip(edges, edges[1:])]
    if edges:
        order.append(f"{edges[-1]}+")
    return [label for label in order if label in groups]


def evaluate_view(g: Graph, spec: ViewSpec) -> ViewTable:
    groups = _grouped_values(g, spec)
    if spec.metric == "histogram":
        rows = []
        for label in _group_order(spec, groups):
            counts, edges = np.histogram(groups[label], bins=np.array(spec.bins))
            for lo, hi, n in zip(edges, edges[1:], counts):
                rows.append((label, float(lo), float(hi), int(n)))
        return ViewTable(spec.name, ("group", "binLow", "binHigh", "count"), tuple(rows))

    rows = []
    for label in _group_order(spec, groups):
        vs = groups[label]
        if spec.metric == "count":
            stat = float(len(vs))
        elif spec.metric == "mean":
            stat = float(np.mean(vs))
        elif spec.metric == "min":
            stat = float(np.min(vs))
        else:
            stat = float(np.max(vs))
        rows.append((label, stat, len(vs)))
    return ViewTable(spec.name, ("group", spec.metric, "n"), tuple(rows))


def write_view_csv(table: ViewTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.columns)
        writer.writerows(table.rows)
