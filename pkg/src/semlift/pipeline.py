"""Per-patient record assembly over the registered source systems.

For each patient the pipeline runs every source's retrieval templates,
forward-chains the source's conversion rules over the retrieved triples,
unions the converted graphs, and finally applies the shared analysis rules.
Built records can be cached as N3 and unioned into a population graph; the
cache key includes a content hash of the shipped rule assets so stale
entries are never reused after a rule edit.
"""

from __future__ import annotations

import json
import re
import sqlite3
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import closing
from dataclasses import dataclass, field
from pathlib import Path
from string import Template

from .kb import VOCAB_PREFIXES, assets_fingerprint, load_rules
from .n3 import load_n3, serialize_n3
from .query import ConstructQuery, QueryParseError, parse_query, run_construct
from .reasoner import Derivation, Limits, forward_chain
from .schema import SchemaManifest, load_manifest, mint_instance_iri
from .terms import Graph, Iri


class PipelineError(Exception):
    pass


class ConfigError(PipelineError):
    pass


class PatientNotFound(PipelineError):
    def __init__(self, patient_id: str):
        self.patient_id = patient_id
        super().__init__(f"no source holds any data for patient {patient_id!r}")


class CacheMissing(PipelineError):
    def __init__(self, cache_dir: Path):
        super().__init__(
            f"EHR cache at {cache_dir} is empty or missing; run `semlift build --all` first"
        )


@dataclass(frozen=True)
class SourceSpec:
    name: str
    db: Path
    manifest_path: Path
    templates: tuple[Path, ...]
    conversion_rules: tuple[str, ...]
    patient_table: str | None = None
    patients_sql: str | None = None

    def load_manifest(self) -> SchemaManifest:
        return load_manifest(self.manifest_path)


@dataclass(frozen=True)
class PipelineConfig:
    sources: tuple[SourceSpec, ...]
    analysis_rules: tuple[str, ...]
    views: tuple[dict, ...]
    limits: Limits
    cache_dir: Path
    config_dir: Path


def _resolve(base: Path, p) -> Path:
    path = Path(p)
    return path if path.is_absolute() else (base / path).resolve()


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.resolve().parent

    raw_sources = data.get("sources")
    if not raw_sources:
        raise ConfigError(f"{path}: config needs a non-empty 'sources' list")
    sources = []
    for raw in raw_sources:
        for key in ("name", "db", "manifest", "templates"):
            if key not in raw:
                raise ConfigError(f"{path}: source entry lacks required key '{key}'")
        sources.append(
            SourceSpec(
                name=raw["name"],
                db=_resolve(base, raw["db"]),
                manifest_path=_resolve(base, raw["manifest"]),
                templates=tuple(_resolve(base, t) for t in raw["templates"]),
                conversion_rules=tuple(raw.get("conversionRules", ())),
                patient_table=raw.get("patientTable"),
                patients_sql=raw.get("patientsSql"),
            )
        )
    if not any(s.patient_table for s in sources):
        raise ConfigError(f"{path}: at least one source must set 'patientTable'")

    raw_limits = data.get("limits", {})
    limits = Limits(
        max_iterations=int(raw_limits.get("maxIterations", Limits.max_iterations)),
        max_triples=int(raw_limits.get("maxTriples", Limits.max_triples)),
    )
    return PipelineConfig(
        sources=tuple(sources),
        analysis_rules=tuple(data.get("analysisRules", ())),
        views=tuple(data.get("views", ())),
        limits=limits,
        cache_dir=_resolve(base, data.get("cacheDir", "cache")),
        config_dir=base,
    )


@dataclass
class EhrRecord:
    patient_id: str
    patient_iri: Iri
    graph: Graph
    derivations: list[Derivation] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)


_PATIENT_ID_RE = re.compile(r"^[A-Za-z0-9_.~-]+$")


def substitute_patient(template_text: str, patient_id: str) -> str:
    # ids are interpolated into IRIs and literals; refuse anything that
    # could change the query's shape
    if not _PATIENT_ID_RE.match(patient_id):
        raise ConfigError(f"patient id {patient_id!r} contains unsafe characters")
    return Template(template_text).substitute(patientId=patient_id)


class Pipeline:
    def __init__(self, config: PipelineConfig, *, strict: bool = False):
        self.config = config
        self.strict = strict
        self._manifests = {s.name: s.load_manifest() for s in config.sources}
        self._templates = {
            s.name: [(t, t.read_text(encoding="utf-8")) for t in s.templates]
            for s in config.sources
        }
        self._conversion = {
            s.name: load_rules(s.conversion_rules) for s in config.sources
        }
        self._analysis = load_rules(config.analysis_rules)
        self._fingerprint = assets_fingerprint()

    # -- enumeration --------------------------------------------------------

    def patient_ids(self) -> list[str]:
        ids: list[str] = []
        seen: set[str] = set()
        for s in self.config.sources:
            if not s.patients_sql:
                continue
            with closing(sqlite3.connect(s.db)) as conn:
                for (value,) in conn.execute(s.patients_sql):
                    pid = str(value)
                    if pid not in seen:
                        seen.add(pid)
                        ids.append(pid)
        return ids

    def patient_iri(self, patient_id: str) -> Iri:
        for s in self.config.sources:
            if s.patient_table:
                return mint_instance_iri(self._manifests[s.name], s.patient_table, patient_id)
        raise ConfigError("no source declares a patientTable")

    # -- record assembly ----------------------------------------------------

    def _retrieve(self, spec: SourceSpec, patient_id: str,
                  diagnostics: list[dict]) -> Graph:
        manifest = self._manifests[spec.name]
        out = Graph()
        with closing(sqlite3.connect(spec.db)) as conn:
            for path, text in self._templates[spec.name]:
                query = _parse_template(substitute_patient(text, patient_id), path)
                out = out.union(run_construct(conn, query, manifest, diagnostics))
        return out

    def retrieve(self, source_name: str, patient_id: str) -> Graph:
        """The schema-level triples one source's templates yield for a patient."""
        for spec in self.config.sources:
            if spec.name == source_name:
                return self._retrieve(spec, patient_id, [])
        raise ConfigError(f"unknown source {source_name!r}")

    def build_patient(self, patient_id: str) -> EhrRecord:
        diagnostics: list[dict] = []
        timings = {"retrieve": 0.0, "convert": 0.0, "analyze": 0.0}
        derivations: list[Derivation] = []
        merged = Graph()
        any_data = False
        for spec in self.config.sources:
            t0 = time.perf_counter()
            retrieved = self._retrieve(spec, patient_id, diagnostics)
            timings["retrieve"] += time.perf_counter() - t0
            if len(retrieved) == 0:
                continue
            any_data = True
            t0 = time.perf_counter()
            converted, derivs = forward_chain(
                retrieved,
                self._conversion[spec.name],
                self.config.limits,
                strict=self.strict,
                diagnostics=diagnostics,
            )
            timings["convert"] += time.perf_counter() - t0
            derivations.extend(derivs)
            merged = merged.union(converted)
        if not any_data:
            raise PatientNotFound(patient_id)

        t0 = time.perf_counter()
        analyzed, derivs = forward_chain(
            merged,
            self._analysis,
            self.config.limits,
            strict=self.strict,
            diagnostics=diagnostics,
        )
        timings["analyze"] += time.perf_counter() - t0
        derivations.extend(derivs)
        return EhrRecord(
            patient_id=patient_id,
            patient_iri=self.patient_iri(patient_id),
            graph=analyzed.with_prefixes(VOCAB_PREFIXES),
            derivations=derivations,
            timings=timings,
            diagnostics=diagnostics,
        )

    # -- cache --------------------------------------------------------------

    @property
    def cache_path(self) -> Path:
        return self.config.cache_dir / self._fingerprint

    def cache_file(self, patient_id: str) -> Path:
        return self.cache_path / f"{patient_id}.n3"

    def save_record(self, record: EhrRecord) -> Path:
        self.cache_path.mkdir(parents=True, exist_ok=True)
        path = self.cache_file(record.patient_id)
        path.write_text(serialize_n3(record.graph), encoding="utf-8")
        return path

    def load_record_graph(self, patient_id: str) -> Graph:
        path = self.cache_file(patient_id)
        if not path.exists():
            raise CacheMissing(self.cache_path)
        return load_n3(path).graph

    def cached_patient_ids(self) -> list[str]:
        if not self.cache_path.is_dir():
            raise CacheMissing(self.cache_path)
        ids = [p.stem for p in self.cache_path.glob("*.n3")]
        if not ids:
            raise CacheMissing(self.cache_path)
        return sorted(ids, key=lambda s: (len(s), s))

    def build_all(self, patient_ids: list[str] | None = None, *,
                  workers: int = 1) -> list[EhrRecord]:
        ids = patient_ids if patient_ids is not None else self.patient_ids()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(self.build_patient, ids))
        else:
            records = [self.build_patient(pid) for pid in ids]
        for record in records:
            self.save_record(record)
        return records

    # -- population ---------------------------------------------------------

    def aggregate(self, patient_ids: list[str] | None = None) -> Graph:
        """Union the cached per-patient graphs into one population graph.
        Derived blank nodes carry content-hashed labels, so a plain
        label-preserving union cannot conflate records."""
        ids = patient_ids if patient_ids is not None else self.cached_patient_ids()
        out = Graph()
        for pid in ids:
            out = out.union(self.load_record_graph(pid))
        return out


def _parse_template(text: str, path: Path) -> ConstructQuery:
    try:
        query = parse_query(text)
    except QueryParseError as exc:
        raise QueryParseError(f"{path.name}: {exc}") from exc
    if not isinstance(query, ConstructQuery):
        raise ConfigError(f"{path.name}: retrieval templates must be CONSTRUCT queries")
    return query
