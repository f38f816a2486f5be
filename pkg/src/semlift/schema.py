"""Relational schema manifests and the schema-derived ontology.

A manifest is a small JSON description of the tables the toolkit may read:
name, primary key, columns with SQL types, foreign keys, and optionally the
SELECT text of a backing view for virtual tables.  From it we generate a
one-to-one schema ontology (table -> class, column -> property) and mint
stable instance IRIs of the shape {base}{Table}/{encoded pk}#this.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote, unquote

from .terms import (
    Graph,
    Iri,
    RDF_PROPERTY,
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_DOMAIN,
    RDFS_RANGE,
    Triple,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DOUBLE,
    XSD_LONG,
    XSD_STRING,
)

# SQL type -> XSD datatype for literal-valued columns.
DATATYPE_MAP = {
    "INTEGER": XSD_LONG,
    "BIGINT": XSD_LONG,
    "REAL": XSD_DOUBLE,
    "TEXT": XSD_STRING,
    "DATE": XSD_DATE,
    "TIMESTAMP": XSD_DATETIME,
    "BOOLEAN": XSD_BOOLEAN,
}

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ManifestError(ValueError):
    """Invalid manifest; `code` is a stable machine-readable discriminator."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    sql_type: str
    foreign_key: str | None = None  # target table name
    nullable: bool = True
    property_name: str | None = None  # override for the generated property

    @property
    def effective_property(self) -> str:
        return self.property_name or self.name


@dataclass(frozen=True)
class TableDef:
    name: str
    primary_key: str
    columns: tuple[ColumnDef, ...]
    backing_view: str | None = None
    class_name: str | None = None  # override for the generated class
    base_iri: str | None = None  # override for shared registries

    @property
    def effective_class(self) -> str:
        if self.class_name:
            return self.class_name
        return self.name[:1].upper() + self.name[1:]

    def column(self, name: str) -> ColumnDef:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class SchemaManifest:
    base_iri: str
    tables: tuple[TableDef, ...]

    def table(self, name: str) -> TableDef:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def table_base(self, t: TableDef) -> str:
        return t.base_iri or self.base_iri


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------

def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ManifestError("missing-field", f"{where} lacks required key '{key}'")
    return obj[key]


def _check_identifier(name: str, where: str) -> str:
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise ManifestError("bad-identifier", f"{where}: {name!r} is not a plain SQL identifier")
    return name


def _check_base(iri, where: str) -> str:
    if not isinstance(iri, str) or not re.match(r"^[A-Za-z][A-Za-z0-9+.-]*://", iri):
        raise ManifestError("bad-base-iri", f"{where}: base IRI must be absolute, got {iri!r}")
    if not iri.endswith("/"):
        raise ManifestError("bad-base-iri", f"{where}: base IRI must end with '/', got {iri!r}")
    return iri


def manifest_from_dict(data: dict) -> SchemaManifest:
    base = _check_base(_require(data, "baseIri", "manifest"), "manifest")
    raw_tables = _require(data, "tables", "manifest")
    if not isinstance(raw_tables, list) or not raw_tables:
        raise ManifestError("missing-field", "manifest needs a non-empty 'tables' list")

    tables: list[TableDef] = []
    for raw in raw_tables:
        name = _check_identifier(_require(raw, "name", "table"), "table name")
        pk = _require(raw, "primaryKey", f"table {name}")
        if isinstance(pk, list):
            raise ManifestError(
                "composite-pk", f"table {name}: composite primary keys are not supported"
            )
        _check_identifier(pk, f"table {name} primaryKey")
        cols: list[ColumnDef] = []
        raw_cols = _require(raw, "columns", f"table {name}")
        if not isinstance(raw_cols, list) or not raw_cols:
            raise ManifestError("missing-field", f"table {name} needs a non-empty 'columns' list")
        for rc in raw_cols:
            cname = _check_identifier(_require(rc, "name", f"column of {name}"), "column name")
            sql_type = _require(rc, "sqlType", f"column {name}.{cname}")
            if sql_type not in DATATYPE_MAP:
                raise ManifestError(
                    "unknown-sqltype", f"column {name}.{cname}: unmapped SQL type {sql_type!r}"
                )
            cols.append(
                ColumnDef(
                    name=cname,
                    sql_type=sql_type,
                    foreign_key=rc.get("foreignKey"),
                    nullable=bool(rc.get("nullable", True)),
                    property_name=rc.get("propertyName"),
                )
            )
        if len({c.name for c in cols}) != len(cols):
            raise ManifestError("duplicate-column", f"table {name} repeats a column name")
        table_base = raw.get("baseIri")
        if table_base is not None:
            _check_base(table_base, f"table {name}")
        tables.append(
            TableDef(
                name=name,
                primary_key=pk,
                columns=tuple(cols),
                backing_view=raw.get("backingView"),
                class_name=raw.get("className"),
                base_iri=table_base,
            )
        )

    if len({t.name for t in tables}) != len(tables):
        raise ManifestError("duplicate-table", "manifest repeats a table name")

    by_name = {t.name: t for t in tables}
    for t in tables:
        if t.primary_key not in {c.name for c in t.columns}:
            raise ManifestError(
                "missing-field", f"table {t.name}: primary key {t.primary_key!r} is not a column"
            )
        for c in t.columns:
            if c.foreign_key is None:
                continue
            target = by_name.get(c.foreign_key)
            if target is None:
                raise ManifestError(
                    "dangling-fk",
                    f"column {t.name}.{c.name} references unknown table {c.foreign_key!r}",
                )
            target_pk_type = target.column(target.primary_key).sql_type
            if c.sql_type != target_pk_type:
                raise ManifestError(
                    "fk-type-mismatch",
                    f"column {t.name}.{c.name} ({c.sql_type}) does not match "
                    f"{target.name}.{target.primary_key} ({target_pk_type})",
                )
    return SchemaManifest(base_iri=base, tables=tuple(tables))


def load_manifest(path: str | Path) -> SchemaManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError("bad-json", f"{path}: {exc}") from exc
    return manifest_from_dict(data)


# ---------------------------------------------------------------------------
# IRI minting
# ---------------------------------------------------------------------------

def class_iri(m: SchemaManifest, t: TableDef) -> Iri:
    return Iri(f"{m.table_base(t)}{t.name}#{t.effective_class}")

def property_iri(m: SchemaManifest, t: TableDef, c: ColumnDef) -> Iri:
    return Iri(f"{m.table_base(t)}{t.name}#{c.effective_property}")


def mint_instance_iri(m: SchemaManifest, table: str, pk_value) -> Iri:
    """Stable instance IRI {base}{Table}/{percent-encoded pk}#this."""
    t = m.table(table)
    encoded = quote(str(pk_value), safe="")
    return Iri(f"{m.table_base(t)}{t.name}/{encoded}#this")


def unmint_instance_iri(m: SchemaManifest, iri: Iri) -> tuple[TableDef, str] | None:
    """Reverse the minting scheme; None when the IRI is not one of ours."""
    for t in m.tables:
        prefix = f"{m.table_base(t)}{t.name}/"
        if iri.value.startswith(prefix) and iri.value.endswith("#this"):
            encoded = iri.value[len(prefix):-len("#this")]
            if "/" in encoded or "#" in encoded:
                continue
            return t, unquote(encoded)
    return None


def map_column_datatype(sql_type: str) -> str:
    try:
        return DATATYPE_MAP[sql_type]
    except KeyError:
        raise ManifestError("unknown-sqltype", f"unmapped SQL type {sql_type!r}") from None


# ---------------------------------------------------------------------------
# Ontology generation
# ---------------------------------------------------------------------------

def generate_ddo(m: SchemaManifest) -> Graph:
    """The schema-derived ontology: one class per table, one property per
    column with rdfs:domain/rdfs:range; FK columns become object properties
    pointing at the target table's class.

    Deterministic: equal manifests serialize to identical bytes.
    """
    triples: list[Triple] = []
    prefixes: dict[str, str] = {}
    rdf_type = Iri(RDF_TYPE)
    for t in m.tables:
        cls = class_iri(m, t)
        prefixes[t.name.lower()] = f"{m.table_base(t)}{t.name}#"
        triples.append(Triple(cls, rdf_type, Iri(RDFS_CLASS)))
        for c in t.columns:
            prop = property_iri(m, t, c)
            if c.foreign_key is not None:
                target = m.table(c.foreign_key)
                rng: Iri = class_iri(m, target)
            else:
                rng = Iri(map_column_datatype(c.sql_type))
            triples.append(Triple(prop, rdf_type, Iri(RDF_PROPERTY)))
            triples.append(Triple(prop, Iri(RDFS_DOMAIN), cls))
            triples.append(Triple(prop, Iri(RDFS_RANGE), rng))
    from .terms import CORE_PREFIXES

    return Graph(triples, {**CORE_PREFIXES, **prefixes})


@dataclass(frozen=True)
class PropertyInfo:
    """What the ontology says about one generated property."""

    table: str
    column: str
    domain: Iri
    range_iri: Iri
    target_table: str | None  # set for FK columns


def property_index(m: SchemaManifest) -> dict[str, PropertyInfo]:
    """Property IRI -> (table, column, domain, range) for query compilation."""
    out: dict[str, PropertyInfo] = {}
    for t in m.tables:
        for c in t.columns:
            if c.foreign_key is not None:
                rng: Iri = class_iri(m, m.table(c.foreign_key))
                target = c.foreign_key
            else:
                rng = Iri(map_column_datatype(c.sql_type))
                target = None
            out[property_iri(m, t, c).value] = PropertyInfo(
                table=t.name,
                column=c.name,
                domain=class_iri(m, t),
                range_iri=rng,
                target_table=target,
            )
    return out


def class_table_index(m: SchemaManifest) -> dict[str, TableDef]:
    return {class_iri(m, t).value: t for t in m.tables}
