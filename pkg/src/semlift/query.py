"""CONSTRUCT queries over a relational database.

The supported query language is deliberately small: PREFIX declarations,
one CONSTRUCT template, one WHERE basic graph pattern.  Predicates are
constant IRIs from the generated schema ontology, so every pattern maps
onto a table or a foreign key and the whole BGP compiles to a single
SELECT.  Anything outside that subset (OPTIONAL, FILTER, UNION, paths,
variable predicates, blank nodes, bare numeric literals) is rejected up
front with a targeted error rather than silently mis-evaluated.

`naive_match` evaluates the same query directly against a dumped RDF graph;
compiled execution and naive matching must agree triple-for-triple, which
is what the equivalence tests exercise.
"""

from __future__ import annotations

import re
import sqlite3
from dataclasses import dataclass
from typing import Iterable

from .builtins import BuiltinTable
from .schema import (
    SchemaManifest,
    TableDef,
    map_column_datatype,
    mint_instance_iri,
    property_index,
    property_iri,
    unmint_instance_iri,
)
from .terms import (
    Bindings,
    Formula,
    Graph,
    Iri,
    Literal,
    RDF_TYPE,
    Triple,
    Variable,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DOUBLE,
    XSD_LONG,
    XSD_STRING,
    substitute_triple,
)
from .values import lexical_for_db_value

_EMPTY_BUILTINS = BuiltinTable()


class QueryParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        if line:
            super().__init__(f"query:{line}:{col}: {message}")
        else:
            super().__init__(message)


class UnsupportedQueryFeature(QueryParseError):
    pass


class QueryCompileError(ValueError):
    """BGP cannot be mapped onto the schema; `code` is machine-checkable."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class ConstructQuery:
    prefixes: dict[str, str]
    template: tuple[Triple, ...]
    where: tuple[Triple, ...]


@dataclass(frozen=True)
class SelectQuery:
    """Debugging aid: same BGP machinery, bindings instead of triples."""

    prefixes: dict[str, str]
    variables: tuple[str, ...]
    where: tuple[Triple, ...]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_KEYWORDS = {"PREFIX", "CONSTRUCT", "WHERE", "BASE", "SELECT"}
_REJECTED_KEYWORDS = {
    "ASK", "DESCRIBE", "INSERT", "DELETE", "OPTIONAL", "FILTER",
    "UNION", "GRAPH", "SERVICE", "BIND", "VALUES", "MINUS", "EXISTS",
    "LIMIT", "OFFSET", "ORDER", "GROUP", "HAVING", "DISTINCT", "REDUCED",
}
_NAME = r"[A-Za-z_][A-Za-z0-9_-]*"
_QNAME_RE = re.compile(f"(?:{_NAME})?:(?:{_NAME})?")
_WORD_RE = re.compile(r"[A-Za-z]+")
_STRING_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class _Token:
    kind: str  # iri qname var string dtmarker kw punct eof
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str, cls=QueryParseError):
        raise cls(msg, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c == "<":
            j = text.find(">", i)
            if j < 0:
                err("unterminated IRI")
            raw = text[i + 1 : j]
            tokens.append(_Token("iri", raw, line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    if j + 1 >= n or text[j + 1] not in _STRING_ESCAPES:
                        err("bad string escape")
                    out.append(_STRING_ESCAPES[text[j + 1]])
                    j += 2
                elif text[j] == "\n":
                    err("unterminated string")
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                err("unterminated string")
            tokens.append(_Token("string", "".join(out), line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c == "?" or c == "$":
            m = re.compile(_NAME).match(text, i + 1)
            if not m:
                err("bad variable name")
            tokens.append(_Token("var", m.group(0), line, start_col))
            col += m.end() - i
            i = m.end()
            continue
        if text.startswith("^^", i):
            tokens.append(_Token("dtmarker", "^^", line, start_col))
            i += 2
            col += 2
            continue
        if c in "/|^*+":
            err("property paths are not supported", UnsupportedQueryFeature)
        if c == "[" or c == "]" or text.startswith("_:", i):
            err("blank nodes are not supported", UnsupportedQueryFeature)
        if c == "(" or c == ")":
            err("collections are not supported", UnsupportedQueryFeature)
        if c.isdigit() or (c in "-." and i + 1 < n and text[i + 1].isdigit()):
            err(
                'bare numeric literals are not supported; write "72"^^xsd:long',
                UnsupportedQueryFeature,
            )
        if c in "{}.;,":
            tokens.append(_Token("punct", c, line, start_col))
            i += 1
            col += 1
            continue
        m = _QNAME_RE.match(text, i)
        if m and ":" in m.group(0):
            tokens.append(_Token("qname", m.group(0), line, start_col))
            col += m.end() - i
            i = m.end()
            continue
        m = _WORD_RE.match(text, i)
        if m:
            word = m.group(0)
            upper = word.upper()
            if upper in _REJECTED_KEYWORDS:
                err(f"{upper} is not supported", UnsupportedQueryFeature)
            if upper in _KEYWORDS or word == "a":
                tokens.append(_Token("kw", word if word == "a" else upper, line, start_col))
                col += m.end() - i
                i = m.end()
                continue
            err(f"unexpected token {word!r}")
        err(f"unexpected character {c!r}")
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _QueryParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, value: str | None = None) -> _Token:
        t = self.next()
        if t.kind != kind or (value is not None and t.value != value):
            want = value or kind
            raise QueryParseError(f"expected {want}, found {t.value or t.kind!r}", t.line, t.col)
        return t

    def parse(self) -> ConstructQuery | SelectQuery:
        while self.peek().kind == "kw" and self.peek().value == "PREFIX":
            self.next()
            ns = self.expect("qname")
            if not ns.value.endswith(":") or ns.value.count(":") != 1:
                raise QueryParseError("expected prefix name", ns.line, ns.col)
            iri = self.expect("iri")
            self.prefixes[ns.value[:-1]] = iri.value
        if self.peek().kind == "kw" and self.peek().value == "BASE":
            t = self.peek()
            raise UnsupportedQueryFeature("BASE is not supported; use absolute IRIs", t.line, t.col)
        if self.peek().kind == "kw" and self.peek().value == "SELECT":
            return self.parse_select()
        self.expect("kw", "CONSTRUCT")
        template = self.parse_group("CONSTRUCT template")
        self.expect("kw", "WHERE")
        where = self.parse_group("WHERE pattern")
        self.at_end()
        if not where:
            raise QueryParseError("empty WHERE pattern")
        if not template:
            raise QueryParseError("empty CONSTRUCT template")
        bound = self.bound_vars(where)
        for p in template:
            for term in (p.s, p.p, p.o):
                if isinstance(term, Variable) and term.name not in bound:
                    raise QueryParseError(
                        f"template variable ?{term.name} is not bound in WHERE"
                    )
        return ConstructQuery(dict(self.prefixes), tuple(template), tuple(where))

    def parse_select(self) -> SelectQuery:
        self.expect("kw", "SELECT")
        variables: list[str] = []
        while self.peek().kind == "var":
            variables.append(self.next().value)
        if not variables:
            t = self.peek()
            raise QueryParseError("SELECT needs an explicit variable list", t.line, t.col)
        self.expect("kw", "WHERE")
        where = self.parse_group("WHERE pattern")
        self.at_end()
        if not where:
            raise QueryParseError("empty WHERE pattern")
        bound = self.bound_vars(where)
        for v in variables:
            if v not in bound:
                raise QueryParseError(f"selected variable ?{v} is not bound in WHERE")
        return SelectQuery(dict(self.prefixes), tuple(variables), tuple(where))

    def at_end(self) -> None:
        t = self.peek()
        if t.kind != "eof":
            raise QueryParseError(f"trailing content {t.value!r}", t.line, t.col)

    @staticmethod
    def bound_vars(where: list[Triple]) -> set[str]:
        bound: set[str] = set()
        for p in where:
            for term in (p.s, p.p, p.o):
                if isinstance(term, Variable):
                    bound.add(term.name)
        return bound

    def parse_group(self, what: str) -> list[Triple]:
        self.expect("punct", "{")
        triples: list[Triple] = []
        while not (self.peek().kind == "punct" and self.peek().value == "}"):
            self.parse_subject_block(triples, what)
            if self.peek().kind == "punct" and self.peek().value == ".":
                self.next()
        self.next()
        return triples

    def parse_subject_block(self, acc: list[Triple], what: str) -> None:
        t = self.peek()
        subject = self.parse_term(what)
        if isinstance(subject, Literal):
            raise QueryParseError("literal subjects are not allowed", t.line, t.col)
        while True:
            t = self.peek()
            predicate = self.parse_term(what, predicate=True)
            if isinstance(predicate, Variable):
                raise UnsupportedQueryFeature(
                    "variable predicates are not supported", t.line, t.col
                )
            if not isinstance(predicate, Iri):
                raise QueryParseError("predicate must be an IRI", t.line, t.col)
            while True:
                obj = self.parse_term(what)
                acc.append(Triple(subject, predicate, obj))
                if self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    continue
                break
            if self.peek().kind == "punct" and self.peek().value == ";":
                self.next()
                # tolerate a trailing semicolon before '.' or '}'
                nxt = self.peek()
                if nxt.kind == "punct" and nxt.value in ".}":
                    break
                continue
            break

    def parse_term(self, what: str, predicate: bool = False):
        t = self.next()
        if t.kind == "iri":
            return Iri(t.value)
        if t.kind == "qname":
            return self.expand_qname(t)
        if t.kind == "var":
            return Variable(t.value)
        if t.kind == "kw" and t.value == "a":
            if not predicate:
                raise QueryParseError("'a' is only valid as a predicate", t.line, t.col)
            return Iri(RDF_TYPE)
        if t.kind == "string":
            if self.peek().kind == "dtmarker":
                self.next()
                dt = self.next()
                if dt.kind == "iri":
                    return Literal(t.value, dt.value)
                if dt.kind == "qname":
                    return Literal(t.value, self.expand_qname(dt).value)
                raise QueryParseError("expected datatype IRI", dt.line, dt.col)
            return Literal(t.value, XSD_STRING)
        raise QueryParseError(
            f"unexpected {t.value or t.kind!r} in {what}", t.line, t.col
        )

    def expand_qname(self, t: _Token) -> Iri:
        prefix, _, local = t.value.partition(":")
        if prefix not in self.prefixes:
            raise QueryParseError(f"undefined prefix {prefix!r}", t.line, t.col)
        return Iri(self.prefixes[prefix] + local)


def parse_query(text: str) -> ConstructQuery:
    return _QueryParser(text).parse()


def load_query(path) -> ConstructQuery:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_query(fh.read())


# ---------------------------------------------------------------------------
# Compilation to SQL
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    """How one SELECT column turns back into an RDF term."""

    var: str
    kind: str  # "subject" or "value"
    table: TableDef
    column: str | None
    datatype: str | None


@dataclass(frozen=True)
class SqlPlan:
    sql: str
    params: tuple
    projections: tuple[Projection, ...]
    query: ConstructQuery | SelectQuery


def _pk_param(table: TableDef, raw: str):
    """Convert a decoded instance key to the primary key's storage type."""
    col = table.column(table.primary_key)
    dt = map_column_datatype(col.sql_type)
    if dt == XSD_LONG:
        try:
            return int(raw)
        except ValueError:
            raise QueryCompileError(
                "pk-type", f"key {raw!r} does not fit integer column {table.name}.{col.name}"
            )
    return raw


def _literal_param(lit: Literal, expected: str, where: str):
    if lit.datatype != expected:
        raise QueryCompileError(
            "datatype-mismatch",
            f"{where} expects {expected}, got literal typed {lit.datatype}",
        )
    if expected == XSD_LONG:
        try:
            return int(lit.lexical)
        except ValueError:
            raise QueryCompileError("datatype-mismatch", f"{lit.lexical!r} is not an integer")
    if expected == XSD_DOUBLE:
        try:
            return float(lit.lexical)
        except ValueError:
            raise QueryCompileError("datatype-mismatch", f"{lit.lexical!r} is not a double")
    if expected == XSD_BOOLEAN:
        if lit.lexical not in ("true", "false"):
            raise QueryCompileError("datatype-mismatch", f"{lit.lexical!r} is not a boolean")
        return 1 if lit.lexical == "true" else 0
    if expected in (XSD_DATE, XSD_DATETIME, XSD_STRING):
        return lit.lexical
    raise QueryCompileError("datatype-mismatch", f"unhandled datatype {expected}")


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        self.add(a)
        self.add(b)
        self.parent[self.find(a)] = self.find(b)

    def components(self) -> int:
        return len({self.find(x) for x in self.parent})


def compile_to_sql(query: ConstructQuery | SelectQuery, manifest: SchemaManifest) -> SqlPlan:
    """Map the WHERE BGP onto one SELECT over the manifest's tables.

    Each subject (variable or instance IRI) becomes a table alias; foreign
    key patterns become equi-joins; repeated value variables become column
    equalities; nullable columns referenced by a pattern get IS NOT NULL
    guards so absent cells behave like absent triples.
    """
    props = property_index(manifest)

    subject_table: dict[str, TableDef] = {}  # subject key -> table
    subject_alias: dict[str, str] = {}
    alias_order: list[str] = []
    subject_const: dict[str, tuple[TableDef, str]] = {}  # key -> (table, pk raw)
    value_vars: dict[str, tuple[str, TableDef, str, str]] = {}  # var -> alias, table, col, dt
    conditions: list[str] = []
    params: list = []
    uf = _UnionFind()
    guards: set[tuple[str, str]] = set()

    def subject_key(term) -> str:
        if isinstance(term, Variable):
            return f"?{term.name}"
        return f"<{term.value}>"

    def claim_table(key: str, table: TableDef, why: str) -> None:
        prior = subject_table.get(key)
        if prior is None:
            subject_table[key] = table
        elif prior.name != table.name:
            raise QueryCompileError(
                "domain-conflict",
                f"{key} is used with both {prior.name} and {table.name} ({why})",
            )

    def alias_for(key: str) -> str:
        if key not in subject_alias:
            subject_alias[key] = f"t{len(subject_alias)}"
            alias_order.append(key)
            uf.add(subject_alias[key])
        return subject_alias[key]

    # pass 1: establish which table each subject ranges over
    for p in query.where:
        skey = subject_key(p.s)
        if isinstance(p.s, Iri):
            hit = unmint_instance_iri(manifest, p.s)
            if hit is None:
                raise QueryCompileError(
                    "not-instance-iri", f"{p.s.value} is not an instance IRI of this schema"
                )
            subject_const[skey] = (hit[0], hit[1])
            claim_table(skey, hit[0], "instance IRI")
        if p.p.value == RDF_TYPE:
            # the dump carries no typing triples, so allowing rdf:type here
            # would break SQL/naive agreement; tables come from domains
            raise QueryCompileError(
                "type-pattern",
                "rdf:type patterns are not compilable; the subject's table follows "
                "from its property domains (typing belongs in the CONSTRUCT template)",
            )
        info = props.get(p.p.value)
        if info is None:
            raise QueryCompileError(
                "unknown-property", f"{p.p.value} is not a schema property"
            )
        domain_table = manifest.table(info.table)
        if info.column == domain_table.primary_key and info.target_table is None:
            raise QueryCompileError(
                "pk-property",
                f"{p.p.value} restates the primary key; row identity is the "
                "instance IRI itself",
            )
        claim_table(skey, domain_table, "property domain")
        if info.target_table is not None and isinstance(p.o, Variable):
            claim_table(
                subject_key(p.o), manifest.table(info.target_table), "foreign key range"
            )

    # pass 2: emit joins, constraints, and projections
    for p in query.where:
        skey = subject_key(p.s)
        alias = alias_for(skey)
        table = subject_table[skey]
        info = props[p.p.value]
        col = manifest.table(info.table).column(info.column)
        if info.target_table is not None:
            # object property: foreign key traversal
            if isinstance(p.o, Variable):
                okey = subject_key(p.o)
                if p.o.name in value_vars:
                    raise QueryCompileError(
                        "domain-conflict",
                        f"?{p.o.name} is used as both a resource and a literal value",
                    )
                oalias = alias_for(okey)
                target = subject_table[okey]
                conditions.append(
                    f'{alias}."{col.name}" = {oalias}."{target.primary_key}"'
                )
                uf.union(alias, oalias)
            elif isinstance(p.o, Iri):
                hit = unmint_instance_iri(manifest, p.o)
                if hit is None or hit[0].name != info.target_table:
                    raise QueryCompileError(
                        "not-instance-iri",
                        f"{p.o.value} is not a {info.target_table} instance IRI",
                    )
                conditions.append(f'{alias}."{col.name}" = ?')
                params.append(_pk_param(hit[0], hit[1]))
            else:
                raise QueryCompileError(
                    "datatype-mismatch",
                    f"{p.p.value} is an object property; literal objects are invalid",
                )
            if col.nullable:
                guards.add((alias, col.name))
            continue
        # datatype property
        dt = map_column_datatype(col.sql_type)
        if isinstance(p.o, Variable):
            okey = p.o.name
            if subject_key(p.o) in subject_table:
                raise QueryCompileError(
                    "domain-conflict",
                    f"?{okey} is used as both a resource and a literal value",
                )
            if okey in value_vars:
                palias, ptable, pcol, pdt = value_vars[okey]
                if pdt != dt:
                    raise QueryCompileError(
                        "datatype-mismatch",
                        f"?{okey} joins columns of different datatypes ({pdt} vs {dt})",
                    )
                conditions.append(f'{palias}."{pcol}" = {alias}."{col.name}"')
                uf.union(palias, alias)
            else:
                value_vars[okey] = (alias, table, col.name, dt)
        elif isinstance(p.o, Literal):
            conditions.append(f'{alias}."{col.name}" = ?')
            params.append(_literal_param(p.o, dt, f"{table.name}.{col.name}"))
        else:
            raise QueryCompileError(
                "datatype-mismatch",
                f"{p.p.value} is a datatype property; IRI objects are invalid",
            )
        if col.nullable:
            guards.add((alias, col.name))

    # constant subjects pin the primary key
    for key, (table, raw) in subject_const.items():
        alias = alias_for(key)
        conditions.append(f'{alias}."{table.primary_key}" = ?')
        params.append(_pk_param(table, raw))

    if len(subject_alias) > 1 and uf.components() > 1:
        raise QueryCompileError(
            "cross-product", "graph pattern is disconnected; joins would be a cross product"
        )

    projections: list[Projection] = []
    select_parts: list[str] = []
    for key in alias_order:
        if key.startswith("?"):
            table = subject_table[key]
            alias = subject_alias[key]
            projections.append(Projection(key[1:], "subject", table, None, None))
            select_parts.append(f'{alias}."{table.primary_key}" AS c{len(select_parts)}')
    for var, (alias, table, col, dt) in value_vars.items():
        projections.append(Projection(var, "value", table, col, dt))
        select_parts.append(f'{alias}."{col}" AS c{len(select_parts)}')
    if not select_parts:
        # all-constant pattern: existence check only
        select_parts.append("1 AS c0")

    from_parts = []
    for key in alias_order:
        table = subject_table[key]
        if table.backing_view:
            from_parts.append(f"({table.backing_view}) AS {subject_alias[key]}")
        else:
            from_parts.append(f'"{table.name}" AS {subject_alias[key]}')
    for alias, colname in sorted(guards):
        conditions.append(f'{alias}."{colname}" IS NOT NULL')

    sql = "SELECT DISTINCT " + ", ".join(select_parts) + " FROM " + ", ".join(from_parts)
    if conditions:
        sql += " WHERE " + " AND ".join(conditions)
    return SqlPlan(sql, tuple(params), tuple(projections), query)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _decode_row(
    plan: SqlPlan, row, manifest: SchemaManifest, diagnostics: list[dict] | None
) -> Bindings | None:
    b: Bindings = {}
    for i, proj in enumerate(plan.projections):
        value = row[i]
        if proj.kind == "subject":
            b[proj.var] = mint_instance_iri(manifest, proj.table.name, value)
            continue
        lexical = lexical_for_db_value(value, proj.datatype)
        if lexical is None:
            if diagnostics is not None:
                diagnostics.append(
                    {
                        "table": proj.table.name,
                        "column": proj.column,
                        "value": repr(value),
                        "reason": f"does not fit {proj.datatype}",
                    }
                )
            return None
        b[proj.var] = Literal(lexical, proj.datatype)
    return b


def execute_construct(
    conn: sqlite3.Connection,
    plan: SqlPlan,
    manifest: SchemaManifest,
    diagnostics: list[dict] | None = None,
) -> Graph:
    """Run the plan and instantiate the CONSTRUCT template per result row.

    Rows whose cell values do not fit their declared datatype are skipped
    and reported through `diagnostics`.
    """
    query = plan.query
    if not isinstance(query, ConstructQuery):
        raise TypeError("plan was compiled from a SELECT query")
    triples: set[Triple] = set()
    for row in conn.execute(plan.sql, plan.params):
        b = _decode_row(plan, row, manifest, diagnostics)
        if b is None:
            continue
        for t in query.template:
            triples.add(substitute_triple(t, b))
    return Graph(triples, dict(query.prefixes))


def execute_select(
    conn: sqlite3.Connection,
    plan: SqlPlan,
    manifest: SchemaManifest,
    diagnostics: list[dict] | None = None,
) -> list[Bindings]:
    query = plan.query
    if not isinstance(query, SelectQuery):
        raise TypeError("plan was compiled from a CONSTRUCT query")
    rows: list[Bindings] = []
    seen: set[tuple] = set()
    for row in conn.execute(plan.sql, plan.params):
        b = _decode_row(plan, row, manifest, diagnostics)
        if b is None:
            continue
        picked = {v: b[v] for v in query.variables}
        key = tuple(picked[v] for v in query.variables)
        if key not in seen:
            seen.add(key)
            rows.append(picked)
    return rows


def run_construct(
    conn: sqlite3.Connection,
    query: ConstructQuery,
    manifest: SchemaManifest,
    diagnostics: list[dict] | None = None,
) -> Graph:
    return execute_construct(conn, compile_to_sql(query, manifest), manifest, diagnostics)


# ---------------------------------------------------------------------------
# Whole-database dump and naive matching (the equivalence oracle)
# ---------------------------------------------------------------------------

def dump_rdb_to_rdf(
    conn: sqlite3.Connection,
    manifest: SchemaManifest,
    diagnostics: list[dict] | None = None,
) -> Graph:
    """Materialize every row as RDF: one triple per non-NULL data cell.

    The primary key is the row's identity (it lives in the instance IRI)
    and is not restated as a property, unless it doubles as a foreign key
    and therefore expresses a relationship.  Foreign keys become object
    triples to the target row's instance IRI; everything else becomes a
    typed literal.
    """
    triples: set[Triple] = set()
    prefixes: dict[str, str] = {}
    for table in manifest.tables:
        base = manifest.table_base(table)
        prefixes[table.name.lower()] = f"{base}{table.name}#"
        names = [c.name for c in table.columns]
        col_list = ", ".join(f'"{c}"' for c in names)
        if table.backing_view:
            relation = f"({table.backing_view})"
        else:
            relation = f'"{table.name}"'
        for row in conn.execute(f"SELECT {col_list} FROM {relation}"):
            values = dict(zip(names, row))
            pk_value = values[table.primary_key]
            subject = mint_instance_iri(manifest, table.name, pk_value)
            for col in table.columns:
                value = values[col.name]
                if value is None:
                    continue
                if col.name == table.primary_key and col.foreign_key is None:
                    continue
                pred = property_iri(manifest, table, col)
                if col.foreign_key is not None:
                    triples.add(
                        Triple(subject, pred, mint_instance_iri(manifest, col.foreign_key, value))
                    )
                    continue
                dt = map_column_datatype(col.sql_type)
                lexical = lexical_for_db_value(value, dt)
                if lexical is None:
                    if diagnostics is not None:
                        diagnostics.append(
                            {
                                "table": table.name,
                                "column": col.name,
                                "value": repr(value),
                                "reason": f"does not fit {dt}",
                            }
                        )
                    continue
                triples.add(Triple(subject, pred, Literal(lexical, dt)))
    return Graph(triples, prefixes)


def naive_match(query: ConstructQuery, graph: Graph) -> Graph:
    """Evaluate the WHERE pattern directly against a graph and instantiate
    the template.  Slow but obviously correct; the compiled path must agree."""
    triples: set[Triple] = set()
    for b in _match_bgp(query.where, graph):
        for t in query.template:
            triples.add(substitute_triple(t, b))
    return Graph(triples, dict(query.prefixes))


def _match_bgp(patterns: Iterable[Triple], graph: Graph) -> list[Bindings]:
    from .reasoner import match_formula

    return match_formula(Formula(tuple(patterns)), graph, table=_EMPTY_BUILTINS)
