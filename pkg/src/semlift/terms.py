"""Core RDF data model: terms, triples, formulas, rules, and immutable graphs.

Everything downstream (schema ontologies, query results, rule derivations)
is expressed with these types.  Graphs are set-like and immutable after
construction so they can be shared freely between pipeline stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

# ---------------------------------------------------------------------------
# Namespaces
# ---------------------------------------------------------------------------

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
MATH_NS = "http://www.w3.org/2000/10/swap/math#"
LOG_NS = "http://www.w3.org/2000/10/swap/log#"
TIME_NS = "http://www.w3.org/2000/10/swap/time#"
EULER_NS = "http://eulersharp.sourceforge.net/2003/03swap/log-rules#"

RDF_TYPE = RDF_NS + "type"
RDF_PROPERTY = RDF_NS + "Property"
RDFS_CLASS = RDFS_NS + "Class"
RDFS_DOMAIN = RDFS_NS + "domain"
RDFS_RANGE = RDFS_NS + "range"
RDFS_LABEL = RDFS_NS + "label"

XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_LONG = XSD_NS + "long"
XSD_DOUBLE = XSD_NS + "double"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_DATE = XSD_NS + "date"
XSD_DATETIME = XSD_NS + "dateTime"
XSD_DURATION = XSD_NS + "duration"

CORE_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
}


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    """Abstract base for all RDF terms."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Iri(Term):
    value: str

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"


@dataclass(frozen=True, slots=True)
class Literal(Term):
    """A typed literal.  Equality is lexical form plus datatype IRI."""

    lexical: str
    datatype: str = XSD_STRING

    def __repr__(self) -> str:
        return f"Literal({self.lexical!r}, {self.datatype!r})"


@dataclass(frozen=True, slots=True)
class BlankNode(Term):
    label: str

    def __repr__(self) -> str:
        return f"BlankNode({self.label!r})"


@dataclass(frozen=True, slots=True)
class Variable(Term):
    """A query/rule variable.  Never appears in a ground graph."""

    name: str

    def __repr__(self) -> str:
        return f"Variable({self.name!r})"


@dataclass(frozen=True, slots=True)
class ListTerm(Term):
    """An RDF collection, kept as a first-class tuple rather than cons triples."""

    items: tuple[Term, ...]

    def __repr__(self) -> str:
        return f"ListTerm({self.items!r})"


@dataclass(frozen=True, slots=True)
class Triple:
    """A triple or triple pattern; patterns may contain variables."""

    s: Term
    p: Term
    o: Term

    def __post_init__(self) -> None:
        if isinstance(self.s, Literal):
            raise ValueError("triple subject must not be a literal")
        if not isinstance(self.p, (Iri, Variable)):
            raise ValueError("triple predicate must be an IRI or a variable")


@dataclass(frozen=True, slots=True)
class Formula:
    """An ordered conjunction of triple patterns (one side of a rule, or a BGP)."""

    patterns: tuple[Triple, ...]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for t in self.patterns:
            for part in (t.s, t.p, t.o):
                out |= vars_in_term(part)
        return out


@dataclass(frozen=True, slots=True)
class GraphTerm(Term):
    """A quoted formula used as a term, e.g. either side of a rule."""

    formula: Formula


@dataclass(frozen=True, slots=True)
class Rule:
    """A forward rule: when the antecedent matches, instantiate the consequent.

    Consequent blank nodes are templates (fresh node per firing); every
    consequent variable must be bound by the antecedent.
    """

    id: str
    antecedent: Formula
    consequent: Formula

    def __post_init__(self) -> None:
        unbound = self.consequent.variables() - self.antecedent.variables()
        if unbound:
            names = ", ".join(sorted(unbound))
            raise ValueError(
                f"rule {self.id}: consequent variable(s) not bound in antecedent: {names}"
            )


Bindings = dict[str, Term]


# ---------------------------------------------------------------------------
# Term utilities
# ---------------------------------------------------------------------------

def vars_in_term(t: Term) -> set[str]:
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, ListTerm):
        out: set[str] = set()
        for item in t.items:
            out |= vars_in_term(item)
        return out
    if isinstance(t, GraphTerm):
        return t.formula.variables()
    return set()


def is_ground(t: Term) -> bool:
    return not vars_in_term(t)


def substitute_term(t: Term, b: Bindings) -> Term:
    """Apply a binding set to a term; unbound variables stay in place."""
    if isinstance(t, Variable):
        return b.get(t.name, t)
    if isinstance(t, ListTerm):
        return ListTerm(tuple(substitute_term(i, b) for i in t.items))
    if isinstance(t, GraphTerm):
        return GraphTerm(Formula(tuple(substitute_triple(p, b) for p in t.formula.patterns)))
    return t


def substitute_triple(t: Triple, b: Bindings) -> Triple:
    return Triple(substitute_term(t.s, b), substitute_term(t.p, b), substitute_term(t.o, b))


def _walk_bindings(t: Term, b: Bindings) -> Term:
    while isinstance(t, Variable) and t.name in b:
        t = b[t.name]
    return t


def unify_terms(a: Term, b_term: Term, b: Bindings) -> Bindings | None:
    """Unify two terms under a binding set; returns the extended bindings or
    None.  Variables may occur on either side; lists unify element-wise."""
    a = _walk_bindings(a, b)
    b_term = _walk_bindings(b_term, b)
    if isinstance(a, Variable):
        if isinstance(b_term, Variable) and b_term.name == a.name:
            return b
        if a.name in vars_in_term(b_term):
            return None  # occurs check
        out = dict(b)
        out[a.name] = b_term
        return out
    if isinstance(b_term, Variable):
        if b_term.name in vars_in_term(a):
            return None
        out = dict(b)
        out[b_term.name] = a
        return out
    if isinstance(a, ListTerm) and isinstance(b_term, ListTerm):
        if len(a.items) != len(b_term.items):
            return None
        current: Bindings | None = b
        for x, y in zip(a.items, b_term.items):
            current = unify_terms(x, y, current)
            if current is None:
                return None
        return current
    return b if a == b_term else None


_KIND_ORDER = {Iri: 0, Literal: 1, BlankNode: 2, ListTerm: 3, GraphTerm: 4, Variable: 5}


def term_key(t: Term):
    """Total deterministic order over terms: kind first, then components."""
    kind = _KIND_ORDER[type(t)]
    if isinstance(t, Iri):
        return (kind, t.value)
    if isinstance(t, Literal):
        return (kind, t.datatype, t.lexical)
    if isinstance(t, BlankNode):
        return (kind, t.label)
    if isinstance(t, ListTerm):
        return (kind, tuple(term_key(i) for i in t.items))
    if isinstance(t, GraphTerm):
        return (kind, tuple(triple_key(p) for p in t.formula.patterns))
    return (kind, t.name)  # Variable


def triple_key(t: Triple):
    return (term_key(t.s), term_key(t.p), term_key(t.o))


def term_to_n3(t: Term) -> str:
    """Standalone canonical text form of a term (full IRIs, no prefixes).

    Used for traces and skolem hashing, so it must be deterministic.
    """
    if isinstance(t, Iri):
        return f"<{t.value}>"
    if isinstance(t, Literal):
        lex = (
            t.lexical.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        )
        if t.datatype == XSD_STRING:
            return f'"{lex}"'
        return f'"{lex}"^^<{t.datatype}>'
    if isinstance(t, BlankNode):
        return f"_:{t.label}"
    if isinstance(t, Variable):
        return f"?{t.name}"
    if isinstance(t, ListTerm):
        return "(" + " ".join(term_to_n3(i) for i in t.items) + ")"
    if isinstance(t, GraphTerm):
        inner = " ".join(
            f"{term_to_n3(p.s)} {term_to_n3(p.p)} {term_to_n3(p.o)}." for p in t.formula.patterns
        )
        return "{" + inner + "}"
    raise TypeError(f"not a term: {t!r}")


def triple_to_n3(t: Triple) -> str:
    return f"{term_to_n3(t.s)} {term_to_n3(t.p)} {term_to_n3(t.o)}."


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

class Graph:
    """An immutable set of ground triples plus a prefix map for serialization.

    Iteration order is deterministic (sorted by term order), duplicates
    collapse, and all update operations return new graphs.
    """

    __slots__ = ("_triples", "_prefixes", "_sorted", "_pred_index")

    def __init__(self, triples: Iterable[Triple] = (), prefixes: dict[str, str] | None = None):
        tset = frozenset(triples)
        for t in tset:
            if vars_in_term(t.s) or vars_in_term(t.p) or vars_in_term(t.o):
                raise ValueError(f"graph triple contains a variable: {triple_to_n3(t)}")
            if not isinstance(t.p, Iri):
                raise ValueError("graph triple predicate must be an IRI")
        self._triples: frozenset[Triple] = tset
        self._prefixes: dict[str, str] = dict(prefixes or {})
        self._sorted: tuple[Triple, ...] | None = None
        self._pred_index: dict[Iri, tuple[Triple, ...]] | None = None

    # -- collection protocol ------------------------------------------------

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __iter__(self) -> Iterator[Triple]:
        if self._sorted is None:
            self._sorted = tuple(sorted(self._triples, key=triple_key))
        return iter(self._sorted)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples)"

    # -- accessors ----------------------------------------------------------

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    def by_predicate(self, p: Iri) -> tuple[Triple, ...]:
        """All triples with the given predicate (indexed, built lazily)."""
        if self._pred_index is None:
            idx: dict[Iri, list[Triple]] = {}
            for t in self._triples:
                idx.setdefault(t.p, []).append(t)
            self._pred_index = {k: tuple(v) for k, v in idx.items()}
        return self._pred_index.get(p, ())

    def subjects_of_type(self, cls: Iri) -> list[Term]:
        subs = {t.s for t in self.by_predicate(Iri(RDF_TYPE)) if t.o == cls}
        return sorted(subs, key=term_key)

    def objects(self, s: Term, p: Iri) -> list[Term]:
        return sorted((t.o for t in self.by_predicate(p) if t.s == s), key=term_key)

    # -- functional updates -------------------------------------------------

    def add(self, *triples: Triple) -> "Graph":
        return Graph(self._triples | set(triples), self._prefixes)

    def union(self, *others: Union["Graph", Iterable[Triple]]) -> "Graph":
        """Set union keeping blank-node labels as they are.

        Callers merging graphs from unrelated documents should use
        merge_graphs, which renames blank nodes apart; union is for graphs
        whose blank labels are already known to be collision-free (for
        example deterministic skolem labels).
        """
        triples = set(self._triples)
        prefixes = dict(self._prefixes)
        for other in others:
            if isinstance(other, Graph):
                triples |= other._triples
                prefixes.update(other._prefixes)
            else:
                triples.update(other)
        return Graph(triples, prefixes)

    def with_prefixes(self, prefixes: dict[str, str]) -> "Graph":
        merged = dict(self._prefixes)
        merged.update(prefixes)
        return Graph(self._triples, merged)

    def blank_nodes(self) -> set[BlankNode]:
        out: set[BlankNode] = set()

        def walk(term: Term) -> None:
            if isinstance(term, BlankNode):
                out.add(term)
            elif isinstance(term, ListTerm):
                for i in term.items:
                    walk(i)

        for t in self._triples:
            walk(t.s)
            walk(t.o)
        return out


def _rename_blanks(t: Term, mapping: dict[str, str]) -> Term:
    if isinstance(t, BlankNode):
        return BlankNode(mapping[t.label])
    if isinstance(t, ListTerm):
        return ListTerm(tuple(_rename_blanks(i, mapping) for i in t.items))
    return t


def merge_graphs(graphs: Iterable[Graph]) -> Graph:
    """Standard RDF merge: blank nodes of each input are renamed apart.

    Ground triples shared between inputs collapse; equal blank labels in
    distinct inputs become distinct nodes.  Deterministic given input order.
    """
    triples: set[Triple] = set()
    prefixes: dict[str, str] = {}
    used: set[str] = set()
    for g in graphs:
        mapping: dict[str, str] = {}
        for bn in sorted(g.blank_nodes(), key=term_key):
            fresh = bn.label
            n = 0
            while fresh in used:
                fresh = f"{bn.label}_m{n}"
                n += 1
            mapping[bn.label] = fresh
            used.add(fresh)
        for t in g.triples:
            triples.add(Triple(_rename_blanks(t.s, mapping), t.p, _rename_blanks(t.o, mapping)))
        prefixes.update(g.prefixes)
    return Graph(triples, prefixes)
