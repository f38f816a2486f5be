"""Forward-chaining rule engine with deterministic skolemization.

Evaluation is fixpoint-based: antecedents match against the growing triple
store, firings are deduplicated by (rule, bindings), and consequent blank
nodes become skolem nodes whose labels hash the rule id, the template
label, and the canonical bindings.  That makes the fixpoint independent of
rule order and input order, and makes re-reasoning a no-op.

Builtins evaluate in written order with deferral: an under-bound builtin
slides to the earliest position where its arguments are ground.  A builtin
that can never be grounded is rejected when the rule set is validated, not
at match time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .builtins import Builtin, BuiltinTable, BuiltinTypeError, DEFAULT_BUILTINS
from .terms import (
    Bindings,
    BlankNode,
    Formula,
    Graph,
    GraphTerm,
    Iri,
    ListTerm,
    Rule,
    Term,
    Triple,
    Variable,
    substitute_term,
    term_to_n3,
    triple_to_n3,
    unify_terms,
    vars_in_term,
)


class RuleValidationError(ValueError):
    """A rule cannot be evaluated (typically an ungroundable builtin)."""


class LimitExceeded(RuntimeError):
    """The fixpoint hit the iteration or triple ceiling."""


class StrictBuiltinError(ValueError):
    """A builtin type error escalated under strict mode."""


@dataclass(frozen=True)
class Limits:
    max_iterations: int = 10_000
    max_triples: int = 10_000_000


@dataclass(frozen=True)
class Derivation:
    """One rule firing: enough to replay the produced triples exactly."""

    rule_id: str
    bindings: tuple[tuple[str, Term], ...]  # sorted by variable name
    produced: tuple[Triple, ...]
    iteration: int

    def bindings_dict(self) -> Bindings:
        return dict(self.bindings)


ErrorSink = Callable[[str, Triple, BuiltinTypeError], None]


# ---------------------------------------------------------------------------
# Pattern ordering (builtin deferral)
# ---------------------------------------------------------------------------

def _pattern_vars(p: Triple) -> set[str]:
    return vars_in_term(p.s) | vars_in_term(p.p) | vars_in_term(p.o)


def _builtin_for(p: Triple, table: BuiltinTable) -> Builtin | None:
    if isinstance(p.p, Iri):
        return table.get(p.p.value)
    return None


def order_patterns(patterns: Iterable[Triple], table: BuiltinTable) -> list[Triple]:
    """Written order, with each builtin moved to the first position where its
    required arguments are bound.  Raises RuleValidationError when no
    ordering grounds a builtin."""
    ordered: list[Triple] = []
    deferred: list[Triple] = []
    bound: set[str] = set()

    def absorb(p: Triple) -> None:
        ordered.append(p)
        bound.update(_pattern_vars(p))
        # newly bound variables may release deferred builtins, in deferral order
        progress = True
        while progress:
            progress = False
            for d in list(deferred):
                b = _builtin_for(d, table)
                assert b is not None
                if b.ready(d.s, d.o, bound):
                    deferred.remove(d)
                    ordered.append(d)
                    bound.update(_pattern_vars(d))
                    progress = True

    for p in patterns:
        b = _builtin_for(p, table)
        if b is None:
            absorb(p)
        elif b.ready(p.s, p.o, bound):
            absorb(p)
        else:
            deferred.append(p)
    if deferred:
        shown = ", ".join(triple_to_n3(d) for d in deferred)
        raise RuleValidationError(f"unbound builtin arguments: {shown}")
    return ordered


def validate_rules(rules: Iterable[Rule], table: BuiltinTable = DEFAULT_BUILTINS) -> None:
    """Load-time validation: every builtin in every antecedent must be
    groundable by some evaluation order."""
    for rule in rules:
        try:
            order_patterns(rule.antecedent.patterns, table)
        except RuleValidationError as exc:
            raise RuleValidationError(f"rule {rule.id}: {exc}") from exc


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

class _Store:
    """Mutable triple set with predicate and subject+predicate indexes, used
    inside the fixpoint.  The sp index is what keeps joins linear: once a
    subject variable is bound, the next pattern is a hash lookup instead of
    a scan over every triple sharing the predicate."""

    __slots__ = ("all", "by_pred", "by_sp")

    def __init__(self, triples: Iterable[Triple] = ()):
        self.all: set[Triple] = set()
        self.by_pred: dict[str, set[Triple]] = {}
        self.by_sp: dict[tuple[Term, str], set[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, t: Triple) -> bool:
        if t in self.all:
            return False
        self.all.add(t)
        self.by_pred.setdefault(t.p.value, set()).add(t)
        self.by_sp.setdefault((t.s, t.p.value), set()).add(t)
        return True

    def candidates(self, p: Triple, b: Bindings) -> Iterable[Triple]:
        pred = substitute_term(p.p, b)
        if not isinstance(pred, Iri):
            return self.all
        subj = substitute_term(p.s, b)
        if not vars_in_term(subj):
            # ground subjects unify only with themselves
            return self.by_sp.get((subj, pred.value), ())
        return self.by_pred.get(pred.value, ())


def _match(
    ordered: list[Triple],
    source_for: Callable[[int], _Store],
    table: BuiltinTable,
    seed: Bindings,
    on_error: ErrorSink | None,
    rule_id: str,
) -> list[Bindings]:
    results: list[Bindings] = []

    def step(i: int, b: Bindings) -> None:
        if i == len(ordered):
            results.append(b)
            return
        p = ordered[i]
        builtin = _builtin_for(p, table)
        if builtin is not None:
            s = substitute_term(p.s, b)
            o = substitute_term(p.o, b)
            try:
                extensions = builtin.solve(s, o)
            except BuiltinTypeError as exc:
                if on_error is None:
                    raise
                on_error(rule_id, p, exc)
                return
            for ext in extensions:
                merged = dict(b)
                merged.update(ext)
                step(i + 1, merged)
            return
        for t in source_for(i).candidates(p, b):
            b1 = unify_terms(p.s, t.s, b)
            if b1 is None:
                continue
            b2 = unify_terms(p.p, t.p, b1)
            if b2 is None:
                continue
            b3 = unify_terms(p.o, t.o, b2)
            if b3 is not None:
                step(i + 1, b3)

    step(0, dict(seed))
    return results


def match_formula(
    f: Formula,
    g: Graph,
    seed: Bindings | None = None,
    table: BuiltinTable = DEFAULT_BUILTINS,
) -> list[Bindings]:
    """All binding sets under which the formula holds in the graph.

    Builtin type errors raise; callers wanting report-and-continue behavior
    go through forward_chain.
    """
    ordered = order_patterns(f.patterns, table)
    store = _Store(g.triples)
    return _match(ordered, lambda i: store, table, seed or {}, None, "<formula>")


# ---------------------------------------------------------------------------
# Skolemization and instantiation
# ---------------------------------------------------------------------------

def canonical_bindings(b: Bindings) -> str:
    return "|".join(f"{k}={term_to_n3(v)}" for k, v in sorted(b.items()))


def skolem_blank(rule_id: str, local_label: str, b: Bindings) -> BlankNode:
    """Deterministic per-firing blank node; equal inputs give equal labels."""
    digest = hashlib.sha256(
        f"{rule_id}\x00{local_label}\x00{canonical_bindings(b)}".encode()
    ).hexdigest()[:16]
    return BlankNode(f"sk_{digest}")


def instantiate_consequent(rule: Rule, b: Bindings) -> tuple[Triple, ...]:
    """Ground the consequent under bindings, with skolemized blank templates."""

    def conv(t: Term) -> Term:
        if isinstance(t, Variable):
            if t.name not in b:
                raise RuleValidationError(
                    f"rule {rule.id}: consequent variable ?{t.name} unbound at firing"
                )
            return b[t.name]
        if isinstance(t, BlankNode):
            return skolem_blank(rule.id, t.label, b)
        if isinstance(t, ListTerm):
            return ListTerm(tuple(conv(i) for i in t.items))
        if isinstance(t, GraphTerm):
            raise RuleValidationError(f"rule {rule.id}: nested formulas in consequents")
        return t

    return tuple(Triple(conv(p.s), conv(p.p), conv(p.o)) for p in rule.consequent.patterns)


# ---------------------------------------------------------------------------
# Fixpoint
# ---------------------------------------------------------------------------

def forward_chain(
    g: Graph,
    rules: Iterable[Rule],
    limits: Limits = Limits(),
    *,
    table: BuiltinTable = DEFAULT_BUILTINS,
    strict: bool = False,
    strategy: str = "seminaive",
    diagnostics: list[dict] | None = None,
) -> tuple[Graph, list[Derivation]]:
    """Run rules to fixpoint over the graph.

    Returns the output graph (a superset of the input) and the derivation
    list.  Builtin type errors discard the offending candidate and are
    appended to `diagnostics`; under strict=True they raise instead.
    semi-naive and naive strategies produce identical fixpoints; semi-naive
    only re-examines bindings that touch the previous iteration's delta.
    """
    rule_list = list(rules)
    validate_rules(rule_list, table)
    if strategy not in ("seminaive", "naive"):
        raise ValueError(f"unknown strategy {strategy!r}")

    def on_error(rule_id: str, p: Triple, exc: BuiltinTypeError) -> None:
        if strict:
            raise StrictBuiltinError(f"rule {rule_id}: {triple_to_n3(p)}: {exc}") from exc
        if diagnostics is not None:
            diagnostics.append(
                {"rule": rule_id, "pattern": triple_to_n3(p), "error": str(exc)}
            )

    ordered_cache = {r.id: order_patterns(r.antecedent.patterns, table) for r in rule_list}
    store = _Store(g.triples)
    fired: set[tuple[str, str]] = set()
    derivations: list[Derivation] = []
    delta = _Store(g.triples)
    iteration = 0

    while delta.all:
        if iteration >= limits.max_iterations:
            raise LimitExceeded(f"no fixpoint after {limits.max_iterations} iterations")
        next_delta = _Store()
        for rule in rule_list:
            ordered = ordered_cache[rule.id]
            data_positions = [
                i for i, p in enumerate(ordered) if _builtin_for(p, table) is None
            ]
            matches: list[Bindings] = []
            if iteration == 0 or strategy == "naive":
                matches = _match(ordered, lambda i: store, table, {}, on_error, rule.id)
            elif data_positions:
                # semi-naive: at least one data pattern must match the delta
                for j in data_positions:
                    pj = ordered[j]
                    if isinstance(pj.p, Iri) and pj.p.value not in delta.by_pred:
                        continue
                    matches.extend(
                        _match(
                            ordered,
                            lambda i, j=j: delta if i == j else store,
                            table,
                            {},
                            on_error,
                            rule.id,
                        )
                    )
            # a builtin-only antecedent cannot produce new matches after
            # iteration 0, so seminaive skips it entirely
            for b in matches:
                key = (rule.id, canonical_bindings(b))
                if key in fired:
                    continue
                fired.add(key)
                produced = instantiate_consequent(rule, b)
                derivations.append(
                    Derivation(rule.id, tuple(sorted(b.items())), produced, iteration)
                )
                for t in produced:
                    if store.add(t):
                        next_delta.add(t)
                if len(store.all) > limits.max_triples:
                    raise LimitExceeded(
                        f"triple store exceeded {limits.max_triples} triples"
                    )
        delta = next_delta
        iteration += 1

    return Graph(store.all, g.prefixes), derivations


def replay_derivations(
    rules: Iterable[Rule], derivations: Iterable[Derivation]
) -> set[Triple]:
    """Re-instantiate each recorded firing; the union must reproduce the
    derived portion of the original output (trace soundness)."""
    by_id = {r.id: r for r in rules}
    out: set[Triple] = set()
    for d in derivations:
        rule = by_id[d.rule_id]
        out.update(instantiate_consequent(rule, d.bindings_dict()))
    return out


# ---------------------------------------------------------------------------
# Trace export
# ---------------------------------------------------------------------------

def write_trace(derivations: Iterable[Derivation], path: str | Path) -> None:
    """Line-delimited JSON, one firing per line, terms in canonical text."""
    with open(path, "w", encoding="utf-8") as fh:
        for d in derivations:
            fh.write(
                json.dumps(
                    {
                        "rule": d.rule_id,
                        "iteration": d.iteration,
                        "bindings": {k: term_to_n3(v) for k, v in d.bindings},
                        "produced": [triple_to_n3(t) for t in d.produced],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
