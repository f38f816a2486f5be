"""Builtin predicates evaluated by the rule engine.

Builtins never assert triples: they filter a binding set or extend it with
computed values.  Each entry declares when it is ready (which sides must be
ground before evaluation) so the matcher can defer under-bound builtins,
and evaluation raises BuiltinTypeError on ill-typed ground arguments, which
the engine either reports-and-discards or escalates in strict mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .terms import (
    Bindings,
    EULER_NS,
    Iri,
    ListTerm,
    Literal,
    LOG_NS,
    MATH_NS,
    Term,
    TIME_NS,
    XSD_STRING,
    term_to_n3,
    unify_terms,
    vars_in_term,
)
from .values import (
    datetime_literal,
    double_literal,
    duration_literal,
    duration_term_value,
    number_literal,
    numeric_value,
    temporal_value,
)

MATH_DIFFERENCE = MATH_NS + "difference"
MATH_QUOTIENT = MATH_NS + "quotient"
MATH_PRODUCT = MATH_NS + "product"
MATH_EXPONENTIATION = MATH_NS + "exponentiation"
MATH_NOT_GREATER_THAN = MATH_NS + "notGreaterThan"
MATH_NOT_LESS_THAN = MATH_NS + "notLessThan"
EULER_MAX = EULER_NS + "max"
LOG_DTLIT = LOG_NS + "dtlit"
TIME_YEARS_BETWEEN = TIME_NS + "yearsBetween"

# Derived (not builtin) predicate produced by the age library rule and
# consumed by downstream analysis rules via list-subject matching.
TIME_CALCULATING_AGE = TIME_NS + "calculatingAge"


class BuiltinTypeError(ValueError):
    """Ground arguments of a builtin have unusable types or values."""


SolveFn = Callable[[Term, Term], list[Bindings]]
ReadyFn = Callable[[Term, Term, set[str]], bool]


@dataclass(frozen=True)
class Builtin:
    iri: str
    solve: SolveFn   # called with both sides substituted; returns extensions
    ready: ReadyFn   # static check: evaluable once these variables are bound


def _ground(t: Term, bound: set[str]) -> bool:
    return vars_in_term(t) <= bound

def _subject_ready(s: Term, o: Term, bound: set[str]) -> bool:
    return _ground(s, bound)

def _both_ready(s: Term, o: Term, bound: set[str]) -> bool:
    return _ground(s, bound) and _ground(o, bound)

def _either_ready(s: Term, o: Term, bound: set[str]) -> bool:
    return _ground(s, bound) or _ground(o, bound)


def _pair(s: Term, name: str) -> tuple[Term, Term]:
    if not isinstance(s, ListTerm) or len(s.items) != 2:
        raise BuiltinTypeError(f"{name} expects a two-element list subject, got {term_to_n3(s)}")
    return s.items[0], s.items[1]


def _two_numbers(a: Term, b: Term, name: str) -> tuple[int | float, int | float]:
    va, vb = numeric_value(a), numeric_value(b)
    if va is None or vb is None:
        raise BuiltinTypeError(
            f"{name} needs numeric operands, got {term_to_n3(a)} and {term_to_n3(b)}"
        )
    return va, vb


def _emit(o: Term, result: Term) -> list[Bindings]:
    ext = unify_terms(o, result, {})
    return [ext] if ext is not None else []


# ---------------------------------------------------------------------------
# math:
# ---------------------------------------------------------------------------

def _solve_difference(s: Term, o: Term) -> list[Bindings]:
    a, b = _pair(s, "math:difference")
    ta, tb = temporal_value(a), temporal_value(b)
    if ta is not None and tb is not None:
        delta = ta - tb
        seconds = delta.days * 86_400 + delta.seconds
        if delta.microseconds:
            raise BuiltinTypeError("math:difference: sub-second instants are not supported")
        return _emit(o, duration_literal(seconds))
    va, vb = _two_numbers(a, b, "math:difference")
    return _emit(o, number_literal(va - vb))


def _solve_quotient(s: Term, o: Term) -> list[Bindings]:
    a, b = _pair(s, "math:quotient")
    va, vb = _two_numbers(a, b, "math:quotient")
    if vb == 0:
        raise BuiltinTypeError("math:quotient: division by zero")
    return _emit(o, double_literal(va / vb))


def _solve_product(s: Term, o: Term) -> list[Bindings]:
    if not isinstance(s, ListTerm) or not s.items:
        raise BuiltinTypeError("math:product expects a non-empty list subject")
    result: int | float = 1
    for item in s.items:
        v = numeric_value(item)
        if v is None:
            raise BuiltinTypeError(f"math:product: non-numeric operand {term_to_n3(item)}")
        result = result * v
    return _emit(o, number_literal(result))


def _solve_exponentiation(s: Term, o: Term) -> list[Bindings]:
    a, b = _pair(s, "math:exponentiation")
    va, vb = _two_numbers(a, b, "math:exponentiation")
    try:
        result = float(va) ** float(vb)
    except (OverflowError, ZeroDivisionError) as exc:
        raise BuiltinTypeError(f"math:exponentiation: {exc}") from exc
    return _emit(o, double_literal(result))


def _comparable_pair(s: Term, o: Term, name: str) -> tuple:
    """Both operands in the same value family: numeric or duration."""
    ns, no = numeric_value(s), numeric_value(o)
    if ns is not None and no is not None:
        return ns, no
    ds, do = duration_term_value(s), duration_term_value(o)
    if ds is not None and do is not None:
        return ds, do
    raise BuiltinTypeError(
        f"{name}: incomparable operands {term_to_n3(s)} and {term_to_n3(o)}"
    )


def _solve_not_greater(s: Term, o: Term) -> list[Bindings]:
    a, b = _comparable_pair(s, o, "math:notGreaterThan")
    return [{}] if a <= b else []


def _solve_not_less(s: Term, o: Term) -> list[Bindings]:
    a, b = _comparable_pair(s, o, "math:notLessThan")
    return [{}] if a >= b else []


# ---------------------------------------------------------------------------
# e:max
# ---------------------------------------------------------------------------

def _solve_max(s: Term, o: Term) -> list[Bindings]:
    """Maximum of a list of mutually comparable values.

    Numeric lists return the first maximal operand unchanged; temporal
    lists return the maximum as a canonical xsd:dateTime literal so a
    following dtlit deconstruction can ground its lexical side.
    """
    if not isinstance(s, ListTerm) or not s.items:
        raise BuiltinTypeError("e:max expects a non-empty list subject")
    numerics = [numeric_value(i) for i in s.items]
    if all(v is not None for v in numerics):
        best_idx = 0
        for i, v in enumerate(numerics):
            if v > numerics[best_idx]:  # type: ignore[operator]
                best_idx = i
        return _emit(o, s.items[best_idx])
    temporals = [temporal_value(i) for i in s.items]
    if all(v is not None for v in temporals):
        return _emit(o, datetime_literal(max(temporals)))  # type: ignore[type-var]
    raise BuiltinTypeError(
        f"e:max: operands are not mutually comparable: {term_to_n3(s)}"
    )


# ---------------------------------------------------------------------------
# log:dtlit
# ---------------------------------------------------------------------------

def _solve_dtlit(s: Term, o: Term) -> list[Bindings]:
    """(lexical datatype) <-> typed literal, in whichever direction is ground."""
    if isinstance(s, ListTerm) and len(s.items) == 2:
        lex, dt = s.items
        if isinstance(lex, Literal) and isinstance(dt, Iri):
            if lex.datatype != XSD_STRING:
                raise BuiltinTypeError(
                    f"log:dtlit: lexical part must be a plain string, got {term_to_n3(lex)}"
                )
            return _emit(o, Literal(lex.lexical, dt.value))
    if isinstance(o, Literal):
        decomposed = ListTerm((Literal(o.lexical, XSD_STRING), Iri(o.datatype)))
        ext = unify_terms(s, decomposed, {})
        return [ext] if ext is not None else []
    if isinstance(s, ListTerm) and len(s.items) == 2:
        raise BuiltinTypeError(
            f"log:dtlit: cannot use {term_to_n3(s)} with object {term_to_n3(o)}"
        )
    raise BuiltinTypeError(f"log:dtlit expects a (lexical datatype) list subject")


def _ready_dtlit(s: Term, o: Term, bound: set[str]) -> bool:
    if _ground(o, bound):
        return True
    # construction direction only needs the subject pair ground
    return _ground(s, bound)


# ---------------------------------------------------------------------------
# time:yearsBetween
# ---------------------------------------------------------------------------

def _solve_years_between(s: Term, o: Term) -> list[Bindings]:
    """Full calendar years from birth to a reference instant."""
    birth_term, ref_term = _pair(s, "time:yearsBetween")
    birth, ref = temporal_value(birth_term), temporal_value(ref_term)
    if birth is None or ref is None:
        raise BuiltinTypeError(
            f"time:yearsBetween needs date/dateTime operands, got {term_to_n3(s)}"
        )
    if ref < birth:
        raise BuiltinTypeError(
            f"time:yearsBetween reference precedes birth in {term_to_n3(s)}"
        )
    years = ref.year - birth.year
    if (ref.month, ref.day) < (birth.month, birth.day):
        years -= 1
    return _emit(o, number_literal(years))


# ---------------------------------------------------------------------------
# Table
# ---------------------------------------------------------------------------

class BuiltinTable:
    """Predicate IRI -> builtin; extensible for host applications."""

    def __init__(self, builtins: dict[str, Builtin] | None = None):
        self._by_iri: dict[str, Builtin] = dict(builtins or {})

    def get(self, iri: str) -> Builtin | None:
        return self._by_iri.get(iri)

    def __contains__(self, iri: str) -> bool:
        return iri in self._by_iri

    def register(self, builtin: Builtin) -> "BuiltinTable":
        out = BuiltinTable(self._by_iri)
        out._by_iri[builtin.iri] = builtin
        return out


DEFAULT_BUILTINS = BuiltinTable(
    {
        MATH_DIFFERENCE: Builtin(MATH_DIFFERENCE, _solve_difference, _subject_ready),
        MATH_QUOTIENT: Builtin(MATH_QUOTIENT, _solve_quotient, _subject_ready),
        MATH_PRODUCT: Builtin(MATH_PRODUCT, _solve_product, _subject_ready),
        MATH_EXPONENTIATION: Builtin(
            MATH_EXPONENTIATION, _solve_exponentiation, _subject_ready
        ),
        MATH_NOT_GREATER_THAN: Builtin(MATH_NOT_GREATER_THAN, _solve_not_greater, _both_ready),
        MATH_NOT_LESS_THAN: Builtin(MATH_NOT_LESS_THAN, _solve_not_less, _both_ready),
        EULER_MAX: Builtin(EULER_MAX, _solve_max, _subject_ready),
        LOG_DTLIT: Builtin(LOG_DTLIT, _solve_dtlit, _ready_dtlit),
        TIME_YEARS_BETWEEN: Builtin(TIME_YEARS_BETWEEN, _solve_years_between, _subject_ready),
    }
)
