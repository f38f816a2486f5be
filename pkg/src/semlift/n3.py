"""N3 subset reader and writer.

Supported surface: @prefix/@base, IRIs and prefixed names, typed literals
(`"..."^^dt`), numbers, booleans, `a`, `;`/`,` lists, `[...]` property
lists, `(...)` collections, `{...}` formulas, `?x` variables, `=>` rules,
and forward paths `term!pred` (desugared to an auxiliary pattern with a
fresh variable).  Everything else raises an explicit unsupported-feature
error with position.

Formulas are parsed with their own pattern accumulator, so property lists
and paths always land in the formula where they appear (antecedent or
consequent).  Blank nodes written in a rule antecedent are lifted to
variables; consequent blank nodes stay and act as per-firing templates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urljoin

from .terms import (
    CORE_PREFIXES,
    Bindings,
    BlankNode,
    Formula,
    Graph,
    GraphTerm,
    Iri,
    ListTerm,
    Literal,
    RDF_TYPE,
    Rule,
    Term,
    Triple,
    Variable,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
    term_key,
    triple_key,
    vars_in_term,
)


class N3ParseError(ValueError):
    """Syntax or semantic error in an N3 document, with source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<string>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: {message}")


class UnsupportedN3Feature(N3ParseError):
    """The text uses N3 that is outside the supported subset."""


@dataclass(frozen=True)
class Document:
    """Parse result: declared prefixes, ground triples, and forward rules."""

    prefixes: dict[str, str]
    graph: Graph
    rules: tuple[Rule, ...]
    source: str = "<string>"


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_NAME = r"[A-Za-z_][A-Za-z0-9_-]*"
_NAME_RE = re.compile(_NAME)
_QNAME_RE = re.compile(f"(?:{_NAME})?:(?:{_NAME})?")
_NUMBER_RE = re.compile(r"[+-]?\d+(\.\d+)?([eE][+-]?\d+)?")
_EXPLICIT_BLANK_RE = re.compile(r"_:([A-Za-z_][A-Za-z0-9_]*)")


@dataclass(frozen=True)
class Token:
    typ: str
    value: str
    line: int
    col: int


class _Lexer:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str, unsupported: bool = False) -> N3ParseError:
        cls = UnsupportedN3Feature if unsupported else N3ParseError
        return cls(message, self.line, self.col, self.source)

    def _advance(self, n: int) -> None:
        chunk = self.text[self.pos : self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def _skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance(1)
            elif c == "#":
                end = self.text.find("\n", self.pos)
                self._advance((end if end != -1 else len(self.text)) - self.pos)
            else:
                return

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            self._skip_ws()
            if self.pos >= len(self.text):
                out.append(Token("eof", "", self.line, self.col))
                return out
            out.append(self._next())

    def _next(self) -> Token:
        line, col = self.line, self.col
        text, pos = self.text, self.pos
        c = text[pos]

        if c == "<":
            if text.startswith("<=", pos):
                raise self.error("backward rule '<=' is not supported", unsupported=True)
            end = text.find(">", pos)
            if end == -1:
                raise self.error("unterminated IRI")
            iri = text[pos + 1 : end]
            if any(ws in iri for ws in (" ", "\n", "\t")):
                raise self.error("whitespace inside IRI")
            self._advance(end + 1 - pos)
            return Token("iriref", iri, line, col)

        if c == "@":
            m = _NAME_RE.match(text, pos + 1)
            word = m.group(0) if m else ""
            if word in ("forAll", "forSome"):
                raise self.error(f"quantifier '@{word}' is not supported", unsupported=True)
            if word in ("prefix", "base"):
                self._advance(1 + len(word))
                return Token("directive", word, line, col)
            raise self.error(f"unknown directive '@{word}'", unsupported=True)

        if c == '"':
            if text.startswith('"""', pos):
                raise self.error("triple-quoted strings are not supported", unsupported=True)
            i = pos + 1
            buf: list[str] = []
            while True:
                if i >= len(text):
                    raise self.error("unterminated string literal")
                ch = text[i]
                if ch == "\\":
                    if i + 1 >= len(text):
                        raise self.error("unterminated escape")
                    esc = text[i + 1]
                    mapping = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
                    if esc not in mapping:
                        raise self.error(f"unsupported string escape '\\{esc}'")
                    buf.append(mapping[esc])
                    i += 2
                elif ch == '"':
                    break
                elif ch == "\n":
                    raise self.error("newline inside string literal")
                else:
                    buf.append(ch)
                    i += 1
            self._advance(i + 1 - pos)
            if self.text.startswith("@", self.pos):
                raise self.error("language-tagged literals are not supported", unsupported=True)
            return Token("string", "".join(buf), line, col)

        if c == "?":
            m = _NAME_RE.match(text, pos + 1)
            if not m:
                raise self.error("invalid variable name")
            self._advance(1 + len(m.group(0)))
            return Token("var", m.group(0), line, col)

        if text.startswith("_:", pos):
            m = _NAME_RE.match(text, pos + 2)
            if not m:
                raise self.error("invalid blank node label")
            self._advance(2 + len(m.group(0)))
            return Token("blank", m.group(0), line, col)

        if text.startswith("^^", pos):
            self._advance(2)
            return Token("dtmarker", "^^", line, col)
        if c == "^":
            raise self.error("reverse path '^' is not supported", unsupported=True)

        if text.startswith("=>", pos):
            self._advance(2)
            return Token("implies", "=>", line, col)
        if c == "=":
            raise self.error("'=' (equality shorthand) is not supported", unsupported=True)

        if c in ".;,()[]{}!":
            self._advance(1)
            return Token(c, c, line, col)

        if c.isdigit() or (c in "+-" and pos + 1 < len(text) and text[pos + 1].isdigit()):
            m = _NUMBER_RE.match(text, pos)
            assert m is not None
            self._advance(len(m.group(0)))
            return Token("number", m.group(0), line, col)

        # prefixed name or bare keyword
        m = _QNAME_RE.match(text, pos)
        if m:
            self._advance(len(m.group(0)))
            return Token("qname", m.group(0), line, col)
        m = _NAME_RE.match(text, pos)
        if m:
            word = m.group(0)
            if word in ("a", "true", "false"):
                self._advance(len(word))
                return Token("keyword", word, line, col)
            if word in ("is", "of", "has"):
                raise self.error(f"'{word} ... {word}' syntax is not supported", unsupported=True)
            raise self.error(f"unexpected bare word '{word}'")

        raise self.error(f"unexpected character {c!r}")


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_ABSOLUTE_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")


class _Parser:
    def __init__(self, text: str, base: str | None, source: str):
        self.tokens = _Lexer(text, source).tokens()
        self.i = 0
        self.base = base
        self.source = source
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.rules: list[Rule] = []
        self.rule_ordinal = 0
        self.anon_counter = 0
        self.path_counter = 0
        self.reserved_labels = set(_EXPLICIT_BLANK_RE.findall(text))

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, typ: str) -> Token:
        tok = self.take()
        if tok.typ != typ:
            raise self.err(f"expected {typ!r}, found {tok.value!r}", tok)
        return tok

    def err(self, message: str, tok: Token, unsupported: bool = False) -> N3ParseError:
        cls = UnsupportedN3Feature if unsupported else N3ParseError
        return cls(message, tok.line, tok.col, self.source)

    # -- name resolution ----------------------------------------------------

    def resolve_iri(self, ref: str, tok: Token) -> Iri:
        if _ABSOLUTE_IRI_RE.match(ref):
            return Iri(ref)
        if self.base is None:
            raise self.err(f"relative IRI <{ref}> with no base", tok)
        return Iri(urljoin(self.base, ref))

    def expand_qname(self, q: str, tok: Token) -> Iri:
        prefix, local = q.split(":", 1)
        if prefix not in self.prefixes:
            raise self.err(f"undefined prefix '{prefix}:'", tok)
        return Iri(self.prefixes[prefix] + local)

    def fresh_blank(self) -> BlankNode:
        while True:
            label = f"b{self.anon_counter}"
            self.anon_counter += 1
            if label not in self.reserved_labels:
                return BlankNode(label)

    def fresh_path_var(self) -> Variable:
        v = Variable(f"_p{self.path_counter}")
        self.path_counter += 1
        return v

    # -- document -----------------------------------------------------------

    def parse(self) -> Document:
        while self.peek().typ != "eof":
            tok = self.peek()
            if tok.typ == "directive":
                self.parse_directive()
            else:
                self.parse_statement()
        graph = Graph(self.triples, {**CORE_PREFIXES, **self.prefixes})
        return Document(dict(self.prefixes), graph, tuple(self.rules), self.source)

    def parse_directive(self) -> None:
        tok = self.take()
        if tok.value == "prefix":
            name_tok = self.expect("qname")
            if not name_tok.value.endswith(":"):
                raise self.err("prefix declaration must end with ':'", name_tok)
            iri_tok = self.expect("iriref")
            self.prefixes[name_tok.value[:-1]] = self.resolve_iri(iri_tok.value, iri_tok).value
        else:  # base
            iri_tok = self.expect("iriref")
            self.base = self.resolve_iri(iri_tok.value, iri_tok).value
        self.expect(".")

    def parse_statement(self) -> None:
        """One top-level statement: either ground triples or a rule."""
        acc: list[Triple] = []
        start = self.peek()
        subject = self.parse_term(acc, in_formula=False)
        if self.peek().typ == "implies":
            arrow = self.take()
            if not isinstance(subject, GraphTerm):
                raise self.err("'=>' requires a formula on the left", arrow)
            body = self.parse_term(acc, in_formula=False)
            if not isinstance(body, GraphTerm):
                raise self.err("'=>' requires a formula on the right", arrow)
            self.expect(".")
            if acc:
                raise self.err("stray triples around a rule statement", arrow)
            self.add_rule(subject.formula, body.formula, arrow)
            return
        if not (self.peek().typ == "." and acc):
            self.parse_predicate_object_list(subject, acc, in_formula=False)
        self.expect(".")
        for t in acc:
            bad = vars_in_term(t.s) | vars_in_term(t.p) | vars_in_term(t.o)
            if bad:
                name = sorted(bad)[0]
                raise self.err(
                    f"variable ?{name} outside a rule (variables are only allowed in formulas)",
                    start,
                )
        self.triples.extend(acc)

    def add_rule(self, antecedent: Formula, consequent: Formula, tok: Token) -> None:
        lifted = _lift_antecedent_blanks(antecedent)
        rule_id = f"{self.source}#r{self.rule_ordinal}"
        self.rule_ordinal += 1
        try:
            self.rules.append(Rule(rule_id, lifted, consequent))
        except ValueError as exc:
            raise self.err(str(exc), tok) from exc

    # -- triples ------------------------------------------------------------

    def parse_predicate_object_list(self, subject: Term, acc: list[Triple], in_formula: bool) -> None:
        while True:
            verb_tok = self.peek()
            verb = self.parse_verb(acc, in_formula)
            while True:
                obj = self.parse_term(acc, in_formula)
                try:
                    acc.append(Triple(subject, verb, obj))
                except ValueError as exc:
                    raise self.err(str(exc), verb_tok) from exc
                if self.peek().typ == ",":
                    self.take()
                    continue
                break
            if self.peek().typ == ";":
                self.take()
                if self.peek().typ in (".", "]", "}"):  # tolerate trailing ';'
                    return
                continue
            return

    def parse_verb(self, acc: list[Triple], in_formula: bool) -> Term:
        tok = self.peek()
        if tok.typ == "keyword" and tok.value == "a":
            self.take()
            return Iri(RDF_TYPE)
        if tok.typ == "implies":
            raise self.err("nested rules are not supported", tok, unsupported=True)
        verb = self.parse_term(acc, in_formula)
        if not isinstance(verb, (Iri, Variable)):
            raise self.err("predicate must be an IRI or a variable", tok)
        return verb

    # -- terms --------------------------------------------------------------

    def parse_term(self, acc: list[Triple], in_formula: bool) -> Term:
        term = self.parse_primary(acc, in_formula)
        while self.peek().typ == "!":
            bang = self.take()
            if not in_formula:
                raise self.err(
                    "forward path '!' outside a formula is not supported", bang, unsupported=True
                )
            pred = self.parse_primary(acc, in_formula)
            if not isinstance(pred, (Iri, Variable)):
                raise self.err("path predicate must be an IRI or a variable", bang)
            value = self.fresh_path_var()
            acc.append(Triple(term, pred, value))
            term = value
        return term

    def parse_primary(self, acc: list[Triple], in_formula: bool) -> Term:
        tok = self.take()
        if tok.typ == "iriref":
            return self.resolve_iri(tok.value, tok)
        if tok.typ == "qname":
            return self.expand_qname(tok.value, tok)
        if tok.typ == "blank":
            return BlankNode(tok.value)
        if tok.typ == "var":
            return Variable(tok.value)
        if tok.typ == "string":
            if self.peek().typ == "dtmarker":
                self.take()
                dt_tok = self.take()
                if dt_tok.typ == "iriref":
                    dt = self.resolve_iri(dt_tok.value, dt_tok)
                elif dt_tok.typ == "qname":
                    dt = self.expand_qname(dt_tok.value, dt_tok)
                else:
                    raise self.err("datatype must be an IRI", dt_tok)
                return Literal(tok.value, dt.value)
            return Literal(tok.value, XSD_STRING)
        if tok.typ == "number":
            text = tok.value
            if "e" in text.lower():
                return Literal(text, XSD_DOUBLE)
            if "." in text:
                return Literal(text, XSD_DECIMAL)
            return Literal(text, XSD_INTEGER)
        if tok.typ == "keyword":
            if tok.value in ("true", "false"):
                return Literal(tok.value, XSD_BOOLEAN)
            raise self.err(f"unexpected '{tok.value}' in term position", tok)
        if tok.typ == "(":
            items: list[Term] = []
            while self.peek().typ != ")":
                if self.peek().typ == "eof":
                    raise self.err("unterminated list", tok)
                items.append(self.parse_term(acc, in_formula))
            self.take()
            return ListTerm(tuple(items))
        if tok.typ == "[":
            node = self.fresh_blank()
            if self.peek().typ != "]":
                self.parse_predicate_object_list(node, acc, in_formula)
            self.expect("]")
            return node
        if tok.typ == "{":
            return GraphTerm(self.parse_formula(tok))
        raise self.err(f"unexpected {tok.value!r}", tok)

    def parse_formula(self, open_tok: Token) -> Formula:
        acc: list[Triple] = []
        while True:
            if self.peek().typ == "}":
                self.take()
                return Formula(tuple(acc))
            if self.peek().typ == "eof":
                raise self.err("unterminated formula", open_tok)
            subject = self.parse_term(acc, in_formula=True)
            if self.peek().typ == "implies":
                raise self.err("nested rules are not supported", self.peek(), unsupported=True)
            if not (self.peek().typ in (".", "}") and acc):
                self.parse_predicate_object_list(subject, acc, in_formula=True)
            if self.peek().typ == ".":
                self.take()


def _lift_antecedent_blanks(f: Formula) -> Formula:
    """Blank nodes in a rule antecedent act as match variables."""

    def lift(t: Term) -> Term:
        if isinstance(t, BlankNode):
            return Variable(f"_b_{t.label}")
        if isinstance(t, ListTerm):
            return ListTerm(tuple(lift(i) for i in t.items))
        if isinstance(t, GraphTerm):
            return GraphTerm(Formula(tuple(lift_triple(p) for p in t.formula.patterns)))
        return t

    def lift_triple(p: Triple) -> Triple:
        return Triple(lift(p.s), lift(p.p), lift(p.o))

    return Formula(tuple(lift_triple(p) for p in f.patterns))


def parse_n3(text: str, base: str | None = None, source: str = "<string>") -> Document:
    """Parse an N3 document in the supported subset.

    Raises N3ParseError (with line/column) on malformed input and
    UnsupportedN3Feature when the text uses N3 outside the subset.
    """
    return _Parser(text, base, source).parse()


def load_n3(path: str | Path, base: str | None = None) -> Document:
    p = Path(path)
    return parse_n3(p.read_text(encoding="utf-8"), base=base, source=p.name)


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

_LOCAL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_INT_RE = re.compile(r"^[+-]?\d+$")


class _Writer:
    def __init__(self, prefixes: dict[str, str]):
        # longest namespace wins so nested namespaces shrink correctly
        self.by_ns = sorted(prefixes.items(), key=lambda kv: -len(kv[1]))

    def iri(self, value: str) -> str:
        for name, ns in self.by_ns:
            if value.startswith(ns):
                local = value[len(ns):]
                if local == "" or _LOCAL_RE.match(local):
                    return f"{name}:{local}"
        return f"<{value}>"

    def term(self, t: Term) -> str:
        if isinstance(t, Iri):
            if t.value == RDF_TYPE:
                return "a"
            return self.iri(t.value)
        if isinstance(t, Literal):
            if t.datatype == XSD_INTEGER and _INT_RE.match(t.lexical):
                return t.lexical
            if t.datatype == XSD_BOOLEAN and t.lexical in ("true", "false"):
                return t.lexical
            lex = (
                t.lexical.replace("\\", "\\\\").replace('"', '\\"')
                .replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
            )
            if t.datatype == XSD_STRING:
                return f'"{lex}"'
            return f'"{lex}"^^{self.iri(t.datatype)}'
        if isinstance(t, BlankNode):
            return f"_:{t.label}"
        if isinstance(t, Variable):
            return f"?{t.name}"
        if isinstance(t, ListTerm):
            return "(" + " ".join(self.term(i) for i in t.items) + ")"
        if isinstance(t, GraphTerm):
            inner = " ".join(
                f"{self.term(p.s)} {self.term(p.p)} {self.term(p.o)}."
                for p in t.formula.patterns
            )
            return "{" + inner + "}"
        raise TypeError(f"cannot serialize {t!r}")


def serialize_n3(g: Graph) -> str:
    """Deterministic N3 text for a graph; stable under round-trips.

    Triples are grouped by subject in term order; rdf:type predicates sort
    first and print as 'a'.  Blank nodes keep their labels, so parsing the
    output reproduces the exact triple set, not just an isomorphic one.
    """
    w = _Writer(g.prefixes)
    lines: list[str] = []
    for name in sorted(g.prefixes):
        lines.append(f"@prefix {name}: <{g.prefixes[name]}>.")
    if g.prefixes and len(g) > 0:
        lines.append("")

    def pred_sort(p: Iri):
        return (0 if p.value == RDF_TYPE else 1, term_key(p))

    by_subject: dict[Term, dict[Iri, list[Term]]] = {}
    for t in g:
        by_subject.setdefault(t.s, {}).setdefault(t.p, []).append(t.o)
    for s in sorted(by_subject, key=term_key):
        parts: list[str] = []
        preds = by_subject[s]
        for p in sorted(preds, key=pred_sort):
            objs = ", ".join(w.term(o) for o in sorted(preds[p], key=term_key))
            parts.append(f"{w.term(p)} {objs}")
        lines.append(f"{w.term(s)} " + ";\n    ".join(parts) + ".")
    return "\n".join(lines) + "\n"
