"""Graph equality up to blank-node relabeling.

Ground triples must match exactly; blank nodes are matched by structural
signature refinement followed by a bounded backtracking search.  All graphs
in this project keep blank-node counts small (skolem nodes carry three or
four properties each), so the search space stays tiny; the step bound is a
safety net against pathological inputs, not a tuning knob.
"""

from __future__ import annotations

from .terms import BlankNode, Graph, ListTerm, Term, Triple, term_key, triple_key


class IsomorphismBoundExceeded(RuntimeError):
    pass


def _contains_blank(t: Term) -> bool:
    if isinstance(t, BlankNode):
        return True
    if isinstance(t, ListTerm):
        return any(_contains_blank(i) for i in t.items)
    return False


def _map_term(t: Term, mapping: dict[str, str]) -> Term | None:
    """Rename blanks through a partial mapping; None if any blank is unmapped."""
    if isinstance(t, BlankNode):
        target = mapping.get(t.label)
        return BlankNode(target) if target is not None else None
    if isinstance(t, ListTerm):
        items = []
        for i in t.items:
            mapped = _map_term(i, mapping)
            if mapped is None:
                return None
            items.append(mapped)
        return ListTerm(tuple(items))
    return t


def _signature(label: str, triples: list[Triple]) -> tuple:
    """Structural fingerprint of one blank node, other blanks wildcarded."""

    def skel(t: Term) -> tuple:
        if isinstance(t, BlankNode):
            return ("self",) if t.label == label else ("blank",)
        if isinstance(t, ListTerm):
            return ("list",) + tuple(skel(i) for i in t.items)
        return ("term", term_key(t))

    rows = [
        (skel(t.s), skel(t.p), skel(t.o))
        for t in triples
        if _mentions(t, label)
    ]
    return tuple(sorted(rows))


def _mentions(t: Triple, label: str) -> bool:
    def walk(term: Term) -> bool:
        if isinstance(term, BlankNode):
            return term.label == label
        if isinstance(term, ListTerm):
            return any(walk(i) for i in term.items)
        return False

    return walk(t.s) or walk(t.o)


def isomorphic(g1: Graph, g2: Graph, max_steps: int = 100_000) -> bool:
    """True when g1 and g2 differ only by a bijective blank-node relabeling."""
    if len(g1) != len(g2):
        return False

    def split(g: Graph) -> tuple[set[Triple], list[Triple]]:
        ground, blank = set(), []
        for t in g.triples:
            if _contains_blank(t.s) or _contains_blank(t.o):
                blank.append(t)
            else:
                ground.add(t)
        return ground, blank

    ground1, blank1 = split(g1)
    ground2, blank2 = split(g2)
    if ground1 != ground2 or len(blank1) != len(blank2):
        return False
    if not blank1:
        return True

    labels1 = sorted({b.label for b in g1.blank_nodes()})
    labels2 = sorted({b.label for b in g2.blank_nodes()})
    if len(labels1) != len(labels2):
        return False

    sig1 = {l: _signature(l, blank1) for l in labels1}
    sig2 = {l: _signature(l, blank2) for l in labels2}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False
    candidates = {
        l1: [l2 for l2 in labels2 if sig2[l2] == sig1[l1]] for l1 in labels1
    }

    target = set(blank2)
    order = sorted(labels1, key=lambda l: (len(candidates[l]), l))
    steps = 0

    def consistent(mapping: dict[str, str]) -> bool:
        for t in blank1:
            s = _map_term(t.s, mapping)
            o = _map_term(t.o, mapping)
            if s is None or o is None:
                continue  # not fully mapped yet
            if Triple(s, t.p, o) not in target:
                return False
        return True

    def search(idx: int, mapping: dict[str, str], used: set[str]) -> bool:
        nonlocal steps
        steps += 1
        if steps > max_steps:
            raise IsomorphismBoundExceeded(
                f"blank-node matching exceeded {max_steps} steps"
            )
        if idx == len(order):
            mapped = {
                Triple(_map_term(t.s, mapping), t.p, _map_term(t.o, mapping))
                for t in blank1
            }
            return mapped == target
        label = order[idx]
        for cand in candidates[label]:
            if cand in used:
                continue
            mapping[label] = cand
            used.add(cand)
            if consistent(mapping) and search(idx + 1, mapping, used):
                return True
            del mapping[label]
            used.discard(cand)
        return False

    return search(0, {}, set())


def assert_isomorphic(g1: Graph, g2: Graph) -> None:
    """Raise AssertionError with a readable diff when graphs differ."""
    if isomorphic(g1, g2):
        return
    from .terms import triple_to_n3

    only1 = sorted(g1.triples - g2.triples, key=triple_key)
    only2 = sorted(g2.triples - g1.triples, key=triple_key)
    msg = ["graphs are not isomorphic"]
    if only1:
        msg.append("only in first:")
        msg += ["  " + triple_to_n3(t) for t in only1[:20]]
    if only2:
        msg.append("only in second:")
        msg += ["  " + triple_to_n3(t) for t in only2[:20]]
    raise AssertionError("\n".join(msg))
