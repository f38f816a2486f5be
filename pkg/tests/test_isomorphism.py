import pytest

from semlift.isomorphism import assert_isomorphic, isomorphic
from semlift.terms import BlankNode, Graph, Iri, ListTerm, Literal, Triple

EX = "http://example.org/"


def iri(local):
    return Iri(EX + local)


def chain(labels):
    """_:l0 ex:next _:l1 ex:next ... as a graph."""
    nodes = [BlankNode(l) for l in labels]
    return Graph(
        [Triple(a, iri("next"), b) for a, b in zip(nodes, nodes[1:])]
    )


def test_identical_graphs():
    g = Graph([Triple(iri("s"), iri("p"), iri("o"))])
    assert isomorphic(g, g)


def test_blank_relabeling_is_isomorphic():
    assert isomorphic(chain("abc"), chain("xyz"))


def test_different_shape_is_not():
    fork = Graph(
        [
            Triple(BlankNode("a"), iri("next"), BlankNode("b")),
            Triple(BlankNode("a"), iri("next"), BlankNode("c")),
        ]
    )
    assert not isomorphic(chain("abc"), fork)


def test_ground_triple_mismatch():
    g1 = Graph([Triple(iri("s"), iri("p"), Literal("1"))])
    g2 = Graph([Triple(iri("s"), iri("p"), Literal("2"))])
    assert not isomorphic(g1, g2)


def test_size_mismatch():
    assert not isomorphic(chain("abc"), chain("abcd"))


def test_cycle_against_chain():
    a, b = BlankNode("a"), BlankNode("b")
    cycle = Graph([Triple(a, iri("next"), b), Triple(b, iri("next"), a)])
    assert not isomorphic(cycle, chain("abc"))
    x, y = BlankNode("x"), BlankNode("y")
    cycle2 = Graph([Triple(x, iri("next"), y), Triple(y, iri("next"), x)])
    assert isomorphic(cycle, cycle2)


def test_symmetric_pair_needs_backtracking():
    # two blanks with identical signatures; only one pairing is consistent
    def g(v1, v2):
        n1, n2 = BlankNode("m"), BlankNode("n")
        return Graph(
            [
                Triple(n1, iri("p"), Literal(v1)),
                Triple(n2, iri("p"), Literal(v2)),
                Triple(n1, iri("q"), n2),
            ]
        )

    assert isomorphic(g("1", "2"), g("1", "2"))
    assert not isomorphic(g("1", "2"), g("2", "1"))


def test_blanks_inside_lists():
    def g(label):
        return Graph(
            [Triple(ListTerm((BlankNode(label), Literal("1"))), iri("p"), iri("o")),
             Triple(BlankNode(label), iri("q"), Literal("2"))]
        )

    assert isomorphic(g("a"), g("b"))


def test_assert_isomorphic_reports_diff():
    g1 = Graph([Triple(iri("s"), iri("p"), Literal("1"))])
    g2 = Graph([Triple(iri("s"), iri("p"), Literal("2"))])
    with pytest.raises(AssertionError, match="only in first"):
        assert_isomorphic(g1, g2)


def test_many_interchangeable_blanks_terminate():
    # 12 structurally identical blanks on each side; signature pruning keeps
    # this far below the step budget
    def stars(prefix):
        return Graph(
            [Triple(BlankNode(f"{prefix}{i}"), iri("p"), iri("hub")) for i in range(12)]
        )

    assert isomorphic(stars("a"), stars("b"))
