import pytest

from ahplus import parse_scalar, sqrt
from ahplus.assets import load_asset
from ahplus.graphs import BipartiteGraph, Edge, FourGraph, GraphError, fp_weights

from oracles import pf_vector


def a3():
    return BipartiteGraph.from_triples(["x", "z"], ["y"], [("x", "y"), ("z", "y")], "A3")


def test_a3_weights():
    w = fp_weights(a3(), 2, "x")
    assert w["x"] == 1 and w["z"] == 1
    assert w["y"] == sqrt(2)


def test_wrong_eigenvalue():
    with pytest.raises(GraphError):
        fp_weights(a3(), 3, "x")


@pytest.mark.parametrize("name", ["ahp1.principal.graph", "ahp1.dual.graph"])
def test_shipped_graph_weights_match_numpy(name):
    g = load_asset(name)
    ref, norm_sq = pf_vector(g)
    assert abs(norm_sq - float(parse_scalar("(7+sqrt17)/2"))) < 1e-9
    base = g.even[0]
    w = fp_weights(g, parse_scalar("(7+sqrt17)/2"), base)
    for v in list(g.even) + list(g.odd):
        assert abs(float(w[v]) - ref[v] / ref[base]) < 1e-9


def test_principal_graph_is_three_supertransitive():
    g = load_asset("ahp1.principal.graph")
    # * - a - b - c is an unbranched initial arm
    assert [e.dst for e in g.out("*")] == ["a"]
    assert len(g.out("b")) == 2


def test_edge_words():
    e = Edge.parse("* b_1 b~")
    assert e.src == "*" and e.dst == "b~"
    assert e.reversed().reversed() == e
    assert (Edge.parse("x y") + Edge.parse("y z")).vertices == ("x", "y", "z")
    with pytest.raises(GraphError):
        Edge.parse("x y") + Edge.parse("z w")
    with pytest.raises(GraphError):
        Edge.parse("x")


def test_graph_validation():
    with pytest.raises(GraphError):
        BipartiteGraph.from_triples(["x"], ["y"], [("x", "q")])
    with pytest.raises(GraphError):
        BipartiteGraph.from_triples(["x", "x"], ["y"], [])


def test_json_roundtrip():
    g = load_asset("ahp1.principal.graph")
    assert BipartiteGraph.from_json(g.to_json()).same_as(g)
    fg = load_asset("ahp1.kappa.fourgraph")
    assert FourGraph.from_json(fg.to_json()).cell_list == fg.cell_list
