import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from bstc.cgraph import (CGraph, accessibility_layers, c_places, fulfill_from_json,
                         fulfill_to_json, graph_from_json, graph_to_json, induced_cgraph,
                         is_accessible, sources, to_dot)
from bstc.formula import conjunction
from bstc.fulfillment import check_fulfillment
from bstc.operators import Node
from bstc.semantics import EMPTY, Atom, SetOf, venn_partition

from oracles import forward_instance

p, q, r = 1, 2, 4


def ot(*ps):
    return Node.unordered("otimes", ps)


EMPTY_POW = Node.unordered("pow", ())


def test_c_places_and_sources():
    g = CGraph(frozenset({p, q}), {ot(p): {q}})
    assert c_places(g) == {q} and sources(g) == {p}
    g = CGraph(frozenset({p, q}), {})
    assert sources(g) == {p, q}
    g = CGraph(frozenset({p}), {EMPTY_POW: {p}})
    assert c_places(g) == {p} and sources(g) == frozenset()


def test_accessibility_examples():
    assert is_accessible(CGraph(frozenset({p, q}), {ot(p): {q}}))
    assert not is_accessible(CGraph(frozenset({p}), {ot(p): {p}}))
    assert is_accessible(CGraph(frozenset({p}), {EMPTY_POW: {p}}))


def test_layers():
    g = CGraph(frozenset({p, q, r}), {ot(p): {q}, ot(q): {r}, ot(p, r): {q}})
    assert accessibility_layers(g) == {p: 0, q: 1, r: 2}


def test_needs_all_member_places():
    g = CGraph(frozenset({p, q, r}), {ot(p, q): {q, r}})
    assert not is_accessible(g)


def test_validation():
    with pytest.raises(ValueError):
        CGraph(frozenset({p}), {ot(p): {q}})
    with pytest.raises(ValueError):
        CGraph(frozenset({p}), {ot(q): {p}})
    # nodes without targets are dropped
    assert CGraph(frozenset({p}), {ot(p): set()}).targets == {}


@st.composite
def graphs(draw):
    places = sorted(draw(st.sets(st.integers(1, 6), min_size=1, max_size=5)))
    node = st.lists(st.sampled_from(places), max_size=2).map(
        lambda ps: Node.unordered("pow" if not ps else "otimes", ps))
    targets = draw(st.dictionaries(node, st.sets(st.sampled_from(places), min_size=1), max_size=5))
    return CGraph(frozenset(places), targets)


@given(graphs(), st.data())
def test_adding_edge_into_c_place_keeps_accessibility(g, data):
    """Extra distribution edges into places that already have an in-node never hurt."""
    if not is_accessible(g) or not g.targets:
        return
    cp = sorted(c_places(g))
    if not cp:
        return
    n = data.draw(st.sampled_from(list(g.targets)))
    extra = data.draw(st.sampled_from(cp))
    bigger = g.with_targets({**g.targets, n: g.targets[n] | {extra}})
    assert is_accessible(bigger)


def test_adding_edge_into_a_source_can_break_accessibility():
    # the unrestricted monotonicity claim fails: a lone source that gains an
    # in-edge from its own node has nothing left to bootstrap from
    g = CGraph(frozenset({p}), {})
    assert is_accessible(g)
    assert not is_accessible(CGraph(frozenset({p}), {ot(p): {p}}))


def test_induced_otimes():
    a, b = Atom(0), Atom(1)
    m = {"x": SetOf([SetOf([a, b])]), "y": SetOf([a]), "z": SetOf([b])}
    c = conjunction("x = otimes(y, z)")
    g, f = induced_cgraph(venn_partition(m), c)
    assert len(g.places) == 3
    (node,) = g.targets
    assert node.members == f["y"] | f["z"] and g.targets[node] == f["x"]
    assert check_fulfillment(g, f, c) and is_accessible(g)


def test_induced_pow_of_empty():
    m = {"x": EMPTY, "y": SetOf([EMPTY])}
    c = conjunction("y = pow(x)", "x = x \\ x")
    g, f = induced_cgraph(venn_partition(m), c)
    assert g.places == f["y"] and len(g.places) == 1
    assert dict(g.targets) == {EMPTY_POW: f["y"]}
    assert is_accessible(g)


def test_induced_pure_bst():
    m = {"x": SetOf([Atom(0)]), "y": EMPTY}
    g, f = induced_cgraph(venn_partition(m), conjunction("y = x \\ x", "x != y"))
    assert g.targets == {} and f == {"x": g.places, "y": frozenset()}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["otimes", "times", "pow"]), st.integers(0, 2 ** 32))
def test_induced_graphs_accessible_and_fulfilling(op, seed):
    c, m = forward_instance(random.Random(seed), op)
    g, f = induced_cgraph(venn_partition(m), c)
    assert is_accessible(g)
    assert all(ts for ts in g.targets.values())
    assert check_fulfillment(g, f, c)


def test_json_roundtrip_and_dot():
    g = CGraph(frozenset({p, q}), {ot(p): {q}, Node.sequence("times", (q, p)): {q}},
               {p: frozenset({"x"}), q: frozenset({"x", "y"})})
    back = graph_from_json(json.loads(json.dumps(graph_to_json(g))))
    assert back == g and back.signatures == g.signatures
    f = {"x": frozenset({p, q})}
    assert fulfill_from_json(fulfill_to_json(f)) == f
    dot = to_dot(g)
    assert dot.startswith('digraph "cgraph" {') and '"p1" -> "n0" [style=dashed];' in dot
    with pytest.raises(ValueError):
        graph_from_json({"places": [1], "targets": [{"node": ot(1).to_json(), "to": [1]}] * 2})
