import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from bstc.cgraph import CGraph, induced_cgraph
from bstc.formula import conjunction, normalize, parse
from bstc.fulfillment import decide
from bstc.modelgen import (BudgetExhausted, InitializationBudget, InvariantViolation, PartialPartition, Stable,
                           _check_p1, _check_p4, build_model, init_phase, longest_path,
                           source_demands, stabilize)
from bstc.operators import Node, default_registry
from bstc.semantics import EMPTY, Atom, SetOf, eval_conjunction, op_otimes, venn_partition
from bstc.verdict import FiniteModel, GraphWitness

from oracles import forward_instance

X, Y, Z = 1, 2, 4
OPS = default_registry()


def ot(*ps):
    return Node.unordered("otimes", ps)


def fin_graph():
    """x = otimes(y, z) with one place per variable."""
    g = CGraph(frozenset({X, Y, Z}), {ot(Y, Z): {X}})
    f = {"x": frozenset({X}), "y": frozenset({Y}), "z": frozenset({Z})}
    return g, f, conjunction("x = otimes(y, z)", "x != y", "x != z", "y != z")


def pow_loop():
    return CGraph(frozenset({X}), {Node.unordered("pow", ()): {X}, Node.unordered("pow", (X,)): {X}})


def test_longest_path():
    assert longest_path(CGraph(frozenset({X, Y}), {ot(X): {Y}})) == 1
    assert longest_path(CGraph(frozenset({X, Y, Z}), {ot(X): {Y}, ot(Y): {Z}})) == 2
    assert longest_path(CGraph(frozenset({X, Y}), {})) == 0
    with pytest.raises(ValueError):
        longest_path(CGraph(frozenset({X}), {ot(X): {X}}))


def test_bound_seed_size():
    # [PAPER] seed larger than |places|**(k+1): 3 places, k = 1, so at least 10 atoms
    g, f, _ = fin_graph()
    pp = init_phase(g, f, OPS, h0="bound")
    seeded = [len(pp.contents[q]) for q in (Y, Z)]
    assert sum(seeded) == 3 ** 2 + 1
    assert min(seeded) >= 3 ** 1


def test_init_without_c_places():
    g = CGraph(frozenset({X, Y}), {})
    pp = init_phase(g, None, OPS)
    assert all(len(pp.contents[q]) == 1 for q in (X, Y))


def test_init_sends_all_pairs_to_single_target():
    g, f, _ = fin_graph()
    pp = init_phase(g, f, OPS, h0=6)
    assert len(pp.contents[Y]) == len(pp.contents[Z]) == 3
    assert pp.block(X) == op_otimes(pp.block(Y), pp.block(Z))
    assert len(pp.contents[X]) == 9


def test_init_even_split():
    g = CGraph(frozenset({X, Y, Z}), {ot(X): {Y, Z}})
    pp = init_phase(g, None, OPS, h0=4)
    assert (len(pp.contents[Y]), len(pp.contents[Z])) == (5, 5)


def test_source_demands_cover_targets():
    g = CGraph(frozenset({X, Y, Z}), {ot(X): {Y, Z}})
    assert source_demands(g)[X] == 2
    pp = init_phase(g, None, OPS)
    assert pp.contents[Y] and pp.contents[Z]


def test_init_rejects_inaccessible():
    with pytest.raises(ValueError):
        init_phase(CGraph(frozenset({X}), {ot(X): {X}}), None, OPS)
    with pytest.raises(ValueError):
        init_phase(fin_graph()[0], None, OPS, h0=1)


def test_acyclic_stabilizes_with_p4():
    g, f, _ = fin_graph()
    pp = init_phase(g, f, OPS)
    out = stabilize(pp, g, OPS)
    assert isinstance(out, Stable) and out.rounds <= len(g.targets)
    blocks = out.partition.blocks
    for n, ts in g.targets.items():
        produced = OPS[n.op].construct([blocks[p] for p in n.places])
        assert produced.members <= set().union(*(blocks[t].members for t in ts))


def test_empty_target_map_is_stable_at_once():
    g = CGraph(frozenset({X}), {})
    out = stabilize(init_phase(g, None, OPS), g, OPS)
    assert isinstance(out, Stable) and out.rounds == 0


def test_pow_self_loop_grows_until_budget():
    sizes = []
    for rounds in range(1, 11):
        pp = init_phase(pow_loop(), None, OPS)
        out = stabilize(pp, pow_loop(), OPS, max_rounds=rounds)
        assert isinstance(out, BudgetExhausted)
        sizes.append(pp.size())
        if out.reason == "elements":
            break
    assert all(s < t for s, t in zip(sizes, sizes[1:])) and len(sizes) >= 3
    assert out.reason == "elements"


def test_trace_log(caplog):
    g, f, c = fin_graph()
    with caplog.at_level(logging.DEBUG, logger="bstc.modelgen"):
        build_model(g, f, c, OPS)
    assert any(r.getMessage().startswith("init node=otimes{p2,p4}") for r in caplog.records)


def test_build_examples():
    g, f, c = fin_graph()
    w = build_model(g, f, c, OPS)
    assert isinstance(w, FiniteModel) and eval_conjunction(w.assignment, c)

    v = decide(conjunction("y = pow(x)", "x = x \\ x"))
    assert v.witness.assignment == {"x": EMPTY, "y": SetOf([EMPTY])}

    v = decide(conjunction("y = otimes(x, x)", "x = x U y", "x != y"))
    assert isinstance(v.witness, GraphWitness)


def test_bound_and_minimal_seeds_both_yield_models():
    g, f, c = fin_graph()
    for h0 in ("bound", "minimal", 7):
        w = build_model(g, f, c, OPS, h0=h0)
        assert isinstance(w, FiniteModel)


def test_stall_reported_as_graph_witness():
    # pow of the empty set has one element, which cannot fill two places
    g = CGraph(frozenset({X, Y}), {Node.unordered("pow", ()): {X, Y}})
    c = conjunction("y = pow(e)", "e = e \\ e", "y = a U b", "a != e", "b != e", "a = a \\ b")
    f = {"y": frozenset({X, Y}), "a": frozenset({X}), "b": frozenset({Y}), "e": frozenset()}
    w = build_model(g, f, c, OPS)
    assert isinstance(w, GraphWitness) and w.note.startswith("initialization stalled")


def test_initialization_respects_element_budget():
    g, f, c = fin_graph()
    # ten seed atoms split five and five; the otimes node would add 25 more
    w = build_model(g, f, c, OPS, h0="bound", max_elements=20)
    assert isinstance(w, GraphWitness) and w.note.startswith("initialization budget")
    with pytest.raises(InitializationBudget):
        init_phase(g, f, OPS, h0=100, max_elements=50)
    assert isinstance(build_model(g, f, c, OPS, h0="bound", max_elements=40), FiniteModel)


def test_invariant_checks_fire():
    pp = PartialPartition({X: {Atom(0)}, Y: {Atom(0)}})
    with pytest.raises(InvariantViolation, match="P1"):
        _check_p1(pp)
    pp = PartialPartition({X: set(), Y: set()})
    pp.put(X, Atom(0))
    with pytest.raises(InvariantViolation, match="P1"):
        pp.put(Y, Atom(0))
    g = CGraph(frozenset({X, Y}), {ot(X): {Y}})
    pp = PartialPartition({X: {Atom(0)}, Y: set()})
    with pytest.raises(InvariantViolation, match="P4"):
        _check_p4(pp, g, OPS)


def test_determinism():
    c = normalize(parse("x = otimes(y, z) & y = a U b & a != b & x != y"))[0]
    runs = [decide(c) for _ in range(3)]
    assert all(r.witness == runs[0].witness for r in runs)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["otimes", "times", "pow"]), st.integers(0, 2 ** 32))
def test_build_from_induced_graph_checks_all_invariants(op, seed):
    """Induced graphs of forward-built models: the checked construction never trips an assertion."""
    c, m = forward_instance(random.Random(seed), op)
    g, f = induced_cgraph(venn_partition(m), c)
    w = build_model(g, f, c, OPS, max_elements=5_000, check=True)
    if isinstance(w, FiniteModel):
        assert eval_conjunction(w.assignment, c)
