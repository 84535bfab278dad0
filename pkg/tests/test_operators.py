import itertools

import pytest
from hypothesis import given, strategies as st

from bstc.formula import conjunction
from bstc.fulfillment import decide
from bstc.operators import (OTIMES, POW, TIMES, IncompatibleOperators, Node, Otimes,
                            apply_constructor, arities, check_compatible,
                            check_constructor_disjointness, constructor_size_bound,
                            decomposition_identity, default_registry, gen_nodes, register)
from bstc.semantics import EMPTY, Atom, SetOf, op_otimes, op_pow, op_times, pow_star

from oracles import operator_algebra_failures

a, b, c = (Atom(i) for i in range(3))
P, Q = 1, 2


def U(*ps):
    return Node.unordered(OTIMES.name, ps)


def test_otimes_nodes():
    assert gen_nodes(OTIMES, [{P}, {P, Q}]) == {U(P), U(P, Q)}


def test_times_nodes():
    assert gen_nodes(TIMES, [{P}, {P, Q}]) == {Node.sequence("times", (P, P)),
                                                Node.sequence("times", (P, Q))}


def test_pow_nodes_include_empty():
    assert gen_nodes(POW, [{P, Q}]) == {Node.unordered("pow", s) for s in [(), (P,), (Q,), (P, Q)]}


def test_arity_checked():
    with pytest.raises(ValueError):
        gen_nodes(OTIMES, [{P}])


def test_node_canonical_forms():
    assert Node.unordered("otimes", (2, 1, 2)).places == (1, 2)
    assert Node.sequence("times", (2, 1)).places == (2, 1)
    assert Node.from_json(U(1, 2).to_json()) == U(1, 2)
    assert str(Node.sequence("times", (2, 1))) == "times<p2,p1>"


def test_pow_star_examples():
    assert pow_star([SetOf([a]), SetOf([b])]) == SetOf([SetOf([a, b])])
    assert pow_star([]) == SetOf([EMPTY])


def test_otimes_constructor_on_one_block():
    out = apply_constructor(OTIMES, U(P), {P: SetOf([a, b])})
    assert out == SetOf([SetOf([a]), SetOf([b]), SetOf([a, b])])


def test_constructor_errors():
    with pytest.raises(KeyError):
        apply_constructor(OTIMES, U(P, Q), {P: SetOf([a])})
    with pytest.raises(ValueError):
        apply_constructor(OTIMES, U(P, Q), {P: SetOf([a]), Q: SetOf([a, b])})
    with pytest.raises(ValueError):
        apply_constructor(OTIMES, Node.unordered("otimes", ()), {})
    assert apply_constructor(POW, Node.unordered("pow", ()), {}) == SetOf([EMPTY])


def test_disjointness_examples():
    blocks = {1: SetOf([a]), 2: SetOf([b]), 3: SetOf([c])}
    for op in (OTIMES, TIMES, POW):
        nodes = gen_nodes(op, [set(blocks)] * op.arity)
        assert check_constructor_disjointness(op, nodes, blocks)


def test_disjointness_detects_overlap():
    # two distinct nodes over the same blocks, compared with an operator whose
    # constructor ignores the node: not disjoint
    class Constant(Otimes):
        def construct(self, blocks):
            return SetOf([EMPTY])

    op = Constant("const", 2)
    blocks = {1: SetOf([a]), 2: SetOf([b])}
    assert not check_constructor_disjointness(op, [U(1), U(2)], blocks)


def test_decomposition_examples():
    blocks = {1: SetOf([a]), 2: SetOf([b]), 3: SetOf([c])}
    assert decomposition_identity(POW, [SetOf([a, b])], blocks)
    assert decomposition_identity(OTIMES, [SetOf([a]), SetOf([b])], blocks)
    assert decomposition_identity(TIMES, [SetOf([a, b]), SetOf([c])], blocks)
    with pytest.raises(ValueError):
        decomposition_identity(POW, [SetOf([a, Atom(9)])], blocks)


def test_size_bound_examples():
    blocks = {1: SetOf([a, b, c]), 2: SetOf([Atom(3), Atom(4)])}
    assert len(apply_constructor(OTIMES, U(1, 2), blocks)) == 6
    assert constructor_size_bound(OTIMES, U(1, 2), blocks)
    assert len(apply_constructor(POW, Node.unordered("pow", (1,)), blocks)) == 7
    assert constructor_size_bound(POW, Node.unordered("pow", (1,)), blocks)
    assert constructor_size_bound(TIMES, Node.sequence("times", (1, 2)), blocks)


def test_constructor_size_matches_output():
    blocks = {1: SetOf([a, b, c]), 2: SetOf([Atom(3), Atom(4)])}
    for op, n in [(OTIMES, U(1, 2)), (OTIMES, U(1)), (TIMES, Node.sequence("times", (2, 1))),
                  (POW, Node.unordered("pow", (1, 2))), (POW, Node.unordered("pow", ()))]:
        sizes = [len(blocks[p]) for p in n.places]
        assert op.constructor_size(sizes) == len(apply_constructor(op, n, blocks))


def test_algebra_exhaustive():
    failures, checked = operator_algebra_failures(default_registry())
    assert checked > 0 and failures == []


NONEMPTY = [SetOf(s) for k in (1, 2, 3) for s in itertools.combinations([a, b, c], k)]


def test_injectivity_small():
    seen = {}
    for s, t in itertools.product(NONEMPTY, repeat=2):
        seen.setdefault(("otimes", op_otimes(s, t)), set()).add(frozenset([s, t]))
        seen.setdefault(("times", op_times(s, t)), set()).add((s, t))
    assert all(len(v) == 1 for v in seen.values())
    pows = [op_pow(s) for s in NONEMPTY + [EMPTY]]
    assert len(set(pows)) == len(pows)


def test_otimes_not_injective_at_empty():
    assert op_otimes(SetOf([a]), EMPTY) == op_otimes(SetOf([b]), EMPTY)


@given(st.frozensets(st.integers(0, 5)), st.frozensets(st.integers(0, 5)))
def test_node_counts(A, B):
    assert len(gen_nodes(OTIMES, [A, B])) <= len(A | B) ** 2
    assert len(gen_nodes(TIMES, [A, B])) == len(A) * len(B)
    assert len(gen_nodes(POW, [A])) == 2 ** len(A)


def test_registry_and_flags():
    ops = default_registry()
    assert arities(ops) == {"otimes": 2, "times": 2, "pow": 1}
    assert OTIMES.injective and not OTIMES.ordered and OTIMES.polynomial
    assert TIMES.ordered and TIMES.injective
    assert POW.grounded_empty_node and POW.injective and not POW.polynomial
    with pytest.raises(TypeError):
        ops["x"] = OTIMES


def test_incompatible_mix():
    check_compatible({"otimes", "times"}, default_registry())
    with pytest.raises(IncompatibleOperators):
        check_compatible({"otimes", "pow"}, default_registry())
    with pytest.raises(IncompatibleOperators):
        decide(conjunction("x = otimes(y, y)", "z = pow(y)"))


def test_plugged_operator_is_used_generically():
    # the unordered product under another name, with its own output tag
    sym = Otimes("sym", 2, injective=True, output_tag="sym")
    ops = register(default_registry(), sym)
    from bstc.formula import normalize, parse
    (cj,) = normalize(parse("y = sym(x, x) & x = x U y & x != y", arities={"sym": 2}))
    assert decide(cj, ops, build=False).is_sat
    (cj,) = normalize(parse("x = sym(x, x) & e = 0 & x != e", arities={"sym": 2}))
    assert decide(cj, ops).is_unsat
    with pytest.raises(ValueError):
        register(ops, Otimes("bad", 0))
