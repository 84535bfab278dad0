import pytest
from hypothesis import given, settings, strategies as st

from bstc.formula import (And, Atom, Diff, Implies, Neq, Not, NormalizedConjunction, Op, Or,
                          ParseError, Union, conjunction, free_vars, normalize, parse, to_text)
from bstc.formula import _atoms

from oracles import eval_formula, extends, formulas, small_assignments


def test_parse_union_and_neq():
    assert parse("x = y U z & x != y") == And(Atom(Union("x", "y", "z")), Atom(Neq("x", "y")))


def test_parse_pow():
    assert parse("x = pow(y)") == Atom(Op("x", "pow", ("y",)))


def test_parse_arity_mismatch():
    with pytest.raises(ParseError, match="arity"):
        parse("x = otimes(y)")


def test_parse_unknown_operator():
    with pytest.raises(ParseError, match="unknown operator"):
        parse("x = frob(y)")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse("x = y U z &\n  x !=")
    assert (e.value.line, e.value.col) == (2, 7)


def test_sugar():
    assert parse("x = y") == Atom(Union("x", "y", "y"))
    assert parse("x = 0") == Atom(Diff("x", "x", "x"))
    assert parse("x = y \\ z") == Atom(Diff("x", "y", "z"))


def test_variable_named_U():
    # U is the union keyword only when a variable follows it
    assert parse("x = U") == Atom(Union("x", "U", "U"))
    assert parse("U = U U U") == Atom(Union("U", "U", "U"))


def test_comments_and_whitespace():
    f = parse("# leading comment\n x=y U z   # trailing\n&x!=y")
    assert f == parse("x = y U z & x != y")


def test_precedence():
    a, b, c = (Atom(Neq(v, v)) for v in "abc")
    assert parse("a != a | b != b & c != c") == Or(a, And(b, c))
    assert parse("a != a -> b != b -> c != c") == Implies(a, Implies(b, c))
    assert parse("!a != a & b != b") == And(Not(a), b)


def test_registered_arities():
    assert parse("x = f(y, z, w)", arities={"f": 3}) == Atom(Op("x", "f", ("y", "z", "w")))


@pytest.mark.parametrize("text,expected", [
    ("x = y U z", {"x", "y", "z"}),
    ("x != x", {"x"}),
    ("x = otimes(y,z) | w != w", {"x", "y", "z", "w"}),
])
def test_free_vars(text, expected):
    assert free_vars(parse(text)) == expected


@given(formulas(ops=("otimes", "pow")))
def test_print_parse_roundtrip(f):
    assert parse(to_text(f)) == f


def test_negated_union_gets_fresh_variable():
    (c,) = normalize(parse("!(x = y U z)"))
    (w,) = c.fresh_vars
    assert set(c.literals) == {Union(w, "y", "z"), Neq("x", w)}


def test_negated_neq_is_equality():
    (c,) = normalize(parse("!(x != y)"))
    assert c.literals == (Union("x", "y", "y"),)
    assert not c.fresh_vars


def test_negated_op():
    (c,) = normalize(parse("!(x = pow(y))"))
    (w,) = c.fresh_vars
    assert set(c.literals) == {Op(w, "pow", ("y",)), Neq("x", w)}


def test_disjunction_splits():
    cs = normalize(parse("x != y | y = x U z"))
    assert [c.literals for c in cs] == [(Neq("x", "y"),), (Union("y", "x", "z"),)]


def test_propositional_contradiction_vanishes():
    assert normalize(parse("x != y & !(x != y)")) == []


def test_fresh_names_avoid_existing_ones():
    (c,) = normalize(parse("!(x = y U _w0)"))
    assert c.fresh_vars and "_w0" not in c.fresh_vars


def test_conjunction_builder():
    c = conjunction("x = y U z", Neq("x", "y"))
    assert c.vars == {"x", "y", "z"}
    with pytest.raises(ValueError):
        conjunction("x != y & y != z")


@given(formulas())
def test_normalized_shape(f):
    cs = normalize(f)
    n_atoms = len(set(_atoms(f)))
    assert len(cs) <= 2 ** n_atoms
    for c in cs:
        assert all(isinstance(l, (Union, Diff, Op, Neq)) for l in c.literals)
        assert c.fresh_vars <= c.vars
        assert not (c.fresh_vars & free_vars(f))
        assert c.vars == {v for l in c.literals for v in _lit_vars(l)}


def _lit_vars(l):
    if isinstance(l, Op):
        return (l.x, *l.args)
    if isinstance(l, Neq):
        return (l.x, l.y)
    return (l.x, l.y, l.z)


@settings(max_examples=60, deadline=None)
@given(formulas(max_leaves=3), st.sampled_from(["dnf", "enumerate"]))
def test_equisatisfiable_on_small_universe(f, backend):
    """Each assignment over <= 3 atoms satisfies f iff it extends to a model of some disjunct."""
    cs = normalize(f, backend=backend)
    for m in small_assignments(free_vars(f)):
        want = eval_formula(f, m)
        got = any(extends(c, m) for c in cs)
        assert got == want, (to_text(f), m)


def test_normalized_conjunction_vars():
    c = NormalizedConjunction((Union("a", "b", "c"), Neq("d", "a")))
    assert c.vars == {"a", "b", "c", "d"}
    assert str(c) == "a = b U c & d != a"
