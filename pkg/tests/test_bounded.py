import pytest

from bstc.bounded import BoundedConfig, bounded_model_search, build_universe
from bstc.formula import conjunction, normalize, parse
from bstc.semantics import EMPTY, Atom, SetOf, eval_conjunction, rank


def test_pow_of_empty():
    m = bounded_model_search(conjunction("x = pow(y)", "y = y \\ y"))
    assert m == {"x": SetOf([EMPTY]), "y": EMPTY}


def test_empty_only():
    assert bounded_model_search(conjunction("x = x \\ x")) == {"x": EMPTY}


@pytest.mark.parametrize("rank_bound", [1, 2, 3, 4])
def test_no_finite_model_for_pairs_inside_their_base(rank_bound):
    c = conjunction("y = otimes(x, x)", "x = x U y", "x != y")
    assert bounded_model_search(c, rank_bound=rank_bound) is None


def test_models_are_verified():
    for text in ["x = otimes(y,z) & x != y & x != z & y != z",
                 "y = times(x, x) & e = 0 & x != e",
                 "y = pow(x) & z = pow(y) & e = 0 & x != e"]:
        (c,) = normalize(parse(text))
        m = bounded_model_search(c)
        assert m is not None and eval_conjunction(m, c)


def test_universe_levels():
    universe, level = build_universe({"otimes"}, 2, 2)
    # two atoms, three pairs over them, then pairs over those five
    assert len(universe) == 2 + 3 + 12
    assert all(rank(t) == level[t] for t in universe)
    assert universe[:2] == [Atom(0), Atom(1)]


def test_self_disequality_short_circuits():
    assert bounded_model_search(conjunction("x != x")) is None


def test_config_object():
    cfg = BoundedConfig(rank_bound=1, width_bound=1)
    assert bounded_model_search(conjunction("x = pow(y)", "y = y \\ y"), config=cfg) is not None
