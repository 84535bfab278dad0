"""One-sided finite model search over a rank-bounded universe.

The universe starts from ``width_bound`` atoms and is closed level by level
under the element formers of the operators in the conjunction (unordered
pairs, ordered pairs, subsets of at most ``width_bound`` elements).  Each
variable becomes a 0/1 membership vector over the universe and the literals
become linear constraints, solved as a MILP.  Operator arguments may not
contain elements of the top level, so every constructed element stays inside
the universe.  A returned assignment is always re-checked semantically; no
answer proves nothing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from .formula import Diff, Neq, NormalizedConjunction, Op, Union
from .operators import check_compatible, default_registry
from .semantics import Atom, HFTerm, OPair, SetOf, eval_conjunction

__all__ = ["BoundedConfig", "build_universe", "bounded_model_search"]


@dataclass(frozen=True)
class BoundedConfig:
    rank_bound: int = 3
    width_bound: int = 2
    max_universe: int = 20_000
    time_limit: float = 60.0


def build_universe(op_names, rank_bound: int, width_bound: int, max_universe: int = 20_000):
    """Terms up to ``rank_bound`` levels and the level of each; stops early at ``max_universe``."""
    level = {Atom(i): 0 for i in range(width_bound)}
    order: list[HFTerm] = list(level)
    for r in range(1, rank_bound + 1):
        prev = list(order)
        new: set[HFTerm] = set()
        if "otimes" in op_names:
            for u, v in itertools.combinations_with_replacement(prev, 2):
                new.add(SetOf((u, v)))
        if "times" in op_names:
            for u, v in itertools.product(prev, repeat=2):
                new.add(OPair(u, v))
        if "pow" in op_names:
            for k in range(min(width_bound, len(prev)) + 1):
                for sub in itertools.combinations(prev, k):
                    new.add(SetOf(sub))
        new -= set(level)
        if not new or len(order) + len(new) > max_universe:
            break
        for t in sorted(new):
            level[t] = r
            order.append(t)
    return order, level


class _Model:
    def __init__(self):
        self.nvars = 0
        self.rows: list[dict[int, float]] = []
        self.lo: list[float] = []
        self.hi: list[float] = []

    def var(self) -> int:
        self.nvars += 1
        return self.nvars - 1

    def add(self, coeffs: Mapping[int, float], lo=-np.inf, hi=np.inf):
        row: dict[int, float] = {}
        for i, a in coeffs.items():
            row[i] = row.get(i, 0.0) + a
        self.rows.append(row)
        self.lo.append(lo)
        self.hi.append(hi)

    def fix(self, i: int, value: int):
        self.add({i: 1.0}, value, value)

    def conj(self, xs: list[int]) -> int:
        """Fresh variable equal to the AND of ``xs``."""
        if len(xs) == 1:
            return xs[0]
        z = self.var()
        for x in xs:
            self.add({z: 1.0, x: -1.0}, hi=0)
        self.add(_sum_row([(z, 1.0)] + [(x, -1.0) for x in xs]), lo=1 - len(xs))
        return z

    def equals_or(self, y: int, xs: list[int]):
        """Constrain ``y`` to the OR of ``xs`` (0 when empty)."""
        if not xs:
            self.fix(y, 0)
            return
        for x in xs:
            self.add({y: 1.0, x: -1.0}, lo=0)
        self.add(_sum_row([(y, 1.0)] + [(x, -1.0) for x in xs]), hi=0)


def _sum_row(pairs) -> dict[int, float]:
    row: dict[int, float] = {}
    for i, a in pairs:
        row[i] = row.get(i, 0.0) + a
    return row


def bounded_model_search(c: NormalizedConjunction, rank_bound: int = 3, width_bound: int = 2,
                         ops=None, config: BoundedConfig | None = None):
    """A finite model of ``c`` inside the bounded universe, or ``None``."""
    ops = default_registry() if ops is None else ops
    cfg = config or BoundedConfig(rank_bound, width_bound)
    names = c.operators()
    check_compatible(names, ops)
    for name in names:
        if name not in ("otimes", "times", "pow"):
            raise ValueError(f"no element former for operator {name!r}")
    universe, level = build_universe(names, cfg.rank_bound, cfg.width_bound, cfg.max_universe)
    top = max(level.values())
    index = {t: i for i, t in enumerate(universe)}
    vs = sorted(c.vars)
    m = _Model()
    b = {v: [m.var() for _ in universe] for v in vs}
    lower = [i for i, t in enumerate(universe) if level[t] < top]
    upper = [i for i, t in enumerate(universe) if level[t] == top]

    for lit in c.literals:
        if isinstance(lit, Union):
            x, y, z = b[lit.x], b[lit.y], b[lit.z]
            for i in range(len(universe)):
                m.equals_or(x[i], sorted({y[i], z[i]}))
        elif isinstance(lit, Diff):
            x, y, z = b[lit.x], b[lit.y], b[lit.z]
            for i in range(len(universe)):
                if lit.y == lit.z:
                    m.fix(x[i], 0)
                    continue
                m.add({x[i]: 1.0, y[i]: -1.0}, hi=0)
                m.add(_sum_row([(x[i], 1.0), (z[i], 1.0)]), hi=1)
                m.add(_sum_row([(x[i], 1.0), (y[i], -1.0), (z[i], 1.0)]), lo=0)
        elif isinstance(lit, Neq):
            x, y = b[lit.x], b[lit.y]
            if lit.x == lit.y:
                return None
            ds = []
            for i in range(len(universe)):
                d = m.var()
                m.add({d: 1.0, x[i]: -1.0, y[i]: -1.0}, hi=0)
                m.add({d: 1.0, x[i]: 1.0, y[i]: 1.0}, hi=2)
                ds.append(d)
            m.add({d: 1.0 for d in ds}, lo=1)
        elif isinstance(lit, Op):
            x = b[lit.x]
            args = [b[a] for a in lit.args]
            for a in args:
                for i in upper:
                    m.fix(a[i], 0)
            if lit.op == "pow":
                m.add({args[0][i]: 1.0 for i in lower}, hi=cfg.width_bound)
            for i, t in enumerate(universe):
                m.equals_or(x[i], _producers(m, lit.op, t, args, index))
        else:
            raise TypeError(f"not a literal: {lit!r}")

    n = m.nvars
    data, rows, cols = [], [], []
    for r, row in enumerate(m.rows):
        for j, a in row.items():
            if a:
                rows.append(r)
                cols.append(j)
                data.append(a)
    A = coo_matrix((data, (rows, cols)), shape=(len(m.rows), n)).tocsr()
    cost = np.zeros(n)
    for v in vs:
        cost[b[v]] = 1.0
    res = milp(cost, integrality=np.ones(n), bounds=Bounds(0, 1),
               constraints=[LinearConstraint(A, m.lo, m.hi)] if m.rows else [],
               options={"time_limit": cfg.time_limit})
    if res.x is None:
        return None
    model = {v: SetOf(t for i, t in enumerate(universe) if res.x[b[v][i]] > 0.5) for v in vs}
    if not eval_conjunction(model, c, ops):
        raise AssertionError(f"bounded search returned a non-model of {c}")
    return model


def _producers(m: _Model, op: str, t: HFTerm, args, index) -> list[int]:
    """Indicator variables, one per way ``t`` arises from the arguments of ``op``."""
    if op == "otimes":
        if not isinstance(t, SetOf) or not 1 <= len(t) <= 2:
            return []
        y, z = args
        es = t.elements
        u, v = (es[0], es[0]) if len(es) == 1 else es
        iu, iv = index[u], index[v]
        ways = {(iu, iv), (iv, iu)}
        return [m.conj(sorted({y[a], z[bb]})) for a, bb in sorted(ways)]
    if op == "times":
        if not isinstance(t, OPair):
            return []
        y, z = args
        return [m.conj(sorted({y[index[t.first]], z[index[t.second]]}))]
    if op == "pow":
        if not isinstance(t, SetOf):
            return []
        (y,) = args
        if not t.elements:
            return [_one(m)]
        return [m.conj(sorted({y[index[e]] for e in t.elements}))]
    raise ValueError(op)


def _one(m: _Model) -> int:
    z = m.var()
    m.fix(z, 1)
    return z
