"""Hereditarily finite set terms and the explicit (model-level) semantics.

Terms are immutable and canonical: a :class:`SetOf` keeps its elements sorted
under a fixed total order (``Atom < SetOf < OPair``, lexicographic within a
kind) with duplicates removed, so structural equality is extensional
equality.  Atoms are opaque naturals; they are never sets or pairs, which is
what makes them a safe seed for model construction.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .formula import Diff, Neq, NormalizedConjunction, Op, Union

__all__ = [
    "HFTerm", "Atom", "SetOf", "OPair", "EMPTY",
    "canonicalize", "term_to_json", "term_from_json",
    "assignment_to_json", "assignment_from_json",
    "set_union", "set_diff", "op_otimes", "op_times", "op_pow", "pow_star",
    "rank", "eval_literal", "eval_conjunction",
    "Partition", "PartitionAssignment", "venn_partition", "brute_force_bst",
]


class HFTerm:
    __slots__ = ("_key", "_hash")

    def _init_key(self, key, parts=()):
        # hash from the children's cached hashes; hashing the nested key
        # directly would revisit shared subterms
        self._key = key
        self._hash = hash((key[0], *parts)) if parts else hash(key)

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, HFTerm) and self._hash == other._hash and self._key == other._key

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < other._key

    def __le__(self, other):
        return self._key <= other._key

    def __gt__(self, other):
        return self._key > other._key

    def __ge__(self, other):
        return self._key >= other._key


class Atom(HFTerm):
    __slots__ = ("id",)

    def __init__(self, id: int):
        if id < 0:
            raise ValueError("atom ids are naturals")
        self.id = id
        self._init_key((0, id))

    def __repr__(self):
        return f"Atom({self.id})"

    def __str__(self):
        return f"a{self.id}"


class SetOf(HFTerm):
    """A finite set of terms, kept sorted and duplicate-free."""

    __slots__ = ("elements", "_members")

    def __init__(self, elements: Iterable[HFTerm] = ()):
        elems = tuple(sorted(set(elements)))
        for e in elems:
            if not isinstance(e, HFTerm):
                raise TypeError(f"not a term: {e!r}")
        self._set(elems)

    def _set(self, elems: tuple[HFTerm, ...]):
        self.elements = elems
        self._members = None
        self._init_key((1, tuple(e._key for e in elems)), (len(elems), *(e._hash for e in elems)))

    @classmethod
    def _from_members(cls, members: Iterable[HFTerm]) -> "SetOf":
        obj = cls.__new__(cls)
        obj._set(tuple(sorted(members)))
        return obj

    @property
    def members(self) -> frozenset[HFTerm]:
        if self._members is None:
            self._members = frozenset(self.elements)
        return self._members

    def __contains__(self, item):
        return item in self.members

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"SetOf({list(self.elements)!r})"

    def __str__(self):
        return "{" + ", ".join(str(e) for e in self.elements) + "}"


class OPair(HFTerm):
    __slots__ = ("first", "second")

    def __init__(self, first: HFTerm, second: HFTerm):
        self.first = first
        self.second = second
        self._init_key((2, first._key, second._key), (first._hash, second._hash))

    def __repr__(self):
        return f"OPair({self.first!r}, {self.second!r})"

    def __str__(self):
        return f"<{self.first}, {self.second}>"


EMPTY = SetOf()


def canonicalize(t) -> HFTerm:
    """Canonical term from a term or its JSON encoding; idempotent."""
    if isinstance(t, Atom):
        return t
    if isinstance(t, SetOf):
        return SetOf(canonicalize(e) for e in t.elements)
    if isinstance(t, OPair):
        return OPair(canonicalize(t.first), canonicalize(t.second))
    return term_from_json(t)


def term_to_json(t: HFTerm):
    if isinstance(t, Atom):
        return {"atom": t.id}
    if isinstance(t, SetOf):
        return {"set": [term_to_json(e) for e in t.elements]}
    return {"pair": [term_to_json(t.first), term_to_json(t.second)]}


def term_from_json(obj) -> HFTerm:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"bad term encoding: {obj!r}")
    (kind, val), = obj.items()
    if kind == "atom":
        if not isinstance(val, int) or isinstance(val, bool):
            raise ValueError(f"bad atom id: {val!r}")
        return Atom(val)
    if kind == "set":
        return SetOf(term_from_json(e) for e in val)
    if kind == "pair":
        if len(val) != 2:
            raise ValueError("a pair has exactly two components")
        return OPair(term_from_json(val[0]), term_from_json(val[1]))
    raise ValueError(f"bad term kind: {kind!r}")


def assignment_to_json(m: Mapping[str, SetOf]) -> dict:
    return {v: term_to_json(m[v]) for v in sorted(m)}


def assignment_from_json(obj: Mapping) -> dict[str, SetOf]:
    out = {}
    for v, t in obj.items():
        term = term_from_json(t)
        if not isinstance(term, SetOf):
            raise ValueError(f"variable {v} must be assigned a set")
        out[v] = term
    return out


def rank(t: HFTerm) -> int:
    """Set-theoretic rank; atoms and the empty set have rank 0, a pair one above its parts."""
    if isinstance(t, Atom):
        return 0
    if isinstance(t, OPair):
        return 1 + max(rank(t.first), rank(t.second))
    return max((rank(e) + 1 for e in t.elements), default=0)


# ---------------------------------------------------------------------------
# Set operations


def _need_set(*ts):
    for t in ts:
        if not isinstance(t, SetOf):
            raise TypeError(f"operand is not a set: {t!r}")


def set_union(s: SetOf, t: SetOf) -> SetOf:
    _need_set(s, t)
    return SetOf._from_members(s.members | t.members)


def set_diff(s: SetOf, t: SetOf) -> SetOf:
    _need_set(s, t)
    return SetOf._from_members(s.members - t.members)


def op_otimes(s: SetOf, t: SetOf) -> SetOf:
    """Unordered Cartesian product ``{{u, v} | u in s, v in t}``."""
    _need_set(s, t)
    return SetOf._from_members({SetOf((u, v)) for u in s.elements for v in t.elements})


def op_times(s: SetOf, t: SetOf) -> SetOf:
    _need_set(s, t)
    return SetOf._from_members({OPair(u, v) for u in s.elements for v in t.elements})


def op_pow(s: SetOf) -> SetOf:
    _need_set(s)
    elems = s.elements
    subsets = (SetOf._from_members(c)
               for k in range(len(elems) + 1)
               for c in itertools.combinations(elems, k))
    return SetOf._from_members(subsets)


def _nonempty_subsets(s: SetOf):
    elems = s.elements
    for k in range(1, len(elems) + 1):
        yield from itertools.combinations(elems, k)


def pow_star(blocks: Iterable[SetOf]) -> SetOf:
    """Subsets of the union of ``blocks`` meeting every block; ``{EMPTY}`` for no blocks."""
    blocks = list(blocks)
    _need_set(*blocks)
    choices = [list(_nonempty_subsets(b)) for b in blocks]
    out = set()
    for pick in itertools.product(*choices):
        out.add(SetOf._from_members(itertools.chain.from_iterable(pick)))
    return SetOf._from_members(out)


# ---------------------------------------------------------------------------
# Evaluation


def _default_ops():
    from .operators import default_registry
    return default_registry()


def eval_literal(m: Mapping[str, SetOf], lit, ops=None) -> bool:
    def val(v):
        try:
            return m[v]
        except KeyError:
            raise KeyError(f"variable {v!r} is not assigned") from None

    if isinstance(lit, Union):
        return val(lit.x) == set_union(val(lit.y), val(lit.z))
    if isinstance(lit, Diff):
        return val(lit.x) == set_diff(val(lit.y), val(lit.z))
    if isinstance(lit, Neq):
        return val(lit.x) != val(lit.y)
    if isinstance(lit, Op):
        ops = _default_ops() if ops is None else ops
        spec = ops[lit.op]
        return val(lit.x) == spec.apply(*(val(a) for a in lit.args))
    raise TypeError(f"not a literal: {lit!r}")


def eval_conjunction(m: Mapping[str, SetOf], c: NormalizedConjunction, ops=None) -> bool:
    """True iff every literal of ``c`` holds extensionally under ``m``."""
    missing = c.vars - set(m)
    if missing:
        raise KeyError(f"unassigned variables: {sorted(missing)}")
    ops = _default_ops() if ops is None and c.op_literals() else ops
    return all(eval_literal(m, lit, ops) for lit in c.literals)


# ---------------------------------------------------------------------------
# Partitions


@dataclass(frozen=True)
class Partition:
    """Pairwise disjoint nonempty blocks keyed by block id."""

    blocks: Mapping[int, SetOf]

    def __post_init__(self):
        seen: set[HFTerm] = set()
        for bid, b in self.blocks.items():
            _need_set(b)
            if not len(b):
                raise ValueError(f"block {bid} is empty")
            if seen & b.members:
                raise ValueError(f"block {bid} overlaps another block")
            seen |= b.members

    def __len__(self):
        return len(self.blocks)

    def domain(self) -> SetOf:
        return SetOf._from_members(itertools.chain.from_iterable(b.elements for b in self.blocks.values()))


@dataclass(frozen=True)
class PartitionAssignment:
    partition: Partition
    assign: Mapping[str, frozenset[int]]
    signatures: Mapping[int, frozenset[str]] | None = None

    def induced(self) -> dict[str, SetOf]:
        blocks = self.partition.blocks
        return {v: SetOf._from_members(itertools.chain.from_iterable(blocks[b].elements for b in ids))
                for v, ids in self.assign.items()}


def venn_partition(m: Mapping[str, SetOf]) -> PartitionAssignment:
    """Nonempty Venn regions of ``m``; block ids are signature bitmasks over sorted variables."""
    vs = sorted(m)
    bit = {v: 1 << i for i, v in enumerate(vs)}
    region: dict[HFTerm, int] = {}
    for v in vs:
        for e in m[v].elements:
            region[e] = region.get(e, 0) | bit[v]
    members: dict[int, list[HFTerm]] = {}
    for e, sig in region.items():
        members.setdefault(sig, []).append(e)
    blocks = {sig: SetOf._from_members(es) for sig, es in sorted(members.items())}
    assign = {v: frozenset(sig for sig in blocks if sig & bit[v]) for v in vs}
    sigs = {sig: frozenset(v for v in vs if sig & bit[v]) for sig in blocks}
    return PartitionAssignment(Partition(blocks), assign, sigs)


@functools.lru_cache(maxsize=None)
def _region_patterns(n: int) -> tuple[tuple[frozenset[int], ...], ...]:
    """For each inhabitation pattern of the ``2**n - 1`` regions, the region set of each variable."""
    regions = range(1, 2 ** n)
    out = []
    for choice in range(2 ** (2 ** n - 1)):
        inhabited = [r for r in regions if choice >> (r - 1) & 1]
        out.append(tuple(frozenset(r for r in inhabited if r >> j & 1) for j in range(n)))
    return tuple(out)


def _holds(lit, val) -> bool:
    if isinstance(lit, Union):
        return val[lit.x] == val[lit.y] | val[lit.z]
    if isinstance(lit, Diff):
        return val[lit.x] == val[lit.y] - val[lit.z]
    return val[lit.x] != val[lit.y]


def brute_force_bst(c: NormalizedConjunction):
    """Complete satisfiability check for operator-free conjunctions.

    Every one of the ``2**n - 1`` Venn regions is either left empty or
    inhabited by one fresh atom; all inhabitation patterns are tried with
    plain finite sets of region ids.  A satisfying pattern is turned into
    an explicit model and re-checked with :func:`eval_conjunction`.
    """
    from .verdict import FiniteModel, Verdict

    if c.op_literals():
        raise ValueError("brute_force_bst only handles operator-free conjunctions")
    vs = sorted(c.vars)
    for pattern in _region_patterns(len(vs)):
        val = dict(zip(vs, pattern))
        if all(_holds(lit, val) for lit in c.literals):
            m = {v: SetOf(Atom(r) for r in val[v]) for v in vs}
            if not eval_conjunction(m, c):
                raise AssertionError("region pattern and explicit model disagree")
            return Verdict.sat(FiniteModel(m))
    return Verdict.unsat()
