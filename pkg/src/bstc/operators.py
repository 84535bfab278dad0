"""Operators with disjoint constructors.

An operator is described at two levels.  At the place level it generates the
node family for a literal ``x = op(x1, ..., xn)`` from the place sets of its
arguments (:meth:`OperatorSpec.nodes`).  At the block level its constructor
maps the blocks bound to one node to a set (:meth:`OperatorSpec.construct`),
and the operator on the argument unions is the disjoint union of the
constructor over the node family.

New operators subclass :class:`OperatorSpec` and are added to a registry with
:func:`register`; the engine only talks to this interface.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .semantics import HFTerm, SetOf, op_otimes, op_pow, op_times, pow_star

__all__ = [
    "Node", "OperatorSpec", "Otimes", "Times", "Pow", "OTIMES", "TIMES", "POW",
    "default_registry", "register", "arities", "check_compatible", "IncompatibleOperators",
    "gen_nodes", "apply_constructor", "check_constructor_disjointness",
    "decomposition_identity", "constructor_size_bound",
]


@dataclass(frozen=True, order=True)
class Node:
    """A node of a constructor graph: the operator name and its places.

    Unordered nodes hold a sorted duplicate-free tuple of place ids; ordered
    nodes keep order and multiplicity.
    """

    op: str
    places: tuple[int, ...]
    ordered: bool = False

    @classmethod
    def unordered(cls, op: str, places: Iterable[int]) -> "Node":
        return cls(op, tuple(sorted(set(places))), False)

    @classmethod
    def sequence(cls, op: str, places: Iterable[int]) -> "Node":
        return cls(op, tuple(places), True)

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.places)

    def to_json(self) -> dict:
        return {"op": self.op, "places": list(self.places), "ordered": self.ordered}

    @classmethod
    def from_json(cls, obj) -> "Node":
        places = obj["places"]
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in places):
            raise ValueError(f"bad node places: {places!r}")
        if obj.get("ordered", False):
            return cls.sequence(obj["op"], places)
        return cls.unordered(obj["op"], places)

    def __str__(self):
        inner = ",".join(f"p{p}" for p in self.places)
        return f"{self.op}<{inner}>" if self.ordered else f"{self.op}{{{inner}}}"


class IncompatibleOperators(ValueError):
    pass


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    arity: int
    ordered: bool = False
    injective: bool = False
    polynomial: bool = True
    grounded_empty_node: bool = False
    # Constructors of distinct operators sharing a tag may produce equal
    # elements, so such operators cannot be mixed in one conjunction.
    output_tag: str = "set"

    def nodes(self, arg_places: Sequence[frozenset[int]]) -> frozenset[Node]:
        raise NotImplementedError

    def construct(self, blocks: Sequence[SetOf]) -> SetOf:
        raise NotImplementedError

    def apply(self, *args: SetOf) -> SetOf:
        raise NotImplementedError

    def constructor_size(self, sizes: Sequence[int]) -> int:
        """``|C(node)|`` from the sizes of the bound blocks, without building it."""
        raise NotImplementedError


class Otimes(OperatorSpec):
    def nodes(self, arg_places):
        a, b = arg_places
        return frozenset(Node.unordered(self.name, (p, q)) for p in a for q in b)

    def construct(self, blocks):
        if len(blocks) == 1:
            (s,) = blocks
            return op_otimes(s, s)
        s, t = blocks
        return op_otimes(s, t)

    def apply(self, s, t):
        return op_otimes(s, t)

    def constructor_size(self, sizes):
        if len(sizes) == 1:
            return sizes[0] * (sizes[0] + 1) // 2
        return sizes[0] * sizes[1]


class Times(OperatorSpec):
    def nodes(self, arg_places):
        a, b = arg_places
        return frozenset(Node.sequence(self.name, (p, q)) for p in a for q in b)

    def construct(self, blocks):
        s, t = blocks
        return op_times(s, t)

    def apply(self, s, t):
        return op_times(s, t)

    def constructor_size(self, sizes):
        return sizes[0] * sizes[1]


class Pow(OperatorSpec):
    def nodes(self, arg_places):
        (a,) = arg_places
        a = sorted(a)
        return frozenset(Node.unordered(self.name, c)
                         for k in range(len(a) + 1)
                         for c in itertools.combinations(a, k))

    def construct(self, blocks):
        return pow_star(blocks)

    def apply(self, s):
        return op_pow(s)

    def constructor_size(self, sizes):
        return math.prod(2 ** k - 1 for k in sizes)


OTIMES = Otimes("otimes", 2, ordered=False, injective=True, polynomial=True)
TIMES = Times("times", 2, ordered=True, injective=True, polynomial=True, output_tag="pair")
# Node count is 2**|places of x|; polynomial only once places per variable are bounded.
POW = Pow("pow", 1, ordered=False, injective=True, polynomial=False, grounded_empty_node=True)


def default_registry() -> Mapping[str, OperatorSpec]:
    return MappingProxyType({op.name: op for op in (OTIMES, TIMES, POW)})


def register(ops: Mapping[str, OperatorSpec], spec: OperatorSpec) -> Mapping[str, OperatorSpec]:
    """A new registry extending ``ops`` with ``spec``."""
    if spec.arity < 1:
        raise ValueError("operator arity must be positive")
    return MappingProxyType({**ops, spec.name: spec})


def arities(ops: Mapping[str, OperatorSpec]) -> dict[str, int]:
    return {name: spec.arity for name, spec in ops.items()}


def check_compatible(names: Iterable[str], ops: Mapping[str, OperatorSpec]):
    """Raise if two distinct operators with overlapping constructors are combined."""
    by_tag: dict[str, str] = {}
    for name in sorted(set(names)):
        if name not in ops:
            raise KeyError(f"unknown operator {name!r}")
        tag = ops[name].output_tag
        if tag in by_tag:
            raise IncompatibleOperators(
                f"operators {by_tag[tag]!r} and {name!r} have overlapping constructors "
                "and cannot appear in the same conjunction")
        by_tag[tag] = name


# ---------------------------------------------------------------------------
# Module-level interface


def gen_nodes(op: OperatorSpec, arg_places: Sequence[Iterable[int]]) -> frozenset[Node]:
    if len(arg_places) != op.arity:
        raise ValueError(f"arity mismatch: {op.name} takes {op.arity} argument(s)")
    return op.nodes([frozenset(a) for a in arg_places])


def _bound_blocks(node: Node, blocks: Mapping[int, SetOf]) -> list[SetOf]:
    try:
        bound = [blocks[p] for p in node.places]
    except KeyError as e:
        raise KeyError(f"unbound place {e.args[0]} in node {node}") from None
    distinct = [blocks[p] for p in node.members]
    seen: set[HFTerm] = set()
    for b in distinct:
        if seen & b.members:
            raise ValueError(f"overlapping blocks in node {node}")
        seen |= b.members
    return bound


def apply_constructor(op: OperatorSpec, node: Node, blocks: Mapping[int, SetOf]) -> SetOf:
    bound = _bound_blocks(node, blocks)
    if not bound:
        if not op.grounded_empty_node:
            raise ValueError(f"{op.name} has no empty node")
        return op.construct([])
    return op.construct(bound)


def check_constructor_disjointness(op: OperatorSpec, nodes: Iterable[Node],
                                   blocks: Mapping[int, SetOf]) -> bool:
    seen: set[HFTerm] = set()
    for node in sorted(set(nodes)):
        out = apply_constructor(op, node, blocks).members
        if seen & out:
            return False
        seen |= out
    return True


def decomposition_identity(op: OperatorSpec, arg_sets: Sequence[SetOf],
                           blocks: Mapping[int, SetOf]) -> bool:
    """``op(args) == disjoint union of C(N)`` over the nodes generated from the blocks.

    Every argument must be a union of some of ``blocks``.
    """
    arg_places = []
    for s in arg_sets:
        ps = frozenset(p for p, b in blocks.items() if b.members <= s.members)
        covered = set().union(*(blocks[p].members for p in ps)) if ps else set()
        if covered != set(s.members):
            raise ValueError(f"argument {s} is not a union of blocks")
        arg_places.append(ps)
    parts = [apply_constructor(op, n, blocks) for n in gen_nodes(op, arg_places)]
    union = set().union(*(p.members for p in parts)) if parts else set()
    disjoint = sum(len(p) for p in parts) == len(union)
    return disjoint and union == set(op.apply(*arg_sets).members)


def constructor_size_bound(op: OperatorSpec, node: Node, blocks: Mapping[int, SetOf]) -> bool:
    out = apply_constructor(op, node, blocks)
    return all(len(out) >= len(blocks[p]) for p in node.members)

