"""Filling the places of an accessible fulfilling graph with actual sets.

The construction runs in two phases.  Initialization seeds the source places
with fresh atoms and fires ready nodes until every place is nonempty.
Stabilization then keeps a FIFO queue of ripe nodes (nodes whose constructor
output is not yet fully distributed) and drains it.  If the queue empties,
the place contents form a finite partition that satisfies the conjunction;
otherwise the run stops at a round or size budget.

With ``check=True`` the partition properties are asserted as the run goes:
disjointness after every step (P1), nonempty places after initialization
(P2), place contents covered by the outputs of their in-nodes after every
stabilization step (P3), and node outputs covered by their targets at a
stable exit (P4).
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .cgraph import CGraph, accessibility_layers, sources
from .formula import NormalizedConjunction
from .operators import Node, OperatorSpec, apply_constructor, default_registry
from .semantics import Atom, HFTerm, Partition, SetOf, eval_conjunction
from .verdict import FiniteModel, GraphWitness

__all__ = [
    "PartialPartition", "Stable", "BudgetExhausted", "InitializationStalled", "InitializationBudget",
    "InvariantViolation", "ModelSelfCheckError",
    "longest_path", "source_demands", "init_phase", "stabilize", "build_model",
    "DEFAULT_MAX_ROUNDS", "DEFAULT_MAX_ELEMENTS",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 64
DEFAULT_MAX_ELEMENTS = 50_000


class InitializationStalled(RuntimeError):
    """No ready node can supply new elements although some place is still empty."""


class InitializationBudget(RuntimeError):
    """Seeding or a ready node would push the partition past the element budget."""


class InvariantViolation(AssertionError):
    pass


class ModelSelfCheckError(RuntimeError):
    """An assembled model failed semantic evaluation; always an engine bug."""


@dataclass
class PartialPartition:
    contents: dict[int, set[HFTerm]]
    atom_counter: int = 0
    round: int = 0
    checks: int = 0
    owner: dict[HFTerm, int] = field(default_factory=dict)
    # per-place change counters; constructor outputs are cached against them
    versions: dict[int, int] = field(default_factory=dict)
    cache: dict[Node, tuple[tuple[int, ...], SetOf]] = field(default_factory=dict)

    def block(self, q: int) -> SetOf:
        return SetOf._from_members(self.contents[q])

    def blocks(self) -> dict[int, SetOf]:
        return {q: self.block(q) for q in sorted(self.contents)}

    def size(self) -> int:
        return len(self.owner)

    def put(self, q: int, e: HFTerm):
        prev = self.owner.get(e)
        if prev is not None:
            raise InvariantViolation(f"P1: element {e} already placed in p{prev}, now sent to p{q}")
        self.owner[e] = q
        self.contents[q].add(e)
        self.versions[q] = self.versions.get(q, 0) + 1

    def fresh_atom(self) -> Atom:
        a = Atom(self.atom_counter)
        self.atom_counter += 1
        return a


@dataclass(frozen=True)
class Stable:
    partition: Partition
    rounds: int


@dataclass(frozen=True)
class BudgetExhausted:
    rounds: int
    ripe: tuple[Node, ...]
    reason: str = "rounds"


def longest_path(g: CGraph) -> int:
    """Number of distribution layers in the accessibility fixpoint."""
    layers = accessibility_layers(g)
    if len(layers) != len(g.places):
        raise ValueError("graph is not accessible")
    return max(layers.values(), default=0)


def _node_layer(n: Node, layers: Mapping[int, int]) -> int:
    return max((layers[p] for p in n.members), default=0)


def source_demands(g: CGraph) -> dict[int, int]:
    """Per-place element counts that let every initialization firing feed all its targets.

    Works backwards over the accessibility layers: a node with ``t`` targets
    needs each of its places to hold ``t`` times the largest demand among the
    targets that it initializes.  Relies on ``|C(node)| >= |block|`` for
    every bound block.
    """
    layers = accessibility_layers(g)
    if len(layers) != len(g.places):
        raise ValueError("graph is not accessible")
    users: dict[int, list[Node]] = {}
    for n in g.targets:
        for p in n.members:
            users.setdefault(p, []).append(n)
    demand = {}
    for q in sorted(g.places, key=lambda p: (-layers[p], p)):
        need = 1
        for n in users.get(q, ()):
            ts = g.targets[n]
            downstream = [demand[t] for t in ts if layers[t] > layers[q]]
            need = max(need, len(ts) * max(downstream, default=1))
        demand[q] = need
    return demand


def _constructor_size(ops, n: Node, pp: PartialPartition) -> int:
    return ops[n.op].constructor_size([len(pp.contents[p]) for p in n.places])


def _output(ops, n: Node, pp: PartialPartition) -> SetOf:
    stamp = tuple(pp.versions.get(p, 0) for p in n.places)
    hit = pp.cache.get(n)
    if hit is not None and hit[0] == stamp:
        return hit[1]
    out = apply_constructor(ops[n.op], n, {p: pp.block(p) for p in n.members})
    pp.cache[n] = (stamp, out)
    return out


def _check_p1(pp: PartialPartition):
    pp.checks += 1
    seen: set[HFTerm] = set()
    total = 0
    for q in sorted(pp.contents):
        seen |= pp.contents[q]
        total += len(pp.contents[q])
    if len(seen) != total:
        raise InvariantViolation("P1: place contents are not pairwise disjoint")


def _check_p3(pp: PartialPartition, g: CGraph, ops):
    pp.checks += 1
    for q in sorted(g.places):
        pre = g.preimage(q)
        if not pre:
            continue
        produced: set[HFTerm] = set()
        for n in pre:
            produced |= _output(ops, n, pp).members
        if not pp.contents[q] <= produced:
            raise InvariantViolation(f"P3: p{q} holds elements not built by its in-nodes")


def _check_p4(pp: PartialPartition, g: CGraph, ops):
    pp.checks += 1
    for n, ts in g.targets.items():
        covered = set().union(*(pp.contents[t] for t in ts))
        if not _output(ops, n, pp).members <= covered:
            raise InvariantViolation(f"P4: output of {n} not covered by its targets")


def init_phase(g: CGraph, f: Mapping[str, frozenset[int]] | None = None,
               ops: Mapping[str, OperatorSpec] | None = None, h0="minimal",
               check: bool = True, max_elements: int = DEFAULT_MAX_ELEMENTS) -> PartialPartition:
    """Seed the sources with fresh atoms, then fire ready nodes until no place is empty.

    ``h0`` selects the number of seed atoms: ``"bound"`` uses
    ``|places|**(k+1) + 1`` spread round-robin over the sources (``k`` the
    longest path), ``"minimal"`` gives each source its backward demand, and
    an integer fixes the total.
    """
    ops = default_registry() if ops is None else ops
    layers = accessibility_layers(g)
    if len(layers) != len(g.places):
        raise ValueError("graph is not accessible")
    pp = PartialPartition({q: set() for q in g.places})
    srcs = sorted(sources(g))
    if srcs:
        if h0 == "minimal":
            demand = source_demands(g)
            for q in srcs:
                for _ in range(demand[q]):
                    pp.put(q, pp.fresh_atom())
        else:
            if h0 == "bound":
                total = len(g.places) ** (longest_path(g) + 1) + 1
            elif isinstance(h0, int) and h0 >= len(srcs):
                total = h0
            else:
                raise ValueError(f"bad seed size {h0!r}")
            if total > max_elements:
                raise InitializationBudget(f"{total} seed atoms exceed {max_elements}")
            for i in range(total):
                pp.put(srcs[i % len(srcs)], pp.fresh_atom())
    if check:
        _check_p1(pp)

    def initialized(q):
        return bool(pp.contents[q])

    while not all(initialized(q) for q in g.places):
        ready = [n for n, ts in g.targets.items()
                 if all(initialized(p) for p in n.members)
                 and not all(initialized(t) for t in ts)]
        ready.sort(key=lambda n: (_node_layer(n, layers), n))
        for n in ready:
            if pp.size() + _constructor_size(ops, n, pp) > max_elements:
                raise InitializationBudget(f"{n} would exceed {max_elements} elements")
            residual = [e for e in _output(ops, n, pp).elements if e not in pp.owner]
            if residual:
                break
        else:
            empty = sorted(q for q in g.places if not initialized(q))
            raise InitializationStalled(
                f"no ready node can supply places {', '.join(f'p{q}' for q in empty)}")
        ts = sorted(g.targets[n])
        for i, e in enumerate(residual):
            pp.put(ts[i % len(ts)], e)
        log.debug("init node=%s elements=%d targets=%s", n, len(residual), ts)
        if check:
            _check_p1(pp)
    if check:
        pp.checks += 1
        if not all(pp.contents[q] for q in g.places):
            raise InvariantViolation("P2: a place is empty after initialization")
    return pp


def stabilize(pp: PartialPartition, g: CGraph, ops: Mapping[str, OperatorSpec] | None = None,
              max_rounds: int = DEFAULT_MAX_ROUNDS, max_elements: int = DEFAULT_MAX_ELEMENTS,
              check: bool = True):
    """Drain the FIFO queue of ripe nodes; mutates ``pp``."""
    ops = default_registry() if ops is None else ops
    users: dict[int, list[Node]] = {}
    for n in g.targets:
        for p in n.members:
            users.setdefault(p, []).append(n)

    def too_big(n):
        return _constructor_size(ops, n, pp) > max_elements

    def ripe(n):
        return any(e not in pp.owner for e in _output(ops, n, pp).elements)

    queue: deque[Node] = deque()
    for n in g.targets:
        if too_big(n):
            return BudgetExhausted(pp.round, (n,), "elements")
        if ripe(n):
            queue.append(n)
    queued = set(queue)
    while queue:
        if pp.round >= max_rounds:
            return BudgetExhausted(pp.round, tuple(queue))
        n = queue.popleft()
        queued.discard(n)
        out = _output(ops, n, pp)
        ts = g.targets[n]
        residual = []
        for e in out.elements:
            where = pp.owner.get(e)
            if where is None:
                residual.append(e)
            elif where not in ts:
                raise InvariantViolation(f"P1: output of {n} already sits in p{where}")
        dest = min(ts)
        for e in residual:
            pp.put(dest, e)
        pp.round += 1
        log.debug("round=%d node=%s elements=%d targets=%s", pp.round, n, len(residual), [dest])
        if pp.size() > max_elements:
            return BudgetExhausted(pp.round, tuple(queue) + (n,), "elements")
        for m in users.get(dest, ()):
            if too_big(m):
                return BudgetExhausted(pp.round, tuple(queue) + (m,), "elements")
        if check:
            _check_p1(pp)
            _check_p3(pp, g, ops)
        for m in users.get(dest, ()):
            if m in queued:
                continue
            if ripe(m):
                queue.append(m)
                queued.add(m)
    if check:
        _check_p4(pp, g, ops)
    return Stable(Partition(pp.blocks()), pp.round)


def build_model(g: CGraph, f: Mapping[str, frozenset[int]], c: NormalizedConjunction,
                ops: Mapping[str, OperatorSpec] | None = None,
                max_rounds: int = DEFAULT_MAX_ROUNDS, max_elements: int = DEFAULT_MAX_ELEMENTS,
                h0="minimal", check: bool = True):
    """A finite model when the construction stabilizes, else the graph itself as witness."""
    ops = default_registry() if ops is None else ops
    try:
        pp = init_phase(g, f, ops, h0=h0, check=check, max_elements=max_elements)
    except InitializationStalled as e:
        return GraphWitness(g, dict(f), f"initialization stalled: {e}")
    except InitializationBudget as e:
        return GraphWitness(g, dict(f), f"initialization budget (elements) exhausted: {e}")
    outcome = stabilize(pp, g, ops, max_rounds=max_rounds, max_elements=max_elements, check=check)
    if isinstance(outcome, BudgetExhausted):
        return GraphWitness(
            g, dict(f),
            f"stabilization budget ({outcome.reason}) exhausted after {outcome.rounds} rounds")
    blocks = outcome.partition.blocks
    model = {}
    for v in sorted(c.vars):
        elems: set[HFTerm] = set()
        for q in f.get(v, ()):
            elems |= blocks[q].members
        model[v] = SetOf._from_members(elems)
    if not eval_conjunction(model, c, ops):
        raise ModelSelfCheckError(f"assembled model violates {c}")
    return FiniteModel(model)
