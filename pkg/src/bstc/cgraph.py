"""Constructor graphs: places, nodes and the target map.

Membership edges (place -> node) are implicit in the node's places; only the
distribution edges are stored, as ``targets[node] = frozenset(places)``.
Nodes without targets are never stored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .formula import NormalizedConjunction
from .operators import Node, OperatorSpec, apply_constructor, default_registry, gen_nodes
from .semantics import PartitionAssignment

__all__ = [
    "CGraph", "c_places", "sources", "accessibility_layers", "is_accessible",
    "induced_cgraph", "to_dot", "graph_to_json", "graph_from_json",
    "fulfill_to_json", "fulfill_from_json",
]


@dataclass(frozen=True)
class CGraph:
    places: frozenset[int]
    targets: Mapping[Node, frozenset[int]]
    signatures: Mapping[int, frozenset[str]] | None = field(default=None, compare=False)

    def __post_init__(self):
        places = frozenset(self.places)
        kept = {}
        for node, ts in self.targets.items():
            ts = frozenset(ts)
            if not ts:
                continue
            if not ts <= places:
                raise ValueError(f"node {node} targets unknown places {sorted(ts - places)}")
            if not node.members <= places:
                raise ValueError(f"node {node} uses unknown places {sorted(node.members - places)}")
            kept[node] = ts
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "targets", MappingProxyType(dict(sorted(kept.items()))))

    @property
    def nodes(self) -> list[Node]:
        return list(self.targets)

    def edges(self) -> list[tuple[Node, int]]:
        return [(n, q) for n, ts in self.targets.items() for q in sorted(ts)]

    def with_targets(self, targets: Mapping[Node, Iterable[int]]) -> "CGraph":
        return CGraph(self.places, {n: frozenset(t) for n, t in targets.items()}, self.signatures)

    def preimage(self, q: int) -> list[Node]:
        return [n for n, ts in self.targets.items() if q in ts]


def c_places(g: CGraph) -> frozenset[int]:
    return frozenset().union(*g.targets.values()) if g.targets else frozenset()


def sources(g: CGraph) -> frozenset[int]:
    return g.places - c_places(g)


def accessibility_layers(g: CGraph, counter=None) -> dict[int, int]:
    """First layer at which each place is reached by the accessibility fixpoint.

    Sources sit at layer 0.  A node fires once all its places are reached
    (the empty node immediately) and its targets are reached one layer after
    its latest place.  Unreached places are absent from the result.
    """
    layer = {q: 0 for q in sources(g)}
    missing = {n: len(n.members) for n in g.targets}
    users: dict[int, list[Node]] = {}
    for n in g.targets:
        for p in n.members:
            users.setdefault(p, []).append(n)
    ready_at: dict[int, list[Node]] = {0: [n for n, k in missing.items() if k == 0]}
    frontier = sorted(layer)
    depth = 0
    while frontier or ready_at.get(depth):
        fired = ready_at.pop(depth, [])
        for p in frontier:
            for n in users.get(p, ()):
                if counter is not None:
                    counter.tick()
                missing[n] -= 1
                if missing[n] == 0:
                    fired.append(n)
        nxt = []
        for n in fired:
            for q in g.targets[n]:
                if counter is not None:
                    counter.tick()
                if q not in layer:
                    layer[q] = depth + 1
                    nxt.append(q)
        frontier = sorted(nxt)
        depth += 1
    return layer


def is_accessible(g: CGraph, counter=None) -> bool:
    return len(accessibility_layers(g, counter)) == len(g.places)


def induced_cgraph(pa: PartitionAssignment, c: NormalizedConjunction,
                   ops: Mapping[str, OperatorSpec] | None = None):
    """Graph and fulfilling map read off a partition assignment.

    Places are the block ids.  For every operator literal, each generated
    node targets exactly the blocks its constructor output meets.
    """
    ops = default_registry() if ops is None else ops
    blocks = pa.partition.blocks
    where = {e: b for b, blk in blocks.items() for e in blk.elements}
    targets: dict[Node, frozenset[int]] = {}
    for lit in c.op_literals():
        spec = ops[lit.op]
        for node in gen_nodes(spec, [pa.assign[a] for a in lit.args]):
            if node in targets:
                continue
            out = apply_constructor(spec, node, blocks)
            targets[node] = frozenset(where[e] for e in out.elements if e in where)
    g = CGraph(frozenset(blocks), targets, pa.signatures)
    fulfill = {v: frozenset(pa.assign.get(v, frozenset())) for v in sorted(c.vars)}
    return g, fulfill


# ---------------------------------------------------------------------------
# Serialization


def graph_to_json(g: CGraph) -> dict:
    out = {
        "places": sorted(g.places),
        "targets": [{"node": n.to_json(), "to": sorted(ts)} for n, ts in g.targets.items()],
    }
    if g.signatures is not None:
        out["signatures"] = {str(p): sorted(g.signatures[p]) for p in sorted(g.signatures)}
    return out


def graph_from_json(obj) -> CGraph:
    places = frozenset(obj["places"])
    targets = {}
    for entry in obj["targets"]:
        node = Node.from_json(entry["node"])
        if node in targets:
            raise ValueError(f"duplicate node {node}")
        targets[node] = frozenset(entry["to"])
    sigs = None
    if "signatures" in obj:
        sigs = {int(p): frozenset(vs) for p, vs in obj["signatures"].items()}
    return CGraph(places, targets, sigs)


def fulfill_to_json(f: Mapping[str, frozenset[int]]) -> dict:
    return {v: sorted(f[v]) for v in sorted(f)}


def fulfill_from_json(obj) -> dict[str, frozenset[int]]:
    return {v: frozenset(ps) for v, ps in obj.items()}


def to_dot(g: CGraph, name: str = "cgraph") -> str:
    lines = [f"digraph {json.dumps(name)} {{"]
    for q in sorted(g.places):
        label = f"p{q}"
        if g.signatures and q in g.signatures:
            label += "\\n{" + ",".join(sorted(g.signatures[q])) + "}"
        lines.append(f'  "p{q}" [shape=circle, label="{label}"];')
    for i, (n, ts) in enumerate(g.targets.items()):
        nid = f"n{i}"
        lines.append(f'  "{nid}" [shape=box, label="{n}"];')
        for p in n.members:
            lines.append(f'  "p{p}" -> "{nid}" [style=dashed];')
        for q in sorted(ts):
            lines.append(f'  "{nid}" -> "p{q}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
