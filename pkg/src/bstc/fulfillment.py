"""Fulfillment checking and the graph-search decision procedure.

A conjunction is satisfiable iff some accessible graph with at most
``2**n - 1`` places fulfills it.  The search identifies places with distinct
nonempty variable signatures, so a candidate is just a set of signatures and
the fulfilling map is read off the signatures.  For a fixed candidate the
target map is forced: every generated node may only target places allowed by
all literals (c1, c3), and taking all allowed places is never worse for
covering (c2) or accessibility, so one maximal map is checked per candidate.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Mapping

import networkx as nx

from .cgraph import CGraph, accessibility_layers, graph_from_json, is_accessible
from .formula import Diff, Formula, Neq, NormalizedConjunction, Op, Union, normalize
from .modelgen import DEFAULT_MAX_ELEMENTS, DEFAULT_MAX_ROUNDS, build_model
from .operators import Node, OperatorSpec, check_compatible, default_registry, gen_nodes
from .verdict import FiniteModel, GraphWitness, Verdict

__all__ = [
    "StepCounter", "check_fulfillment", "Certificate", "MalformedCertificate",
    "decide", "decide_formula", "verify_certificate", "foundation_issues",
    "certificate_to_json", "certificate_from_json", "minimize_targets",
    "CERTIFICATE_SCHEMA",
]

CERTIFICATE_SCHEMA = "bstc.certificate/1"


class StepCounter:
    """Counts elementary verifier steps."""

    def __init__(self):
        self.steps = 0

    def tick(self, k: int = 1):
        self.steps += k


def _tick(counter, k=1):
    if counter is not None:
        counter.tick(k)


def check_fulfillment(g: CGraph, f: Mapping[str, frozenset[int]], c: NormalizedConjunction,
                      ops: Mapping[str, OperatorSpec] | None = None, counter=None) -> bool:
    """Whether ``f`` is a fulfilling map of ``g`` for ``c`` (accessibility not included)."""
    ops = default_registry() if ops is None else ops
    for v in c.vars:
        if not f.get(v, frozenset()) <= g.places:
            raise ValueError(f"fulfilling map of {v!r} leaves the graph's places")

    def F(v):
        return f.get(v, frozenset())

    for lit in c.literals:
        _tick(counter)
        if isinstance(lit, Union):
            if F(lit.x) != F(lit.y) | F(lit.z):
                return False
        elif isinstance(lit, Diff):
            if F(lit.x) != F(lit.y) - F(lit.z):
                return False
        elif isinstance(lit, Neq):
            if F(lit.x) == F(lit.y):
                return False
        elif isinstance(lit, Op):
            if lit.op not in ops:
                raise KeyError(f"unknown operator {lit.op!r}")
            q = gen_nodes(ops[lit.op], [F(a) for a in lit.args])
            fx = F(lit.x)
            covered: set[int] = set()
            for n in q:
                _tick(counter)
                ts = g.targets.get(n, frozenset())
                if not ts or not ts <= fx:                  # c1
                    return False
                covered |= ts
            if not fx <= covered:                           # c2
                return False
            for n, ts in g.targets.items():                 # c3
                _tick(counter)
                if n not in q and ts & fx:
                    return False
        else:
            raise TypeError(f"not a literal: {lit!r}")
    return True


# ---------------------------------------------------------------------------
# Certificates


class MalformedCertificate(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    graph: CGraph
    fulfill: Mapping[str, frozenset[int]]
    selection: Mapping[str, tuple[int, ...]]
    disjunct: int = 0


def certificate_to_json(cert: Certificate) -> dict:
    g = cert.graph
    sigs = g.signatures or {}
    return {
        "schema": CERTIFICATE_SCHEMA,
        "disjunct": cert.disjunct,
        "places": sorted(g.places),
        "signatures": {str(p): sorted(sigs.get(p, ())) for p in sorted(g.places)},
        "targets": [{"node": n.to_json(), "to": sorted(ts)} for n, ts in g.targets.items()],
        "selection": {v: list(cert.selection[v]) for v in sorted(cert.selection)},
    }


def certificate_from_json(obj) -> Certificate:
    try:
        if obj.get("schema") != CERTIFICATE_SCHEMA:
            raise MalformedCertificate(f"unsupported certificate schema {obj.get('schema')!r}")
        places = obj["places"]
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in places):
            raise MalformedCertificate("place ids must be integers")
        sigs = {int(p): frozenset(vs) for p, vs in obj["signatures"].items()}
        if set(sigs) != set(places):
            raise MalformedCertificate("every place needs exactly one signature")
        graph = graph_from_json({"places": places, "targets": obj["targets"],
                                 "signatures": obj["signatures"]})
        selection = {v: tuple(ps) for v, ps in obj["selection"].items()}
        for v, ps in selection.items():
            if not set(ps) <= graph.places:
                raise MalformedCertificate(f"selection of {v!r} names unknown places")
        fulfill: dict[str, set[int]] = {}
        for p, vs in sigs.items():
            for v in vs:
                fulfill.setdefault(v, set()).add(p)
        return Certificate(graph, {v: frozenset(ps) for v, ps in fulfill.items()},
                           selection, int(obj.get("disjunct", 0)))
    except MalformedCertificate:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedCertificate(f"malformed certificate: {e}") from e


def verify_certificate(cert: Certificate, c: NormalizedConjunction,
                       ops: Mapping[str, OperatorSpec] | None = None,
                       strict: bool = True, counter=None) -> bool:
    """Size bound, accessibility and fulfillment; polynomial, no search."""
    ops = default_registry() if ops is None else ops
    g = cert.graph
    for v, ps in cert.selection.items():
        if not set(ps) <= g.places:
            raise MalformedCertificate(f"selection of {v!r} names unknown places")
    for v, ps in cert.fulfill.items():
        _tick(counter)
        if not ps <= g.places:
            raise MalformedCertificate(f"fulfilling map of {v!r} names unknown places")
        if v not in c.vars:
            return False
    if strict:
        if len(g.places) > 2 * len(c.vars):
            return False
        selected: set[int] = set()
        for v, ps in cert.selection.items():
            _tick(counter)
            if v not in c.vars or len(ps) > 2 or not set(ps) <= cert.fulfill.get(v, frozenset()):
                return False
            selected |= set(ps)
        if selected != g.places:
            return False
    if not is_accessible(g, counter):
        return False
    return check_fulfillment(g, cert.fulfill, c, ops, counter)


def minimize_targets(g: CGraph, f, c, ops) -> CGraph:
    """Drop distribution edges one at a time while the graph stays accessible and fulfilling."""
    targets = {n: set(ts) for n, ts in g.targets.items()}
    for n, q in g.edges():
        if len(targets[n]) == 1:
            continue
        targets[n].discard(q)
        trial = g.with_targets(targets)
        if not (is_accessible(trial) and check_fulfillment(trial, f, c, ops)):
            targets[n].add(q)
    return g.with_targets(targets)


# ---------------------------------------------------------------------------
# Search


def _local_ok(sig: int, bits: Mapping[str, int], c: NormalizedConjunction) -> bool:
    def has(v):
        return bool(sig & bits[v])

    for lit in c.literals:
        if isinstance(lit, Union) and has(lit.x) != (has(lit.y) or has(lit.z)):
            return False
        if isinstance(lit, Diff) and has(lit.x) != (has(lit.y) and not has(lit.z)):
            return False
    return True


def _maximal_targets(F, op_lits, ops) -> dict[Node, frozenset[int]] | None:
    fams = [gen_nodes(ops[lit.op], [F[a] for a in lit.args]) for lit in op_lits]
    universe = sorted(set().union(*fams))
    allowed = {}
    for n in universe:
        ok = None
        banned: set[int] = set()
        for lit, fam in zip(op_lits, fams):
            if n in fam:
                ok = F[lit.x] if ok is None else ok & F[lit.x]
            else:
                banned |= F[lit.x]
        ts = ok - banned
        if not ts:
            return None
        allowed[n] = ts
    for lit, fam in zip(op_lits, fams):
        covered = set().union(*(allowed[n] for n in fam)) if fam else set()
        if not F[lit.x] <= covered:
            return None
    return allowed


def _selection(places, F, vs) -> dict[str, tuple[int, ...]] | None:
    """Assign every place to a variable owning it, at most two places per variable."""
    G = nx.Graph()
    G.add_nodes_from((("p", p) for p in places), bipartite=0)
    for v in vs:
        for slot in (0, 1):
            G.add_node(("v", v, slot), bipartite=1)
            for p in F[v]:
                G.add_edge(("p", p), ("v", v, slot))
    top = [("p", p) for p in places]
    matching = nx.bipartite.hopcroft_karp_matching(G, top_nodes=top) if top else {}
    if any(t not in matching for t in top):
        return None
    sel: dict[str, list[int]] = {v: [] for v in vs}
    for p in places:
        _, v, _ = matching[("p", p)]
        sel[v].append(p)
    return {v: tuple(sorted(ps)) for v, ps in sel.items()}


def _search(c, ops, mode, budget, stats):
    """Yield accessible fulfilling graphs in canonical order; yields ``"budget"`` when cut off."""
    vs = sorted(c.vars)
    bits = {v: 1 << i for i, v in enumerate(vs)}
    valid = [s for s in range(1, 2 ** len(vs)) if _local_ok(s, bits, c)]
    diseqs = [(bits[l.x], bits[l.y]) for l in c.literals if isinstance(l, Neq)]
    if any(bx == by for bx, by in diseqs):
        return
    op_lits = c.op_literals()
    top = len(valid) if mode == "full" else min(len(valid), 2 * len(vs))
    for size in range(top + 1):
        for S in itertools.combinations(valid, size):
            if budget is not None and stats["candidates"] >= budget:
                yield "budget"
                return
            stats["candidates"] += 1
            if not all(any(bool(s & bx) != bool(s & by) for s in S) for bx, by in diseqs):
                continue
            F = {v: frozenset(s for s in S if s & bits[v]) for v in vs}
            targets = {}
            if op_lits:
                targets = _maximal_targets(F, op_lits, ops)
                if targets is None:
                    continue
            sigs = {s: frozenset(v for v in vs if s & bits[v]) for s in S}
            g = CGraph(frozenset(S), targets, sigs)
            if not is_accessible(g):
                continue
            selection = None
            if mode == "compact":
                selection = _selection(S, F, vs)
                if selection is None:
                    continue
            yield g, F, selection


def _forward_part(g: CGraph, F, c, ops) -> CGraph | None:
    """The graph keeping only edges that go strictly down the accessibility layering.

    Such a graph has no distribution cycle, so its construction always
    stabilizes.  Returns it only if it still fulfills ``c``.
    """
    layers = accessibility_layers(g)
    kept = {}
    for n, ts in g.targets.items():
        depth = max((layers[p] for p in n.members), default=0)
        kept[n] = {q for q in ts if layers[q] > depth}
    trial = g.with_targets(kept)
    if is_accessible(trial) and check_fulfillment(trial, F, c, ops):
        return trial
    return None


# ---------------------------------------------------------------------------
# Foundation diagnostics


def _cycle_through(g: CGraph, n: Node) -> bool:
    users: dict[int, list[Node]] = {}
    for m in g.targets:
        for p in m.members:
            users.setdefault(p, []).append(m)
    seen: set[int] = set()
    stack = list(g.targets[n])
    while stack:
        q = stack.pop()
        if q in n.members:
            return True
        if q in seen:
            continue
        seen.add(q)
        for m in users.get(q, ()):
            stack.extend(g.targets[m])
    return False


def foundation_issues(verdict: Verdict, ops: Mapping[str, OperatorSpec] | None = None) -> list[str]:
    """Places where a graph-only witness rests on the limit construction in a doubtful way.

    Flags nodes of constructors that are not continuous under increasing
    unions (the powerset constructor) lying on a distribution cycle, and
    initialization runs that could not fill every place.
    """
    ops = default_registry() if ops is None else ops
    w = verdict.witness
    if not isinstance(w, GraphWitness):
        return []
    issues = []
    for n in w.graph.targets:
        spec = ops.get(n.op)
        if spec is not None and spec.grounded_empty_node and _cycle_through(w.graph, n):
            issues.append(
                f"{n} lies on a distribution cycle; its constructor is not continuous under "
                "increasing unions, so the limit of the construction need not satisfy the literal")
    if w.note.startswith("initialization stalled"):
        issues.append(f"accessible fulfilling graph cannot be filled: {w.note}")
    return issues


# ---------------------------------------------------------------------------
# Decision


def decide(c: NormalizedConjunction, ops: Mapping[str, OperatorSpec] | None = None,
           mode: str = "full", *, max_rounds: int = DEFAULT_MAX_ROUNDS,
           max_elements: int = DEFAULT_MAX_ELEMENTS, h0="minimal", build: bool = True,
           strict_foundation: bool = False, budget: int | None = None,
           check: bool = True, model_scan: int = 4096) -> Verdict:
    """Decide one normalized conjunction.

    ``mode="full"`` searches every candidate up to ``2**n - 1`` places and
    always returns sat or unsat.  ``mode="compact"`` (injective operators
    only) restricts to at most two places per variable and attaches a
    certificate.  ``budget`` caps the number of candidates examined and is
    the only way to get an unknown verdict.  ``model_scan`` bounds how many
    further graphs are tried when looking for one that yields a finite model.
    """
    ops = default_registry() if ops is None else ops
    if mode not in ("full", "compact"):
        raise ValueError(f"unknown mode {mode!r}")
    names = c.operators()
    for name in names:
        if name not in ops:
            raise KeyError(f"unknown operator {name!r}")
    check_compatible(names, ops)
    if mode == "compact":
        bad = sorted(name for name in names if not ops[name].injective)
        if bad:
            raise ValueError(f"compact mode needs injective operators; got {', '.join(bad)}")
    stats = {"candidates": 0, "mode": mode}
    t0 = time.perf_counter()
    graphs = _search(c, ops, mode, budget, stats)
    found = next(graphs, None)
    stats["search_ms"] = (time.perf_counter() - t0) * 1e3
    if found == "budget":
        return Verdict.unknown(stats=stats)
    if found is None:
        return Verdict.unsat(stats=stats)
    g, F, selection = found
    if not check_fulfillment(g, F, c, ops):
        raise AssertionError("search produced a non-fulfilling graph")
    stats["places"] = len(g.places)
    cert = None
    if mode == "compact":
        cert = Certificate(minimize_targets(g, F, c, ops), F, selection)
    witness: FiniteModel | GraphWitness = GraphWitness(g, F)
    if build:
        t1 = time.perf_counter()
        # The deciding graph may carry distribution cycles even when the
        # conjunction has finite models; look a little further for one without.
        acyclic = _forward_part(g, F, c, ops)
        scanned = 0
        while acyclic is None and scanned < model_scan:
            nxt = next(graphs, None)
            if nxt is None or nxt == "budget":
                break
            scanned += 1
            acyclic = _forward_part(nxt[0], nxt[1], c, ops)
            if acyclic is not None:
                F = nxt[1]
        stats["model_scan"] = scanned
        bg = g if acyclic is None else acyclic
        witness = build_model(bg, F, c, ops, max_rounds=max_rounds,
                              max_elements=max_elements, h0=h0, check=check)
        if isinstance(witness, GraphWitness) and bg is not g:
            witness = build_model(g, found[1], c, ops, max_rounds=max_rounds,
                                  max_elements=max_elements, h0=h0, check=check)
        stats["build_ms"] = (time.perf_counter() - t1) * 1e3
    verdict = Verdict.sat(witness, certificate=cert, stats=stats)
    if strict_foundation:
        verdict.issues = foundation_issues(verdict, ops)
    return verdict


def decide_formula(f: Formula, ops: Mapping[str, OperatorSpec] | None = None,
                   mode: str = "full", **kw) -> Verdict:
    """Sat iff some normalized disjunct is sat; the first sat disjunct supplies the witness."""
    disjuncts = normalize(f)
    total = 0
    unknown = False
    for i, c in enumerate(disjuncts):
        v = decide(c, ops, mode, **kw)
        total += v.stats.get("candidates", 0)
        if v.is_sat:
            v.disjunct = i
            if v.certificate is not None:
                v.certificate = Certificate(v.certificate.graph, v.certificate.fulfill,
                                            v.certificate.selection, i)
            v.stats["candidates_total"] = total
            return v
        unknown |= v.status == "unknown"
    stats = {"candidates_total": total, "disjuncts": len(disjuncts), "mode": mode}
    return Verdict.unknown(stats=stats) if unknown else Verdict.unsat(stats=stats)
