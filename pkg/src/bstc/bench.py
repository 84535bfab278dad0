"""Benchmark harness: per-instance timings, differential checks and the verifier ladder.

CSV columns (one row per corpus instance)::

    instance        file name
    n_vars          variables after normalization (first disjunct)
    n_literals      literals after normalization (first disjunct)
    expected        manifest verdict (sat / unsat / unknown)
    full_status     verdict in full mode
    full_ms         wall time of full mode, milliseconds
    full_candidates candidate place sets examined in full mode
    witness         model / cgraph / empty
    places          places of the witness graph
    compact_status  verdict in compact mode, or n/a
    compact_ms      wall time of compact mode
    compact_candidates
    verify_steps    verifier steps on the compact certificate, empty if none
    agree           whether the full verdict matches a known expected verdict
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import load_corpus
from .fulfillment import (Certificate, StepCounter, certificate_from_json, certificate_to_json,
                          decide_formula, verify_certificate)
from .formula import NormalizedConjunction, Op, Neq, normalize, parse
from .cgraph import CGraph
from .operators import Node

__all__ = ["BENCH_COLUMNS", "run_bench", "ladder_instance", "verifier_ladder", "LadderFit"]

BENCH_COLUMNS = [
    "instance", "n_vars", "n_literals", "expected",
    "full_status", "full_ms", "full_candidates", "witness", "places",
    "compact_status", "compact_ms", "compact_candidates", "verify_steps", "agree",
]


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t) * 1e3


def run_bench(corpus: str | Path, out: str | Path, max_rounds: int = 64) -> list[dict]:
    rows = []
    for name, text, expected in load_corpus(corpus):
        f = parse(text)
        disjuncts = normalize(f)
        first = disjuncts[0] if disjuncts else NormalizedConjunction(())
        full, full_ms = _timed(lambda: decide_formula(f, mode="full", max_rounds=max_rounds))
        row = {
            "instance": name, "n_vars": len(first.vars), "n_literals": len(first.literals),
            "expected": expected, "full_status": full.status, "full_ms": f"{full_ms:.3f}",
            "full_candidates": full.stats.get("candidates_total", ""),
            "witness": full.witness.kind if full.witness else "",
            "places": len(full.witness.graph.places) if full.witness and full.witness.kind == "cgraph"
            else full.stats.get("places", ""),
            "compact_status": "n/a", "compact_ms": "", "compact_candidates": "", "verify_steps": "",
            "agree": "" if expected == "unknown" else str(expected == full.status).lower(),
        }
        try:
            comp, comp_ms = _timed(lambda: decide_formula(f, mode="compact", build=False))
        except ValueError:
            comp = None
        if comp is not None:
            row.update(compact_status=comp.status, compact_ms=f"{comp_ms:.3f}",
                       compact_candidates=comp.stats.get("candidates_total", ""))
            if comp.certificate is not None:
                counter = StepCounter()
                verify_certificate(comp.certificate, disjuncts[comp.disjunct], counter=counter)
                row["verify_steps"] = counter.steps
        rows.append(row)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# Verifier ladder


def ladder_instance(n: int) -> tuple[NormalizedConjunction, Certificate]:
    """A chain ``x{i+1} = otimes(x{i}, x{i})``, ``x{i} != x{i+1}`` and a matching certificate.

    Place ``i`` holds exactly variable ``x{i}``; the only edges are
    ``otimes{i} -> i+1``.  The chain is satisfiable (start from one atom).
    """
    if n < 2:
        raise ValueError("ladder needs at least two variables")
    vs = [f"x{i}" for i in range(n)]
    lits = []
    for i in range(n - 1):
        lits.append(Op(vs[i + 1], "otimes", (vs[i], vs[i])))
        lits.append(Neq(vs[i], vs[i + 1]))
    c = NormalizedConjunction(tuple(lits))
    targets = {Node.unordered("otimes", (i,)): frozenset({i + 1}) for i in range(n - 1)}
    g = CGraph(frozenset(range(n)), targets, {i: frozenset({vs[i]}) for i in range(n)})
    cert = Certificate(g, {v: frozenset({i}) for i, v in enumerate(vs)},
                       {v: (i,) for i, v in enumerate(vs)})
    # round-trip so the ladder exercises the same path as certificates read from disk
    return c, certificate_from_json(certificate_to_json(cert))


@dataclass(frozen=True)
class LadderFit:
    ns: tuple[int, ...]
    sizes: tuple[int, ...]
    steps: tuple[int, ...]
    degree: int
    coeffs: tuple[float, ...]
    r2: float
    accepted: tuple[bool, ...]


def verifier_ladder(ns=range(4, 33, 4), degree: int = 3) -> LadderFit:
    """Verifier step counts along the ladder and a least-squares polynomial fit in ``n``."""
    sizes, steps, accepted = [], [], []
    for n in ns:
        c, cert = ladder_instance(n)
        counter = StepCounter()
        accepted.append(verify_certificate(cert, c, counter=counter))
        steps.append(counter.steps)
        sizes.append(len(cert.graph.places) + len(cert.graph.edges()) + len(c.literals))
    x = np.asarray(list(ns), dtype=float)
    y = np.asarray(steps, dtype=float)
    coeffs = np.polyfit(x, y, degree)
    pred = np.polyval(coeffs, x)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return LadderFit(tuple(ns), tuple(sizes), tuple(steps), degree,
                     tuple(float(a) for a in coeffs), r2, tuple(accepted))
