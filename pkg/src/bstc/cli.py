"""Command-line frontend: ``bstc decide | verify | gen | bench``.

Exit codes
    decide  0 sat, 1 unsat, 2 error, 3 unknown (only with --budget)
    verify  0 valid certificate, 1 invalid, 2 malformed input
    gen     0 ok, 2 error
    bench   0 ok (1 if a known expected verdict disagrees), 2 error
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .bench import run_bench, verifier_ladder
from .cgraph import fulfill_to_json, graph_to_json
from .corpus import PROFILES, CorpusConfig, write_corpus
from .formula import ParseError, normalize, parse
from .fulfillment import (MalformedCertificate, certificate_from_json, certificate_to_json,
                          decide_formula, verify_certificate)
from .modelgen import DEFAULT_MAX_ELEMENTS, DEFAULT_MAX_ROUNDS
from .operators import IncompatibleOperators
from .semantics import assignment_to_json
from .verdict import Verdict

REPORT_SCHEMA = "bstc.report/1"
EXIT = {"sat": 0, "unsat": 1, "unknown": 3}


@dataclass(frozen=True)
class RunConfig:
    formula: str
    mode: str = "full"
    max_rounds: int = DEFAULT_MAX_ROUNDS
    max_elements: int = DEFAULT_MAX_ELEMENTS
    strict_foundation: bool = False
    # The engine is deterministic; the seed is recorded so reports from
    # seeded corpora carry it along.
    seed: int = 0
    budget: int | None = None
    h0: str = "minimal"
    output: str = "text"


def report_schema() -> dict:
    return json.loads(resources.files("bstc").joinpath("schemas/report.schema.json").read_text())


def verdict_to_json(v: Verdict, cfg: RunConfig, elapsed_ms: float) -> dict:
    w = v.witness
    if w is None:
        witness = None
    elif w.kind == "model":
        witness = {"kind": "model", "assignment": assignment_to_json(w.assignment)}
    else:
        witness = {"kind": "cgraph", "graph": graph_to_json(w.graph),
                   "fulfill": fulfill_to_json(w.fulfill), "note": w.note}
    return {
        "schema": REPORT_SCHEMA,
        "input": cfg.formula,
        "status": v.status,
        "disjunct": v.disjunct,
        "witness": witness,
        "certificate": certificate_to_json(v.certificate) if v.certificate else None,
        "issues": list(v.issues),
        "stats": {k: val for k, val in v.stats.items()},
        "timing_ms": elapsed_ms,
        "config": {"mode": cfg.mode, "max_rounds": cfg.max_rounds, "seed": cfg.seed,
                   "strict_foundation": cfg.strict_foundation},
    }


def run_decide(cfg: RunConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    t = time.perf_counter()
    v = decide_formula(parse(cfg.formula), mode=cfg.mode, max_rounds=cfg.max_rounds,
                       max_elements=cfg.max_elements, strict_foundation=cfg.strict_foundation,
                       budget=cfg.budget, h0=cfg.h0)
    elapsed = (time.perf_counter() - t) * 1e3
    rep = verdict_to_json(v, cfg, elapsed)
    if cfg.output == "json":
        out.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"{v.status}\n")
        if rep["witness"] is not None:
            w = v.witness
            if w.kind == "model":
                for name in sorted(w.assignment):
                    out.write(f"  {name} = {w.assignment[name]}\n")
            else:
                out.write(f"  graph witness with {len(w.graph.places)} places"
                          f"{': ' + w.note if w.note else ''}\n")
        for issue in v.issues:
            out.write(f"  issue: {issue}\n")
    return EXIT[v.status]


def run_verify(formula: str, cert_text: str) -> int:
    try:
        obj = json.loads(cert_text)
        if isinstance(obj, dict) and obj.get("schema") == REPORT_SCHEMA:
            obj = obj.get("certificate")
        cert = certificate_from_json(obj)
        disjuncts = normalize(parse(formula))
        if not 0 <= cert.disjunct < len(disjuncts):
            raise MalformedCertificate(f"certificate names disjunct {cert.disjunct} "
                                       f"of {len(disjuncts)}")
        ok = verify_certificate(cert, disjuncts[cert.disjunct])
    except (json.JSONDecodeError, MalformedCertificate, ParseError, AttributeError) as e:
        print(f"malformed: {e}", file=sys.stderr)
        return 2
    print("valid" if ok else "invalid")
    return 0 if ok else 1


def _read_formula(args) -> str:
    if args.formula is not None:
        return args.formula
    if args.input is None:
        raise SystemExit("give --input FILE or --formula TEXT")
    return sys.stdin.read() if args.input == "-" else Path(args.input).read_text()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bstc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("decide", help="decide satisfiability of a formula")
    d.add_argument("--input", "-i", help="formula file, or - for stdin")
    d.add_argument("--formula", "-f", help="formula text")
    d.add_argument("--mode", choices=["full", "compact"], default="full")
    d.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    d.add_argument("--max-elements", type=int, default=DEFAULT_MAX_ELEMENTS)
    d.add_argument("--budget", type=int, default=None,
                   help="cap on candidate place sets; exceeding it reports unknown")
    d.add_argument("--h0", choices=["minimal", "bound"], default="minimal",
                   help="seed size for model building")
    d.add_argument("--json", action="store_true")
    d.add_argument("--strict-foundation", action="store_true")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--cert-out", help="write the compact-mode certificate here")
    d.add_argument("-v", "--verbose", action="store_true", help="trace model building")

    v = sub.add_parser("verify", help="check a certificate against a formula")
    v.add_argument("--input", "-i", help="formula file")
    v.add_argument("--formula", "-f", help="formula text")
    v.add_argument("--cert", "-c", required=True, help="certificate or decide report (JSON)")

    g = sub.add_parser("gen", help="generate a corpus")
    g.add_argument("--profile", choices=sorted(PROFILES), default="pure-bst")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--vars", type=int, default=3)
    g.add_argument("--max-literals", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="time a corpus and fit the verifier ladder")
    b.add_argument("--corpus", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--ladder", action="store_true", help="also run the verifier ladder")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "decide":
            if args.verbose:
                logging.basicConfig(level=logging.DEBUG, format="%(message)s", stream=sys.stderr)
            cfg = RunConfig(_read_formula(args), args.mode, args.max_rounds, args.max_elements,
                            args.strict_foundation, args.seed, args.budget, args.h0,
                            "json" if args.json else "text")
            if args.cert_out:
                buf = io.StringIO()
                code = run_decide(RunConfig(**{**asdict(cfg), "output": "json"}), buf)
                rep = json.loads(buf.getvalue())
                if rep["certificate"] is not None:
                    Path(args.cert_out).write_text(json.dumps(rep["certificate"], indent=2) + "\n")
                if cfg.output == "json":
                    sys.stdout.write(buf.getvalue())
                else:
                    print(rep["status"])
                return code
            return run_decide(cfg)
        if args.cmd == "verify":
            try:
                formula = _read_formula(args)
                cert_text = Path(args.cert).read_text()
            except OSError as e:
                print(f"error: {e}", file=sys.stderr)
                return 2
            return run_verify(formula, cert_text)
        if args.cmd == "gen":
            cfg = CorpusConfig(args.profile, args.n, args.vars, args.max_literals, args.seed)
            out = write_corpus(cfg, args.out)
            print(f"wrote {args.n} instances to {out}")
            return 0
        if args.cmd == "bench":
            rows = run_bench(args.corpus, args.out)
            bad = [r["instance"] for r in rows if r["agree"] == "false"]
            print(f"{len(rows)} instances, {len(bad)} disagreements -> {args.out}")
            if args.ladder:
                fit = verifier_ladder()
                print(f"ladder n={list(fit.ns)} steps={list(fit.steps)} "
                      f"degree={fit.degree} r2={fit.r2:.4f}")
            return 1 if bad else 0
    except (ParseError, IncompatibleOperators, KeyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
