"""Deterministic instance corpora.

A corpus directory holds one formula per ``.bst`` file and a
``manifest.json`` listing each file with its expected verdict.  Expected
verdicts come from the brute-force oracle for operator-free instances and are
``"unknown"`` otherwise, except for a few pinned instances whose verdicts are
fixed by hand.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .formula import Diff, Neq, NormalizedConjunction, Op, Union
from .semantics import brute_force_bst

__all__ = ["CorpusConfig", "PROFILES", "PINNED", "generate", "write_corpus", "load_corpus",
           "CORPUS_SCHEMA"]

CORPUS_SCHEMA = "bstc.corpus/1"

PROFILES = {
    "pure-bst": (),
    "otimes": ("otimes",),
    "times": ("times",),
    "pow": ("pow",),
    # otimes and pow share set-valued constructors, so the mixed profile pairs otimes with times
    "mixed": ("otimes", "times"),
}

PINNED = {
    "otimes": [
        ("x = otimes(x, x) & e = 0 & x != e", "unsat"),
        ("y = otimes(x, x) & x = x U y & x != y", "sat"),
    ],
    "pow": [
        ("y = pow(x) & x = 0", "sat"),
    ],
}

_ARITY = {"otimes": 2, "times": 2, "pow": 1}


@dataclass(frozen=True)
class CorpusConfig:
    profile: str = "pure-bst"
    n: int = 200
    vars: int = 3
    max_literals: int = 4
    seed: int = 0


def _random_literal(rng: random.Random, vs, ops):
    kinds = ["union", "diff", "neq"] + (["op"] * 2 if ops else [])
    kind = rng.choice(kinds)
    if kind == "union":
        return Union(*rng.choices(vs, k=3))
    if kind == "diff":
        return Diff(*rng.choices(vs, k=3))
    if kind == "neq":
        return Neq(*rng.sample(vs, 2)) if len(vs) > 1 else Neq(vs[0], vs[0])
    op = rng.choice(ops)
    return Op(rng.choice(vs), op, tuple(rng.choices(vs, k=_ARITY[op])))


def generate(cfg: CorpusConfig) -> list[tuple[str, str]]:
    """``(formula text, expected verdict)`` pairs, fully determined by the config."""
    if cfg.profile not in PROFILES:
        raise ValueError(f"unknown profile {cfg.profile!r}; choose from {', '.join(PROFILES)}")
    ops = PROFILES[cfg.profile]
    rng = random.Random(f"{cfg.profile}/{cfg.seed}")
    vs = [chr(ord("a") + i) if cfg.vars <= 26 else f"v{i}" for i in range(cfg.vars)]
    out = list(PINNED.get(cfg.profile, ()))[: cfg.n]
    while len(out) < cfg.n:
        k = rng.randint(1, cfg.max_literals)
        lits = [_random_literal(rng, vs, ops) for _ in range(k)]
        if ops and not any(isinstance(l, Op) for l in lits):
            lits[0] = _random_literal(rng, vs, ops)
            while not isinstance(lits[0], Op):
                lits[0] = _random_literal(rng, vs, ops)
        c = NormalizedConjunction(tuple(lits))
        expected = brute_force_bst(c).status if not ops else "unknown"
        out.append((" & ".join(str(l) for l in lits), expected))
    return out


def write_corpus(cfg: CorpusConfig, out: str | Path) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (text, expected) in enumerate(generate(cfg)):
        name = f"{cfg.profile}-{i:04d}.bst"
        (out / name).write_text(text + "\n")
        entries.append({"file": name, "expected": expected})
    manifest = {
        "schema": CORPUS_SCHEMA,
        "profile": cfg.profile,
        "seed": cfg.seed,
        "vars": cfg.vars,
        "instances": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def load_corpus(path: str | Path) -> list[tuple[str, str, str]]:
    """``(name, formula text, expected)`` for every instance; files without a manifest entry are ``unknown``."""
    path = Path(path)
    expected = {}
    mf = path / "manifest.json"
    if mf.exists():
        for e in json.loads(mf.read_text())["instances"]:
            expected[e["file"]] = e["expected"]
    return [(f.name, f.read_text(), expected.get(f.name, "unknown"))
            for f in sorted(path.glob("*.bst"))]
