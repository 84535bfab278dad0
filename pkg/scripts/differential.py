"""Differential run of the graph search against independent oracles.

Operator-free instances are checked against the brute-force Venn-region
search.  Instances with operators are checked one way only: a model found by
the rank-bounded search must come with a sat verdict, and every finite model
the engine returns must evaluate true.

    python scripts/differential.py --profile mixed --n 300 --seed 1
"""
import argparse
import collections
import time

from bstc.bounded import bounded_model_search
from bstc.corpus import PROFILES, CorpusConfig, generate
from bstc.formula import normalize, parse
from bstc.fulfillment import decide
from bstc.semantics import brute_force_bst, eval_conjunction
from bstc.verdict import FiniteModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="pure-bst")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--vars", type=int, default=3)
    ap.add_argument("--max-literals", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rank-bound", type=int, default=2)
    args = ap.parse_args()

    tally = collections.Counter()
    problems = []
    t = time.perf_counter()
    cfg = CorpusConfig(args.profile, args.n, args.vars, args.max_literals, args.seed)
    for text, _ in generate(cfg):
        for c in normalize(parse(text)):
            v = decide(c)
            tally[v.status] += 1
            if isinstance(v.witness, FiniteModel) and not eval_conjunction(v.witness.assignment, c):
                problems.append(("bad model", str(c)))
            if not c.operators():
                if brute_force_bst(c).is_sat != v.is_sat:
                    problems.append(("brute force disagrees", str(c)))
                continue
            m = bounded_model_search(c, rank_bound=args.rank_bound)
            tally["bounded model"] += m is not None
            if m is not None and not v.is_sat:
                problems.append(("bounded model for an unsat verdict", str(c)))
    print(f"{args.profile}: {dict(tally)} in {time.perf_counter() - t:.1f}s")
    for kind, c in problems:
        print(f"  {kind}: {c}")
    print("no disagreements" if not problems else f"{len(problems)} disagreements")
    return 1 if problems else 0


if __name__ == "__main__":
    raise SystemExit(main())
