"""Verifier step counts on the otimes-chain ladder, with a polynomial fit.

    python scripts/verifier_ladder.py --max-n 64 --step 4 --degree 3 --csv ladder.csv
"""
import argparse
import csv

from bstc.bench import verifier_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-n", type=int, default=4)
    ap.add_argument("--max-n", type=int, default=32)
    ap.add_argument("--step", type=int, default=4)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--csv", help="also write n, size, steps rows here")
    args = ap.parse_args()

    fit = verifier_ladder(range(args.min_n, args.max_n + 1, args.step), degree=args.degree)
    print(f"{'n':>4} {'size':>6} {'steps':>7} accepted")
    for row in zip(fit.ns, fit.sizes, fit.steps, fit.accepted):
        print(f"{row[0]:>4} {row[1]:>6} {row[2]:>7} {row[3]}")
    coeffs = " ".join(f"{a:+.4g}" for a in fit.coeffs)
    print(f"degree {fit.degree} fit, highest power first: {coeffs}")
    print(f"R^2 = {fit.r2:.5f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "size", "steps", "accepted"])
            w.writerows(zip(fit.ns, fit.sizes, fit.steps, fit.accepted))


if __name__ == "__main__":
    main()
