"""Exact small-p optima and annealed densities for the two extremal problems.

Rows with method=exhaustive are exact; method=anneal rows are lower bounds.
The seeds (ninth and eighth constructions) are reported for comparison.
"""
import argparse
import csv
import sys

import sympy

from sumwrap.experiments import construct_extremal, exhaustive_extremal, stochastic_search
from sumwrap.experiments.search import EXHAUSTIVE_CAPS

PROBLEMS = {"max_sumfree_selfinv": ("max_sumfree_selfinv", "ninth"),
            "min_alpha_coverage": ("max_noncover", "eighth")}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--anneal-primes", type=int, nargs="+", default=[101, 211, 503, 1009])
    ap.add_argument("--budget", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["problem", "method", "p", "size", "density", "construction_density"])
    for problem, (objective, cons) in PROBLEMS.items():
        for p in sympy.primerange(5, EXHAUSTIVE_CAPS[problem] + 1):
            r = exhaustive_extremal(p, problem).results
            out.writerow([problem, "exhaustive", p, r["optimum"], f"{r['density']:.6f}",
                          f"{construct_extremal(cons, p).density:.6f}"])
        for p in args.anneal_primes:
            r = stochastic_search(p, objective, args.budget, args.seed).results
            out.writerow([problem, "anneal", p, r["best"], f"{r['density']:.6f}",
                          f"{construct_extremal(cons, p).density:.6f}"])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
