"""Chain quantities of the proof replays across primes and error scales.

At the default delta = 0.02 the a_a_a chain is degenerate at desk-scale p
(the threshold for R exceeds alpha, so r = s = 1); the smaller values of
delta show r(1-r)/2 settling near 1/8.
"""
import argparse
import csv
import sys

from sumwrap.experiments import construct_extremal, replay_proof

RUNS = {
    "sumfree_selfinv": ("ninth", None, [0.02, 0.005]),
    "a_a_a": ("eighth", None, [0.02, 0.005, 0.002, 0.0005]),
    "a_plus_ainv": ("lambda", 0.5, [0.005, 0.002]),
}
COLUMNS = ["alpha", "beta", "r", "s", "r(1-r)/2", "l", "l_prime", "ll'", "T"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--primes", type=int, nargs="+", default=[1009, 2003, 5003, 10007])
    ap.add_argument("--xi", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["kind", "p", "delta", *COLUMNS])
    for kind, (cons, lam, deltas) in RUNS.items():
        for p in args.primes:
            A = construct_extremal(cons, p, lam)
            for delta in deltas:
                res = replay_proof(kind, p, A, delta, args.xi, seed=args.seed).results
                out.writerow([kind, p, delta] + [f"{res[c]:.6f}" if c in res else "" for c in COLUMNS])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
