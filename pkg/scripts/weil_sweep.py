"""Largest Kloosterman sum against the Weil bound 2 sqrt(p), one row per prime."""
import argparse
import csv
import math
import sys

import sympy

from sumwrap.fourier import kloosterman_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmin", type=int, default=5)
    ap.add_argument("--pmax", type=int, default=500)
    args = ap.parse_args(argv)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["p", "max_magnitude", "bound", "ratio"])
    for p in sympy.primerange(max(args.pmin, 3), args.pmax + 1):
        m = float(kloosterman_sweep(p).max())
        bound = 2 * math.sqrt(p)
        out.writerow([p, f"{m:.6f}", f"{bound:.6f}", f"{m / bound:.6f}"])


if __name__ == "__main__":
    main()
