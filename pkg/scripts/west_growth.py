"""Empirical w(Z_N): largest Wiener norm of an arc preimage, against log N."""
import argparse
import csv
import math
import sys

from sumwrap.fourier import estimate_w, fit_log_slope


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[101, 211, 503, 1009, 2003, 5003, 10007])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    vals = [estimate_w(N, args.samples, args.seed) for N in args.N]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["N", "w_estimate", "log_N"])
    for N, v in zip(args.N, vals):
        out.writerow([N, f"{v:.6f}", f"{math.log(N):.6f}"])
    slope, intercept = fit_log_slope(args.N, vals)
    print(f"# fit w ~ {slope:.4f} log N + {intercept:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
