"""Finite checks of the additive inequalities used by the applications."""
from __future__ import annotations

import math

import numpy as np

from ..groups import (
    GroupSet,
    InequalityViolation,
    coverage_a_a_plus_a,
    exception_set,
    partial_sumset,
    random_set,
    sumset,
    invert_set,
)
from .report import ExperimentReport, inequality, timed

UNCOVERED_LIMIT = 20


def _need_prime(S: GroupSet) -> None:
    if not S.group.is_prime:
        raise ValueError(f"needs a prime modulus, got {S.N}")


def check_cauchy_davenport(A: GroupSet, B: GroupSet) -> ExperimentReport:
    _need_prime(A)
    A._check(B)
    if not A.cardinality or not B.cardinality:
        raise ValueError("Cauchy-Davenport needs nonempty sets")
    p = A.N
    report = ExperimentReport("check-cd", p, {"size_a": A.cardinality, "size_b": B.cardinality})
    with timed(report):
        lhs = sumset(A, B).cardinality
        rhs = min(p, A.cardinality + B.cardinality - 1)
        report.results = {"sumset_size": lhs, "bound": rhs, "slack": lhs - rhs,
                          "inequality": inequality(lhs, rhs, ">=")}
    if lhs < rhs:
        raise InequalityViolation(f"|A+B|={lhs} < {rhs}")
    return report


def check_pollard_partial(A: GroupSet, B: GroupSet, eps: float) -> ExperimentReport:
    """|A +_eps B| >= min(p, |A|+|B|) - 2 sqrt(eps) p, asserted only for 0 < eps < min(alpha, beta)^2."""
    _need_prime(A)
    A._check(B)
    p = A.N
    alpha, beta = A.cardinality / p, B.cardinality / p
    applicable = 0 < eps < min(alpha, beta) ** 2
    report = ExperimentReport("check-pollard", p, {"eps": eps, "alpha": alpha, "beta": beta})
    with timed(report):
        lhs = partial_sumset(A, B, eps).cardinality if eps > 0 else sumset(A, B).cardinality
        rhs = min(p, A.cardinality + B.cardinality) - 2 * math.sqrt(eps) * p
        report.results = {"partial_sumset_size": lhs, "bound": rhs, "slack": lhs - rhs,
                          "applicable": applicable, "inequality": inequality(lhs, rhs, ">=")}
    if applicable and lhs < rhs:
        raise InequalityViolation(f"|A+_eps B|={lhs} < {rhs}")
    return report


def verify_coverage(A: GroupSet) -> ExperimentReport:
    _need_prime(A)
    p = A.N
    report = ExperimentReport("verify-coverage", p, {"size": A.cardinality})
    with timed(report):
        cover = coverage_a_a_plus_a(A)
        uncovered = np.flatnonzero(~cover.bits[1:]) + 1
        report.results = {
            "covered": uncovered.size == 0,
            "density": A.cardinality / p,
            "uncovered_count": int(uncovered.size),
            "uncovered": [int(x) for x in uncovered[:UNCOVERED_LIMIT]],
            "one_covered": bool(cover.bits[1]),
            "zero_in_product_set": bool(cover.bits[0]),
        }
    return report


def verify_a_plus_ainv(A: GroupSet, eps: float | None = None) -> ExperimentReport:
    """|A + A*| (and |A +_eps A*|) against min(2 sqrt(|A| p), p); trend data, no assertion."""
    _need_prime(A)
    if A.bits[0]:
        raise ValueError("0 must not belong to A")
    p = A.N
    report = ExperimentReport("verify-aainv", p, {"size": A.cardinality, "eps": eps})
    with timed(report):
        Ainv = invert_set(A)
        ref = min(2 * math.sqrt(A.cardinality * p), p)
        size = sumset(A, Ainv).cardinality
        report.results = {"sumset_size": size, "reference": ref,
                          "ratio": size / ref if ref else math.nan,
                          "density": A.cardinality / p}
        if eps is not None:
            psize = partial_sumset(A, Ainv, eps).cardinality
            report.results.update({"partial_size": psize,
                                   "partial_ratio": psize / ref if ref else math.nan})
    return report


def random_pair_sweep(check: str, p: int, n_pairs: int, seed: int, eps: float | None = None,
                      min_density: float = 0.05) -> ExperimentReport:
    """Random pairs of sets of uniform random sizes, one row per pair.

    For the Pollard check eps is drawn uniformly below min(alpha, beta)^2
    unless given.
    """
    rng = np.random.default_rng(seed)
    report = ExperimentReport(f"sweep-{check}", p, {"pairs": n_pairs, "eps": eps}, seed=seed)
    low = max(1, int(min_density * p))
    with timed(report):
        worst = math.inf
        applicable = 0
        for _ in range(n_pairs):
            A = random_set(p, int(rng.integers(low, p + 1)), rng)
            B = random_set(p, int(rng.integers(low, p + 1)), rng)
            if check == "cd":
                res = check_cauchy_davenport(A, B).results
            elif check == "pollard":
                e = eps if eps is not None else float(rng.uniform(0, 1)) * min(A.density, B.density) ** 2
                res = check_pollard_partial(A, B, e).results
                res = dict(res, eps=e)
                applicable += res["applicable"]
            else:
                raise ValueError(f"unknown check {check!r}")
            row = {"p": p, "size_a": A.cardinality, "size_b": B.cardinality}
            if "eps" in res:
                row["eps"] = res["eps"]
            row.update({"measured": res["inequality"]["lhs"], "bound": res["inequality"]["rhs"]})
            report.rows.append(row)
            worst = min(worst, row["measured"] - row["bound"])
        report.results = {"pairs": n_pairs, "violations": 0, "min_slack": worst}
        if check == "pollard":
            report.results["applicable"] = applicable
    return report


def exception_set_sweep(p: int, n_instances: int, seed: int) -> ExperimentReport:
    """Random (X, Y, delta, T) instances of the exception-set bound |E| <= |X|/T."""
    rng = np.random.default_rng(seed)
    report = ExperimentReport("sweep-exception", p, {"instances": n_instances}, seed=seed)
    with timed(report):
        worst = 0.0
        for _ in range(n_instances):
            X = random_set(p, int(rng.integers(max(1, p // 20), p + 1)), rng)
            Y = random_set(p, int(rng.integers(max(1, p // 20), p + 1)), rng)
            delta = float(rng.uniform(0.005, 0.3))
            T = float(rng.uniform(1.05, 8.0))
            E = exception_set(X, Y, delta, T)
            ratio = E.cardinality * T / X.cardinality
            worst = max(worst, ratio)
            report.rows.append({"p": p, "size_x": X.cardinality, "size_y": Y.cardinality,
                                "delta": delta, "T": T, "measured": E.cardinality,
                                "bound": X.cardinality / T})
        report.results = {"instances": n_instances, "violations": 0, "max_ratio": worst}
    return report
