"""Numerical replays of the three dense-set proofs.

Each replay builds the proof's chain of partial sumsets, exception sets and
wrappers for one concrete A, asserts every structural inclusion the proof
relies on, and records the density inequalities with both sides measured.
Asymptotic conclusions are reported, never asserted.

Partial differences X -_t Y are the partial sumsets of X and -Y.
"""
from __future__ import annotations

import math

import numpy as np

from ..groups import (
    GroupSet,
    complement,
    exception_set,
    invert_set,
    is_sum_free,
    make_set,
    negate,
    partial_difference,
    partial_sumset,
    sumset,
)
from ..wrappers import DecomposeConfig, intersect_with_inverse, materialize, wrap_sumset_complement
from .report import ExperimentReport, inequality, require, require_subset, timed

KINDS = ("a_a_a", "sumfree_selfinv", "a_plus_ainv")


class HypothesisError(ValueError):
    """The input set does not satisfy the replayed theorem's hypotheses."""


def _inv(S: GroupSet) -> GroupSet:
    return invert_set(S - make_set([0], S.N))


def _complement_of_partial(X: GroupSet, Y: GroupSet, t: float) -> GroupSet:
    return complement(partial_sumset(X, Y, t))


class _Chain:
    """Shared bookkeeping: wrappers, their summaries and recorded checks."""

    def __init__(self, A: GroupSet, xi: float, seed: int, config: DecomposeConfig | None):
        self.A = A
        self.p = A.N
        self.xi = xi
        self.rng = np.random.default_rng(seed)
        self.config = config
        self.inclusions: dict = {}
        self.inequalities: dict = {}
        self.wrappers: dict = {}

    def wrap(self, name: str, X: GroupSet, Y: GroupSet, eta: float, width: float):
        W, Yexc = wrap_sumset_complement(X, Y, eta, width, self.xi, self.rng, self.config)
        Wset = materialize(W)
        info = W.info
        outer = _complement_of_partial(X, Y, eta + width)
        require(self.inequalities, f"|{name}| <= |outer| + |Y|", Wset.cardinality,
                outer.cardinality + Yexc.cardinality)
        self.wrappers[name] = {
            "size": Wset.cardinality,
            "exceptional": Yexc.cardinality,
            "epsilon": info.get("epsilon", 1.0),
            "d": info.get("d", 1),
            "d_distinct": info.get("d_distinct", 1),
            "K": info.get("K", 1),
            "omega": info.get("omega", 0.0),
            "eta": eta,
            "width": width,
        }
        return W, Wset, Yexc

    def density(self, S: GroupSet) -> float:
        return S.cardinality / self.p


def replay_sumfree_selfinv(A: GroupSet, delta: float, xi: float, seed: int,
                           config: DecomposeConfig | None = None) -> dict:
    if A.bits[0] or not is_sum_free(A) or _inv(A) != A:
        raise HypothesisError("A must avoid 0, be sum-free and satisfy A = A*")
    c = _Chain(A, xi, seed, config)
    alpha = c.density(A)
    B = _complement_of_partial(A, A, delta)
    beta = c.density(B)
    require_subset(c.inclusions, "A in B", A, B)
    W, Wset, Y = c.wrap("W_B", A, A, delta / 2, delta / 2)
    require_subset(c.inclusions, "A minus Y in W", A - Y, Wset)
    require_subset(c.inclusions, "W minus Y in B", Wset - Y, B)
    Aprime = A - (Y | _inv(Y))
    require_subset(c.inclusions, "A' in W cap W*", Aprime, Wset & _inv(Wset))
    est = intersect_with_inverse(W, W)
    require(c.inequalities, "|W| <= |B| + |Y|", Wset.cardinality, B.cardinality + Y.cardinality)
    require(c.inequalities, "|A'| <= |W cap W*|", Aprime.cardinality, est.exact)
    # the O(delta^(1/4)) error term is written with constant 1
    slack = delta ** 0.25
    c.inequalities["alpha - 2 xi <= beta^2"] = inequality(alpha - 2 * xi, beta ** 2)
    c.inequalities["1 - beta >= 2 sqrt(alpha) - delta^(1/4)"] = inequality(
        1 - beta, 2 * math.sqrt(alpha) - slack, ">=")
    c.inequalities["alpha - 2 xi <= (1 - 2 sqrt(alpha) + delta^(1/4) + xi)^2"] = inequality(
        alpha - 2 * xi, (1 - 2 * math.sqrt(alpha) + slack + xi) ** 2)
    return {
        "alpha": alpha, "alpha_prime": c.density(Aprime), "beta": beta,
        "w_density": c.density(Wset),
        "intersection": {"exact": est.exact, "main_term": est.main_term,
                         "error_bound": est.error_bound, "ratio": est.ratio},
        "wrappers": c.wrappers, "inclusions": c.inclusions, "inequalities": c.inequalities,
    }


def replay_a_a_a(A: GroupSet, delta: float, xi: float, T: float, seed: int,
                 config: DecomposeConfig | None = None) -> dict:
    """Chain B, R, S for a set with 1 outside A(A+A)."""
    if A.bits[0] or not A.cardinality:
        raise HypothesisError("A must be a nonempty subset of F_p^*")
    Ainv = _inv(A)
    if not sumset(A, A).isdisjoint(Ainv):
        raise HypothesisError("1 lies in A(A+A)")
    c = _Chain(A, xi, seed, config)
    alpha = c.density(A)
    tR = delta * T / alpha
    tS = delta * T ** 2 / alpha ** 2
    if not tR < 1:
        raise HypothesisError(f"delta T / alpha = {tR:.4g} must be below 1")

    B = complement(partial_difference(Ainv, A, delta))
    require_subset(c.inclusions, "A in B", A, B)
    WB, WBset, YB = c.wrap("W_B", Ainv, negate(A), delta, delta)
    require_subset(c.inclusions, "A minus Y_B in W_B", A - YB, WBset)

    E1 = exception_set(Ainv, A, delta, T)
    R = _complement_of_partial(A, B, tR)
    require_subset(c.inclusions, "A* minus E1 in R", Ainv - E1, R)
    WR, WRset, YR = c.wrap("W_R", A, B, tR, tR)
    require_subset(c.inclusions, "A* minus (E1 cup Y_R) in W_R", Ainv - (E1 | YR), WRset)

    E2 = exception_set(A, negate(B), tR, T)
    S = _complement_of_partial(negate(B), R, tS)
    require_subset(c.inclusions, "A minus E2 in S", A - E2, S)
    WS, WSset, YS = c.wrap("W_S", negate(B), R, tS, tS)
    require_subset(c.inclusions, "A minus (E2 cup Y_S) in W_S", A - (E2 | YS), WSset)

    Aprime = A - (YB | _inv(E1) | _inv(YR) | E2 | YS)
    WRinv = _inv(WRset)
    require_subset(c.inclusions, "A' in W_B cap W_R*", Aprime, WBset & WRinv)
    require_subset(c.inclusions, "A' in W_S cap W_R*", Aprime, WSset & WRinv)
    require(c.inequalities, "|E1| <= |A|/T", E1.cardinality, A.cardinality / T)
    require(c.inequalities, "|E2| <= |A|/T", E2.cardinality, A.cardinality / T)
    for name, Wset, X, Y in (("B", WBset, B, YB), ("R", WRset, R, YR), ("S", WSset, S, YS)):
        # W minus Y lies in the complement of the doubled-threshold partial sumset, which can exceed X
        c.inequalities[f"|W_{name}| vs |{name}| + |Y_{name}|"] = inequality(
            Wset.cardinality, X.cardinality + Y.cardinality)
    est_BR = intersect_with_inverse(WB, WR)
    est_SR = intersect_with_inverse(WS, WR)
    require(c.inequalities, "|A'| <= |W_B cap W_R*|", Aprime.cardinality, est_BR.exact)
    require(c.inequalities, "|A'| <= |W_S cap W_R*|", Aprime.cardinality, est_SR.exact)
    beta, r, s = c.density(B), c.density(R), c.density(S)
    c.inequalities["alpha <= r beta"] = inequality(alpha, r * beta)
    c.inequalities["alpha <= r s"] = inequality(alpha, r * s)
    c.inequalities["s <= 1 - beta - r + 2 sqrt(tS)"] = inequality(s, 1 - beta - r + 2 * math.sqrt(tS))
    c.inequalities["alpha <= r(1 - r)/2"] = inequality(alpha, r * (1 - r) / 2)
    return {
        "alpha": alpha, "alpha_prime": c.density(Aprime), "beta": beta, "r": r, "s": s,
        "r(1-r)/2": r * (1 - r) / 2, "T": T, "threshold_R": tR, "threshold_S": tS,
        "pollard_applicable_S": bool(tS < min(beta, r) ** 2),
        "E1": E1.cardinality, "E2": E2.cardinality,
        "intersections": {
            "W_B cap W_R*": {"exact": est_BR.exact, "main_term": est_BR.main_term,
                             "error_bound": est_BR.error_bound},
            "W_S cap W_R*": {"exact": est_SR.exact, "main_term": est_SR.main_term,
                             "error_bound": est_SR.error_bound},
        },
        "wrappers": c.wrappers, "inclusions": c.inclusions, "inequalities": c.inequalities,
    }


def replay_a_plus_ainv(A: GroupSet, eps: float, xi: float, T: float | None, seed: int,
                       config: DecomposeConfig | None = None) -> dict:
    """Chain B, L, L', P for the partial sumset A +_eps A*."""
    if A.bits[0] or not A.cardinality:
        raise HypothesisError("A must be a nonempty subset of F_p^*")
    c = _Chain(A, xi, seed, config)
    alpha = c.density(A)
    if T is None:
        T = alpha ** 0.75 * eps ** -0.25
    if not T > 1:
        raise HypothesisError(f"T = {T:.4g} must exceed 1; lower eps")
    dL = eps * T / alpha
    dP = eps * T ** 2 / alpha ** 2
    if not dL < 1:
        raise HypothesisError(f"eps T / alpha = {dL:.4g} must be below 1")
    Ainv = _inv(A)
    B = _complement_of_partial(A, Ainv, eps)
    beta = c.density(B)

    L = complement(partial_difference(B, A, dL))
    Lp = complement(partial_difference(B, Ainv, dL))
    E = exception_set(Ainv, negate(A), eps, T)
    Ep = exception_set(A, negate(Ainv), eps, T)
    require_subset(c.inclusions, "A* minus E in L", Ainv - E, L)
    require_subset(c.inclusions, "A minus E' in L'", A - Ep, Lp)
    WL, WLset, YL = c.wrap("W_L", B, negate(A), dL, dL)
    WLp, WLpset, YLp = c.wrap("W_L'", B, negate(Ainv), dL, dL)
    require_subset(c.inclusions, "A* minus (E cup Y_L) in W_L", Ainv - (E | YL), WLset)
    require_subset(c.inclusions, "A minus (E' cup Y_L') in W_L'", A - (Ep | YLp), WLpset)
    A1 = A - (_inv(E) | Ep | _inv(YL) | YLp)
    require_subset(c.inclusions, "A' in W_L' cap W_L*", A1, WLpset & _inv(WLset))
    est_LL = intersect_with_inverse(WLp, WL)
    require(c.inequalities, "|A'| <= |W_L' cap W_L*|", A1.cardinality, est_LL.exact)
    l, lp = c.density(L), c.density(Lp)
    c.inequalities["alpha(1 - 2/T) - 2 xi <= (l + xi)(l' + xi)"] = inequality(
        alpha * (1 - 2 / T) - 2 * xi, (l + xi) * (lp + xi))

    E2 = exception_set(A, B, dL, T)
    P = complement(partial_difference(B, L, dP))
    require_subset(c.inclusions, "A minus E2 in P", A - E2, P)
    WP, WPset, YP = c.wrap("W_P", B, negate(L), dP, dP)
    require_subset(c.inclusions, "A minus (E2 cup Y_P) in W_P", A - (E2 | YP), WPset)
    A2 = A - (_inv(E) | E2 | _inv(YL) | YP)
    require_subset(c.inclusions, "A'' in W_L* cap W_P", A2, WPset & _inv(WLset))
    est_PL = intersect_with_inverse(WP, WL)
    require(c.inequalities, "|A''| <= |W_P cap W_L*|", A2.cardinality, est_PL.exact)
    for name, X in (("E", E), ("E'", Ep), ("E2", E2)):
        require(c.inequalities, f"|{name}| <= |A|/T", X.cardinality, A.cardinality / T)
    pd = c.density(P)
    c.inequalities["alpha(1 - 2/T) <= l(1 - beta - l + 2 sqrt(dP)) + O(xi)"] = inequality(
        alpha * (1 - 2 / T), l * (1 - beta - l + 2 * math.sqrt(dP)) + 2 * xi)
    c.inequalities["1 - beta >= 2 sqrt(alpha) - eps^(1/4)"] = inequality(
        1 - beta, 2 * math.sqrt(alpha) - eps ** 0.25, ">=")
    return {
        "alpha": alpha, "beta": beta, "l": l, "l_prime": lp, "ll'": l * lp, "P": pd,
        "alpha_prime": c.density(A1), "alpha_double_prime": c.density(A2),
        "T": T, "delta_L": dL, "delta_P": dP,
        "pollard_applicable_P": bool(dP < min(beta, l) ** 2) if beta and l else False,
        "partial_sumset_size": p_size(A, Ainv, eps),
        "reference": min(2 * math.sqrt(A.cardinality * A.N), A.N),
        "intersections": {
            "W_L' cap W_L*": {"exact": est_LL.exact, "main_term": est_LL.main_term,
                              "error_bound": est_LL.error_bound},
            "W_P cap W_L*": {"exact": est_PL.exact, "main_term": est_PL.main_term,
                             "error_bound": est_PL.error_bound},
        },
        "wrappers": c.wrappers, "inclusions": c.inclusions, "inequalities": c.inequalities,
    }


def p_size(A: GroupSet, B: GroupSet, eps: float) -> int:
    return partial_sumset(A, B, eps).cardinality


def default_T(delta: float) -> float:
    return delta ** -0.1


def replay_proof(kind: str, p: int, A: GroupSet, delta: float = 0.02, xi: float = 0.01,
                 T: float | None = None, seed: int = 0,
                 config: DecomposeConfig | None = None) -> ExperimentReport:
    if A.N != p:
        raise ValueError(f"A lives in Z_{A.N}, not Z_{p}")
    if not A.group.is_prime:
        raise ValueError(f"{p} is not prime")
    report = ExperimentReport("replay", p, {"kind": kind, "delta": delta, "xi": xi, "T": T,
                                            "size": A.cardinality}, seed=seed)
    with timed(report):
        if kind == "sumfree_selfinv":
            report.results = replay_sumfree_selfinv(A, delta, xi, seed, config)
        elif kind == "a_a_a":
            T = default_T(delta) if T is None else T
            report.params["T"] = T
            report.results = replay_a_a_a(A, delta, xi, T, seed, config)
        elif kind == "a_plus_ainv":
            report.results = replay_a_plus_ainv(A, delta, xi, T, seed, config)
            report.params["T"] = report.results["T"]
        else:
            raise ValueError(f"unknown replay {kind!r}; expected one of {KINDS}")
    return report
