"""Exact and stochastic search for extremal sets at small primes.

Exhaustive searches run branch-and-bound on python-int bitmasks (bit x is
residue x). Annealing works on numpy bit vectors with O(p) incremental moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..groups import (
    GroupSet,
    cyclic_group,
    inverse_table,
    is_sum_free,
    make_set,
    product_sumset_contains,
)
from .constructions import construct_extremal
from .report import ExperimentReport, timed

EXHAUSTIVE_CAPS = {"max_sumfree_selfinv": 43, "min_alpha_coverage": 23}
OBJECTIVES = ("max_sumfree_selfinv", "max_noncover")


def _need_prime(p: int) -> None:
    if not cyclic_group(p).is_prime:
        raise ValueError(f"{p} is not prime")


def inversion_orbits(p: int) -> list[tuple[int, ...]]:
    """Orbits {x, 1/x} of F_p^*, ordered by smallest element."""
    inv = inverse_table(p)
    return [(x,) if inv[x] == x else (x, int(inv[x])) for x in range(1, p) if x <= inv[x]]


def _rot(mask: int, s: int, p: int, full: int) -> int:
    s %= p
    return ((mask << s) | (mask >> (p - s))) & full


def _mask(xs) -> int:
    m = 0
    for x in xs:
        m |= 1 << int(x)
    return m


def _bits_of(mask: int) -> list[int]:
    out, x = [], 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return out


class _SumFreeSearch:
    """Largest union of inversion orbits that is sum-free."""

    def __init__(self, p: int):
        self.p = p
        self.full = (1 << p) - 1
        self.orbits = [_mask(o) for o in inversion_orbits(p)]
        self.sizes = [bin(o).count("1") for o in self.orbits]
        self.best = 0
        self.best_mask = 0
        self.nodes = 0

    def _sums(self, a: int, b: int) -> int:
        out = 0
        for x in _bits_of(b):
            out |= _rot(a, x, self.p, self.full)
        return out

    def _compatible(self, A: int, S: int, o: int) -> bool:
        U = A | o
        return not (S & U) and not (self._sums(U, o) & U)

    def run(self) -> None:
        cands = [i for i, o in enumerate(self.orbits) if not (self._sums(o, o) & o)]
        self._branch(0, 0, 0, cands)

    def _branch(self, A: int, S: int, size: int, cands: list[int]) -> None:
        self.nodes += 1
        if size > self.best:
            self.best, self.best_mask = size, A
        bound = size + sum(self.sizes[i] for i in cands)
        for j, i in enumerate(cands):
            if bound <= self.best:
                return
            o = self.orbits[i]
            A2 = A | o
            S2 = S | self._sums(A2, o)
            rest = [k for k in cands[j + 1:] if self._compatible(A2, S2, self.orbits[k])]
            self._branch(A2, S2, size + self.sizes[i], rest)
            bound -= self.sizes[i]


class _NonCoverSearch:
    """Largest A in F_p^* with t outside A(A+A), i.e. (A+A) disjoint from t A*."""

    def __init__(self, p: int, t: int):
        self.p, self.t = p, t % p
        self.full = (1 << p) - 1
        self.inv = inverse_table(p)
        self.best = 0
        self.best_mask = 0
        self.nodes = 0

    def _tinv(self, x: int) -> int:
        return self.t * int(self.inv[x]) % self.p

    def _ok(self, A: int, S: int, Q: int, e: int) -> bool:
        """Whether A + {e} keeps (A+A) and t A* apart, given S = A+A and Q = t A*."""
        A2 = A | (1 << e)
        S2 = S | _rot(A2, e, self.p, self.full)
        Q2 = Q | (1 << self._tinv(e))
        return not (S2 & Q2)

    def run(self) -> None:
        cands = [e for e in range(1, self.p) if self._ok(0, 0, 0, e)]
        self._branch(0, 0, 0, 0, cands)

    def _branch(self, A: int, S: int, Q: int, size: int, cands: list[int]) -> None:
        self.nodes += 1
        if size > self.best:
            self.best, self.best_mask = size, A
        for j, e in enumerate(cands):
            if size + len(cands) - j <= self.best:
                return
            A2 = A | (1 << e)
            S2 = S | _rot(A2, e, self.p, self.full)
            Q2 = Q | (1 << self._tinv(e))
            rest = [k for k in cands[j + 1:] if self._ok(A2, S2, Q2, k)]
            self._branch(A2, S2, Q2, size + 1, rest)


def exhaustive_extremal(p: int, problem: str, cap: int | None = None) -> ExperimentReport:
    """Exact optimum at small p.

    max_sumfree_selfinv: largest sum-free A with A = A*.
    min_alpha_coverage: largest A for which F_p^* is not covered by A(A+A).
    A dilation by lambda maps an uncovered t to t lambda^2, so t ranges over
    1 and one non-residue.
    """
    if problem not in EXHAUSTIVE_CAPS:
        raise ValueError(f"unknown problem {problem!r}; expected one of {tuple(EXHAUSTIVE_CAPS)}")
    _need_prime(p)
    cap = EXHAUSTIVE_CAPS[problem] if cap is None else cap
    if p > cap:
        raise ValueError(f"p = {p} exceeds the exhaustive cap {cap} for {problem}")
    report = ExperimentReport("exhaustive", p, {"problem": problem, "cap": cap})
    with timed(report):
        if problem == "max_sumfree_selfinv":
            s = _SumFreeSearch(p)
            s.run()
            witness = make_set(_bits_of(s.best_mask), p)
            report.results = {"optimum": s.best, "density": s.best / p,
                              "upper_bound": (p + 1) // 3, "orbits": len(s.orbits),
                              "nodes": s.nodes, "witness": [int(x) for x in witness.residues()]}
        else:
            targets = [1] if p == 2 else [1, _non_residue(p)]
            best, best_t, best_mask, nodes = -1, 1, 0, 0
            for t in targets:
                s = _NonCoverSearch(p, t)
                s.run()
                nodes += s.nodes
                if s.best > best:
                    best, best_t, best_mask = s.best, t, s.best_mask
            report.results = {"optimum": best, "density": best / p, "uncovered_target": best_t,
                              "targets": targets, "nodes": nodes,
                              "witness": _bits_of(best_mask)}
    return report


def _non_residue(p: int) -> int:
    return next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1)


@dataclass
class SearchState:
    current: GroupSet
    objective: float
    constraints: dict[str, bool]
    temperature: float = 0.0
    step: int = 0
    accepted: int = 0
    trajectory: list[int] = field(default_factory=list)


def _selfinv_constraints(A: GroupSet) -> dict[str, bool]:
    inv = inverse_table(A.N)
    xs = A.residues()
    return {"zero_free": not bool(A.bits[0]), "sum_free": is_sum_free(A),
            "self_inverse": bool(np.array_equal(np.sort(inv[xs]), xs))}


def _noncover_constraints(A: GroupSet) -> dict[str, bool]:
    return {"zero_free": not bool(A.bits[0]), "one_uncovered": not product_sumset_contains(A, 1)}


def evaluate_state(A: GroupSet, objective: str) -> SearchState:
    """Recompute objective (|A|) and constraint flags from scratch."""
    flags = _selfinv_constraints(A) if objective == "max_sumfree_selfinv" else _noncover_constraints(A)
    return SearchState(A, float(A.cardinality), flags)


def _schedule(budget: int, t0: float, t1: float) -> float:
    return (t1 / t0) ** (1.0 / max(budget, 1))


def _anneal_selfinv(p: int, budget: int, rng: np.random.Generator, A0: np.ndarray,
                    t0: float, t1: float) -> tuple[np.ndarray, SearchState]:
    orbits = inversion_orbits(p)
    orbit_of = np.zeros(p, dtype=np.int64)
    for i, o in enumerate(orbits):
        orbit_of[list(o)] = i
    A = A0.copy()
    best = A.copy()
    state = SearchState(GroupSet(cyclic_group(p), A0), float(A0.sum()), {}, t0)
    temp, cool = t0, _schedule(budget, t0, t1)
    for step in range(budget):
        o = np.array(orbits[int(rng.integers(len(orbits)))])
        if A[o[0]]:
            delta = -len(o)
            kill = np.zeros(p, dtype=bool)
            kill[o] = True
        else:
            Ob = np.zeros(p, dtype=bool)
            Ob[o] = True
            U = A | Ob
            if any(U[(x + y) % p] and Ob[(x + y) % p] for x in o for y in o):
                temp *= cool
                continue
            # drop every orbit touching a triple a + b = c that involves o
            kill = np.zeros(p, dtype=bool)
            for x in o:
                kill |= A & np.roll(U, x)  # c = u + x
                kill |= A & np.roll(U, -x)  # a + x = u
                kill |= A & np.roll(U[::-1], x + 1)  # a + u = x
            kill = np.isin(orbit_of, orbit_of[kill]) & A
            delta = len(o) - int(kill.sum())
            kill = kill | Ob
        if delta >= 0 or rng.random() < math.exp(delta / temp):
            A = A ^ kill
            state.accepted += 1
            if A.sum() > best.sum():
                best = A.copy()
        temp *= cool
        if step % max(1, budget // 64) == 0:
            state.trajectory.append(int(A.sum()))
    state.temperature, state.step = temp, budget
    return best, state


def _anneal_noncover(p: int, budget: int, rng: np.random.Generator, A0: np.ndarray,
                     t0: float, t1: float, penalty: float = 1.5) -> tuple[np.ndarray, SearchState]:
    """Single-element flips scored by |A| - penalty |A* cap (A+A)|, target t = 1."""
    inv = inverse_table(p)
    A = A0.copy()
    counts = np.zeros(p, dtype=np.int64)
    for a in np.flatnonzero(A):
        counts += np.roll(A, a)

    def bad(A, counts):
        return int(np.count_nonzero(counts[inv[np.flatnonzero(A)]]))

    score = A.sum() - penalty * bad(A, counts)
    best = A.copy() if bad(A, counts) == 0 else np.zeros(p, dtype=bool)
    state = SearchState(GroupSet(cyclic_group(p), A0), float(A0.sum()), {}, t0)
    temp, cool = t0, _schedule(budget, t0, t1)
    for step in range(budget):
        e = int(rng.integers(1, p))
        A2 = A.copy()
        A2[e] = not A[e]
        # ordered pairs (e, a), (a, e) with a != e, plus (e, e)
        base = A if A2[e] else A2
        change = 2 * np.roll(base, e).astype(np.int64)
        change[2 * e % p] += 1
        counts2 = counts + change if A2[e] else counts - change
        b2 = bad(A2, counts2)
        score2 = A2.sum() - penalty * b2
        d = score2 - score
        if d >= 0 or rng.random() < math.exp(d / temp):
            A, counts, score = A2, counts2, score2
            state.accepted += 1
            if b2 == 0 and A.sum() > best.sum():
                best = A.copy()
        temp *= cool
        if step % max(1, budget // 64) == 0:
            state.trajectory.append(int(A.sum()))
    state.temperature, state.step = temp, budget
    return best, state


def stochastic_search(p: int, objective: str, budget: int, seed: int,
                      t0: float = 2.0, t1: float = 0.05) -> ExperimentReport:
    """Simulated annealing for the largest feasible A; deterministic given seed.

    max_sumfree_selfinv flips inversion orbits and repairs by dropping every
    orbit in a violated triple, so states stay feasible. max_noncover flips
    single residues under a penalty for A* cap (A+A). Seeds are the ninth and
    eighth constructions.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    _need_prime(p)
    rng = np.random.default_rng(seed)
    kind = "ninth" if objective == "max_sumfree_selfinv" else "eighth"
    A0 = construct_extremal(kind, p).bits.copy()
    report = ExperimentReport("anneal", p, {"objective": objective, "budget": budget,
                                            "t0": t0, "t1": t1}, seed=seed)
    with timed(report):
        if objective == "max_sumfree_selfinv":
            best, state = _anneal_selfinv(p, budget, rng, A0, t0, t1)
        else:
            best, state = _anneal_noncover(p, budget, rng, A0, t0, t1)
        if best.sum() < A0.sum():
            best = A0
        B = GroupSet(cyclic_group(p), best)
        final = evaluate_state(B, objective)
        if not all(final.constraints.values()):
            raise AssertionError(f"annealing returned an infeasible set: {final.constraints}")
        report.results = {"best": B.cardinality, "density": B.cardinality / p,
                          "seed_size": int(A0.sum()), "constraints": final.constraints,
                          "accepted": state.accepted, "final_temperature": state.temperature,
                          "trajectory": state.trajectory,
                          "witness": [int(x) for x in B.residues()]}
    return report
