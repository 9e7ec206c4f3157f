"""Interval-intersection sets that are extremal for the dense-set theorems.

Strict inequalities on the real line become residue ranges:
0 < x < p/4 -> {1, ..., ceil(p/4) - 1}, p/2 < x < p -> {floor(p/2) + 1, ..., p - 1},
p/3 < x < 2p/3 -> {floor(p/3) + 1, ..., ceil(2p/3) - 1}, 0 < x < lam p -> {1, ..., ceil(lam p) - 1}.
"""
from __future__ import annotations

import math

from ..groups import GroupSet, cyclic_group, exact_fraction, interval, invert_set

KINDS = ("eighth", "ninth", "lambda")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def construct_extremal(kind: str, p: int, lam: float | None = None) -> GroupSet:
    """eighth: P cap Q*; ninth and lambda: P cap P*."""
    if not cyclic_group(p).is_prime:
        raise ValueError(f"{p} is not prime")
    if kind == "eighth":
        P = interval(1, _ceil_div(p, 4) - 1, p)
        Q = interval(p // 2 + 1, p - 1, p)
        return P & invert_set(Q)
    if kind == "ninth":
        P = interval(p // 3 + 1, _ceil_div(2 * p, 3) - 1, p)
        return P & invert_set(P)
    if kind == "lambda":
        if lam is None or not 0 < lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {lam}")
        top = math.ceil(exact_fraction(lam) * p) - 1
        P = interval(1, min(top, p - 1), p)
        return P & invert_set(P)
    raise ValueError(f"unknown construction {kind!r}; expected one of {KINDS}")
