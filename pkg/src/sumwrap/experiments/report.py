"""Experiment reports and small helpers for recording checked inequalities."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

from ..groups import GroupSet, InequalityViolation


@dataclass
class ExperimentReport:
    kind: str
    p_or_N: int
    params: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    runtime_ms: int = 0
    rows: list[dict[str, Any]] = field(default_factory=list)


def inequality(lhs: float, rhs: float, relation: str = "<=") -> dict:
    """Both sides of a comparison together with whether it holds."""
    holds = {"<=": lhs <= rhs, ">=": lhs >= rhs, "<": lhs < rhs, ">": lhs > rhs}[relation]
    return {"lhs": lhs, "rhs": rhs, "relation": relation, "holds": bool(holds)}


def require(record: dict, name: str, lhs: float, rhs: float, relation: str = "<=") -> None:
    """Record a proven inequality and raise if it fails."""
    entry = inequality(lhs, rhs, relation)
    record[name] = entry
    if not entry["holds"]:
        raise InequalityViolation(f"{name}: {lhs} {relation} {rhs} fails")


def require_subset(record: dict, name: str, S: GroupSet, T: GroupSet) -> None:
    extra = (S - T).cardinality
    record[name] = {"holds": extra == 0, "size": S.cardinality, "outside": extra}
    if extra:
        raise InequalityViolation(f"{name}: {extra} elements fall outside")


@contextmanager
def timed(report: ExperimentReport):
    start = time.perf_counter()
    try:
        yield report
    finally:
        report.runtime_ms = int(round((time.perf_counter() - start) * 1000))
