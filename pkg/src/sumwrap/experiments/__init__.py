"""Applications: extremal constructions, inequality checks, proof replays and search."""
from .checks import (
    check_cauchy_davenport,
    check_pollard_partial,
    exception_set_sweep,
    random_pair_sweep,
    verify_a_plus_ainv,
    verify_coverage,
)
from .constructions import construct_extremal
from .replay import HypothesisError, replay_proof
from .report import ExperimentReport
from .search import SearchState, evaluate_state, exhaustive_extremal, inversion_orbits, stochastic_search

__all__ = [
    "ExperimentReport",
    "HypothesisError",
    "SearchState",
    "check_cauchy_davenport",
    "check_pollard_partial",
    "construct_extremal",
    "evaluate_state",
    "exception_set_sweep",
    "exhaustive_extremal",
    "inversion_orbits",
    "random_pair_sweep",
    "replay_proof",
    "stochastic_search",
    "verify_a_plus_ainv",
    "verify_coverage",
]
