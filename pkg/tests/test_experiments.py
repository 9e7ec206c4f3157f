import math

import numpy as np
import pytest

import oracles
from sumwrap.experiments import (
    ExperimentReport,
    HypothesisError,
    check_cauchy_davenport,
    check_pollard_partial,
    construct_extremal,
    evaluate_state,
    exception_set_sweep,
    exhaustive_extremal,
    inversion_orbits,
    random_pair_sweep,
    replay_proof,
    stochastic_search,
    verify_a_plus_ainv,
    verify_coverage,
)
from sumwrap.groups import (
    InequalityViolation,
    empty_set,
    full_set,
    invert_set,
    is_sum_free,
    make_set,
    nonzero_set,
    random_set,
    sumset,
)


def all_inequalities_two_sided(obj):
    if isinstance(obj, dict):
        if "relation" in obj:
            assert isinstance(obj["lhs"], (int, float)) and isinstance(obj["rhs"], (int, float))
        for v in obj.values():
            all_inequalities_two_sided(v)


# constructions

@pytest.mark.parametrize("p", [7, 11, 13, 101, 1009])
def test_eighth_structure(p):
    A = construct_extremal("eighth", p)
    assert not (sumset(A, A) & invert_set(A)).cardinality
    assert 1 not in oracles.product_cover(list(A), p)


def test_eighth_count_near_eighth():
    p = 1009
    A = construct_extremal("eighth", p)
    # exact count by brute force over the defining inequalities
    ref = sum(1 for x in range(1, p) if 0 < x < p / 4 and p / 2 < pow(x, -1, p) < p)
    assert A.cardinality == ref
    assert abs(A.cardinality - p / 8) <= math.sqrt(p) * math.log(p) ** 2


@pytest.mark.parametrize("p", [7, 13, 101, 1009])
def test_ninth_structure(p):
    A = construct_extremal("ninth", p)
    assert is_sum_free(A) and invert_set(A) == A
    ref = sum(1 for x in range(1, p) if p / 3 < x < 2 * p / 3 and p / 3 < pow(x, -1, p) < 2 * p / 3)
    assert A.cardinality == ref


def test_lambda_construction():
    p, lam = 1009, 0.3
    A = construct_extremal("lambda", p, lam)
    assert invert_set(A) == A
    assert abs(A.density - lam ** 2) < 0.03
    rep = verify_a_plus_ainv(A)
    assert abs(rep.results["sumset_size"] / (2 * lam * p) - 1) < 0.25
    assert construct_extremal("lambda", 101, 1.0) == nonzero_set(101)


def test_construction_errors():
    with pytest.raises(ValueError):
        construct_extremal("eighth", 100)
    with pytest.raises(ValueError):
        construct_extremal("lambda", 101)
    with pytest.raises(ValueError):
        construct_extremal("lambda", 101, 1.5)
    with pytest.raises(ValueError):
        construct_extremal("tenth", 101)


# inequality checks

def test_cauchy_davenport_examples():
    A = make_set([0, 1], 5)
    r = check_cauchy_davenport(A, A).results
    assert r["sumset_size"] == 3 and r["slack"] == 0
    F = full_set(13)
    assert check_cauchy_davenport(F, F).results["slack"] == 0
    with pytest.raises(ValueError):
        check_cauchy_davenport(A, empty_set(5))
    with pytest.raises(ValueError):
        check_cauchy_davenport(make_set([1], 8), make_set([1], 8))


def test_cd_sweep_z101():
    rep = random_pair_sweep("cd", 101, 10_000, seed=0, min_density=0.0)
    assert len(rep.rows) == 10_000 and rep.results["min_slack"] >= 0


def test_pollard_examples():
    p = 101
    F = full_set(p)
    r = check_pollard_partial(F, F, 0.3).results
    assert r["partial_sumset_size"] == p and r["bound"] <= p and r["applicable"]
    rng = np.random.default_rng(1)
    A, B = random_set(p, 40, rng), random_set(p, 30, rng)
    tiny = check_pollard_partial(A, B, 1 / (2 * p)).results
    cd = check_cauchy_davenport(A, B).results
    assert tiny["partial_sumset_size"] == cd["sumset_size"]
    assert tiny["bound"] <= cd["bound"] + 1
    outside = check_pollard_partial(A, B, 0.9).results
    assert not outside["applicable"]
    all_inequalities_two_sided(outside)


def test_pollard_sweep_fixed_eps():
    rep = random_pair_sweep("pollard", 1009, 300, seed=3, eps=0.01, min_density=0.2)
    assert rep.results["applicable"] == 300
    assert all(r["measured"] >= r["bound"] for r in rep.rows)


def test_sweep_rows_and_errors():
    rep = random_pair_sweep("pollard", 101, 20, seed=1)
    assert list(rep.rows[0]) == ["p", "size_a", "size_b", "eps", "measured", "bound"]
    with pytest.raises(ValueError):
        random_pair_sweep("bogus", 101, 1, seed=0)


def test_exception_sweep():
    rep = exception_set_sweep(101, 50, seed=2)
    assert rep.results["max_ratio"] <= 1
    assert all(r["measured"] <= r["bound"] for r in rep.rows)


# coverage

def test_coverage_examples():
    assert verify_coverage(nonzero_set(101)).results["covered"]
    r = verify_coverage(construct_extremal("eighth", 1009)).results
    assert not r["covered"] and 1 in r["uncovered"] and not r["one_covered"]
    with pytest.raises(ValueError):
        verify_coverage(make_set([0, 1], 7))


@pytest.mark.parametrize("p", [13, 23, 31])
def test_coverage_against_triple_loop(p):
    rng = np.random.default_rng(p)
    for _ in range(5):
        A = random_set(p, max(1, int(0.2 * p)), rng, exclude_zero=True)
        r = verify_coverage(A).results
        ref = sorted(set(range(1, p)) - oracles.product_cover(list(A), p))
        assert r["uncovered_count"] == len(ref) and r["uncovered"] == ref[:20]


def test_coverage_random_z1009_reported():
    A = random_set(1009, 202, np.random.default_rng(0), exclude_zero=True)
    r = verify_coverage(A).results
    assert math.isclose(r["density"], 202 / 1009) and isinstance(r["covered"], bool)


def test_a_plus_ainv():
    r = verify_a_plus_ainv(make_set([1], 101)).results
    assert r["sumset_size"] == 1 and math.isclose(r["reference"], min(2 * math.sqrt(101), 101))
    A = random_set(1009, 303, np.random.default_rng(4), exclude_zero=True)
    r = verify_a_plus_ainv(A, eps=0.01).results
    assert r["ratio"] > 0.9 and r["partial_size"] <= r["sumset_size"]
    with pytest.raises(ValueError):
        verify_a_plus_ainv(make_set([0], 7))


# replays

def test_replay_sumfree_selfinv():
    A = construct_extremal("ninth", 1009)
    rep = replay_proof("sumfree_selfinv", 1009, A)
    res = rep.results
    assert abs(res["alpha"] - 1 / 9) < 0.05
    assert 0 <= res["beta"] <= 1
    assert all(v["holds"] for v in res["inclusions"].values())
    assert "A' in W cap W*" in res["inclusions"]
    all_inequalities_two_sided(res)


def test_replay_a_a_a():
    A = construct_extremal("eighth", 1009)
    res = replay_proof("a_a_a", 1009, A).results
    assert all(v["holds"] for v in res["inclusions"].values())
    assert math.isclose(res["r(1-r)/2"], res["r"] * (1 - res["r"]) / 2)
    small = replay_proof("a_a_a", 1009, A, delta=0.0005).results
    assert abs(small["r(1-r)/2"] - 1 / 8) < 0.02
    all_inequalities_two_sided(small)


def test_replay_a_plus_ainv_near_full():
    res = replay_proof("a_plus_ainv", 1009, nonzero_set(1009)).results
    assert res["beta"] < 0.01
    assert all(v["holds"] for v in res["inclusions"].values())


def test_replay_hypothesis_errors():
    p = 101
    with pytest.raises(HypothesisError):
        replay_proof("sumfree_selfinv", p, make_set([1, 2], p))
    with pytest.raises(HypothesisError):
        replay_proof("a_a_a", p, nonzero_set(p))
    with pytest.raises(ValueError):
        replay_proof("a_a_a", 100, make_set([1], 100))
    with pytest.raises(ValueError):
        replay_proof("bogus", p, make_set([1], p))


def test_replay_deterministic():
    A = construct_extremal("ninth", 1009)
    a = replay_proof("sumfree_selfinv", 1009, A, seed=5).results
    b = replay_proof("sumfree_selfinv", 1009, A, seed=5).results
    assert a == b


# exhaustive search

def test_inversion_orbits():
    assert inversion_orbits(5) == [(1,), (2, 3), (4,)]
    for p in (7, 13, 43):
        orbs = inversion_orbits(p)
        assert sorted(x for o in orbs for x in o) == list(range(1, p))
        assert len(orbs) == (p - 3) // 2 + 2


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_exhaustive_selfinv_oracle(p):
    r = exhaustive_extremal(p, "max_sumfree_selfinv").results
    assert r["optimum"] == oracles.max_sumfree_selfinv(p)
    W = make_set(r["witness"], p)
    assert W.cardinality == r["optimum"] and is_sum_free(W) and invert_set(W) == W


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_exhaustive_noncover_oracle(p):
    r = exhaustive_extremal(p, "min_alpha_coverage").results
    assert r["optimum"] == oracles.max_noncover(p)
    W = make_set(r["witness"], p)
    assert r["uncovered_target"] not in oracles.product_cover(list(W), p)


def test_exhaustive_known_values():
    known = {17: 4, 19: 6, 23: 6, 29: 8}
    for p, v in known.items():
        r = exhaustive_extremal(p, "max_sumfree_selfinv").results
        assert r["optimum"] == v <= (p + 1) // 3
    assert exhaustive_extremal(17, "min_alpha_coverage").results["optimum"] == 5


def test_exhaustive_errors():
    with pytest.raises(ValueError):
        exhaustive_extremal(47, "max_sumfree_selfinv")
    with pytest.raises(ValueError):
        exhaustive_extremal(29, "min_alpha_coverage")
    with pytest.raises(ValueError):
        exhaustive_extremal(15, "max_sumfree_selfinv")
    with pytest.raises(ValueError):
        exhaustive_extremal(13, "bogus")


# annealing

def test_anneal_budget_zero_returns_seed():
    r = stochastic_search(1009, "max_sumfree_selfinv", 0, seed=0).results
    assert r["best"] == r["seed_size"] == construct_extremal("ninth", 1009).cardinality
    assert r["trajectory"] == []


@pytest.mark.parametrize("p", [23, 29, 31])
def test_anneal_selfinv_bounded_by_exhaustive(p):
    r = stochastic_search(p, "max_sumfree_selfinv", 2000, seed=1).results
    opt = exhaustive_extremal(p, "max_sumfree_selfinv").results["optimum"]
    assert r["best"] <= opt
    assert all(r["constraints"].values())


def test_anneal_reproduces_optimum_p19():
    r = stochastic_search(19, "max_sumfree_selfinv", 2000, seed=0).results
    assert r["best"] == 6


def test_anneal_noncover_p1009():
    r = stochastic_search(1009, "max_noncover", 3000, seed=0).results
    assert r["density"] >= construct_extremal("eighth", 1009).density
    assert r["constraints"]["one_uncovered"]


def test_anneal_deterministic_and_errors():
    a = stochastic_search(31, "max_noncover", 500, seed=9).results
    b = stochastic_search(31, "max_noncover", 500, seed=9).results
    assert a == b
    with pytest.raises(ValueError):
        stochastic_search(31, "bogus", 10, seed=0)
    with pytest.raises(ValueError):
        stochastic_search(31, "max_noncover", -1, seed=0)


def test_search_state_recomputable():
    A = construct_extremal("ninth", 101)
    s = evaluate_state(A, "max_sumfree_selfinv")
    assert s.objective == A.cardinality and all(s.constraints.values())
    bad = A | make_set([2], 101)
    assert not evaluate_state(bad, "max_sumfree_selfinv").constraints["self_inverse"]
    s = evaluate_state(construct_extremal("eighth", 101), "max_noncover")
    assert s.constraints["one_uncovered"]


def test_report_defaults():
    r = ExperimentReport("x", 7)
    assert r.params == {} and r.results == {} and r.rows == [] and r.runtime_ms == 0


def test_forced_violation_surfaces(monkeypatch):
    import sumwrap.experiments.checks as checks
    monkeypatch.setattr(checks, "sumset", lambda A, B: empty_set(A.N))
    with pytest.raises(InequalityViolation):
        check_cauchy_davenport(make_set([1], 7), make_set([2], 7))
