import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sumwrap.fourier import (
    SpectralFunction,
    arc_preimage,
    arc_preimage_wiener,
    convolve,
    convolve_indicators,
    dft,
    estimate_w,
    fit_log_slope,
    inverse_dft,
    kloosterman_sum,
    kloosterman_sweep,
    max_nontrivial_coeff_of_inverse,
    plancherel_sides,
    probe_w,
    wiener_norm,
)
from sumwrap.groups import full_set, interval, make_set, nonzero_set, random_set

complex_vectors = st.integers(2, 40).flatmap(
    lambda n: st.lists(st.complex_numbers(max_magnitude=100, allow_nan=False, allow_infinity=False),
                       min_size=n, max_size=n))


def test_dft_examples():
    for N in (2, 7, 64):
        delta = np.zeros(N)
        delta[0] = 1
        assert np.allclose(dft(delta), np.ones(N))
        F = dft(np.ones(N))
        assert abs(F[0] - N) < 1e-9 and np.allclose(F[1:], 0, atol=1e-9)


def test_dft_direct_sum_oracle():
    rng = np.random.default_rng(1)
    f = rng.normal(size=64) + 1j * rng.normal(size=64)
    ref = oracles.dft(list(f))
    assert np.allclose(dft(f), ref, rtol=1e-9, atol=1e-9)
    F = rng.normal(size=64) + 1j * rng.normal(size=64)
    assert np.allclose(inverse_dft(F).values, oracles.idft(list(F)), atol=1e-9)


@pytest.mark.parametrize("N", [17, 101, 512, 513, 1009, 4096])
def test_direct_and_fast_paths_agree(N):
    rng = np.random.default_rng(N)
    f = rng.normal(size=N) + 1j * rng.normal(size=N)
    a, b = dft(f, method="direct"), dft(f, method="fast")
    assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(a))
    back = inverse_dft(a, method="fast").values
    assert np.allclose(back, f, atol=1e-9)


@given(complex_vectors)
def test_round_trip_and_plancherel(vals):
    f = np.array(vals)
    assert np.allclose(inverse_dft(dft(f)).values, f, atol=1e-9 * max(1.0, np.abs(f).max()))
    lhs, rhs = plancherel_sides(f)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-9)


def test_inverse_of_ones_is_delta():
    v = inverse_dft(np.ones(9)).values
    assert abs(v[0] - 1) < 1e-12 and np.allclose(v[1:], 0)


def test_method_errors():
    with pytest.raises(ValueError):
        dft(np.ones(4), method="bogus")
    with pytest.raises(ValueError):
        inverse_dft(np.ones(4), method="bogus")


def test_spectral_function_cache_and_shape():
    f = SpectralFunction.from_values(np.arange(5))
    assert f.spectrum is f.spectrum
    assert np.allclose(f.spectrum, oracles.dft(list(range(5))), rtol=1e-9)
    with pytest.raises(ValueError):
        f.spectrum[0] = 0
    with pytest.raises(ValueError):
        SpectralFunction(f.group, np.ones(4))
    with pytest.raises(ValueError):
        f + SpectralFunction.from_values(np.ones(6))


def test_convolve_examples():
    N = 7
    da = SpectralFunction.from_values(np.eye(N)[2])
    db = SpectralFunction.from_values(np.eye(N)[4])
    assert np.allclose(convolve(da, db).values, np.eye(N)[6])
    A = make_set([1, 2], 5)
    ind = SpectralFunction.indicator(A)
    assert np.allclose(convolve(ind, ind).values.real, [0, 0, 1, 2, 1])


def test_convolve_random_pairs_z128():
    rng = np.random.default_rng(128)
    for _ in range(10):
        A = random_set(128, int(rng.integers(1, 128)), rng)
        B = random_set(128, int(rng.integers(1, 128)), rng)
        raw = convolve(SpectralFunction.indicator(A), SpectralFunction.indicator(B)).values.real
        assert np.max(np.abs(raw - oracles.conv_counts(list(A), list(B), 128))) <= 1e-7
        assert convolve_indicators(A.bits, B.bits).tolist() == oracles.conv_counts(list(A), list(B), 128)


def test_wiener_examples():
    assert math.isclose(wiener_norm(make_set([3], 11).bits), 1.0)
    assert math.isclose(wiener_norm(full_set(11).bits), 1.0)
    vals = list(make_set([0, 1, 2], 13).bits.astype(float))
    assert math.isclose(wiener_norm(np.array(vals)), oracles.wiener(vals), rel_tol=1e-9)


def test_progression_wiener_logarithmic():
    """Wiener norms of intervals stay within a constant times log N."""
    values = []
    Ns = [101, 1009, 10007]
    for N in Ns:
        P = interval(1, N // 20, N)
        values.append(wiener_norm(P.bits))
    slope, _ = fit_log_slope(Ns, values)
    assert 0 < slope < 1
    assert all(v <= math.log(N) for v, N in zip(values, Ns))


@given(st.sampled_from([17, 31, 101]).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1)), st.sets(st.integers(0, n - 1)))))
def test_wiener_intersection_submultiplicative(data):
    N, X, Y = data
    X, Y = make_set(X, N), make_set(Y, N)
    assert wiener_norm((X & Y).bits) <= wiener_norm(X.bits) * wiener_norm(Y.bits) + 1e-9


@given(st.sampled_from([17, 64, 101]).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1)), st.sets(st.integers(0, n - 1)))))
def test_convolution_wiener_bound(data):
    N, A, B = data
    A, B = make_set(A, N), make_set(B, N)
    f = convolve(SpectralFunction.indicator(A), SpectralFunction.indicator(B))
    assert wiener_norm(f) <= math.sqrt(A.cardinality * B.cardinality) * (1 + 1e-9) + 1e-9


# Kloosterman sums

def test_kloosterman_hand_value():
    v = kloosterman_sum(1, 1, 5)
    assert abs(v.value - (2 + 2 * math.cos(4 * math.pi / 5))) < 1e-12
    assert math.isclose(v.value.real, 0.381966, abs_tol=1e-6)
    assert v.magnitude == abs(v.value) and v.weil_bound == 2 * math.sqrt(5)


@pytest.mark.parametrize("p", [7, 13, 31])
def test_kloosterman_oracle_and_conjugation(p):
    for a in range(1, p):
        for b in (1, 2, p - 1):
            v = kloosterman_sum(a, b, p).value
            assert abs(v - oracles.kloosterman(a, b, p)) < 1e-9
            assert abs(v - kloosterman_sum(-a, -b, p).value.conjugate()) < 1e-9


def test_kloosterman_errors():
    with pytest.raises(ValueError):
        kloosterman_sum(0, 1, 7)
    with pytest.raises(ValueError):
        kloosterman_sum(1, 1, 9)


def test_kloosterman_sweep_matches_pointwise():
    p = 31
    mags = kloosterman_sweep(p)
    assert mags.shape == (p - 1, p - 1)
    for a, b in [(1, 1), (3, 7), (30, 2)]:
        assert math.isclose(mags[a - 1, b - 1], abs(oracles.kloosterman(a, b, p)), abs_tol=1e-9)
    assert mags.max() <= 2 * math.sqrt(p)


# inverse-set bound

def test_inverse_coeff_examples():
    p = 31
    assert math.isclose(max_nontrivial_coeff_of_inverse(nonzero_set(p)), 1.0)
    assert math.isclose(max_nontrivial_coeff_of_inverse(make_set([1], p)), 1.0)
    with pytest.raises(ValueError):
        max_nontrivial_coeff_of_inverse(make_set([0, 1], p))


def test_inverse_coeff_random():
    rng = np.random.default_rng(40)
    for _ in range(20):
        X = random_set(101, 40, rng, exclude_zero=True)
        peak = max_nontrivial_coeff_of_inverse(X)
        assert peak <= 2 * math.sqrt(101) * wiener_norm(X.bits)


# arcs and w(Z_N)

def test_arc_examples():
    assert math.isclose(arc_preimage_wiener(3, (0.0, 2 * math.pi), 17), 1.0)
    assert arc_preimage(0, (-0.1, 0.1), 17) == full_set(17)
    assert arc_preimage(0, (0.5, 1.0), 17).cardinality == 0
    half = arc_preimage(1, (0.0, math.pi), 101)
    assert half == interval(0, 50, 101)
    assert math.isclose(arc_preimage_wiener(1, (0.0, math.pi), 101), oracles.wiener(list(half.bits * 1.0)),
                        rel_tol=1e-9)
    with pytest.raises(ValueError):
        arc_preimage(1, (1.0, 0.5), 17)


def test_arc_half_open():
    # e(x/8) for x = 2 sits exactly on angle pi/2: it opens [pi/2, pi), so it is not in [0, pi/2)
    assert list(arc_preimage(1, (0.0, math.pi / 2), 8)) == [0, 1]


def test_estimate_w():
    assert estimate_w(2, 3, 0) >= 1
    base = probe_w(101, 5, 7).value
    more = probe_w(101, 50, 7).value
    assert more >= base >= 1


def test_w_growth_logarithmic():
    Ns = [101, 1009, 10007]
    vals = [estimate_w(N, 20, 0) for N in Ns]
    slope, _ = fit_log_slope(Ns, vals)
    assert all(v <= 2 * math.log(N) for v, N in zip(vals, Ns))
    assert slope < 2
    assert math.isfinite(slope)
