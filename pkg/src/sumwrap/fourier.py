"""Discrete Fourier analysis on Z_N.

Convention: ``F(r) = sum_x f(x) exp(-2 pi i r x / N)`` and
``f(x) = (1/N) sum_r F(r) exp(2 pi i r x / N)``. The Wiener norm of f is
``(1/N) sum_r |F(r)|``.

Transforms up to ``DIRECT_DFT_MAX`` points use an explicit O(N^2) sum with
phases indexed by the exact integer ``r*x mod N``; larger transforms go
through numpy's pocketfft, which handles prime lengths in O(N log N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .groups import (
    CyclicGroup,
    GroupSet,
    InequalityViolation,
    cyclic_group,
    inverse_table,
    invert_set,
)

DIRECT_DFT_MAX = 512

#: Largest tolerated distance from an integer before rounding convolution counts.
ROUNDING_TOLERANCE = 1e-7


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """A complex function on Z_N with a lazily computed spectrum."""

    group: CyclicGroup
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != (self.group.modulus,):
            raise ValueError(f"values have shape {values.shape}, expected ({self.group.modulus},)")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values) -> "SpectralFunction":
        values = np.asarray(values)
        return cls(cyclic_group(values.shape[0]), values)

    @classmethod
    def indicator(cls, S: GroupSet) -> "SpectralFunction":
        return cls(S.group, S.bits.astype(np.complex128))

    @property
    def N(self) -> int:
        return self.group.modulus

    @cached_property
    def spectrum(self) -> np.ndarray:
        F = dft(self.values)
        F.flags.writeable = False
        return F

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def is_real(self, tol: float = 1e-9) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values), initial=0.0)))
        return bool(np.all(np.abs(self.values.imag) <= tol * scale))

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        _same_group(self, other)
        return SpectralFunction(self.group, self.values + other.values)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        _same_group(self, other)
        return SpectralFunction(self.group, self.values - other.values)


def _same_group(f: SpectralFunction, g: SpectralFunction) -> None:
    if f.N != g.N:
        raise ValueError(f"group mismatch: Z_{f.N} vs Z_{g.N}")


def _as_array(f) -> np.ndarray:
    if isinstance(f, SpectralFunction):
        return f.values
    if isinstance(f, GroupSet):
        return f.bits.astype(np.complex128)
    return np.asarray(f, dtype=np.complex128)


@lru_cache(maxsize=8)
def _roots(N: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(N) / N)


@lru_cache(maxsize=4)
def _dft_matrix(N: int) -> np.ndarray:
    k = np.arange(N)
    return _roots(N)[np.outer(k, k) % N]


def dft(f, method: str = "auto") -> np.ndarray:
    values = _as_array(f)
    N = values.shape[0]
    if method == "auto":
        method = "direct" if N <= DIRECT_DFT_MAX else "fast"
    if method == "direct":
        return _dft_matrix(N) @ values
    if method == "fast":
        return np.fft.fft(values)
    raise ValueError(f"unknown method {method!r}")


def inverse_dft(F, method: str = "auto") -> SpectralFunction:
    F = np.asarray(F, dtype=np.complex128)
    N = F.shape[0]
    if method == "auto":
        method = "direct" if N <= DIRECT_DFT_MAX else "fast"
    if method == "direct":
        values = np.conj(_dft_matrix(N)) @ F / N
    elif method == "fast":
        values = np.fft.ifft(F)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SpectralFunction(cyclic_group(N), values)


def convolve(f: SpectralFunction, g: SpectralFunction) -> SpectralFunction:
    _same_group(f, g)
    return inverse_dft(f.spectrum * g.spectrum)


def convolve_indicators(a_bits: np.ndarray, b_bits: np.ndarray) -> np.ndarray:
    """Integer convolution of two indicator vectors through the spectrum."""
    raw = inverse_dft(dft(a_bits.astype(np.complex128)) * dft(b_bits.astype(np.complex128))).values.real
    counts = np.rint(raw)
    err = float(np.max(np.abs(raw - counts), initial=0.0))
    if err > ROUNDING_TOLERANCE * max(1.0, float(np.max(counts, initial=0.0))):
        raise ArithmeticError(f"spectral convolution off an integer by {err:.3g}")
    return counts.astype(np.int64)


def wiener_norm(f) -> float:
    if isinstance(f, SpectralFunction):
        F = f.spectrum
    else:
        F = dft(f)
    return float(np.sum(np.abs(F)) / F.shape[0])


def plancherel_sides(f) -> tuple[float, float]:
    """(sum |f|^2, (1/N) sum |F|^2); equal up to rounding."""
    values = _as_array(f)
    F = dft(values)
    return float(np.sum(np.abs(values) ** 2)), float(np.sum(np.abs(F) ** 2) / values.shape[0])


@dataclass(frozen=True)
class KloostermanValue:
    p: int
    a: int
    b: int
    value: complex
    magnitude: float

    @property
    def weil_bound(self) -> float:
        return 2.0 * math.sqrt(self.p)


def _check_kloosterman_args(a: int, b: int, p: int) -> None:
    if not cyclic_group(p).is_prime:
        raise ValueError(f"{p} is not prime")
    if a % p == 0 or b % p == 0:
        raise ValueError("a and b must be nonzero mod p")


def kloosterman_sum(a: int, b: int, p: int) -> KloostermanValue:
    """S(a, b; p) = sum_{z != 0} e_p(a z + b z^{-1}) by direct summation."""
    _check_kloosterman_args(a, b, p)
    z = np.arange(1, p, dtype=np.int64)
    phase = (a % p * z + b % p * inverse_table(p)[1:]) % p
    value = complex(np.sum(np.conj(_roots(p))[phase]))
    magnitude = abs(value)
    if magnitude > 2.0 * math.sqrt(p) * (1 + 1e-12):
        raise InequalityViolation(f"|S({a},{b};{p})| = {magnitude} > 2 sqrt(p)")
    return KloostermanValue(p, a % p, b % p, value, magnitude)


def kloosterman_sweep(p: int) -> np.ndarray:
    """|S(a, b; p)| for all a, b in F_p^*, as a (p-1) x (p-1) array indexed [a-1, b-1]."""
    _check_kloosterman_args(1, 1, p)
    e = np.conj(_roots(p))
    z = np.arange(1, p, dtype=np.int64)
    zinv = inverse_table(p)[1:]
    bz = np.outer(z, zinv) % p  # row b-1: b * z^{-1}
    out = np.empty((p - 1, p - 1))
    for a in range(1, p):
        out[a - 1] = np.abs(e[(bz + a * z) % p].sum(axis=1))
    bound = 2.0 * math.sqrt(p)
    if out.max() > bound * (1 + 1e-12):
        a, b = np.unravel_index(np.argmax(out), out.shape)
        raise InequalityViolation(f"Weil bound fails at a={a + 1}, b={b + 1}, p={p}")
    return out


def max_nontrivial_coeff_of_inverse(X: GroupSet) -> float:
    """max_{xi != 0} |F_{X*}(xi)|, checked against 2 sqrt(p) ||X||_w."""
    if X.bits[0]:
        raise ValueError("0 must not belong to X")
    Xinv = invert_set(X)
    F = dft(Xinv.bits)
    peak = float(np.max(np.abs(F[1:]), initial=0.0))
    bound = 2.0 * math.sqrt(X.N) * wiener_norm(X.bits)
    if peak > bound * (1 + 1e-9) + 1e-9:
        raise InequalityViolation(f"inverse-set coefficient {peak} exceeds {bound}")
    return peak


def arc_preimage(r: int, arc: tuple[float, float], N: int) -> GroupSet:
    """{x in Z_N : exp(2 pi i r x / N) in [theta1, theta2)} (angles in radians)."""
    theta1, theta2 = float(arc[0]), float(arc[1])
    length = theta2 - theta1
    if length < 0:
        raise ValueError(f"arc has negative length {length}")
    group = cyclic_group(N)
    if length >= 2 * math.pi:
        return GroupSet(group, np.ones(N, dtype=bool))
    turns = (np.arange(N, dtype=np.int64) * (int(r) % N) % N) / N
    offset = np.mod(turns - theta1 / (2 * math.pi), 1.0)
    return GroupSet(group, offset < length / (2 * math.pi))


def arc_preimage_wiener(r: int, arc: tuple[float, float], N: int) -> float:
    return wiener_norm(arc_preimage(r, arc, N).bits)


@dataclass(frozen=True)
class WProbe:
    N: int
    value: float
    best_r: int
    best_arc: tuple[float, float]
    sweep: tuple[float, ...]


def probe_w(N: int, samples: int, seed: int) -> WProbe:
    """Lower estimate of w(Z_N): random (character, arc) pairs plus dyadic arcs for r = 1.

    Random draws are sequential, so a larger ``samples`` extends the same stream.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    best = (-1.0, 0, (0.0, 0.0))
    sweep = []
    for j in range(int(math.ceil(math.log2(N))) + 1):
        arc = (0.0, 2 * math.pi / 2**j)
        v = arc_preimage_wiener(1, arc, N)
        sweep.append(v)
        if v > best[0]:
            best = (v, 1, arc)
    for _ in range(samples):
        r = int(rng.integers(N))
        t1 = float(rng.uniform(0, 2 * math.pi))
        length = float(rng.uniform(0, 2 * math.pi))
        arc = (t1, t1 + length)
        v = arc_preimage_wiener(r, arc, N)
        if v > best[0]:
            best = (v, r, arc)
    return WProbe(N, best[0], best[1], best[2], tuple(sweep))


def estimate_w(N: int, samples: int, seed: int) -> float:
    return probe_w(N, samples, seed).value


def fit_log_slope(Ns, values) -> tuple[float, float]:
    """Least-squares (slope, intercept) of values against log N."""
    slope, intercept = np.polyfit(np.log(np.asarray(Ns, dtype=float)), np.asarray(values, float), 1)
    return float(slope), float(intercept)
