"""Exact set arithmetic on Z_N.

Sets are immutable boolean bit vectors; every operation returns a new set.
Sumsets and partial sumsets are read off the integer convolution table
``counts[x] = #{(a, b) in A x B : a + b = x}``, which is computed either by
a shift-and-add loop (small N, and the exactness reference) or through the
Fourier route in :mod:`sumwrap.fourier` followed by rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np
import sympy

#: Above this modulus ``convolution_counts(method="auto")`` goes spectral.
SPECTRAL_THRESHOLD = 512

#: Sets on groups larger than this serialize as a hex bit string.
HEX_SERIALIZATION_THRESHOLD = 4096


class InequalityViolation(AssertionError):
    """A proven inequality or inclusion failed on concrete data.

    Every check guarded by this exception is a theorem, so raising it means
    the implementation is wrong, not the input.
    """


@dataclass(frozen=True)
class CyclicGroup:
    modulus: int
    is_prime: bool

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus}")
        if bool(sympy.isprime(self.modulus)) != self.is_prime:
            raise ValueError(f"is_prime={self.is_prime} is wrong for N={self.modulus}")

    @property
    def order(self) -> int:
        return self.modulus


@lru_cache(maxsize=None)
def cyclic_group(N: int) -> CyclicGroup:
    N = int(N)
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return CyclicGroup(N, bool(sympy.isprime(N)))


class GroupSet:
    """A subset of Z_N stored as a read-only boolean vector."""

    __slots__ = ("group", "bits", "cardinality")

    def __init__(self, group: CyclicGroup, bits):
        bits = np.array(bits, dtype=bool, copy=True)
        if bits.shape != (group.modulus,):
            raise ValueError(f"bit vector has shape {bits.shape}, expected ({group.modulus},)")
        bits.flags.writeable = False
        self.group = group
        self.bits = bits
        self.cardinality = int(np.count_nonzero(bits))

    @property
    def N(self) -> int:
        return self.group.modulus

    @property
    def density(self) -> float:
        return self.cardinality / self.N

    def residues(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __len__(self) -> int:
        return self.cardinality

    def __iter__(self):
        return iter(int(x) for x in self.residues())

    def __contains__(self, x) -> bool:
        return bool(self.bits[int(x) % self.N])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupSet):
            return NotImplemented
        return self.N == other.N and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.N, np.packbits(self.bits).tobytes()))

    def __repr__(self) -> str:
        if self.cardinality <= 12:
            body = "{" + ", ".join(map(str, self)) + "}"
        else:
            body = f"|S|={self.cardinality}"
        return f"GroupSet(N={self.N}, {body})"

    def _check(self, other: "GroupSet") -> None:
        if self.N != other.N:
            raise ValueError(f"group mismatch: Z_{self.N} vs Z_{other.N}")

    def __and__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.bits & other.bits)

    def __or__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.bits | other.bits)

    def __sub__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.group, self.bits & ~other.bits)

    def __invert__(self) -> "GroupSet":
        return complement(self)

    def issubset(self, other: "GroupSet") -> bool:
        self._check(other)
        return not bool(np.any(self.bits & ~other.bits))

    def isdisjoint(self, other: "GroupSet") -> bool:
        self._check(other)
        return not bool(np.any(self.bits & other.bits))


@dataclass(frozen=True, eq=False)
class ConvolutionTable:
    group: CyclicGroup
    counts: np.ndarray

    def support(self) -> GroupSet:
        return GroupSet(self.group, self.counts > 0)


def make_set(residues: Iterable[int], N: int) -> GroupSet:
    group = cyclic_group(N)
    idx = np.asarray(list(residues) if not isinstance(residues, np.ndarray) else residues,
                     dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= N):
        bad = idx[(idx < 0) | (idx >= N)][0]
        raise ValueError(f"residue {bad} outside [0, {N})")
    bits = np.zeros(N, dtype=bool)
    bits[idx] = True
    return GroupSet(group, bits)


def empty_set(N: int) -> GroupSet:
    return GroupSet(cyclic_group(N), np.zeros(N, dtype=bool))


def full_set(N: int) -> GroupSet:
    return GroupSet(cyclic_group(N), np.ones(N, dtype=bool))


def nonzero_set(N: int) -> GroupSet:
    bits = np.ones(N, dtype=bool)
    bits[0] = False
    return GroupSet(cyclic_group(N), bits)


def interval(lo: int, hi: int, N: int) -> GroupSet:
    """Residues lo, lo+1, ..., hi (inclusive), empty when hi < lo."""
    if hi < lo:
        return empty_set(N)
    return make_set(np.arange(lo, hi + 1) % N, N)


def random_set(N: int, size: int, rng: np.random.Generator, exclude_zero: bool = False) -> GroupSet:
    pool = np.arange(1 if exclude_zero else 0, N)
    if size > pool.size:
        raise ValueError(f"cannot draw {size} residues from {pool.size}")
    return make_set(rng.choice(pool, size=size, replace=False), N)


def complement(S: GroupSet) -> GroupSet:
    return GroupSet(S.group, ~S.bits)


@lru_cache(maxsize=32)
def inverse_table(p: int) -> np.ndarray:
    """inv[x] = x^{-1} mod p for x != 0, inv[0] = 0."""
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    if p < 2**31:
        base = np.arange(p, dtype=np.int64)
        inv = np.ones(p, dtype=np.int64)
        e = p - 2
        while e:
            if e & 1:
                inv = inv * base % p
            base = base * base % p
            e >>= 1
    else:
        inv = np.array([pow(x, -1, p) if x else 0 for x in range(p)], dtype=object)
    inv[0] = 0
    inv.flags.writeable = False
    return inv


def invert_set(S: GroupSet) -> GroupSet:
    if not S.group.is_prime:
        raise ValueError(f"inversion needs a prime modulus, got {S.N}")
    if S.bits[0]:
        raise ValueError("0 has no inverse")
    inv = inverse_table(S.N)
    return make_set(inv[S.residues()], S.N)


def dilate(S: GroupSet, lam: int) -> GroupSet:
    lam = int(lam)
    if math.gcd(lam, S.N) != 1:
        raise ValueError(f"{lam} is not invertible mod {S.N}")
    return make_set((S.residues() * (lam % S.N)) % S.N, S.N)


def negate(S: GroupSet) -> GroupSet:
    return make_set((-S.residues()) % S.N, S.N)


def translate(S: GroupSet, t: int) -> GroupSet:
    return GroupSet(S.group, np.roll(S.bits, int(t) % S.N))


def _naive_counts(A: GroupSet, B: GroupSet) -> np.ndarray:
    counts = np.zeros(A.N, dtype=np.int64)
    # iterate over the smaller operand
    small, large = (A, B) if A.cardinality <= B.cardinality else (B, A)
    lb = large.bits.astype(np.int64)
    for a in small.residues():
        counts += np.roll(lb, a)
    return counts


def convolution_counts(A: GroupSet, B: GroupSet, method: str = "auto",
                       threshold: int = SPECTRAL_THRESHOLD) -> ConvolutionTable:
    """Representation counts of every x as a + b, A x B.

    ``method`` is ``"naive"``, ``"spectral"`` or ``"auto"`` (spectral above
    ``threshold``). Both routes return identical integer tables.
    """
    A._check(B)
    if method == "auto":
        method = "spectral" if A.N > threshold else "naive"
    if A.cardinality == 0 or B.cardinality == 0:
        counts = np.zeros(A.N, dtype=np.int64)
    elif method == "naive":
        counts = _naive_counts(A, B)
    elif method == "spectral":
        from .fourier import convolve_indicators
        counts = convolve_indicators(A.bits, B.bits)
    else:
        raise ValueError(f"unknown method {method!r}")
    counts.flags.writeable = False
    return ConvolutionTable(A.group, counts)


def sumset(A: GroupSet, B: GroupSet) -> GroupSet:
    return convolution_counts(A, B).support()


def difference_set(A: GroupSet, B: GroupSet) -> GroupSet:
    return sumset(A, negate(B))


#: Floats are read as the nearest fraction with denominator up to this bound.
FRACTION_DENOMINATOR_LIMIT = 10**12


def exact_fraction(x) -> Fraction:
    """The rational a float stands for: 0.1 -> 1/10, 1/33 -> 1/33."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {x}")
    return Fraction(x).limit_denominator(FRACTION_DENOMINATOR_LIMIT)


def count_threshold(eps, N: int) -> int:
    """Smallest integer c with c >= eps*N, evaluated in exact arithmetic.

    eps=0.1, N=30 gives 3 and eps=1/33, N=33 gives 1, despite float rounding.
    """
    return math.ceil(exact_fraction(eps) * N)


def partial_sumset(A: GroupSet, B: GroupSet, eps) -> GroupSet:
    """Elements with at least eps*N representations as a + b."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    table = convolution_counts(A, B)
    return GroupSet(A.group, table.counts >= max(count_threshold(eps, A.N), 1))


def partial_difference(A: GroupSet, B: GroupSet, eps) -> GroupSet:
    """A -_eps B, read as the partial sumset of A and -B."""
    return partial_sumset(A, negate(B), eps)


def is_sum_free(A: GroupSet) -> bool:
    return sumset(A, A).isdisjoint(A)


@lru_cache(maxsize=16)
def _dlog_tables(p: int) -> tuple[np.ndarray, np.ndarray]:
    g = int(sympy.primitive_root(p))
    power = np.empty(p - 1, dtype=np.int64)
    x = 1
    for k in range(p - 1):
        power[k] = x
        x = x * g % p
    log = np.zeros(p, dtype=np.int64)
    log[power] = np.arange(p - 1)
    return power, log


def _product_set_nonzero(X: GroupSet, S: GroupSet) -> np.ndarray:
    """Bits of {x*s : x in X, s in S} for X, S inside F_p^*."""
    p = X.N
    xs, ss = X.residues(), S.residues()
    if xs.size == 0 or ss.size == 0:
        return np.zeros(p, dtype=bool)
    if p <= 64:
        bits = np.zeros(p, dtype=bool)
        bits[np.outer(xs, ss).ravel() % p] = True
        return bits
    # multiplication in F_p^* is addition of discrete logs in Z_{p-1}
    power, log = _dlog_tables(p)
    logs = convolution_counts(make_set(log[xs], p - 1), make_set(log[ss], p - 1)).counts
    bits = np.zeros(p, dtype=bool)
    bits[power[np.flatnonzero(logs)]] = True
    return bits


def coverage_a_a_plus_a(A: GroupSet) -> GroupSet:
    """The set A(A+A) = {x(y+z)} for 0 not in A over a prime field.

    0 is a member exactly when 0 lies in A+A.
    """
    if not A.group.is_prime:
        raise ValueError(f"A(A+A) needs a prime modulus, got {A.N}")
    if A.bits[0]:
        raise ValueError("0 must not belong to A")
    S = sumset(A, A)
    bits = _product_set_nonzero(A, S - make_set([0], A.N))
    bits[0] = S.bits[0]
    return GroupSet(A.group, bits)


def product_sumset_contains(A: GroupSet, t: int) -> bool:
    """Whether t lies in A(A+A), i.e. t/x in A+A for some x in A (t != 0)."""
    if t % A.N == 0:
        return bool(sumset(A, A).bits[0]) and A.cardinality > 0
    inv = inverse_table(A.N)
    S = sumset(A, A)
    return bool(np.any(S.bits[(t * inv[A.residues()]) % A.N]))


def exception_set(X: GroupSet, Y: GroupSet, delta: float, T: float) -> GroupSet:
    """The set E = X cap (Y +_{delta T/kappa} Z), Z the complement of X -_delta Y.

    Counting solutions of x - y = z shows |E| <= |X|/T; that bound is
    checked on every call.
    """
    if not T > 1:
        raise ValueError(f"T must exceed 1, got {T}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if X.cardinality == 0:
        raise ValueError("X must be nonempty")
    X._check(Y)
    kappa = X.cardinality / X.N
    Z = complement(partial_difference(X, Y, delta))
    E = X & partial_sumset(Y, Z, delta * T / kappa)
    if E.cardinality > X.cardinality / T:
        raise InequalityViolation(f"|E|={E.cardinality} > |X|/T={X.cardinality / T}")
    return E


def set_to_json(S: GroupSet) -> dict:
    if S.N > HEX_SERIALIZATION_THRESHOLD:
        return {"N": S.N, "bits_hex": np.packbits(S.bits, bitorder="little").tobytes().hex()}
    return {"N": S.N, "residues": [int(x) for x in S.residues()]}


def set_from_json(obj) -> GroupSet:
    if not isinstance(obj, dict) or "N" not in obj:
        raise ValueError("set JSON must be an object with field 'N'")
    N = int(obj["N"])
    if "bits_hex" in obj:
        raw = np.frombuffer(bytes.fromhex(obj["bits_hex"]), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        if bits.size < N or np.any(bits[N:]):
            raise ValueError("bits_hex does not match N")
        return GroupSet(cyclic_group(N), bits[:N].astype(bool))
    if "residues" in obj:
        return make_set([int(x) for x in obj["residues"]], N)
    raise ValueError("set JSON needs 'residues' or 'bits_hex'")
