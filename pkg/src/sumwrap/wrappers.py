"""Blocks, wrappers and the randomized decomposition f = g + h + k.

A family of characters r_1..r_d and a granularity eps (K = ceil(1/eps)
equal half-open arcs of the circle, the first starting at angle 0) cut Z_N
into blocks: x and y share a block when every e_{r_j}(x), e_{r_j}(y) fall in
the same arc. A wrapper is a union of blocks.

Blocks are identified by their minimal element. The partition is built by
refining labels one chunk of characters at a time and stops as soon as all
blocks are singletons, so K^d is never enumerated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np

from .fourier import SpectralFunction, inverse_dft, wiener_norm
from .groups import (
    CyclicGroup,
    GroupSet,
    InequalityViolation,
    convolution_counts,
    count_threshold,
    cyclic_group,
    exact_fraction,
    invert_set,
    make_set,
)


class DecompositionError(RuntimeError):
    """The sup-norm target for h was not reached within the retry budget."""


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class CharacterFamily:
    group: CyclicGroup
    characters: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        chars = np.asarray(self.characters, dtype=np.int64).ravel() % self.group.modulus
        coeffs = np.asarray(self.coefficients, dtype=np.complex128).ravel()
        if chars.size < 1:
            raise ValueError("a character family needs d >= 1")
        if coeffs.shape != chars.shape:
            raise ValueError("one coefficient per character is required")
        if np.any(np.abs(np.abs(coeffs) - 1) > 1e-9):
            raise ValueError("coefficients must have unit modulus")
        chars.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def trivial(cls, group: CyclicGroup) -> "CharacterFamily":
        return cls(group, [0], [1.0])

    @property
    def d(self) -> int:
        return int(self.characters.size)

    @property
    def N(self) -> int:
        return self.group.modulus

    def distinct(self) -> "CharacterFamily":
        """The same family with repeated characters dropped; blocks are unchanged."""
        chars, first = np.unique(self.characters, return_index=True)
        return CharacterFamily(self.group, chars, self.coefficients[first])

    def average(self) -> np.ndarray:
        """x -> (1/d) sum_j c_j e_{r_j}(x), as a complex vector."""
        c = self.coefficients
        weights = (np.bincount(self.characters, weights=c.real, minlength=self.N)
                   + 1j * np.bincount(self.characters, weights=c.imag, minlength=self.N))
        return inverse_dft(weights).values * (self.N / self.d)


@dataclass(frozen=True)
class ArcPartition:
    eps: float
    K: int

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"granularity must lie in (0, 1], got {self.eps}")
        if self.K < 1:
            raise ValueError("K must be positive")

    @classmethod
    def from_eps(cls, eps: float) -> "ArcPartition":
        if not 0 < eps <= 1:
            raise ValueError(f"granularity must lie in (0, 1], got {eps}")
        K = math.ceil(Fraction(1) / exact_fraction(eps))
        return cls(float(eps), K)

    @property
    def arc_length(self) -> float:
        return 2 * math.pi / self.K

    def arcs(self) -> list[tuple[float, float]]:
        return [(i * self.arc_length, (i + 1) * self.arc_length) for i in range(self.K)]

    def chord(self) -> float:
        """Largest distance between two points of one arc."""
        return 2 * math.sin(math.pi / self.K) if self.K > 1 else 2.0


def _arc_indices(xs: np.ndarray, chars: np.ndarray, N: int, K: int) -> np.ndarray:
    # e_r(x) sits at r*x/N turns; arc i (1-based) covers [(i-1)/K, i/K) turns
    return (np.outer(xs, chars) % N) * K // N + 1


def block_signature(x: int, family: CharacterFamily, partition: ArcPartition) -> tuple[int, ...]:
    row = _arc_indices(np.array([int(x) % family.N]), family.characters, family.N, partition.K)[0]
    return tuple(int(i) for i in row)


class BlockPartition:
    """Partition of Z_N into the eps-d-blocks of a family."""

    def __init__(self, family: CharacterFamily, partition: ArcPartition, chunk: int = 128):
        self.family = family
        self.partition = partition
        N = family.N
        xs = np.arange(N, dtype=np.int64)
        chars = np.unique(family.characters)
        labels = np.zeros(N, dtype=np.int64)
        n_blocks = 1
        for start in range(0, chars.size, chunk):
            if n_blocks == N:
                break
            idx = _arc_indices(xs, chars[start:start + chunk], N, partition.K)
            keys = np.column_stack([labels, idx])
            _, inverse = np.unique(keys, axis=0, return_inverse=True)
            labels = inverse.ravel()
            n_blocks = int(labels.max()) + 1
        _, first = np.unique(labels, return_index=True)
        rep = first[labels]
        rep.flags.writeable = False
        self.rep = rep
        self.reps = np.unique(rep)
        self.sizes = np.bincount(rep, minlength=N)[self.reps]

    @property
    def N(self) -> int:
        return self.family.N

    @property
    def n_blocks(self) -> int:
        return int(self.reps.size)

    def block(self, rep: int) -> GroupSet:
        return GroupSet(self.family.group, self.rep == int(rep))

    def signature_of(self, rep: int) -> tuple[int, ...]:
        return block_signature(rep, self.family, self.partition)


@dataclass(frozen=True, eq=False)
class Wrapper:
    """A union of blocks of one partition, stored by block representatives."""

    blocks: BlockPartition
    members: frozenset
    info: dict = field(default_factory=dict)

    @property
    def family(self) -> CharacterFamily:
        return self.blocks.family

    @property
    def partition(self) -> ArcPartition:
        return self.blocks.partition

    @property
    def N(self) -> int:
        return self.blocks.N

    @property
    def d(self) -> int:
        return self.family.d

    @property
    def eps(self) -> float:
        return self.partition.eps

    def signatures(self) -> set[tuple[int, ...]]:
        return {self.blocks.signature_of(r) for r in self.members}

    @cached_property
    def cached_set(self) -> GroupSet:
        reps = np.fromiter(self.members, dtype=np.int64, count=len(self.members))
        return GroupSet(self.family.group, np.isin(self.blocks.rep, reps))


def wrapper_from_signatures(family: CharacterFamily, partition: ArcPartition,
                            signatures) -> Wrapper:
    blocks = BlockPartition(family, partition)
    wanted = {tuple(int(i) for i in s) for s in signatures}
    rows = _arc_indices(blocks.reps, family.characters, family.N, partition.K)
    members = frozenset(int(r) for r, row in zip(blocks.reps, rows) if tuple(int(i) for i in row) in wanted)
    return Wrapper(blocks, members)


def materialize(W: Wrapper) -> GroupSet:
    return W.cached_set


def complement_wrapper(W: Wrapper) -> Wrapper:
    others = frozenset(int(r) for r in W.blocks.reps) - W.members
    return Wrapper(W.blocks, others, dict(W.info))


@dataclass(frozen=True)
class WienerReport:
    exact: float
    majorant: float
    n_blocks: int


def _block_norms(blocks: BlockPartition, reps: np.ndarray) -> np.ndarray:
    """Wiener norm of each listed block; singletons are exactly 1."""
    sizes = np.bincount(blocks.rep, minlength=blocks.N)[reps]
    norms = np.ones(reps.size)
    multi = np.flatnonzero(sizes > 1)
    for start in range(0, multi.size, 256):
        sel = multi[start:start + 256]
        ind = (blocks.rep[None, :] == reps[sel][:, None]).astype(np.complex128)
        F = np.fft.fft(ind, axis=1)
        norms[sel] = np.abs(F).sum(axis=1) / blocks.N
    return norms


def wrapper_wiener_norm(W: Wrapper) -> WienerReport:
    """Exact ||W||_w together with the triangle-inequality majorant over member blocks."""
    exact = wiener_norm(materialize(W).bits)
    reps = np.array(sorted(W.members), dtype=np.int64)
    majorant = float(_block_norms(W.blocks, reps).sum()) if reps.size else 0.0
    if exact > majorant * (1 + 1e-9) + 1e-9:
        raise InequalityViolation(f"||W||_w={exact} exceeds the block sum {majorant}")
    return WienerReport(exact, majorant, int(reps.size))


@dataclass(frozen=True)
class IntersectionEstimate:
    exact: int
    main_term: float
    error_bound: float
    omega1: float
    omega2: float
    zero_removed: bool

    @property
    def deviation(self) -> float:
        return abs(self.exact - self.main_term)

    @property
    def ratio(self) -> float:
        return self.deviation / (self.error_bound + 1)


def intersect_sets_with_inverse(S1: GroupSet, S2: GroupSet) -> IntersectionEstimate:
    """|S1 cap (S2 minus 0)^*| against |S1||S2|/p with error 2 sqrt(p) w1 w2 (+1 for the dropped 0)."""
    if not S1.group.is_prime:
        raise ValueError(f"needs a prime modulus, got {S1.N}")
    S1._check(S2)
    p = S1.N
    zero = bool(S2.bits[0])
    inv = invert_set(S2 - make_set([0], p))
    exact = (S1 & inv).cardinality
    omega1, omega2 = wiener_norm(S1.bits), wiener_norm(S2.bits)
    main = S1.cardinality * S2.cardinality / p
    bound = 2 * math.sqrt(p) * omega1 * omega2
    if abs(exact - main) > bound + 1 + 1e-9:
        raise InequalityViolation(f"|W1 cap W2*|={exact} deviates from {main} by more than {bound}+1")
    return IntersectionEstimate(exact, main, bound, omega1, omega2, zero)


def intersect_with_inverse(W1: Wrapper, W2: Wrapper) -> IntersectionEstimate:
    return intersect_sets_with_inverse(materialize(W1), materialize(W2))


def sample_characters(f: SpectralFunction, d: int, seed) -> CharacterFamily:
    """d characters drawn i.i.d. with probability |F(r)| / sum |F|, coefficients F(r)/|F(r)|."""
    if d < 1:
        raise ValueError("d must be >= 1")
    mags = np.abs(f.spectrum)
    total = mags.sum()
    if total == 0:
        raise ValueError("cannot sample characters of the zero function")
    rng = _as_rng(seed)
    # multinomial counts are the histogram of d i.i.d. draws
    counts = rng.multinomial(d, mags / total)
    chars = np.repeat(np.arange(f.N), counts)
    coeffs = f.spectrum[chars] / mags[chars]
    return CharacterFamily(f.group, chars, coeffs)


@dataclass(frozen=True)
class DecomposeConfig:
    c_d: float = 64.0          # cap on d, in units of (w/delta)^2 log(1/xi)
    c_h: float = 10.0          # accept when sup |h| <= c_h * delta
    max_retries: int = 6
    lp_floor: int = 3
    h_bound: float | None = None  # absolute override of c_h * delta
    wrap_fraction: float = 0.2    # decomposition step as a fraction of the wrapping margin
    wrap_attempts: int = 6
    d_max: int = 1 << 22


def round_to_grid(values: np.ndarray, step: float) -> np.ndarray:
    """Nearest multiple of step, ties toward zero; complex parts independently."""
    def rnd(v):
        q = v / step
        return np.sign(q) * np.ceil(np.abs(q) - 0.5) * step
    if np.iscomplexobj(values):
        return rnd(values.real) + 1j * rnd(values.imag)
    return rnd(values)


def lp_norm(values: np.ndarray, p: float) -> float:
    """(mean |v|^p)^{1/p}, scaled to avoid overflow."""
    mag = np.abs(values)
    top = float(mag.max(initial=0.0))
    if top == 0:
        return 0.0
    return top * float(np.mean((mag / top) ** p)) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class Decomposition:
    f: SpectralFunction
    g: SpectralFunction
    h: SpectralFunction
    k: SpectralFunction
    exceptional: GroupSet
    eps: float
    delta: float
    xi: float
    omega: float
    family: CharacterFamily
    partition: ArcPartition
    blocks: BlockPartition
    approximant: np.ndarray
    achieved_h_inf: float
    lp_exponent: int
    lp_error: float
    retries: int

    @property
    def d(self) -> int:
        return self.family.d

    def report(self) -> dict:
        return {
            "epsilon": self.eps,
            "K": self.partition.K,
            "d": self.d,
            "d_distinct": int(np.unique(self.family.characters).size),
            "n_blocks": self.blocks.n_blocks,
            "delta": self.delta,
            "xi": self.xi,
            "omega": self.omega,
            "achieved_h_inf": self.achieved_h_inf,
            "exceptional_size": self.exceptional.cardinality,
            "lp_exponent": self.lp_exponent,
            "lp_error": self.lp_error,
            "retries": self.retries,
        }


def decompose(f: SpectralFunction, delta: float, xi: float,
              config: DecomposeConfig | None = None, seed=0) -> Decomposition:
    """Split f into a block-constant g on the delta-grid, a small h and a sparse k.

    Characters are sampled proportionally to |F| with d doubling from
    ceil(log 1/xi) until the empirical L^p error of the normalized average
    drops to eps = delta/w (p = ceil(2 log 1/xi), floor ``lp_floor``). The
    exceptional set holds at most floor(xi N) points, namely those among the
    largest residuals that exceed the sup-norm target.
    """
    config = config or DecomposeConfig()
    if not 0 < xi < 1:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    omega = wiener_norm(f)
    if omega == 0:
        raise ValueError("cannot decompose the zero function")
    if not 0 < delta <= omega * (1 + 1e-12):
        raise ValueError(f"delta must lie in (0, w={omega}], got {delta}")
    rng = _as_rng(seed)
    N = f.N
    eps = min(delta / omega, 1.0)
    partition = ArcPartition.from_eps(eps)
    log_inv = math.log(1 / xi)
    lp_exp = max(config.lp_floor, math.ceil(2 * log_inv))
    d = max(1, math.ceil(log_inv))
    cap = max(d, min(config.d_max, math.ceil(config.c_d * (omega / delta) ** 2 * log_inv)))
    h_bound = config.h_bound if config.h_bound is not None else config.c_h * delta
    real = f.is_real()
    target = f.values.real / omega if real else f.values / omega
    n_exc = math.floor(xi * N)
    achieved = math.inf

    for attempt in range(config.max_retries + 1):
        while True:
            family = sample_characters(f, d, rng)
            approx = family.average()
            err = lp_norm(target - (approx.real if real else approx), lp_exp)
            if err <= eps or d >= cap:
                break
            d = min(2 * d, cap)
        blocks = BlockPartition(family, partition)
        at_rep = approx[blocks.rep]
        gv = round_to_grid(omega * (at_rep.real if real else at_rep), delta)
        residual = f.values - gv
        mag = np.abs(residual)
        order = np.argsort(-mag, kind="stable")[:n_exc]
        y_idx = order[mag[order] > h_bound]
        outside = np.ones(N, dtype=bool)
        outside[y_idx] = False
        achieved = float(mag[outside].max(initial=0.0))
        if achieved <= h_bound:
            y_bits = ~outside
            Y = GroupSet(f.group, y_bits)
            h = np.where(outside, residual, 0)
            k = np.where(y_bits, residual, 0)
            return Decomposition(
                f=f, g=SpectralFunction(f.group, gv), h=SpectralFunction(f.group, h),
                k=SpectralFunction(f.group, k), exceptional=Y, eps=eps, delta=delta, xi=xi,
                omega=omega, family=family, partition=partition, blocks=blocks,
                approximant=approx, achieved_h_inf=achieved, lp_exponent=lp_exp,
                lp_error=err, retries=attempt,
            )
        d = min(2 * d, cap)
    raise DecompositionError(
        f"sup|h| = {achieved:.4g} > {h_bound:.4g} after {config.max_retries} retries; "
        "raise c_d or delta"
    )


def block_oscillation(dec: Decomposition) -> float:
    """Largest |a(x) - a(y)| over pairs in a common block, a the normalized average."""
    rep = dec.blocks.rep
    sizes = np.bincount(rep, minlength=dec.f.N)
    worst = 0.0
    for r in np.flatnonzero(sizes > 1):
        vals = dec.approximant[rep == r]
        worst = max(worst, float(np.abs(vals[:, None] - vals[None, :]).max()))
    return worst


def _trivial_wrapper(group: CyclicGroup, include: bool, info: dict) -> Wrapper:
    blocks = BlockPartition(CharacterFamily.trivial(group), ArcPartition(1.0, 1))
    return Wrapper(blocks, frozenset([0]) if include else frozenset(), info)


def _wrap_band(f: SpectralFunction, lower: float, upper: float, margin: float, xi: float,
               seed, config: DecomposeConfig) -> tuple[Wrapper, GroupSet, float]:
    """Wrapper {lower - margin/2 <= g <= upper + margin/2} with sup|h| < margin/2 off Y."""
    if not f.is_real():
        raise ValueError("level sets need a real-valued function")
    rng = _as_rng(seed)
    omega = wiener_norm(f)
    if omega == 0:
        include = lower - margin / 2 <= 0 <= upper + margin / 2
        info = {"omega": 0.0, "eps": 1.0, "d": 1, "note": "zero function"}
        return _trivial_wrapper(f.group, include, info), GroupSet(f.group, np.zeros(f.N, bool)), omega
    frac = config.wrap_fraction
    last_error = None
    for attempt in range(config.wrap_attempts):
        step = frac * margin
        try:
            dec = decompose(f, step, xi, replace(config, h_bound=0.45 * margin), rng)
        except DecompositionError as exc:
            last_error = exc
            frac /= 2
            continue
        g = dec.g.values.real
        reps = dec.blocks.reps
        keep = (g[reps] >= lower - margin / 2) & (g[reps] <= upper + margin / 2)
        info = dec.report()
        info.update({"margin": margin, "decomposition_step": step, "wrap_attempts": attempt + 1})
        distinct = BlockPartition(dec.family.distinct(), dec.partition)
        W = Wrapper(distinct, frozenset(int(r) for r in reps[keep]), info)
        if not np.array_equal(distinct.rep, dec.blocks.rep):
            raise AssertionError("deduplicated family changed the block partition")
        return W, dec.exceptional, omega
    raise DecompositionError(f"wrapping failed after {config.wrap_attempts} attempts: {last_error}")


def _check_band_inclusions(W: Wrapper, Y: GroupSet, inner: np.ndarray, outer: np.ndarray) -> None:
    Wset = materialize(W)
    missing = inner & ~Wset.bits & ~Y.bits
    spill = Wset.bits & ~Y.bits & ~outer
    if missing.any():
        raise InequalityViolation(f"{int(missing.sum())} points of the level set escape the wrapper")
    if spill.any():
        raise InequalityViolation(f"{int(spill.sum())} wrapper points leave the allowed band")


def wrap_level_set(f: SpectralFunction, l1: float, l2: float, delta: float, xi: float,
                   seed=0, config: DecomposeConfig | None = None) -> tuple[Wrapper, GroupSet]:
    """Wrap L = {l1 <= f < l2}: L minus Y inside W, W minus Y inside {l1 - delta <= f < l2 + delta}."""
    config = config or DecomposeConfig()
    if not l1 < l2:
        raise ValueError("need l1 < l2")
    if not delta > 0:
        raise ValueError("delta must be positive")
    omega = wiener_norm(f)
    if omega and delta > omega * (1 + 1e-12):
        raise ValueError(f"delta must not exceed the Wiener norm {omega}")
    W, Y, _ = _wrap_band(f, l1, l2, delta, xi, seed, config)
    v = f.values.real
    inner = (v >= l1) & (v < l2)
    outer = (v >= l1 - delta) & (v < l2 + delta)
    _check_band_inclusions(W, Y, inner, outer)
    return W, Y


def wrap_threshold(f: SpectralFunction, eta: float, delta: float, xi: float,
                   seed=0, config: DecomposeConfig | None = None) -> tuple[Wrapper, GroupSet]:
    """Wrap L = {f < eta} away from R = {f >= eta + delta}.

    When delta exceeds the Wiener norm w the margin shrinks to w/2, which
    only makes the wrapper tighter.
    """
    config = config or DecomposeConfig()
    if not delta > 0:
        raise ValueError("delta must be positive")
    omega = wiener_norm(f)
    margin = delta if (omega == 0 or delta <= omega) else omega / 2
    W, Y, _ = _wrap_band(f, -math.inf, eta, margin, xi, seed, config)
    W.info.update({"eta": eta, "delta": delta, "effective_margin": margin})
    v = f.values.real
    _check_band_inclusions(W, Y, v < eta, v < eta + delta)
    return W, Y


def wrap_sumset_complement(A: GroupSet, B: GroupSet, eta: float, delta: float, xi: float,
                           seed=0, config: DecomposeConfig | None = None) -> tuple[Wrapper, GroupSet]:
    """Wrap X = complement(A +_eta B) inside complement(A +_{eta+delta} B), up to Y.

    f = A*B is integer valued, so the thresholds are the exact counts
    t_lo = ceil(eta N) and t_hi = ceil((eta + delta) N) (each at least 1).
    """
    A._check(B)
    if eta < 0 or not delta > 0:
        raise ValueError("need eta >= 0 and delta > 0")
    if not 0 < xi < 1:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    N = A.N
    t_lo = max(count_threshold(exact_fraction(eta), N), 1)
    t_hi = max(count_threshold(exact_fraction(eta) + exact_fraction(delta), N), 1)
    counts = convolution_counts(A, B).counts
    f = SpectralFunction(A.group, counts.astype(np.complex128))
    omega = wiener_norm(f)
    omega_bound = math.sqrt(A.cardinality * B.cardinality)
    if omega > omega_bound * (1 + 1e-9) + 1e-9:
        raise InequalityViolation(f"||A*B||_w = {omega} > sqrt(|A||B|) = {omega_bound}")
    # integer levels: {f < t_lo} = {f < t_lo - 3/4}, {f >= t_hi} = {f >= t_hi - 1/4}
    eta_eff = t_lo - 0.75
    delta_eff = (t_hi - t_lo) + 0.5
    W, Y = wrap_threshold(f, eta_eff, delta_eff, xi, seed, config)
    W.info.update({"t_lo": t_lo, "t_hi": t_hi, "omega_bound": omega_bound})
    X = counts < t_lo
    allowed = counts < t_hi
    _check_band_inclusions(W, Y, X, allowed)
    return W, Y


def random_wrapper(N: int, d: int, K: int, seed, density: float = 0.5) -> Wrapper:
    """Wrapper over d uniformly random characters, each occupied block kept with probability density."""
    rng = _as_rng(seed)
    group = cyclic_group(N)
    family = CharacterFamily(group, rng.integers(0, N, size=d), np.ones(d))
    blocks = BlockPartition(family, ArcPartition(1.0 / K, K))
    keep = rng.random(blocks.n_blocks) < density
    return Wrapper(blocks, frozenset(int(r) for r in blocks.reps[keep]))


def wrapper_to_json(W: Wrapper) -> dict:
    sigs = sorted(W.signatures())
    return {
        "N": W.N,
        "epsilon": W.eps,
        "K": W.partition.K,
        "characters": [int(r) for r in W.family.characters],
        "coefficients": [{"re": float(c.real), "im": float(c.imag)} for c in W.family.coefficients],
        "signatures": [list(s) for s in sigs],
    }


def wrapper_from_json(obj: dict) -> Wrapper:
    group = cyclic_group(int(obj["N"]))
    coeffs = [complex(c["re"], c["im"]) for c in obj["coefficients"]]
    family = CharacterFamily(group, obj["characters"], coeffs)
    partition = ArcPartition(float(obj["epsilon"]), int(obj["K"]))
    return wrapper_from_signatures(family, partition, obj["signatures"])
