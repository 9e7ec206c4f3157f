"""Independent slow reference implementations, written with plain Python loops."""
import cmath
import math


def inv(x, p):
    return pow(x, p - 2, p)


def conv_counts(A, B, N):
    out = [0] * N
    for a in A:
        for b in B:
            out[(a + b) % N] += 1
    return out


def sumset(A, B, N):
    return {(a + b) % N for a in A for b in B}


def partial_sumset(A, B, N, eps_num, eps_den):
    """Threshold eps = eps_num/eps_den compared exactly: count * den >= num * N."""
    c = conv_counts(A, B, N)
    return {x for x in range(N) if c[x] * eps_den >= eps_num * N}


def product_cover(A, p):
    """A(A+A) by the triple loop."""
    return {(x * (y + z)) % p for x in A for y in A for z in A}


def dft(values):
    N = len(values)
    return [sum(values[x] * cmath.exp(-2j * math.pi * r * x / N) for x in range(N)) for r in range(N)]


def idft(F):
    N = len(F)
    return [sum(F[r] * cmath.exp(2j * math.pi * r * x / N) for r in range(N)) / N for x in range(N)]


def wiener(values):
    return sum(abs(z) for z in dft(values)) / len(values)


def kloosterman(a, b, p):
    return sum(cmath.exp(2j * math.pi * (a * z + b * inv(z, p)) / p) for z in range(1, p))


def inversion_orbits(p):
    seen, out = set(), []
    for x in range(1, p):
        if x not in seen:
            o = {x, inv(x, p)}
            seen |= o
            out.append(sorted(o))
    return out


def max_sumfree_selfinv(p):
    """Brute force over all unions of inversion orbits."""
    orbs = inversion_orbits(p)
    best = 0
    for m in range(1 << len(orbs)):
        A = {x for i, o in enumerate(orbs) if m >> i & 1 for x in o}
        if len(A) > best and not any((a + b) % p in A for a in A for b in A):
            best = len(A)
    return best


def max_noncover(p):
    """Largest A inside F_p^* with some t != 0 missing from A(A+A); all subsets."""
    best = 0
    for m in range(1, 1 << (p - 1)):
        A = [x + 1 for x in range(p - 1) if m >> x & 1]
        if len(A) <= best:
            continue
        if len(product_cover(A, p) - {0}) < p - 1:
            best = len(A)
    return best
