"""Abelian group structure of E(F_q): factorization, point orders, Sylow shapes.

E(F_q) = Z/n1 x Z/n2 with n1 | n2 and n1 | q - 1. The exponent n2 is found
as the lcm of orders of random points. A prime q dividing the order needs
sampling only when it is genuinely ambiguous, i.e. q^2 | N and q | q_field-1;
everything else is forced. For each still-ambiguous prime the sampler keeps
drawing until the lcm has been stable for 64 consecutive draws, which bounds
the per-prime error by 2^-64 (a random element misses the maximal valuation
with probability <= 1/2). Structural rejects (n1 must divide both n2 and
q_field - 1) catch underestimates on top of that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_FACTOR_INPUT = 1 << 126
TRIAL_DIVISION_BOUND = 1 << 21
STABILITY_WINDOW = 64
SAMPLE_CAP = 4096

_small_primes_cache: list[int] | None = None


def _small_primes() -> list[int]:
    """Primes below 2^21, sieved once per process."""
    global _small_primes_cache
    if _small_primes_cache is None:
        import numpy as np

        n = TRIAL_DIVISION_BOUND
        sieve = np.ones(n, dtype=bool)
        sieve[:2] = False
        for i in range(2, math.isqrt(n) + 1):
            if sieve[i]:
                sieve[i * i :: i] = False
        _small_primes_cache = [int(q) for q in np.nonzero(sieve)[0]]
    return _small_primes_cache


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple  # ((prime, exponent), ...) sorted by prime

    def __post_init__(self):
        prod = 1
        for q, e in self.factors:
            prod *= q ** e
        if prod != self.value:
            raise ValueError(f"factorization of {self.value} does not multiply back")

    def valuation(self, q: int) -> int:
        for prime, e in self.factors:
            if prime == q:
                return e
        return 0


def _miller_rabin(n: int) -> bool:
    from .ffield import is_prime

    return is_prime(n)


def _pollard_rho(n: int) -> int:
    """A nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    for c in range(1, 50):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"pollard rho failed on {n}")  # never seen in range


def factor(n: int) -> FactoredInteger:
    """Exact factorization for 1 <= n < 2^126."""
    if not 1 <= n < MAX_FACTOR_INPUT:
        raise ValueError(f"factor() accepts 1 <= n < 2^126, got {n}")
    m = n
    out: dict[int, int] = {}
    for q in _small_primes():
        if q * q > m:
            break
        while m % q == 0:
            out[q] = out.get(q, 0) + 1
            m //= q
    stack = [m] if m > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _miller_rabin(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return FactoredInteger(value=n, factors=tuple(sorted(out.items())))


@dataclass(frozen=True)
class GroupShape:
    """E(F_q) = Z/n1 x Z/n2 with n1 | n2."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1 or self.n2 % self.n1 != 0:
            raise ValueError(f"invalid group shape ({self.n1}, {self.n2})")

    @property
    def order(self) -> int:
        return self.n1 * self.n2


def sylow_shape(shape: GroupShape, ell: int) -> tuple[int, int]:
    """(a, b) = ell-adic valuations of (n1, n2)."""
    a = 0
    n = shape.n1
    while n % ell == 0:
        a += 1
        n //= ell
    b = 0
    n = shape.n2
    while n % ell == 0:
        b += 1
        n //= ell
    return a, b


def prime_to_ell_part(shape: GroupShape, ell: int) -> tuple[int, int]:
    n1, n2 = shape.n1, shape.n2
    while n1 % ell == 0:
        n1 //= ell
    while n2 % ell == 0:
        n2 //= ell
    return n1, n2


def has_full_torsion(shape: GroupShape, ell: int, m: int) -> bool:
    """True iff (Z/ell^m)^2 embeds in the group, i.e. ell^m | n1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return shape.n1 % ell ** m == 0


class StructureSamplingError(RuntimeError):
    """The sampler hit its hard cap; indicates a caller bug or broken input."""


def point_order(curve, P, N: FactoredInteger) -> int:
    """Exact order of P given a factored multiple N of it."""
    if P is None:
        return 1
    if curve.mul(N.value, P) is not None:
        raise ValueError("N is not a multiple of the point order (caller bug)")
    order = 1
    for q, e in N.factors:
        Q = curve.mul(N.value // q ** e, P)
        d = 0
        while Q is not None:
            Q = curve.mul(q, Q)
            d += 1
        order *= q ** d
    return order


def _ambiguous_primes(N: FactoredInteger, q_field: int) -> list[tuple[int, int]]:
    """Primes q (with v_q(N)) whose Sylow could be non-cyclic: q^2 | N, q | q_field - 1."""
    out = []
    for q, v in N.factors:
        if v >= 2 and (q_field - 1) % q == 0:
            out.append((q, v))
    return out


def group_structure(curve, N: FactoredInteger, q_field: int, rng) -> GroupShape:
    """Recover (n1, n2) for a curve of known order N over a field of size q_field."""
    ambiguous = _ambiguous_primes(N, q_field)
    if not ambiguous:
        return GroupShape(1, N.value)

    # Forced part of the exponent: primes with a cyclic Sylow contribute fully.
    forced = N.value
    for q, v in ambiguous:
        forced //= q ** v
    strip_all = forced  # multiply a point by this to isolate the ambiguous part

    best = {q: 0 for q, _ in ambiguous}
    vmax = {q: v for q, v in ambiguous}
    stable = 0
    draws = 0
    while draws < SAMPLE_CAP:
        draws += 1
        P = curve.random_point(rng)
        P0 = curve.mul(strip_all, P)
        improved = False
        for q, v in ambiguous:
            cof = 1
            for q2, v2 in ambiguous:
                if q2 != q:
                    cof *= q2 ** v2
            Q = curve.mul(cof, P0)
            d = 0
            while Q is not None:
                Q = curve.mul(q, Q)
                d += 1
            if d > best[q]:
                best[q] = d
                improved = True
        stable = 0 if improved else stable + 1
        unresolved = [q for q, v in ambiguous if best[q] < v]
        if not unresolved:
            break
        if stable >= STABILITY_WINDOW:
            n2 = forced
            for q, v in ambiguous:
                n2 *= q ** best[q]
            n1 = N.value // n2
            # Reject structurally impossible exponent estimates and keep sampling.
            if n2 % n1 == 0 and (q_field - 1) % n1 == 0:
                break
            stable = 0
    else:
        raise StructureSamplingError(
            f"no stable group structure after {SAMPLE_CAP} draws (order {N.value})"
        )

    n2 = forced
    for q, v in ambiguous:
        n2 *= q ** best[q]
    n1 = N.value // n2
    if (q_field - 1) % n1 != 0 or math.gcd(N.value, q_field - 1) % n1 != 0:
        raise StructureSamplingError(
            f"structure ({n1}, {n2}) violates n1 | gcd(N, q-1) at order {N.value}"
        )
    return GroupShape(n1, n2)


def brute_force_structure(curve) -> GroupShape:
    """Oracle: enumerate every point of E(F_p), p <= 2000, and read off the shape."""
    view = curve.view
    p = getattr(view, "p", None)
    if p is None or view.size != p:
        raise ValueError("brute force oracle runs over prime fields only")
    if p > 2000:
        raise ValueError(f"brute force oracle rejects p > 2000 (got {p})")
    squares: dict[int, list[int]] = {}
    for y in range(p):
        squares.setdefault(y * y % p, []).append(y)
    points = [None]
    for x in range(p):
        for y in squares.get(curve.rhs(x), ()):
            points.append((x, y))
    N = factor(len(points))
    exponent = 1
    for P in points:
        exponent = math.lcm(exponent, point_order(curve, P, N))
    return GroupShape(len(points) // exponent, exponent)
