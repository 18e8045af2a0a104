"""Arithmetic in F_p and its quadratic extension F_{p^2}.

The quadratic extension is realized as F_p(s) with s^2 = delta, where delta
is the least positive quadratic nonresidue mod p.  That choice is a linear
search, hence deterministic: the same p always yields the same representation,
which keeps every downstream computation reproducible.

Primes are restricted to 3 < p < 2^62 so that products stay inside Python's
fast small-int range on 64-bit builds for the sweep sizes this library
targets (p <= 1e8).
"""

from __future__ import annotations

MAX_PRIME = 1 << 62

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers the 2^126 range used here)."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # This base set is proven deterministic for n < 3317044064679887385961981.
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldError(ValueError):
    """Invalid field construction or operation (wrong modulus, bad delta)."""


class ZeroDivisionInField(ZeroDivisionError):
    """Attempt to invert zero in F_p or F_{p^2}."""


class PrimeField:
    """The prime field F_p for an odd prime 3 < p < 2^62.

    Elements are plain canonical residues (ints in [0, p)); the class itself
    carries the modulus and the derived quadratic-extension data.
    """

    __slots__ = ("p", "_delta")

    def __init__(self, p: int):
        if p <= 3:
            raise FieldError(f"p must exceed 3, got {p}")
        if p >= MAX_PRIME:
            raise FieldError(f"p must be below 2^62, got {p}")
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        self.p = p
        self._delta = None

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    # -- F_p operations ----------------------------------------------------

    def legendre(self, x: int) -> int:
        """Legendre symbol (x|p) in {-1, 0, 1} by Euler's criterion."""
        x %= self.p
        if x == 0:
            return 0
        r = pow(x, (self.p - 1) >> 1, self.p)
        return 1 if r == 1 else -1

    def sqrt(self, x: int) -> int | None:
        """A canonical square root of x mod p, or None if x is a nonresidue.

        Canonical means min(r, p - r), so reruns agree bit for bit.
        """
        p = self.p
        x %= p
        if x == 0:
            return 0
        if self.legendre(x) != 1:
            return None
        if p % 4 == 3:
            r = pow(x, (p + 1) >> 2, p)
        else:
            r = self._tonelli(x)
        return min(r, p - r)

    def _tonelli(self, x: int) -> int:
        """Tonelli-Shanks for p = 1 mod 4; x must be a nonzero residue."""
        p = self.p
        q = p - 1
        s = 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = self.nonresidue()
        c = pow(z, q, p)
        r = pow(x, (q + 1) >> 1, p)
        t = pow(x, q, p)
        m = s
        while t != 1:
            t2 = t
            i = 0
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            r = r * b % p
            c = b * b % p
            t = t * c % p
            m = i
        return r

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionInField(f"inverse of 0 mod {self.p}")
        return pow(x, -1, self.p)

    def nonresidue(self) -> int:
        """The least positive quadratic nonresidue mod p (cached)."""
        if self._delta is None:
            d = 2
            while self.legendre(d) != -1:
                d += 1
            self._delta = d
        return self._delta

    # -- F_{p^2} as pairs (a, b) <-> a + b*s, s^2 = delta --------------------

    def fp2_add(self, x, y):
        p = self.p
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p)

    def fp2_sub(self, x, y):
        p = self.p
        return ((x[0] - y[0]) % p, (x[1] - y[1]) % p)

    def fp2_neg(self, x):
        p = self.p
        return ((p - x[0]) % p, (p - x[1]) % p)

    def fp2_mul(self, x, y):
        p = self.p
        a, b = x
        c, d = y
        return ((a * c + b * d % p * self.nonresidue()) % p, (a * d + b * c) % p)

    def fp2_norm(self, x) -> int:
        """norm(a + b s) = a^2 - delta b^2, the product with the conjugate."""
        p = self.p
        a, b = x
        return (a * a - self.nonresidue() * b % p * b) % p

    def fp2_inv(self, x):
        """(a + b s)^-1 = (a - b s) / norm; fails exactly on zero."""
        n = self.fp2_norm(x)
        if n == 0:
            raise ZeroDivisionInField(f"inverse of 0 in F_{self.p}^2")
        ninv = self.inv(n)
        p = self.p
        return (x[0] * ninv % p, (p - x[1]) * ninv % p)

    def fp2_sqrt(self, x):
        """A square root of x in F_{p^2}, or None.

        Uses the norm criterion (x is a square iff norm(x) is a square in F_p)
        and the half-trace construction: if r = a + b s with r^2 = x, then
        a^2 = (x_a + n)/2 or (x_a - n)/2 for n a square root of norm(x).
        """
        p = self.p
        a, b = x[0] % p, x[1] % p
        if b == 0:
            r = self.sqrt(a)
            if r is not None:
                return (r, 0)
            # a is a nonresidue: a = delta * (a/delta), and a/delta is a residue.
            r = self.sqrt(a * self.inv(self.nonresidue()) % p)
            return (0, r)
        n = self.sqrt(self.fp2_norm(x))
        if n is None:
            return None
        inv2 = self.inv(2)
        for half in ((a + n) * inv2 % p, (a - n) * inv2 % p):
            ra = self.sqrt(half)
            if ra is not None and ra != 0:
                rb = b * self.inv(2 * ra) % p
                cand = (ra, rb)
                if self.fp2_mul(cand, cand) == (a, b):
                    return self._canon_fp2(cand)
        return None

    def _canon_fp2(self, x):
        """Pick the lexicographically smaller of {r, -r}."""
        return min(x, self.fp2_neg(x))

    def fp2_pow(self, x, e: int):
        r = (1, 0)
        base = x
        while e:
            if e & 1:
                r = self.fp2_mul(r, base)
            base = self.fp2_mul(base, base)
            e >>= 1
        return r


def legendre(x: int, p: int) -> int:
    """Convenience wrapper: Legendre symbol of x mod an odd prime p."""
    return PrimeField(p).legendre(x)


def sqrt_mod(x: int, p: int) -> int | None:
    """Convenience wrapper: canonical modular square root, or None."""
    return PrimeField(p).sqrt(x)
