"""Rational Weierstrass models, reduction mod p, and point arithmetic.

A rational curve is stored as a long (a1,...,a6) integral model, assumed
minimal. Reduction at a good prime p > 3 produces a short-Weierstrass curve
y^2 = x^3 + Ax + B over F_p via the standard change of variables
A = -c4/48, B = -c6/864, which is an isomorphism of curves over F_p.

Point arithmetic is affine over either F_p or F_{p^2}; the two cases share
code through a tiny field-view adapter. Infinity is represented as None.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ffield import PrimeField, ZeroDivisionInField

CM_DISCRIMINANTS = frozenset(
    {-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163}
)


@dataclass(frozen=True)
class RationalCurve:
    """An integral long-Weierstrass model y^2+a1xy+a3y = x^3+a2x^2+a4x+a6."""

    ainvs: tuple  # (a1, a2, a3, a4, a6)
    conductor: int
    label: str = ""
    cm_discriminant: int | None = None

    def __post_init__(self):
        if len(self.ainvs) != 5:
            raise ValueError("ainvs must be (a1, a2, a3, a4, a6)")
        if self.conductor <= 0:
            raise ValueError("conductor must be positive")
        if self.discriminant() == 0:
            raise ValueError(f"singular model {self.ainvs}")
        if self.cm_discriminant is not None and self.cm_discriminant not in CM_DISCRIMINANTS:
            raise ValueError(f"cm_discriminant {self.cm_discriminant} not a class-number-one discriminant")

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    def c_invariants(self):
        b2, b4, b6, _ = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants()
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class BadReduction:
    """Marker value: p divides the conductor (or p <= 3 is outside scope)."""

    p: int
    conductor: int


class FpView:
    """Field adapter exposing F_p to the generic point arithmetic."""

    def __init__(self, field: PrimeField):
        self.field = field
        self.p = field.p
        self.size = field.p
        self.zero = 0
        self.one = 1

    def add(self, x, y):
        return (x + y) % self.p

    def sub(self, x, y):
        return (x - y) % self.p

    def mul(self, x, y):
        return x * y % self.p

    def neg(self, x):
        return -x % self.p

    def inv(self, x):
        return self.field.inv(x)

    def sqrt(self, x):
        return self.field.sqrt(x)

    def random_element(self, rng):
        return rng.randrange(self.p)


class Fp2View:
    """Field adapter exposing F_{p^2} (pairs over PrimeField) to point arithmetic."""

    def __init__(self, field: PrimeField):
        self.field = field
        self.p = field.p
        self.size = field.p * field.p
        self.zero = (0, 0)
        self.one = (1, 0)

    def add(self, x, y):
        return self.field.fp2_add(x, y)

    def sub(self, x, y):
        return self.field.fp2_sub(x, y)

    def mul(self, x, y):
        return self.field.fp2_mul(x, y)

    def neg(self, x):
        return self.field.fp2_neg(x)

    def inv(self, x):
        return self.field.fp2_inv(x)

    def sqrt(self, x):
        return self.field.fp2_sqrt(x)

    def random_element(self, rng):
        return (rng.randrange(self.p), rng.randrange(self.p))


@dataclass(frozen=True)
class CurveOverField:
    """y^2 = x^3 + Ax + B over the field carried by `view`."""

    A: object
    B: object
    view: object = field(repr=False, compare=False)

    def __post_init__(self):
        v = self.view
        # 4A^3 + 27B^2 != 0
        a3 = v.mul(v.mul(self.A, self.A), self.A)
        b2 = v.mul(self.B, self.B)
        disc = v.add(v.mul(v.add(a3, a3), v.add(v.one, v.one)), v.mul(b2, self._int(27)))
        if disc == v.zero:
            raise ValueError("singular curve over the field")

    def _int(self, n):
        v = self.view
        r = v.zero
        for _ in range(n):
            r = v.add(r, v.one)
        return r

    # -- point arithmetic (affine; None is the point at infinity) ------------

    def is_on_curve(self, P) -> bool:
        if P is None:
            return True
        v = self.view
        x, y = P
        rhs = v.add(v.mul(v.add(v.mul(x, x), self.A), x), self.B)
        return v.mul(y, y) == rhs

    def rhs(self, x):
        v = self.view
        return v.add(v.mul(v.add(v.mul(x, x), self.A), x), self.B)

    def neg(self, P):
        if P is None:
            return None
        return (P[0], self.view.neg(P[1]))

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        v = self.view
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if v.add(y1, y2) == v.zero:
                return None
            # tangent: lambda = (3x^2 + A) / 2y
            num = v.add(v.mul(self._int(3), v.mul(x1, x1)), self.A)
            den = v.add(y1, y1)
        else:
            num = v.sub(y2, y1)
            den = v.sub(x2, x1)
        lam = v.mul(num, v.inv(den))
        x3 = v.sub(v.sub(v.mul(lam, lam), x1), x2)
        y3 = v.sub(v.mul(lam, v.sub(x1, x3)), y1)
        return (x3, y3)

    def double(self, P):
        return self.add(P, P)

    def mul(self, k: int, P):
        """Scalar multiple kP by double-and-add; k may be negative."""
        if k < 0:
            return self.mul(-k, self.neg(P))
        R = None
        Q = P
        while k:
            if k & 1:
                R = self.add(R, Q)
            k >>= 1
            if k:
                Q = self.add(Q, Q)
        return R

    def random_point(self, rng):
        """Uniform-x affine point; sign of y spent from one extra rng bit."""
        v = self.view
        while True:
            x = v.random_element(rng)
            r = v.sqrt(self.rhs(x))
            if r is None:
                continue
            if rng.getrandbits(1) and r != v.zero:
                r = v.neg(r)
            return (x, r)


@dataclass(frozen=True)
class RationalCurvePair:
    """Two l-isogenous rational curves sharing a conductor."""

    e: RationalCurve
    e_prime: RationalCurve
    ell: int
    profile: object | None = None  # DensityProfile, attached by the dataset layer
    label: str = ""

    def __post_init__(self):
        from .ffield import is_prime

        if not is_prime(self.ell):
            raise ValueError(f"isogeny degree {self.ell} is not prime")
        if self.e.conductor != self.e_prime.conductor:
            raise ValueError(
                f"isogenous curves must share a conductor: "
                f"{self.e.conductor} != {self.e_prime.conductor}"
            )

    @property
    def conductor(self) -> int:
        return self.e.conductor


def reduce_mod_p(curve: RationalCurve, p: int, field: PrimeField | None = None):
    """Reduce to short Weierstrass form over F_p, or BadReduction at p | N.

    The substitution is the usual one: complete the square in y, then depress
    the cubic, giving A = -c4/48 and B = -c6/864 mod p (p > 3 so 6 is a unit).
    """
    if p <= 3:
        raise ValueError("reduction implemented only for p > 3")
    if curve.conductor % p == 0:
        return BadReduction(p=p, conductor=curve.conductor)
    fld = field if field is not None else PrimeField(p)
    c4, c6 = curve.c_invariants()
    A = -c4 * fld.inv(48) % p
    B = -c6 * fld.inv(864) % p
    return CurveOverField(A=A, B=B, view=FpView(fld))


def lift_to_fp2(curve: CurveOverField) -> CurveOverField:
    """View an F_p curve as a curve over F_{p^2} (same A, B, embedded)."""
    if not isinstance(curve.view, FpView):
        raise TypeError("lift_to_fp2 expects a curve over F_p")
    return CurveOverField(A=(curve.A, 0), B=(curve.B, 0), view=Fp2View(curve.view.field))
