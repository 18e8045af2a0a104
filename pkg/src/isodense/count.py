"""Trace of Frobenius and group orders over F_p and F_{p^2}.

Two independent routes to #E(F_p) = p + 1 - t:

* naive: below 2^16 the quadratic character of x^3 + Ax + B is summed over
  all x (vectorized with a residue table);
* baby-step/giant-step with Mestre's twist disambiguation above 2^16:
  orders of random points on E and on its quadratic twist are accumulated
  as lcms until exactly one candidate order survives in the Hasse window.
  That uniqueness is the termination proof; a hard cap of 64 points falls
  back to naive counting (never observed for p > 2^16).

#E(F_{p^2}) = p^2 + 1 - (t^2 - 2p) follows from the functional equation,
so the extension order costs nothing once t is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import CurveOverField, FpView
from .structure import factor, point_order

NAIVE_THRESHOLD = 1 << 16
BSGS_POINT_CAP = 64
NAIVE_FALLBACK_LIMIT = 1 << 24


@dataclass(frozen=True)
class TraceRecord:
    p: int
    t: int
    N: int
    N2: int
    supersingular: bool

    def __post_init__(self):
        if self.t * self.t > 4 * self.p:
            raise ValueError(f"Hasse bound violated: t={self.t}, p={self.p}")
        if self.N != self.p + 1 - self.t:
            raise ValueError("N != p + 1 - t")
        if self.N2 != self.p ** 2 + 1 - (self.t ** 2 - 2 * self.p):
            raise ValueError("N2 inconsistent with the functional equation")
        if self.supersingular != (self.t == 0):
            raise ValueError("supersingular flag must be t == 0")


def _record(p: int, t: int) -> TraceRecord:
    return TraceRecord(
        p=p,
        t=t,
        N=p + 1 - t,
        N2=p * p + 1 - (t * t - 2 * p),
        supersingular=(t == 0),
    )


def order_fp2(tr: TraceRecord) -> int:
    """#E(F_{p^2}) = p^2 + 1 - (t^2 - 2p)."""
    return tr.N2


def _require_fp(curve: CurveOverField) -> int:
    if not isinstance(curve.view, FpView):
        raise TypeError("trace computation expects a curve over F_p")
    return curve.view.p


def trace_naive(curve: CurveOverField) -> TraceRecord:
    """Character-sum count, p < 2^24 (vectorized; intended for p < 2^16)."""
    p = _require_fp(curve)
    if p >= NAIVE_FALLBACK_LIMIT:
        raise ValueError(f"naive count limited to p < 2^24, got {p}")
    x = np.arange(p, dtype=np.int64)
    sq = np.zeros(p, dtype=bool)
    sq[x * x % p] = True
    fx = ((x * x % p) * x + curve.A * x + curve.B) % p
    N = 1 + int(np.count_nonzero(fx == 0)) + 2 * int(np.count_nonzero(sq[fx] & (fx != 0)))
    return _record(p, p + 1 - N)


def _bsgs_annihilators(curve: CurveOverField, P, lo: int, hi: int) -> list[int]:
    """All m in [lo, hi] with mP = infinity (baby-step/giant-step)."""
    width = hi - lo + 1
    u = math.isqrt(width) + 1
    baby: dict[object, list[tuple[int, object]]] = {}
    Q = None  # j * P
    for j in range(u):
        if Q is None:
            baby.setdefault("inf", []).append((j, None))
        else:
            baby.setdefault(Q[0], []).append((j, Q[1]))
        Q = curve.add(Q, P)
    step = curve.mul(u, P)
    R = curve.mul(lo, P)  # (lo + i*u) * P
    found = set()
    neg = curve.view.neg
    for i in range(width // u + 2):
        base = lo + i * u
        if base > hi:
            break
        if R is None:
            if lo <= base <= hi:
                found.add(base)
        else:
            for j, yj in baby.get(R[0], ()):
                if yj is None:
                    continue
                if R[1] == neg(yj):  # R = -jP  =>  (base + j) P = O
                    m = base + j
                    if lo <= m <= hi:
                        found.add(m)
                if R[1] == yj:  # R = jP  =>  (base - j) P = O
                    m = base - j
                    if lo <= m <= hi:
                        found.add(m)
        R = curve.add(R, step)
    return sorted(found)


def _twist(curve: CurveOverField) -> CurveOverField:
    """The quadratic twist by the field's canonical nonresidue."""
    view = curve.view
    d = view.field.nonresidue()
    p = view.p
    return CurveOverField(A=curve.A * d * d % p, B=curve.B * d % p * d % p * d % p, view=view)


def trace_bsgs(curve: CurveOverField, rng) -> TraceRecord:
    """Shanks-Mestre order computation with a uniqueness certificate."""
    p = _require_fp(curve)
    H = math.isqrt(4 * p)
    lo, hi = p + 1 - H, p + 1 + H
    twist = _twist(curve)
    lcm_e = 1  # divides #E
    lcm_t = 1  # divides #twist, and #E + #twist = 2p + 2
    for attempt in range(BSGS_POINT_CAP):
        side = curve if attempt % 2 == 0 else twist
        P = side.random_point(rng)
        ms = _bsgs_annihilators(side, P, lo, hi)
        if not ms:
            raise ArithmeticError(f"BSGS found no order multiple at p={p} (bug)")
        e = point_order(side, P, factor(ms[0]))
        if side is curve:
            lcm_e = math.lcm(lcm_e, e)
        else:
            lcm_t = math.lcm(lcm_t, e)
        # Candidates N with lcm_e | N and lcm_t | 2p + 2 - N, N in the window.
        cands = []
        start = (lo + lcm_e - 1) // lcm_e * lcm_e
        for m in range(start, hi + 1, lcm_e):
            if (2 * p + 2 - m) % lcm_t == 0:
                cands.append(m)
                if len(cands) > 1:
                    break
        if len(cands) == 1:
            return _record(p, p + 1 - cands[0])
    if p < NAIVE_FALLBACK_LIMIT:
        return trace_naive(curve)
    raise ArithmeticError(f"BSGS failed to certify a unique order at p={p}")


def trace_frobenius(curve: CurveOverField, rng) -> TraceRecord:
    """Exact trace: naive below 2^16, BSGS/Mestre above."""
    p = _require_fp(curve)
    if p < NAIVE_THRESHOLD:
        return trace_naive(curve)
    return trace_bsgs(curve, rng)


def verify_order(curve: CurveOverField, N: int, rng, tries: int = 2) -> bool:
    """Cheap certificate that #E = N when N is already known for an isogenous
    curve: random points must be annihilated by N and their order must admit
    no other multiple in the Hasse window."""
    p = _require_fp(curve)
    H = math.isqrt(4 * p)
    lo, hi = p + 1 - H, p + 1 + H
    if not lo <= N <= hi:
        return False
    fN = factor(N)
    lcm_e = 1
    for _ in range(max(tries, 1)):
        P = curve.random_point(rng)
        if curve.mul(N, P) is not None:
            return False
        lcm_e = math.lcm(lcm_e, point_order(curve, P, fN))
        first = (lo + lcm_e - 1) // lcm_e * lcm_e
        if first + lcm_e > hi:  # unique multiple in the window
            return first == N
    # Order still ambiguous from point data alone; settle it the hard way.
    return trace_bsgs(curve, rng).N == N
