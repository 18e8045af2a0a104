"""Hot per-prime kernel for the sweep engine.

Everything in this module is written against 64-bit signed integers: it
assumes p < 2^31 so that any product of two reduced residues stays below
2^62 and any two-product sum below 2^63. Under that discipline the same
source runs unchanged either as plain Python (arbitrary-precision ints,
used as the reference/fallback) or JIT-compiled by numba (the fast path
for production sweeps). Set ISODENSE_JIT=0 to force the pure path.

Curve points use Jacobian coordinates (Z = 0 encodes infinity) for scalar
arithmetic, so the only modular inversions are one per affinization and one
per baby-step/giant-step giant step. Randomness is a L'Ecuyer combined LCG
seeded per (global seed, prime, stream index): scheduling can never affect
results, and all draws are reproducible cross-platform.
"""

from __future__ import annotations

import math
import os

import numpy as np

KERNEL_PRIME_LIMIT = 1 << 31

JIT_ENABLED = False
if os.environ.get("ISODENSE_JIT", "1") != "0":
    try:
        from numba import njit as _njit

        JIT_ENABLED = True
    except ImportError:
        pass

if not JIT_ENABLED:

    def _njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


def njit(f):
    return _njit(cache=True)(f)


# -- deterministic rng (L'Ecuyer combined LCG, 31-bit states) ----------------

RNG_M1 = 2147483563
RNG_A1 = 40014
RNG_M2 = 2147483399
RNG_A2 = 40692


@njit
def _rng_seed(seed, p, stream):
    s1 = (seed * 2654435761 + p * 40503 + stream * 69069 + 12345) % (RNG_M1 - 1) + 1
    s2 = (seed * 69069 + p * 2654435761 + stream * 40503 + 54321) % (RNG_M2 - 1) + 1
    for _ in range(3):
        s1 = (RNG_A1 * s1) % RNG_M1
        s2 = (RNG_A2 * s2) % RNG_M2
    return s1, s2


@njit
def _rng_next(s1, s2):
    s1 = (RNG_A1 * s1) % RNG_M1
    s2 = (RNG_A2 * s2) % RNG_M2
    return s1, s2, (s1 - s2) % (RNG_M1 - 1)


# -- F_p scalar helpers -------------------------------------------------------


@njit
def _isqrt(n):
    if n < 2:
        return n
    x = int(math.sqrt(float(n)))
    while x * x > n:
        x -= 1
    while (x + 1) * (x + 1) <= n:
        x += 1
    return x


@njit
def _powmod(a, e, p):
    a %= p
    r = 1
    while e > 0:
        if e & 1:
            r = r * a % p
        a = a * a % p
        e >>= 1
    return r


@njit
def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    r = _powmod(a, (p - 1) >> 1, p)
    return 1 if r == 1 else -1


@njit
def _nonresidue(p):
    d = 2
    while _legendre(d, p) != -1:
        d += 1
    return d


@njit
def _sqrt_fp(a, p):
    """Canonical square root in F_p, or -1 if a is a nonresidue."""
    a %= p
    if a == 0:
        return 0
    if _legendre(a, p) != 1:
        return -1
    if p & 3 == 3:
        r = _powmod(a, (p + 1) >> 2, p)
    else:
        q = p - 1
        s = 0
        while q & 1 == 0:
            q >>= 1
            s += 1
        z = _nonresidue(p)
        c = _powmod(z, q, p)
        r = _powmod(a, (q + 1) >> 1, p)
        t = _powmod(a, q, p)
        m = s
        while t != 1:
            t2 = t
            i = 0
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = _powmod(c, 1 << (m - i - 1), p)
            r = r * b % p
            c = b * b % p
            t = t * c % p
            m = i
    return r if r <= p - r else p - r


@njit
def _inv(a, p):
    return _powmod(a % p, p - 2, p)


# -- F_p points: Jacobian (X, Y, Z), Z = 0 means infinity --------------------


@njit
def _jdbl(x, y, z, A, p):
    if z == 0 or y == 0:
        return 1, 1, 0
    ysq = y * y % p
    s = 4 * x % p * ysq % p
    z2 = z * z % p
    z4 = z2 * z2 % p
    m = (3 * x % p * x + A * z4) % p
    x3 = (m * m - 2 * s) % p
    y3 = (m * ((s - x3) % p) - 8 * ysq % p * ysq) % p
    z3 = 2 * y % p * z % p
    return x3, y3, z3


@njit
def _jadd_affine(x1, y1, z1, x2, y2, A, p):
    """Jacobian + affine (mixed addition)."""
    if z1 == 0:
        return x2, y2, 1
    z1z1 = z1 * z1 % p
    u2 = x2 * z1z1 % p
    s2 = y2 * z1z1 % p * z1 % p
    h = (u2 - x1) % p
    r = (s2 - y1) % p
    if h == 0:
        if r == 0:
            return _jdbl(x1, y1, z1, A, p)
        return 1, 1, 0
    hh = h * h % p
    hhh = hh * h % p
    v = x1 * hh % p
    x3 = (r * r - hhh - 2 * v) % p
    y3 = (r * ((v - x3) % p) - y1 * hhh) % p
    z3 = z1 * h % p
    return x3, y3, z3


@njit
def _jadd(x1, y1, z1, x2, y2, z2, A, p):
    if z1 == 0:
        return x2, y2, z2
    if z2 == 0:
        return x1, y1, z1
    z1z1 = z1 * z1 % p
    z2z2 = z2 * z2 % p
    u1 = x1 * z2z2 % p
    u2 = x2 * z1z1 % p
    s1 = y1 * z2z2 % p * z2 % p
    s2 = y2 * z1z1 % p * z1 % p
    h = (u2 - u1) % p
    r = (s2 - s1) % p
    if h == 0:
        if r == 0:
            return _jdbl(x1, y1, z1, A, p)
        return 1, 1, 0
    hh = h * h % p
    hhh = hh * h % p
    v = u1 * hh % p
    x3 = (r * r - hhh - 2 * v) % p
    y3 = (r * ((v - x3) % p) - s1 * hhh) % p
    z3 = z1 * z2 % p * h % p
    return x3, y3, z3


@njit
def _jmul_affine(k, x, y, A, p):
    """k * (x, y) with the base point affine; k >= 0."""
    if k == 0:
        return 1, 1, 0
    rx, ry, rz = 1, 1, 0
    started = False
    bit = 0
    while (k >> (bit + 1)) > 0:
        bit += 1
    while bit >= 0:
        if started:
            rx, ry, rz = _jdbl(rx, ry, rz, A, p)
        if (k >> bit) & 1:
            if started:
                rx, ry, rz = _jadd_affine(rx, ry, rz, x, y, A, p)
            else:
                rx, ry, rz = x, y, 1
                started = True
        bit -= 1
    return rx, ry, rz


@njit
def _jmul(k, x, y, z, A, p):
    """k * (x:y:z), general Jacobian base; k >= 0."""
    if k == 0 or z == 0:
        return 1, 1, 0
    rx, ry, rz = 1, 1, 0
    bit = 0
    while (k >> (bit + 1)) > 0:
        bit += 1
    while bit >= 0:
        rx, ry, rz = _jdbl(rx, ry, rz, A, p)
        if (k >> bit) & 1:
            rx, ry, rz = _jadd(rx, ry, rz, x, y, z, A, p)
        bit -= 1
    return rx, ry, rz


@njit
def _affinize(x, y, z, p):
    """(x, y) from Jacobian; infinity encoded as x = -1."""
    if z == 0:
        return -1, 0
    zi = _inv(z, p)
    zi2 = zi * zi % p
    return x * zi2 % p, y * zi2 % p * zi % p


@njit
def _random_point(A, B, p, s1, s2):
    """Uniform-x affine point on y^2 = x^3 + Ax + B; one extra bit for the sign."""
    while True:
        s1, s2, r = _rng_next(s1, s2)
        x = r % p
        rhs = ((x * x % p) * x + A * x) % p
        rhs = (rhs + B) % p
        y = _sqrt_fp(rhs, p)
        if y < 0:
            continue
        s1, s2, r = _rng_next(s1, s2)
        if (r & 1) == 1 and y != 0:
            y = p - y
        return x, y, s1, s2


# -- factorization (inputs < 2^32; trial division is complete) ----------------


@njit
def _factor32(n, small_primes, qs, es, start):
    """Factor n < 2^32 into qs/es starting at index `start`; returns new count.

    After trial division by all primes below 2^16 any cofactor > 1 is prime.
    """
    cnt = start
    m = n
    for i in range(small_primes.shape[0]):
        q = small_primes[i]
        if q * q > m:
            break
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            qs[cnt] = q
            es[cnt] = e
            cnt += 1
    if m > 1:
        qs[cnt] = m
        es[cnt] = 1
        cnt += 1
    return cnt


@njit
def _merge_factors(qs, es, cnt):
    """Sort and merge duplicate primes in place; returns new count."""
    for i in range(1, cnt):
        qi = qs[i]
        ei = es[i]
        j = i - 1
        while j >= 0 and qs[j] > qi:
            qs[j + 1] = qs[j]
            es[j + 1] = es[j]
            j -= 1
        qs[j + 1] = qi
        es[j + 1] = ei
    out = 0
    i = 0
    while i < cnt:
        q = qs[i]
        e = es[i]
        j = i + 1
        while j < cnt and qs[j] == q:
            e += es[j]
            j += 1
        qs[out] = q
        es[out] = e
        out += 1
        i = j
    return out


@njit
def _point_order(px, py, mult, qs, es, cnt, A, p):
    """Exact order of affine (px, py) given a factored annihilating multiple."""
    order = 1
    for i in range(cnt):
        q = qs[i]
        cof = mult
        for _ in range(es[i]):
            cof //= q
        x, y, z = _jmul_affine(cof, px, py, A, p)
        while z != 0:
            x, y, z = _jmul(q, x, y, z, A, p)
            order *= q
    return order


# -- trace of Frobenius -------------------------------------------------------


@njit
def _trace_naive(A, B, p):
    """Character-sum point count via a residue table; p < 2^16 intended."""
    sq = np.zeros(p, dtype=np.uint8)
    for x in range(p):
        sq[x * x % p] = 1
    n = 1
    for x in range(p):
        rhs = ((x * x % p) * x + A * x + B) % p
        if rhs == 0:
            n += 1
        elif sq[rhs] == 1:
            n += 2
    return p + 1 - n


@njit
def _bsgs_annihilators(px, py, lo, hi, A, p, out):
    """All m in [lo, hi] with m*(px,py) = infinity; returns count (capped at 8)."""
    width = hi - lo + 1
    u = _isqrt(width) + 1
    bx = np.empty(u, dtype=np.int64)
    by = np.empty(u, dtype=np.int64)
    cx, cy, cz = 1, 1, 0
    for j in range(u):
        ax, ay = _affinize(cx, cy, cz, p)
        bx[j] = ax
        by[j] = ay
        cx, cy, cz = _jadd_affine(cx, cy, cz, px, py, A, p)
    idx = np.argsort(bx)
    bxs = bx[idx]
    sx, sy, sz = _jmul_affine(u, px, py, A, p)
    stx, sty = _affinize(sx, sy, sz, p)
    rx, ry, rz = _jmul_affine(lo, px, py, A, p)
    cnt = 0
    n_giant = width // u + 2
    for i in range(n_giant):
        base = lo + i * u
        if base > hi:
            break
        ax, ay = _affinize(rx, ry, rz, p)
        pos = np.searchsorted(bxs, ax)
        while pos < u and bxs[pos] == ax:
            j = idx[pos]
            yj = by[j]
            if ax == -1:
                if lo <= base <= hi and cnt < 8:
                    out[cnt] = base
                    cnt += 1
                pos += 1
                continue
            if ay == (p - yj) % p:
                m = base + j
                if lo <= m <= hi and cnt < 8:
                    out[cnt] = m
                    cnt += 1
            if ay == yj:
                m = base - j
                if lo <= m <= hi and cnt < 8:
                    out[cnt] = m
                    cnt += 1
            pos += 1
        if stx == -1:
            break
        rx, ry, rz = _jadd_affine(rx, ry, rz, stx, sty, A, p)
    # dedupe + sort (tiny)
    for i in range(1, cnt):
        mi = out[i]
        j = i - 1
        while j >= 0 and out[j] > mi:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = mi
    w = 0
    for i in range(cnt):
        if w == 0 or out[w - 1] != out[i]:
            out[w] = out[i]
            w += 1
    return w


@njit
def _trace_bsgs(A, B, p, small_primes, seed, stream):
    """Shanks-Mestre: returns t, or the sentinel 2^62 on failure (never seen)."""
    H = _isqrt(4 * p)
    lo = p + 1 - H
    hi = p + 1 + H
    d = _nonresidue(p)
    At = A * d % p * d % p
    Bt = B * d % p * d % p * d % p
    lcm_e = 1
    lcm_t = 1
    s1, s2 = _rng_seed(seed, p, stream)
    ms = np.empty(8, dtype=np.int64)
    qs = np.empty(40, dtype=np.int64)
    es = np.empty(40, dtype=np.int64)
    for attempt in range(64):
        on_curve = attempt % 2 == 0
        Ai = A if on_curve else At
        Bi = B if on_curve else Bt
        px, py, s1, s2 = _random_point(Ai, Bi, p, s1, s2)
        nm = _bsgs_annihilators(px, py, lo, hi, Ai, p, ms)
        if nm == 0:
            return 1 << 62
        cnt = _factor32(ms[0], small_primes, qs, es, 0)
        e = _point_order(px, py, ms[0], qs, es, cnt, Ai, p)
        if on_curve:
            lcm_e = lcm_e // math.gcd(lcm_e, e) * e
        else:
            lcm_t = lcm_t // math.gcd(lcm_t, e) * e
        n_found = 0
        n_val = 0
        start = (lo + lcm_e - 1) // lcm_e * lcm_e
        m = start
        while m <= hi:
            if (2 * p + 2 - m) % lcm_t == 0:
                n_found += 1
                n_val = m
                if n_found > 1:
                    break
            m += lcm_e
        if n_found == 1:
            return p + 1 - n_val
    return 1 << 62


@njit
def _verify_order(A, B, p, N, qs, es, cnt, seed, stream):
    """True iff #E = N, certified by point orders with a unique Hasse multiple."""
    H = _isqrt(4 * p)
    lo = p + 1 - H
    hi = p + 1 + H
    if N < lo or N > hi:
        return False
    s1, s2 = _rng_seed(seed, p, stream)
    lcm_e = 1
    for _ in range(24):
        px, py, s1, s2 = _random_point(A, B, p, s1, s2)
        x, y, z = _jmul_affine(N, px, py, A, p)
        if z != 0:
            return False
        e = _point_order(px, py, N, qs, es, cnt, A, p)
        lcm_e = lcm_e // math.gcd(lcm_e, e) * e
        first = (lo + lcm_e - 1) // lcm_e * lcm_e
        if first + lcm_e > hi:
            return first == N
    # Ambiguity never survives 24 points for p > 2^16; treat as failure.
    return False


# -- group structure over F_p -------------------------------------------------


@njit
def _structure_fp(A, B, p, N, qs, es, cnt, qfield_m1, seed, stream):
    """(n1, n2) with n1 | n2, n2 the group exponent; (-code, 0) on failure."""
    n_amb = 0
    amb_q = np.empty(16, dtype=np.int64)
    amb_v = np.empty(16, dtype=np.int64)
    forced = N
    for i in range(cnt):
        if es[i] >= 2 and qfield_m1 % qs[i] == 0:
            amb_q[n_amb] = qs[i]
            amb_v[n_amb] = es[i]
            n_amb += 1
            for _ in range(es[i]):
                forced //= qs[i]
    if n_amb == 0:
        return 1, N
    best = np.zeros(16, dtype=np.int64)
    s1, s2 = _rng_seed(seed, p, stream)
    stable = 0
    draws = 0
    while draws < 4096:
        draws += 1
        px, py, s1, s2 = _random_point(A, B, p, s1, s2)
        x0, y0, z0 = _jmul_affine(forced, px, py, A, p)
        improved = False
        for i in range(n_amb):
            q = amb_q[i]
            x, y, z = x0, y0, z0
            for j in range(n_amb):
                if j != i:
                    for _ in range(amb_v[j]):
                        x, y, z = _jmul(amb_q[j], x, y, z, A, p)
            d = 0
            while z != 0:
                x, y, z = _jmul(q, x, y, z, A, p)
                d += 1
            if d > best[i]:
                best[i] = d
                improved = True
        stable = 0 if improved else stable + 1
        resolved = True
        for i in range(n_amb):
            if best[i] < amb_v[i]:
                resolved = False
        if resolved:
            break
        if stable >= 64:
            n2 = forced
            for i in range(n_amb):
                for _ in range(best[i]):
                    n2 *= amb_q[i]
            n1 = N // n2
            if n2 % n1 == 0 and qfield_m1 % n1 == 0:
                break
            stable = 0
    else:
        return -5, 0
    n2 = forced
    for i in range(n_amb):
        for _ in range(best[i]):
            n2 *= amb_q[i]
    n1 = N // n2
    if qfield_m1 % n1 != 0 or n2 % n1 != 0:
        return -6, 0
    return n1, n2


# -- F_{p^2} arithmetic: elements (a, b) = a + b*s, s^2 = delta ---------------


@njit
def _f2mul(a0, a1, b0, b1, delta, p):
    c0 = (a0 * b0 + (a1 * b1 % p) * delta) % p
    c1 = (a0 * b1 + a1 * b0) % p
    return c0, c1


@njit
def _f2inv(a0, a1, delta, p):
    n = (a0 * a0 - (a1 * a1 % p) * delta) % p
    ni = _inv(n, p)
    return a0 * ni % p, (p - a1) % p * ni % p


@njit
def _f2sqrt(a0, a1, delta, p):
    """Square root in F_{p^2}; returns (r0, r1, ok)."""
    a0 %= p
    a1 %= p
    if a1 == 0:
        r = _sqrt_fp(a0, p)
        if r >= 0:
            return r, 0, True
        r = _sqrt_fp(a0 * _inv(delta, p) % p, p)
        return 0, r, True
    norm = (a0 * a0 - (a1 * a1 % p) * delta) % p
    n = _sqrt_fp(norm, p)
    if n < 0:
        return 0, 0, False
    inv2 = _inv(2, p)
    for sgn in range(2):
        half = (a0 + n) * inv2 % p if sgn == 0 else (a0 - n) % p * inv2 % p
        ra = _sqrt_fp(half, p)
        if ra > 0:
            rb = a1 * _inv(2 * ra % p, p) % p
            c0, c1 = _f2mul(ra, rb, ra, rb, delta, p)
            if c0 == a0 and c1 == a1:
                return ra, rb, True
    return 0, 0, False


@njit
def _j2dbl(x0, x1, y0, y1, z0, z1, A0, A1, delta, p):
    if (z0 == 0 and z1 == 0) or (y0 == 0 and y1 == 0):
        return 1, 0, 1, 0, 0, 0
    ys0, ys1 = _f2mul(y0, y1, y0, y1, delta, p)
    t0, t1 = _f2mul(x0, x1, ys0, ys1, delta, p)
    s0, s1 = 4 * t0 % p, 4 * t1 % p
    zz0, zz1 = _f2mul(z0, z1, z0, z1, delta, p)
    z40, z41 = _f2mul(zz0, zz1, zz0, zz1, delta, p)
    xx0, xx1 = _f2mul(x0, x1, x0, x1, delta, p)
    az0, az1 = _f2mul(A0, A1, z40, z41, delta, p)
    m0, m1 = (3 * xx0 + az0) % p, (3 * xx1 + az1) % p
    mm0, mm1 = _f2mul(m0, m1, m0, m1, delta, p)
    x30, x31 = (mm0 - 2 * s0) % p, (mm1 - 2 * s1) % p
    d0, d1 = (s0 - x30) % p, (s1 - x31) % p
    t0, t1 = _f2mul(m0, m1, d0, d1, delta, p)
    yy0, yy1 = _f2mul(ys0, ys1, ys0, ys1, delta, p)
    y30, y31 = (t0 - 8 * yy0) % p, (t1 - 8 * yy1) % p
    t0, t1 = _f2mul(y0, y1, z0, z1, delta, p)
    z30, z31 = 2 * t0 % p, 2 * t1 % p
    return x30, x31, y30, y31, z30, z31


@njit
def _j2add_affine(x0, x1, y0, y1, z0, z1, qx0, qx1, qy0, qy1, A0, A1, delta, p):
    if z0 == 0 and z1 == 0:
        return qx0, qx1, qy0, qy1, 1, 0
    zz0, zz1 = _f2mul(z0, z1, z0, z1, delta, p)
    u20, u21 = _f2mul(qx0, qx1, zz0, zz1, delta, p)
    t0, t1 = _f2mul(zz0, zz1, z0, z1, delta, p)
    s20, s21 = _f2mul(qy0, qy1, t0, t1, delta, p)
    h0, h1 = (u20 - x0) % p, (u21 - x1) % p
    r0, r1 = (s20 - y0) % p, (s21 - y1) % p
    if h0 == 0 and h1 == 0:
        if r0 == 0 and r1 == 0:
            return _j2dbl(x0, x1, y0, y1, z0, z1, A0, A1, delta, p)
        return 1, 0, 1, 0, 0, 0
    hh0, hh1 = _f2mul(h0, h1, h0, h1, delta, p)
    hhh0, hhh1 = _f2mul(hh0, hh1, h0, h1, delta, p)
    v0, v1 = _f2mul(x0, x1, hh0, hh1, delta, p)
    rr0, rr1 = _f2mul(r0, r1, r0, r1, delta, p)
    x30, x31 = (rr0 - hhh0 - 2 * v0) % p, (rr1 - hhh1 - 2 * v1) % p
    d0, d1 = (v0 - x30) % p, (v1 - x31) % p
    t0, t1 = _f2mul(r0, r1, d0, d1, delta, p)
    w0, w1 = _f2mul(y0, y1, hhh0, hhh1, delta, p)
    y30, y31 = (t0 - w0) % p, (t1 - w1) % p
    z30, z31 = _f2mul(z0, z1, h0, h1, delta, p)
    return x30, x31, y30, y31, z30, z31


@njit
def _j2add(x0, x1, y0, y1, z0, z1, u0, u1, v0, v1, w0, w1, A0, A1, delta, p):
    if z0 == 0 and z1 == 0:
        return u0, u1, v0, v1, w0, w1
    if w0 == 0 and w1 == 0:
        return x0, x1, y0, y1, z0, z1
    zz10, zz11 = _f2mul(z0, z1, z0, z1, delta, p)
    zz20, zz21 = _f2mul(w0, w1, w0, w1, delta, p)
    u10, u11 = _f2mul(x0, x1, zz20, zz21, delta, p)
    u20, u21 = _f2mul(u0, u1, zz10, zz11, delta, p)
    t0, t1 = _f2mul(zz20, zz21, w0, w1, delta, p)
    s10, s11 = _f2mul(y0, y1, t0, t1, delta, p)
    t0, t1 = _f2mul(zz10, zz11, z0, z1, delta, p)
    s20, s21 = _f2mul(v0, v1, t0, t1, delta, p)
    h0, h1 = (u20 - u10) % p, (u21 - u11) % p
    r0, r1 = (s20 - s10) % p, (s21 - s11) % p
    if h0 == 0 and h1 == 0:
        if r0 == 0 and r1 == 0:
            return _j2dbl(x0, x1, y0, y1, z0, z1, A0, A1, delta, p)
        return 1, 0, 1, 0, 0, 0
    hh0, hh1 = _f2mul(h0, h1, h0, h1, delta, p)
    hhh0, hhh1 = _f2mul(hh0, hh1, h0, h1, delta, p)
    vv0, vv1 = _f2mul(u10, u11, hh0, hh1, delta, p)
    rr0, rr1 = _f2mul(r0, r1, r0, r1, delta, p)
    x30, x31 = (rr0 - hhh0 - 2 * vv0) % p, (rr1 - hhh1 - 2 * vv1) % p
    d0, d1 = (vv0 - x30) % p, (vv1 - x31) % p
    t0, t1 = _f2mul(r0, r1, d0, d1, delta, p)
    w20, w21 = _f2mul(s10, s11, hhh0, hhh1, delta, p)
    y30, y31 = (t0 - w20) % p, (t1 - w21) % p
    t0, t1 = _f2mul(z0, z1, w0, w1, delta, p)
    z30, z31 = _f2mul(t0, t1, h0, h1, delta, p)
    return x30, x31, y30, y31, z30, z31


@njit
def _j2mul_affine(k, qx0, qx1, qy0, qy1, A0, A1, delta, p):
    if k == 0:
        return 1, 0, 1, 0, 0, 0
    x0, x1, y0, y1, z0, z1 = 1, 0, 1, 0, 0, 0
    started = False
    bit = 0
    while (k >> (bit + 1)) > 0:
        bit += 1
    while bit >= 0:
        if started:
            x0, x1, y0, y1, z0, z1 = _j2dbl(x0, x1, y0, y1, z0, z1, A0, A1, delta, p)
        if (k >> bit) & 1:
            if started:
                x0, x1, y0, y1, z0, z1 = _j2add_affine(
                    x0, x1, y0, y1, z0, z1, qx0, qx1, qy0, qy1, A0, A1, delta, p
                )
            else:
                x0, x1, y0, y1, z0, z1 = qx0, qx1, qy0, qy1, 1, 0
                started = True
        bit -= 1
    return x0, x1, y0, y1, z0, z1


@njit
def _j2mul(k, x0, x1, y0, y1, z0, z1, A0, A1, delta, p):
    if k == 0 or (z0 == 0 and z1 == 0):
        return 1, 0, 1, 0, 0, 0
    r = (1, 0, 1, 0, 0, 0)
    bit = 0
    while (k >> (bit + 1)) > 0:
        bit += 1
    while bit >= 0:
        r = _j2dbl(r[0], r[1], r[2], r[3], r[4], r[5], A0, A1, delta, p)
        if (k >> bit) & 1:
            r = _j2add(r[0], r[1], r[2], r[3], r[4], r[5], x0, x1, y0, y1, z0, z1, A0, A1, delta, p)
        bit -= 1
    return r


@njit
def _structure_fp2(A0, A1, B0, B1, delta, p, N2, qs, es, cnt, qfield_m1, seed, stream):
    """(n1, n2) of E(F_{p^2}); mirrors _structure_fp."""
    n_amb = 0
    amb_q = np.empty(24, dtype=np.int64)
    amb_v = np.empty(24, dtype=np.int64)
    forced = N2
    for i in range(cnt):
        if es[i] >= 2 and qfield_m1 % qs[i] == 0:
            amb_q[n_amb] = qs[i]
            amb_v[n_amb] = es[i]
            n_amb += 1
            for _ in range(es[i]):
                forced //= qs[i]
    if n_amb == 0:
        return 1, N2
    best = np.zeros(24, dtype=np.int64)
    s1, s2 = _rng_seed(seed, p, stream)
    stable = 0
    draws = 0
    while draws < 4096:
        draws += 1
        # sample a point
        while True:
            s1, s2, r = _rng_next(s1, s2)
            x0 = r % p
            s1, s2, r = _rng_next(s1, s2)
            x1 = r % p
            t0, t1 = _f2mul(x0, x1, x0, x1, delta, p)
            t0, t1 = _f2mul(t0, t1, x0, x1, delta, p)
            a0, a1 = _f2mul(A0, A1, x0, x1, delta, p)
            rhs0 = (t0 + a0 + B0) % p
            rhs1 = (t1 + a1 + B1) % p
            y0, y1, ok = _f2sqrt(rhs0, rhs1, delta, p)
            if ok:
                s1, s2, r = _rng_next(s1, s2)
                if (r & 1) == 1 and not (y0 == 0 and y1 == 0):
                    y0, y1 = (p - y0) % p, (p - y1) % p
                break
        pt = _j2mul_affine(forced, x0, x1, y0, y1, A0, A1, delta, p)
        improved = False
        for i in range(n_amb):
            q = amb_q[i]
            cur = pt
            for j in range(n_amb):
                if j != i:
                    for _ in range(amb_v[j]):
                        cur = _j2mul(
                            amb_q[j], cur[0], cur[1], cur[2], cur[3], cur[4], cur[5],
                            A0, A1, delta, p,
                        )
            d = 0
            while not (cur[4] == 0 and cur[5] == 0):
                cur = _j2mul(q, cur[0], cur[1], cur[2], cur[3], cur[4], cur[5], A0, A1, delta, p)
                d += 1
            if d > best[i]:
                best[i] = d
                improved = True
        stable = 0 if improved else stable + 1
        resolved = True
        for i in range(n_amb):
            if best[i] < amb_v[i]:
                resolved = False
        if resolved:
            break
        if stable >= 64:
            n2 = forced
            for i in range(n_amb):
                for _ in range(best[i]):
                    n2 *= amb_q[i]
            n1 = N2 // n2
            if n2 % n1 == 0 and qfield_m1 % n1 == 0:
                break
            stable = 0
    else:
        return -5, 0
    n2 = forced
    for i in range(n_amb):
        for _ in range(best[i]):
            n2 *= amb_q[i]
    n1 = N2 // n2
    if qfield_m1 % n1 != 0 or n2 % n1 != 0:
        return -6, 0
    return n1, n2


# -- per-prime pipeline -------------------------------------------------------

STATUS_SS_ISO = 1
STATUS_ISO = 2
STATUS_NONISO = 3

ERR_TRACE_MISMATCH = -1
ERR_VOLCANO = -2
ERR_PRIME_TO_ELL = -3
ERR_SS_NONISO = -4
ERR_SAMPLER = -5
ERR_INFEASIBLE = -6
ERR_TRACE_FAIL = -7
ERR_FP2 = -8


@njit
def _short_model(a1, a2, a3, a4, a6, p):
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    c4 = (b2 * b2 - 24 * b4) % p
    c6 = (36 * b2 % p * b4 - b2 * b2 % p * b2 - 216 * b6) % p
    A = (p - c4) % p * _inv(48, p) % p
    B = (p - c6) % p * _inv(864, p) % p
    return A, B


@njit
def _val(n, q):
    v = 0
    while n % q == 0:
        v += 1
        n //= q
    return v


@njit
def _strip(n, q):
    while n % q == 0:
        n //= q
    return n


@njit
def _ft_mask(n1, ell, m_max):
    mask = 0
    v = _val(n1, ell)
    for m in range(1, m_max + 1):
        if v >= m:
            mask |= 1 << (m - 1)
    return mask


@njit
def _process_prime(
    p, e_a1, e_a2, e_a3, e_a4, e_a6, f_a1, f_a2, f_a3, f_a4, f_a6,
    ell, m_max, seed, do_anomalous, small_primes,
):
    """Returns (status, t, n1, n2, n1p, n2p, ftE, ftEp, anomalous)."""
    A, B = _short_model(e_a1, e_a2, e_a3, e_a4, e_a6, p)
    Ap, Bp = _short_model(f_a1, f_a2, f_a3, f_a4, f_a6, p)
    qs = np.empty(40, dtype=np.int64)
    es = np.empty(40, dtype=np.int64)

    if p < (1 << 16):
        t = _trace_naive(A, B, p)
        t2 = _trace_naive(Ap, Bp, p)
        if t != t2:
            return ERR_TRACE_MISMATCH, 0, 0, 0, 0, 0, 0, 0, False
        N = p + 1 - t
        cnt = _factor32(N, small_primes, qs, es, 0)
    else:
        t = _trace_bsgs(A, B, p, small_primes, seed, 4)
        if t == 1 << 62:
            return ERR_TRACE_FAIL, 0, 0, 0, 0, 0, 0, 0, False
        N = p + 1 - t
        cnt = _factor32(N, small_primes, qs, es, 0)
        if not _verify_order(Ap, Bp, p, N, qs, es, cnt, seed, 5):
            t2 = _trace_bsgs(Ap, Bp, p, small_primes, seed, 6)
            if t2 != t:
                return ERR_TRACE_MISMATCH, t, 0, 0, 0, 0, 0, 0, False

    n1, n2 = _structure_fp(A, B, p, N, qs, es, cnt, p - 1, seed, 0)
    if n1 < 0:
        return n1, t, 0, 0, 0, 0, 0, 0, False
    n1p, n2p = _structure_fp(Ap, Bp, p, N, qs, es, cnt, p - 1, seed, 1)
    if n1p < 0:
        return n1p, t, 0, 0, 0, 0, 0, 0, False

    # prime-to-ell parts must agree
    if _strip(n1, ell) != _strip(n1p, ell) or _strip(n2, ell) != _strip(n2p, ell):
        return ERR_PRIME_TO_ELL, t, n1, n2, n1p, n2p, 0, 0, False

    iso = n1 == n1p and n2 == n2p
    # supersingular => isomorphic is a theorem for odd ell (the endomorphism
    # orders must coincide); for ell = 2 a vertical supersingular isogeny can
    # genuinely change the shape, so only the volcano-step law applies there.
    if t == 0 and not iso and ell != 2:
        return ERR_SS_NONISO, t, n1, n2, n1p, n2p, 0, 0, False
    if not iso:
        a = _val(n1, ell)
        ap = _val(n1p, ell)
        if (a - ap != 1 and ap - a != 1) or _val(n2, ell) + a != _val(n2p, ell) + ap:
            return ERR_VOLCANO, t, n1, n2, n1p, n2p, 0, 0, False

    status = STATUS_SS_ISO if (t == 0 and iso) else (STATUS_ISO if iso else STATUS_NONISO)
    ftE = _ft_mask(n1, ell, m_max)
    ftEp = _ft_mask(n1p, ell, m_max)

    anomalous = False
    if do_anomalous and iso:
        Ntw = 2 * p + 2 - N
        cnt2 = _factor32(Ntw, small_primes, qs, es, cnt)
        cnt2 = _merge_factors(qs, es, cnt2)
        N2 = N * Ntw
        delta = _nonresidue(p)
        qf2 = p * p - 1
        m1, m2 = _structure_fp2(A, 0, B, 0, delta, p, N2, qs, es, cnt2, qf2, seed, 2)
        if m1 < 0:
            return ERR_FP2, t, n1, n2, n1p, n2p, ftE, ftEp, False
        m1p, m2p = _structure_fp2(Ap, 0, Bp, 0, delta, p, N2, qs, es, cnt2, qf2, seed, 3)
        if m1p < 0:
            return ERR_FP2, t, n1, n2, n1p, n2p, ftE, ftEp, False
        if _strip(m1, ell) != _strip(m1p, ell) or _strip(m2, ell) != _strip(m2p, ell):
            return ERR_FP2, t, n1, n2, n1p, n2p, ftE, ftEp, False
        if t == 0 and (m1 != p + 1 or m2 != p + 1 or m1p != p + 1 or m2p != p + 1):
            return ERR_FP2, t, n1, n2, n1p, n2p, ftE, ftEp, False
        anomalous = not (m1 == m1p and m2 == m2p)

    return status, t, n1, n2, n1p, n2p, ftE, ftEp, anomalous


@njit
def sweep_block(
    ps,
    e_a1, e_a2, e_a3, e_a4, e_a6,
    f_a1, f_a2, f_a3, f_a4, f_a6,
    ell, m_max, seed, do_anomalous, small_primes,
    status, trace, n1, n2, n1p, n2p, ftE, ftEp, anomalous,
):
    """Run the per-prime pipeline over a block of good primes."""
    for i in range(ps.shape[0]):
        res = _process_prime(
            ps[i],
            e_a1[i], e_a2[i], e_a3[i], e_a4[i], e_a6[i],
            f_a1[i], f_a2[i], f_a3[i], f_a4[i], f_a6[i],
            ell, m_max, seed, do_anomalous, small_primes,
        )
        status[i] = res[0]
        trace[i] = res[1]
        n1[i] = res[2]
        n2[i] = res[3]
        n1p[i] = res[4]
        n2p[i] = res[5]
        ftE[i] = res[6]
        ftEp[i] = res[7]
        anomalous[i] = res[8]
