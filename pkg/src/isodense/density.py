"""Exact density of primes with isomorphic reductions, from image data.

The density of primes p where both reductions of an l-isogenous pair are
isomorphic equals

    1 - sum_{m >= 1} ( d_m / |G(l^m)|  +  d'_m / |G'(l^m)| ),

where |G(l^m)|, |G'(l^m)| are the mod-l^m Galois image sizes and d_m, d'_m
the conditional defect densities. Past the stable level M the d's are
constant and the image sizes grow by exactly l^g per level (g = 4 for
non-CM pairs, full preimage growth; g = 2 for CM), so the tail is a
geometric series with exact closed form

    (d_tail / sizeG_M + d'_tail / sizeGp_M) * l^g / (l^g - 1).

Everything here is exact rational arithmetic; floats never appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ffield import is_prime

GROWTH_EXPONENTS = (2, 4)  # 2 = CM, 4 = full preimage growth


def parse_rational(s: str | int | Fraction) -> Fraction:
    """Parse "num/den" (or an int) into an exact Fraction."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(s.strip())


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def decimal_expansion(x: Fraction, digits: int = 20) -> str:
    """Truncated decimal string; repeating expansions get a trailing '...'."""
    sign = "-" if x < 0 else ""
    x = abs(x)
    ip = x.numerator // x.denominator
    rem = x.numerator - ip * x.denominator
    ds = []
    for _ in range(digits):
        rem *= 10
        ds.append(str(rem // x.denominator))
        rem %= x.denominator
    tail = "..." if rem else ""
    return f"{sign}{ip}." + "".join(ds) + tail


@dataclass(frozen=True)
class HeadLevel:
    """Per-level data below the stable level: sizes |G(l^m)|, |G'(l^m)| and defects."""

    m: int
    sizeG: int
    sizeGp: int
    d: Fraction
    dp: Fraction


@dataclass(frozen=True)
class Tail:
    """From level M on: constant defects, sizes growing by l^g per level."""

    M: int
    sizeG: int
    sizeGp: int
    d: Fraction
    dp: Fraction
    g: int


@dataclass(frozen=True)
class DensityProfile:
    ell: int
    head: tuple  # HeadLevel for m = 1 .. M-1
    tail: Tail

    def levels(self):
        return list(self.head) + [self.tail]


class ProfileError(ValueError):
    """Profile failed validation; .violations carries the details."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def validate_profile(profile: DensityProfile) -> list[str]:
    """All profile invariants; returns one message per violation (empty = valid)."""
    out = []
    ell = profile.ell
    if not is_prime(ell):
        out.append(f"ell = {ell} is not prime")
        return out
    tail = profile.tail
    if tail.g not in GROWTH_EXPONENTS:
        out.append(f"tail growth exponent g = {tail.g} not in {GROWTH_EXPONENTS}")
    if tail.M != len(profile.head) + 1:
        out.append(
            f"head has {len(profile.head)} levels but tail starts at M = {tail.M}"
        )
    expected_m = 1
    allowed_ratio = {Fraction(1), Fraction(ell), Fraction(1, ell)}
    allowed_d = {Fraction(0), 1 - Fraction(1, ell)}
    is_cm = tail.g == 2
    for lvl in profile.levels():
        name = f"tail (m >= {tail.M})" if isinstance(lvl, Tail) else f"level m = {lvl.m}"
        if not isinstance(lvl, Tail):
            if lvl.m != expected_m:
                out.append(f"{name}: head levels must be consecutive from 1")
            expected_m += 1
        if lvl.sizeG <= 0 or lvl.sizeGp <= 0:
            out.append(f"{name}: image sizes must be positive")
            continue
        if Fraction(lvl.sizeG, lvl.sizeGp) not in allowed_ratio:
            out.append(
                f"{name}: size ratio {lvl.sizeG}/{lvl.sizeGp} not in {{1, {ell}, 1/{ell}}}"
            )
        for tag, d in (("d", lvl.d), ("d'", lvl.dp)):
            if not 0 <= d <= 1:
                out.append(f"{name}: {tag} = {d} outside [0, 1]")
            elif not is_cm and d not in allowed_d:
                out.append(
                    f"{name}: {tag} = {d} not in {{0, 1 - 1/{ell}}} for a non-CM profile"
                )
    if is_cm and min(tail.d, tail.dp) != 0:
        out.append("CM tail must be one-sided: one of d, d' vanishes from level M on")
    return out


def eval_density(profile: DensityProfile) -> Fraction:
    """Exact value of the isomorphism density determined by the profile."""
    violations = validate_profile(profile)
    if violations:
        raise ProfileError(violations)
    total = Fraction(1)
    for lvl in profile.head:
        total -= lvl.d / lvl.sizeG + lvl.dp / lvl.sizeGp
    tail = profile.tail
    lg = profile.ell ** tail.g
    geom = Fraction(lg, lg - 1)
    total -= (tail.d / tail.sizeG + tail.dp / tail.sizeGp) * geom
    return total


def partial_sum(profile: DensityProfile, levels: int) -> Fraction:
    """Term-by-term truncation of the series through `levels` levels.

    Test oracle for the closed-form tail; enumerates the geometric part
    explicitly instead of summing it.
    """
    total = Fraction(1)
    tail = profile.tail
    for m in range(1, levels + 1):
        if m < tail.M:
            lvl = profile.head[m - 1]
            total -= lvl.d / lvl.sizeG + lvl.dp / lvl.sizeGp
        else:
            growth = profile.ell ** (tail.g * (m - tail.M))
            total -= tail.d / (tail.sizeG * growth) + tail.dp / (tail.sizeGp * growth)
    return total


def d_from_degree(relative_degree: int, ell: int | None = None) -> Fraction:
    """Defect density 1 - 1/[LL':L] from a relative composite-field degree.

    The degree is 1 (fields coincide) or the isogeny prime itself.
    """
    if relative_degree < 1:
        raise ValueError("relative degree must be a positive integer")
    if relative_degree != 1:
        if ell is not None and relative_degree != ell:
            raise ValueError(
                f"relative degree must be 1 or {ell}, got {relative_degree}"
            )
        if ell is None and not is_prime(relative_degree):
            raise ValueError(f"relative degree must be 1 or prime, got {relative_degree}")
    return 1 - Fraction(1, relative_degree)


def maximal_profile(ell: int) -> DensityProfile:
    """Profile of a pair with the largest possible images given an l-isogeny:
    level 1, |G(l)| = |G'(l)| = l(l-1), full defects, growth l^4 per level."""
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    d = 1 - Fraction(1, ell)
    return DensityProfile(
        ell=ell,
        head=(),
        tail=Tail(M=1, sizeG=ell * (ell - 1), sizeGp=ell * (ell - 1), d=d, dp=d, g=4),
    )


def f_closed_form(ell: int) -> Fraction:
    """(l^4 - 2l^2 - 1) / (l^4 - 1): the maximal-image density in closed form."""
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    return Fraction(ell ** 4 - 2 * ell ** 2 - 1, ell ** 4 - 1)


def profile_to_dict(profile: DensityProfile) -> dict:
    """JSON-ready form; rationals as "num/den" strings."""
    return {
        "ell": profile.ell,
        "head": [
            {
                "m": lvl.m,
                "sizeG": lvl.sizeG,
                "sizeGp": lvl.sizeGp,
                "d": format_rational(lvl.d),
                "dp": format_rational(lvl.dp),
            }
            for lvl in profile.head
        ],
        "tail": {
            "M": profile.tail.M,
            "sizeG": profile.tail.sizeG,
            "sizeGp": profile.tail.sizeGp,
            "d": format_rational(profile.tail.d),
            "dp": format_rational(profile.tail.dp),
            "g": profile.tail.g,
        },
    }


def profile_from_dict(data: dict) -> DensityProfile:
    head = tuple(
        HeadLevel(
            m=int(h["m"]),
            sizeG=int(h["sizeG"]),
            sizeGp=int(h["sizeGp"]),
            d=parse_rational(h["d"]),
            dp=parse_rational(h["dp"]),
        )
        for h in data.get("head", [])
    )
    t = data["tail"]
    tail = Tail(
        M=int(t["M"]),
        sizeG=int(t["sizeG"]),
        sizeGp=int(t["sizeGp"]),
        d=parse_rational(t["d"]),
        dp=parse_rational(t["dp"]),
        g=int(t["g"]),
    )
    return DensityProfile(ell=int(data["ell"]), head=head, tail=tail)
