"""Exact isomorphism densities from Galois image data.

The density of primes where an l-isogenous pair has isomorphic reductions
is one minus a sum of per-level defect terms d_m/|G(l^m)|. A density
profile packages the finitely many distinguished levels plus a geometric
tail; evaluation is exact rational arithmetic, no floats anywhere.
"""

from fractions import Fraction

from isodense import (
    DensityProfile,
    HeadLevel,
    Tail,
    decimal_expansion,
    eval_density,
    f_closed_form,
    format_rational,
    load_builtin,
    maximal_profile,
)

# The closed form for a pair whose images are as large as an l-isogeny
# allows: |G(l)| = l(l-1), every defect 1 - 1/l, sizes growing by l^4.
print("maximal-image closed form f(l) = (l^4 - 2l^2 - 1)/(l^4 - 1):")
for ell in (2, 3, 5, 7, 11, 13):
    f = f_closed_form(ell)
    assert eval_density(maximal_profile(ell)) == f
    print(f"  l = {ell:>2}: {format_rational(f):>12} = {decimal_expansion(f)}")

# A profile with structure below the stable level: full rational
# two-torsion on both curves (d_2 = 0), then |G(4)| = 4 vs |G'(4)| = 8
# with a one-sided defect, stable from level 8 on.
F = Fraction
level8 = DensityProfile(
    ell=2,
    head=(HeadLevel(1, 1, 1, F(0), F(0)), HeadLevel(2, 4, 8, F(1, 2), F(0))),
    tail=Tail(M=3, sizeG=16, sizeGp=16, d=F(1, 2), dp=F(1, 2), g=4),
)
print("\nlevel-8 pair with full rational 2-torsion:", format_rational(eval_density(level8)))

# CM pairs have growth l^2 per level and a one-sided tail; this one keeps
# a symmetric defect at level 2 only.
cm = DensityProfile(
    ell=2,
    head=(HeadLevel(1, 2, 2, F(1, 2), F(1, 2)),),
    tail=Tail(M=2, sizeG=8, sizeGp=8, d=F(1, 2), dp=F(0), g=2),
)
print("CM pair with symmetric level-1 defect: ", format_rational(eval_density(cm)))

# Every bundled pair carries its profile; the stored expected density is
# always the literal evaluation.
print("\nbundled pairs:")
for rec in load_builtin():
    d = eval_density(rec.profile)
    print(f"  {rec.label:>6} (l = {rec.ell:>2}): P = {format_rational(d):>14}"
          f" = {decimal_expansion(d, 12)}")
