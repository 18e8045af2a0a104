"""Counting points and recovering group structure over F_p.

Two routes to the trace of Frobenius cross-check each other: a character
sum for small p and Shanks-Mestre baby-step/giant-step with a twist
certificate above 2^16. The group shape Z/n1 x Z/n2 then falls out of
randomized exponent sampling, checked here against brute-force enumeration.
"""

import random

from isodense import (
    PrimeField,
    brute_force_structure,
    factor,
    group_structure,
    has_full_torsion,
    sylow_shape,
    trace_bsgs,
    trace_naive,
)
from isodense.curve import CurveOverField, FpView

rng = random.Random(0)

# y^2 = x^3 + x + 1 over F_5 has nine points and is cyclic.
c5 = CurveOverField(A=1, B=1, view=FpView(PrimeField(5)))
tr = trace_naive(c5)
print(f"F_5 example: N = {tr.N}, t = {tr.t}, over F_25: N2 = {tr.N2}")
print("  structure:", group_structure(c5, factor(tr.N), 5, rng))

# The two trace routes agree wherever they overlap.
p = 100003
c = CurveOverField(A=17, B=40, view=FpView(PrimeField(p)))
t_naive = trace_naive(c).t
t_bsgs = trace_bsgs(c, rng).t
print(f"\np = {p}: naive t = {t_naive}, BSGS t = {t_bsgs}")
assert t_naive == t_bsgs

# Group shapes vs the brute-force oracle at a handful of small primes.
print("\nshape recovery vs enumeration:")
for p in (101, 211, 401):
    fld = PrimeField(p)
    c = CurveOverField(A=3, B=7 % p, view=FpView(fld))
    bf = brute_force_structure(c)
    mc = group_structure(c, factor(bf.order), p, rng)
    assert mc == bf
    a, b = sylow_shape(bf, 2)
    print(f"  p = {p:>3}: E(F_p) = Z/{bf.n1} x Z/{bf.n2}   2-Sylow shape ({a}, {b})"
          f"   full 2-torsion: {has_full_torsion(bf, 2, 1)}")
