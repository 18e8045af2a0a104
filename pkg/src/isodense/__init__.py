"""Densities of primes where l-isogenous elliptic curves have isomorphic reductions.

The library has two halves that check each other:

* an exact evaluator (`density`) that turns mod-l^m Galois image sizes and
  conditional defect densities into the isomorphism density, as an exact
  rational via a closed-form geometric tail;
* an empirical engine (`sweep`) that reduces a curve pair at every good
  prime p <= X, computes both group structures E(F_p) = Z/n1 x Z/n2, and
  tallies how often the structures agree, with theorem-level invariants
  asserted at every prime.

`dataset` ships verified curve pairs with their density profiles; `cli`
wires everything into the `isodense` command.
"""

from .count import TraceRecord, order_fp2, trace_bsgs, trace_frobenius, trace_naive
from .curve import (
    BadReduction,
    CurveOverField,
    RationalCurve,
    RationalCurvePair,
    lift_to_fp2,
    reduce_mod_p,
)
from .dataset import PairRecord, builtin_profiles, load_builtin, load_pairs
from .density import (
    DensityProfile,
    HeadLevel,
    Tail,
    d_from_degree,
    decimal_expansion,
    eval_density,
    f_closed_form,
    format_rational,
    maximal_profile,
    parse_rational,
    validate_profile,
)
from .ffield import PrimeField, legendre, sqrt_mod
from .structure import (
    FactoredInteger,
    GroupShape,
    brute_force_structure,
    factor,
    group_structure,
    has_full_torsion,
    point_order,
    sylow_shape,
)
from .sweep import (
    DEstimate,
    PrimeOutcome,
    SweepReport,
    TheoremViolation,
    anomalous_density,
    compare_at_prime,
    empirical_P,
    empirical_d,
    prime_pi,
    sieve_primes,
)

__version__ = "0.1.0"

__all__ = [
    "BadReduction",
    "CurveOverField",
    "DEstimate",
    "DensityProfile",
    "FactoredInteger",
    "GroupShape",
    "HeadLevel",
    "PairRecord",
    "PrimeField",
    "PrimeOutcome",
    "RationalCurve",
    "RationalCurvePair",
    "SweepReport",
    "Tail",
    "TheoremViolation",
    "TraceRecord",
    "anomalous_density",
    "brute_force_structure",
    "builtin_profiles",
    "compare_at_prime",
    "d_from_degree",
    "decimal_expansion",
    "empirical_P",
    "empirical_d",
    "eval_density",
    "f_closed_form",
    "factor",
    "format_rational",
    "group_structure",
    "has_full_torsion",
    "legendre",
    "lift_to_fp2",
    "load_builtin",
    "load_pairs",
    "maximal_profile",
    "order_fp2",
    "parse_rational",
    "point_order",
    "prime_pi",
    "reduce_mod_p",
    "sieve_primes",
    "sqrt_mod",
    "sylow_shape",
    "trace_bsgs",
    "trace_frobenius",
    "trace_naive",
    "validate_profile",
]
