"""Acceptance suite: every shipped guarantee, at its stated tolerance.

Each criterion prints one PASS line when it holds; a failure names the
offending quantity. The expensive sweeps (X = 1e6) are shared between
criteria through the session-scoped sweep cache.

Run only this module with:  pytest tests/test_acceptance.py -v -s
"""

import math
import random

import numpy as np
import pytest

from isodense.curve import BadReduction, reduce_mod_p
from isodense.count import trace_bsgs, trace_naive
from isodense.curve import CurveOverField, FpView
from isodense.density import eval_density, f_closed_form, maximal_profile, parse_rational
from isodense.ffield import PrimeField
from isodense.structure import brute_force_structure, factor, group_structure
from isodense.sweep import empirical_P, empirical_d, prime_pi, prime_array

X_FULL = 10**6
X_PROPS = 10**5
SEED = 0
WORKERS = 2


def _ok(name, detail=""):
    print(f"ACCEPTANCE PASS: {name}" + (f" ({detail})" if detail else ""))


# -- 1. exact densities --------------------------------------------------------


def test_criterion_1_exact_densities(records):
    by_label = {rec.label: rec for rec in records}
    golden = {
        "69.a": "7/15",
        "44.a": "31/40",
        "38.b": "287/312",
        "26.b": "1151/1200",
        "121.a": "86509/87840",
        "144.b": "97/120",
        "49.a": "5/12",
    }
    for label, expect in golden.items():
        got = eval_density(by_label[label].profile)
        assert got == parse_rational(expect), (label, got)
    for ell in (2, 3, 5, 7, 11, 13):
        assert eval_density(maximal_profile(ell)) == f_closed_form(ell)
    _ok("criterion 1", "7 exact rationals + closed form for ell <= 13, zero tolerance")


# -- 2. empirical counts at 1e6 -----------------------------------------------

# The published table interchanges the integers of the 3- and 5-isogeny rows;
# the published decimals fix the association (see the dataset provenance).
GOLDEN_COUNTS = {
    "69.a": (36631, 0.46665),
    "44.a": (60874, 0.77548),
    "38.b": (72283, 0.92082),
    "26.b": (75298, 0.95923),
    "144.b": (63469, 0.8085),
}


@pytest.mark.parametrize("label", sorted(GOLDEN_COUNTS))
def test_criterion_2_sweep_counts(label, pairs, sweep_cache):
    count, ratio = GOLDEN_COUNTS[label]
    # 69.a runs with anomalous checking enabled so criteria 2, 5 and 6 share it
    rep = sweep_cache(pairs[label], X_FULL, seed=SEED, workers=WORKERS,
                      anomalous=(label == "69.a"))
    assert abs(rep.iso_count_with_bad - count) <= 3, (
        f"{label}: iso count {rep.iso_count_with_bad} vs published {count}"
    )
    assert abs(rep.iso_ratio - ratio) <= 0.0005, (
        f"{label}: ratio {rep.iso_ratio:.5f} vs published {ratio}"
    )
    _ok(f"criterion 2 [{label}]",
        f"count {rep.iso_count_with_bad} (target {count} +-3), ratio {rep.iso_ratio:.5f}")


# -- 3. CM sweep ----------------------------------------------------------------


def test_criterion_3_cm_sweep(pairs, sweep_cache):
    rep = sweep_cache(pairs["49.a"], X_FULL, seed=SEED, workers=WORKERS)
    assert abs(rep.iso_ratio - 0.4165) <= 0.002, rep.iso_ratio
    _ok("criterion 3", f"49.a ratio {rep.iso_ratio:.5f} within 0.4165 +- 0.002")


# -- 4. 432.e discrepancy -------------------------------------------------------


def test_criterion_4_432e(records, pairs, sweep_cache, capsys):
    rep = sweep_cache(pairs["432.e"], X_FULL, seed=SEED, workers=WORKERS)
    assert abs(rep.iso_ratio - 0.8126) <= 0.005, rep.iso_ratio
    # the tool must print both published values with the discrepancy flagged
    from isodense.cli import main

    code = main(["theoretical", "--pair", "432.e"])
    out, _ = capsys.readouterr()
    assert code == 0
    assert "22/27" in out and "13/16" in out and "DISCREPANCY" in out
    print(out)
    _ok("criterion 4", f"ratio {rep.iso_ratio:.5f} vs 0.8126; both 22/27 and 13/16 reported")


# -- 5. empirical d-values ------------------------------------------------------


def _binomial_sigma(p_ref, n):
    return math.sqrt(p_ref * (1 - p_ref) / n)


def test_criterion_5_dvalues(pairs, sweep_cache):
    # 69.a at level 2: within 3 sigma of 1/2 on both sides
    rep = sweep_cache(pairs["69.a"], X_FULL, seed=SEED, workers=WORKERS, anomalous=True)
    est = empirical_d(pairs["69.a"], 2, 1, X_FULL, report=rep)
    for tag, d, n in (("d", est.d_hat, est.support_e), ("d'", est.dp_hat, est.support_ep)):
        sigma = _binomial_sigma(0.5, n)
        assert abs(d - 0.5) <= 3 * sigma, (tag, d, sigma)
    _ok("criterion 5 [69.a]",
        f"d={est.d_hat:.4f}, d'={est.dp_hat:.4f} vs 1/2 (3-sigma {3*_binomial_sigma(0.5, est.support_e):.4f})")

    # 121.a at level 11: within 3 sigma of 10/11
    rep = sweep_cache(pairs["121.a"], X_FULL, seed=SEED, workers=WORKERS)
    est11 = empirical_d(pairs["121.a"], 11, 1, X_FULL, report=rep)
    ref = 10 / 11
    for tag, d, n in (("d", est11.d_hat, est11.support_e), ("d'", est11.dp_hat, est11.support_ep)):
        assert n > 0
        sigma = _binomial_sigma(ref, n)
        assert abs(d - ref) <= 3 * sigma, (tag, d, n, sigma)
    _ok("criterion 5 [121.a]",
        f"d={est11.d_hat:.4f}, d'={est11.dp_hat:.4f} vs 10/11, supports {est11.support_e}/{est11.support_ep}")

    # 144.b at level 2: exactly zero on both sides
    rep = sweep_cache(pairs["144.b"], X_FULL, seed=SEED, workers=WORKERS)
    est2 = empirical_d(pairs["144.b"], 2, 1, X_FULL, report=rep)
    assert est2.defect_e == 0 and est2.defect_ep == 0
    assert est2.d_hat == 0.0 and est2.dp_hat == 0.0
    assert est2.support_e == est2.support_ep == rep.good_count
    _ok("criterion 5 [144.b]", f"d = d' = 0 exactly with full support {est2.support_e}")


# -- 6. anomalous primes --------------------------------------------------------


def test_criterion_6_anomalous(pairs, sweep_cache):
    rep = sweep_cache(pairs["69.a"], X_FULL, seed=SEED, workers=WORKERS, anomalous=True)
    ref = 1 / 30
    sigma = _binomial_sigma(ref, rep.pi_X)
    assert abs(rep.anomalous_ratio - ref) <= 3 * sigma, (rep.anomalous_ratio, ref, sigma)
    _ok("criterion 6",
        f"69.a anomalous ratio {rep.anomalous_ratio:.5f} vs 1/30 = {ref:.5f} "
        f"(3-sigma {3*sigma:.5f})")


# -- 7. property suites ---------------------------------------------------------


def test_criterion_7_structure_oracle(pairs):
    ps = [int(p) for p in prime_array(499) if p > 3]
    checked = 0
    for label, pair in pairs.items():
        for idx, rc in enumerate((pair.e, pair.e_prime)):
            for p in ps:
                red = reduce_mod_p(rc, p)
                if isinstance(red, BadReduction):
                    continue
                bf = brute_force_structure(red)
                mc = group_structure(red, factor(bf.order), p, random.Random(p * 37 + idx))
                assert mc == bf, (label, idx, p)
                checked += 1
    _ok("criterion 7 [structure oracle]",
        f"Monte Carlo = brute force at {checked} (curve, p) pairs, p <= 499")


def test_criterion_7_trace_threshold_corpus():
    rng = random.Random(99)
    primes = [65519, 65521, 65537, 65539, 65543]
    for i in range(100):
        p = primes[i % len(primes)]
        fld = PrimeField(p)
        while True:
            A, B = rng.randrange(p), rng.randrange(p)
            if (4 * A**3 + 27 * B * B) % p != 0:
                break
        c = CurveOverField(A=A, B=B, view=FpView(fld))
        assert trace_naive(c).t == trace_bsgs(c, random.Random(i)).t
    _ok("criterion 7 [trace dual route]", "naive = BSGS on 100 curves straddling 2^16")


def test_criterion_7_invariants_1e5(pairs, sweep_cache):
    # a full 1e5 sweep of every bundled pair must run without tripping any
    # theorem-level assertion (trips raise TheoremViolation)
    for label, pair in pairs.items():
        rep = sweep_cache(pair, X_PROPS, seed=SEED, workers=WORKERS)
        assert sum(rep.counts.values()) == rep.pi_X
    _ok("criterion 7 [invariants]",
        f"equal-trace / volcano / prime-to-ell / supersingular assertions held "
        f"across {len(pairs)} sweeps at X = 1e5")


def test_criterion_7_worker_determinism(pairs):
    reports = {
        w: empirical_P(pairs["69.a"], X_PROPS, seed=3, workers=w) for w in (1, 2, 8)
    }
    blobs = {w: r.canonical_json() for w, r in reports.items()}
    assert blobs[1] == blobs[2] == blobs[8]
    _ok("criterion 7 [determinism]", "byte-identical reports for workers in {1, 2, 8}")


# -- 8. sieve -------------------------------------------------------------------


def test_criterion_8_prime_pi():
    assert prime_pi(10**6) == 78498
    _ok("criterion 8", "pi(1e6) = 78498")


# -- convergence (sweep-module invariant, binomial-heuristic tolerance) ----------


def test_convergence_every_bundled_pair(records, pairs, sweep_cache):
    for rec in records:
        target = float(eval_density(rec.profile))
        rep = sweep_cache(pairs[rec.label], X_FULL, seed=SEED, workers=WORKERS,
                          anomalous=(rec.label == "69.a"))
        tol = 3 * math.sqrt(target * (1 - target) / rep.pi_X)
        assert abs(rep.iso_ratio - target) <= tol, (
            f"{rec.label}: {rep.iso_ratio:.5f} vs {target:.5f} (tol {tol:.5f})"
        )
    _ok("convergence", f"|ratio - exact| <= 3 sigma at X = 1e6 for all {len(records)} pairs")
