import math
import random

import numpy as np
import pytest

from isodense.curve import RationalCurve, RationalCurvePair, reduce_mod_p
from isodense.structure import brute_force_structure
from isodense.sweep import (
    TheoremViolation,
    anomalous_density,
    compare_at_prime,
    empirical_P,
    empirical_d,
    merge_reports,
    prime_array,
    prime_pi,
    sieve_primes,
)


class TestSieve:
    def test_small(self):
        assert list(sieve_primes(10)) == [2, 3, 5, 7]
        assert prime_pi(10) == 4
        assert list(sieve_primes(1)) == []

    def test_pi_1e6(self):
        assert prime_pi(10**6) == 78498

    def test_against_independent_sieve(self):
        # simple wheel-free reference sieve
        n = 30000
        flags = bytearray([1]) * (n + 1)
        flags[0:2] = b"\x00\x00"
        for i in range(2, int(n**0.5) + 1):
            if flags[i]:
                flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
        expect = [i for i in range(n + 1) if flags[i]]
        assert list(sieve_primes(n)) == expect
        assert prime_array(n).tolist() == expect

    def test_segment_boundaries(self):
        a = list(sieve_primes(10**5, segment=1 << 20))
        b = list(sieve_primes(10**5, segment=1009))
        assert a == b


class TestCompareAtPrime:
    def test_bad_prime(self, pairs):
        out = compare_at_prime(pairs["69.a"], 23)
        assert out.status == "bad"
        assert compare_at_prime(pairs["69.a"], 3).status == "bad"

    def test_smallest_good_prime_cross_checked(self, pairs):
        pair = pairs["69.a"]
        out = compare_at_prime(pair, 5, m_max=3)
        bf_e = brute_force_structure(reduce_mod_p(pair.e, 5))
        bf_ep = brute_force_structure(reduce_mod_p(pair.e_prime, 5))
        assert out.shape_e == bf_e and out.shape_ep == bf_ep
        assert (out.status in ("iso", "supersingular_iso")) == (bf_e == bf_ep)
        assert out.full_torsion_e == tuple(bf_e.n1 % 2**m == 0 for m in (1, 2, 3))

    def test_supersingular_status(self, pairs):
        pair = pairs["69.a"]
        for p in (5, 7, 11, 13, 17, 19, 29, 31, 37, 41, 43, 47):
            if pair.conductor % p == 0:
                continue
            out = compare_at_prime(pair, p)
            if out.trace == 0 and out.status != "noniso":
                assert out.status == "supersingular_iso"
                return
        pytest.skip("no small supersingular prime in range")

    def test_anomalous_requires_iso(self, pairs):
        pair = pairs["69.a"]
        for p in (5, 7, 11, 13, 17):
            out = compare_at_prime(pair, p, anomalous=True)
            if out.status == "noniso":
                assert not out.anomalous


def small_pair():
    e = RationalCurve(ainvs=(0, 3, 0, -2, 0), conductor=34, label="t1")
    ep = RationalCurve(ainvs=(0, -6, 0, 17, 0), conductor=34, label="t2")
    return RationalCurvePair(e=e, e_prime=ep, ell=2, label="tpair")


class TestEmpiricalP:
    def test_counts_sum_to_pi(self, pairs, sweep_cache):
        rep = sweep_cache(pairs["69.a"], 10**4)
        assert sum(rep.counts.values()) == rep.pi_X == prime_pi(10**4)
        assert 0 <= rep.iso_ratio <= 1
        assert 0 <= rep.iso_ratio_good <= 1

    def test_x_guard(self, pairs):
        with pytest.raises(ValueError):
            empirical_P(pairs["69.a"], 4)

    def test_engines_agree(self):
        pair = small_pair()
        a = empirical_P(pair, 2000, seed=3, workers=1, anomalous=True, engine="kernel")
        b = empirical_P(pair, 2000, seed=3, workers=1, anomalous=True, engine="reference")
        assert a.canonical_json() == b.canonical_json()
        for k in a.arrays:
            assert np.array_equal(a.arrays[k], b.arrays[k]), k

    def test_worker_determinism(self, pairs):
        pair = pairs["144.b"]
        reports = [
            empirical_P(pair, 3 * 10**4, seed=5, workers=w, m_max=5) for w in (1, 2, 8)
        ]
        assert len({r.canonical_json() for r in reports}) == 1

    def test_seed_stability(self, pairs):
        a = empirical_P(pairs["49.a"], 10**4, seed=11, workers=2)
        b = empirical_P(pairs["49.a"], 10**4, seed=11, workers=2)
        assert a.canonical_json() == b.canonical_json()

    def test_partition_law(self, pairs):
        pair = pairs["44.a"]
        full = empirical_P(pair, 2 * 10**4, seed=2, workers=1)
        lo = empirical_P(pair, 9000, seed=2, workers=1)
        # interval (9000, 2e4]: build from the full arrays
        hi_primes = full.arrays["p"][full.arrays["p"] > 9000]
        import copy

        hi = empirical_P(pair, 2 * 10**4, seed=2, workers=1)
        mask = hi.arrays["p"] > 9000
        hi.arrays = {k: v[mask] for k, v in hi.arrays.items()}
        hi.counts = {
            "bad": full.counts["bad"] - lo.counts["bad"],
            "supersingular_iso": int(np.count_nonzero(hi.arrays["status"] == 1)),
            "iso": int(np.count_nonzero(hi.arrays["status"] == 2)),
            "noniso": int(np.count_nonzero(hi.arrays["status"] == 3)),
        }
        hi.pi_X = full.pi_X - lo.pi_X
        for m in range(1, hi.m_max + 1):
            bit = 1 << (m - 1)
            fe = (hi.arrays["ftE"] & bit) != 0
            fep = (hi.arrays["ftEp"] & bit) != 0
            hi.torsion_e[m - 1] = int(np.count_nonzero(fe))
            hi.torsion_ep[m - 1] = int(np.count_nonzero(fep))
            hi.torsion_e_only[m - 1] = int(np.count_nonzero(fe & ~fep))
            hi.torsion_ep_only[m - 1] = int(np.count_nonzero(fep & ~fe))
        hi.anomalous_count = int(np.count_nonzero(hi.arrays["anomalous"]))
        merged = merge_reports(lo, hi)
        assert merged.counts == full.counts
        assert merged.torsion_e == full.torsion_e
        assert merged.torsion_ep_only == full.torsion_ep_only
        assert np.array_equal(merged.arrays["p"], full.arrays["p"])

    def test_theorem_assertions_hold_small(self, pairs, sweep_cache):
        for label, pair in pairs.items():
            rep = sweep_cache(pair, 10**4)  # raises TheoremViolation on any trip
            assert sum(rep.counts.values()) == rep.pi_X

    def test_trace_mismatch_detected(self):
        # non-isogenous curves must abort with a trace mismatch; the conductor
        # stand-in covers both discriminants so every swept prime is good
        e = RationalCurve(ainvs=(0, 0, 0, 1, 1), conductor=2 * 5 * 11 * 31, label="x1")
        ep = RationalCurve(ainvs=(0, 0, 0, 2, 3), conductor=2 * 5 * 11 * 31, label="x2")
        bogus = RationalCurvePair(e=e, e_prime=ep, ell=2, label="bogus")
        with pytest.raises(TheoremViolation):
            empirical_P(bogus, 3000, workers=1)
        with pytest.raises(TheoremViolation):
            empirical_P(bogus, 3000, workers=1, engine="reference")


class TestEstimators:
    def test_d_estimates_144(self, pairs, sweep_cache):
        pair = pairs["144.b"]
        rep = sweep_cache(pair, 10**4)
        est1 = empirical_d(pair, 2, 1, 10**4, report=rep)
        assert est1.d_hat == 0.0 and est1.dp_hat == 0.0  # rational (2,2) on both
        assert est1.support_e == est1.support_ep == rep.good_count
        est2 = empirical_d(pair, 2, 2, 10**4, report=rep)
        assert est2.dp_hat == 0.0
        assert est2.d_hat is not None and abs(est2.d_hat - 0.5) < 0.1

    def test_empty_conditioning_set(self, pairs, sweep_cache):
        pair = pairs["69.a"]
        rep = sweep_cache(pair, 10**4)
        est = empirical_d(pair, 2, 7, 10**4, report=rep)
        if est.support_e == 0:
            assert est.d_hat is None

    def test_off_ell_levels_from_arrays(self, pairs, sweep_cache):
        pair = pairs["69.a"]
        rep = sweep_cache(pair, 10**4)
        est = empirical_d(pair, 3, 1, 10**4, report=rep)
        # prime-to-ell parts agree, so no defects away from ell = 2
        assert est.defect_e == est.defect_ep == 0

    def test_anomalous_density_supersingular_consistency(self):
        pair = small_pair()
        rep = empirical_P(pair, 5000, seed=1, workers=1, anomalous=True)
        arr = rep.arrays
        ss = arr["trace"] == 0
        assert not np.any(arr["anomalous"] & ss)
        assert anomalous_density(pair, 5000, seed=1, workers=1, report=rep) == rep.anomalous_ratio
