import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isodense.ffield import FieldError, PrimeField, ZeroDivisionInField, is_prime, legendre, sqrt_mod


def brute_squares(p):
    return {x * x % p for x in range(p)}


def test_legendre_examples():
    assert legendre(0, 7) == 0
    assert legendre(4, 7) == 1  # 4 = 2^2
    # derived by enumerating squares mod 7
    assert 3 not in brute_squares(7)
    assert legendre(3, 7) == -1


def test_legendre_matches_enumeration():
    for p in (5, 7, 11, 13, 17, 101):
        sq = brute_squares(p)
        for x in range(p):
            expect = 0 if x == 0 else (1 if x in sq else -1)
            assert legendre(x, p) == expect


def test_sqrt_examples():
    assert sqrt_mod(0, 7) == 0
    # enumeration mod 7: 3^2 = 2, canonical min(3, 4) = 3
    assert sqrt_mod(2, 7) == 3
    assert sqrt_mod(3, 7) is None


@pytest.mark.parametrize("p", [5, 7, 13, 17, 97, 101, 65537, 1000003])
def test_sqrt_roundtrip_and_count(p):
    fld = PrimeField(p)
    if p <= 101:
        count = 0
        for x in range(1, p):
            r = fld.sqrt(x)
            if r is not None:
                count += 1
                assert r * r % p == x
                assert r <= p - r  # canonical choice
        assert count == (p - 1) // 2
    else:
        rng = random.Random(p)
        for _ in range(50):
            x = rng.randrange(1, p)
            r = fld.sqrt(x * x % p)
            assert r is not None and r * r % p == x * x % p


def test_field_construction_guards():
    with pytest.raises(FieldError):
        PrimeField(3)
    with pytest.raises(FieldError):
        PrimeField(10)
    with pytest.raises(FieldError):
        PrimeField((1 << 62) + 1)


def test_inverse_property():
    for p in (5, 101, 65537, 10**9 + 7):
        fld = PrimeField(p)
        rng = random.Random(p)
        for _ in range(1000 if p < 10**6 else 100):
            x = rng.randrange(1, p)
            assert x * fld.inv(x) % p == 1
    with pytest.raises(ZeroDivisionInField):
        PrimeField(7).inv(0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_legendre_multiplicative(a, b):
    p = 1000003
    fld = PrimeField(p)
    if a % p and b % p:
        assert fld.legendre(a * b) == fld.legendre(a) * fld.legendre(b)


def test_nonresidue_is_least():
    for p in (5, 7, 11, 97, 1000003):
        fld = PrimeField(p)
        d = fld.nonresidue()
        assert fld.legendre(d) == -1
        assert all(fld.legendre(c) != -1 for c in range(1, d))


class TestFp2:
    def test_identity_and_example(self):
        fld = PrimeField(7)
        assert fld.nonresidue() == 3
        x = (4, 5)
        assert fld.fp2_mul((1, 0), x) == x
        # (1+s)(1-s) = 1 - delta = -2 = 5 mod 7, by direct expansion
        assert fld.fp2_mul((1, 1), (1, 6)) == (5, 0)

    def test_inverse_and_zero(self):
        fld = PrimeField(101)
        rng = random.Random(1)
        for _ in range(1000):
            x = (rng.randrange(101), rng.randrange(101))
            if x == (0, 0):
                continue
            assert fld.fp2_mul(x, fld.fp2_inv(x)) == (1, 0)
        with pytest.raises(ZeroDivisionInField):
            fld.fp2_inv((0, 0))

    def test_norm(self):
        fld = PrimeField(7)
        a, b = 2, 5
        assert fld.fp2_norm((a, b)) == (a * a - fld.nonresidue() * b * b) % 7

    def test_multiplicative_group_order(self):
        for p in (7, 101, 997):
            fld = PrimeField(p)
            rng = random.Random(p)
            for _ in range(25):
                x = (rng.randrange(p), rng.randrange(p))
                if x == (0, 0):
                    continue
                assert fld.fp2_pow(x, p * p - 1) == (1, 0)

    def test_sqrt_exhaustive_small(self):
        p = 13
        fld = PrimeField(p)
        squares = set()
        for a in range(p):
            for b in range(p):
                squares.add(fld.fp2_mul((a, b), (a, b)))
        for a in range(p):
            for b in range(p):
                r = fld.fp2_sqrt((a, b))
                if (a, b) in squares:
                    assert r is not None
                    assert fld.fp2_mul(r, r) == (a, b)
                else:
                    assert r is None


def test_is_prime_basics():
    assert all(is_prime(q) for q in (2, 3, 5, 41, 65537, 2**31 - 1))
    assert not any(is_prime(n) for n in (0, 1, 4, 561, 41 * 43, 2**32))
