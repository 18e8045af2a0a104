from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isodense.density import (
    DensityProfile,
    HeadLevel,
    ProfileError,
    Tail,
    d_from_degree,
    decimal_expansion,
    eval_density,
    f_closed_form,
    format_rational,
    maximal_profile,
    parse_rational,
    partial_sum,
    profile_from_dict,
    profile_to_dict,
    validate_profile,
)

F = Fraction


def profile_121():
    return DensityProfile(
        ell=11, head=(), tail=Tail(M=1, sizeG=120, sizeGp=120, d=F(10, 11), dp=F(10, 11), g=4)
    )


def profile_144():
    return DensityProfile(
        ell=2,
        head=(HeadLevel(1, 1, 1, F(0), F(0)), HeadLevel(2, 4, 8, F(1, 2), F(0))),
        tail=Tail(M=3, sizeG=16, sizeGp=16, d=F(1, 2), dp=F(1, 2), g=4),
    )


def profile_49():
    return DensityProfile(
        ell=2,
        head=(HeadLevel(1, 2, 2, F(1, 2), F(1, 2)),),
        tail=Tail(M=2, sizeG=8, sizeGp=8, d=F(1, 2), dp=F(0), g=2),
    )


def profile_432():
    return DensityProfile(
        ell=3, head=(), tail=Tail(M=1, sizeG=4, sizeGp=12, d=F(2, 3), dp=F(0), g=2)
    )


class TestClosedForm:
    def test_table(self):
        assert f_closed_form(2) == F(7, 15)
        assert f_closed_form(3) == F(31, 40)
        assert f_closed_form(5) == F(287, 312)
        assert f_closed_form(7) == F(1151, 1200)

    @pytest.mark.parametrize("ell", [2, 3, 5, 7, 11, 13])
    def test_matches_maximal_profile(self, ell):
        assert eval_density(maximal_profile(ell)) == f_closed_form(ell)

    def test_non_prime_rejected(self):
        with pytest.raises(ValueError):
            f_closed_form(4)


class TestEvalDensity:
    def test_no_defect_gives_one(self):
        p = DensityProfile(
            ell=2, head=(), tail=Tail(M=1, sizeG=2, sizeGp=2, d=F(0), dp=F(0), g=4)
        )
        assert eval_density(p) == 1

    def test_golden_values(self):
        assert eval_density(profile_121()) == F(86509, 87840)
        assert eval_density(profile_144()) == F(97, 120)
        assert eval_density(profile_49()) == F(5, 12)
        assert eval_density(profile_432()) == F(13, 16)

    def test_bad_growth_rejected(self):
        p = DensityProfile(
            ell=2, head=(), tail=Tail(M=1, sizeG=2, sizeGp=2, d=F(0), dp=F(0), g=3)
        )
        with pytest.raises(ProfileError):
            eval_density(p)

    def test_range(self):
        for prof in (profile_121(), profile_144(), profile_49(), profile_432()):
            assert 0 <= eval_density(prof) <= 1

    def test_truncation_consistency(self):
        for prof in (maximal_profile(2), maximal_profile(3), profile_121(),
                     profile_49(), profile_144(), profile_432()):
            lg = prof.ell ** prof.tail.g
            tail = prof.tail
            err = partial_sum(prof, 40) - eval_density(prof)
            # exact remainder of the geometric tail beyond level 40
            remainder = (
                (tail.d / tail.sizeG + tail.dp / tail.sizeGp)
                * F(1, lg ** (41 - tail.M))
                * F(lg, lg - 1)
            )
            assert err == remainder
            if tail.M == 1:
                assert abs(err) < F(1, lg ** 39)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 2),
        st.fractions(min_value=0, max_value=1, max_denominator=30),
        st.fractions(min_value=0, max_value=1, max_denominator=30),
    )
    def test_monotone_in_defects(self, level, d0, d1):
        # increasing any defect weakly decreases the density (CM profiles
        # place no restriction on head d-values, so perturb those)
        lo, hi = sorted((d0, d1))

        def prof(d):
            head = [HeadLevel(1, 2, 2, F(0), F(0)), HeadLevel(2, 4, 4, F(0), F(0))]
            head[min(level, 1)] = HeadLevel(min(level, 1) + 1, 2 if level == 0 else 4,
                                            2 if level == 0 else 4, d, F(0))
            return DensityProfile(
                ell=2, head=tuple(head),
                tail=Tail(M=3, sizeG=16, sizeGp=16, d=d if level == 2 else F(0), dp=F(0), g=2),
            )

        assert eval_density(prof(hi)) <= eval_density(prof(lo))
        assert eval_density(prof(lo)) <= 1


class TestDFromDegree:
    def test_examples(self):
        assert d_from_degree(1) == 0
        assert d_from_degree(2) == F(1, 2)
        assert d_from_degree(11) == F(10, 11)

    def test_guards(self):
        with pytest.raises(ValueError):
            d_from_degree(0)
        with pytest.raises(ValueError):
            d_from_degree(6)
        with pytest.raises(ValueError):
            d_from_degree(3, ell=11)
        assert d_from_degree(11, ell=11) == F(10, 11)


class TestValidation:
    def test_maximal_profiles_clean(self):
        for ell in (2, 3, 5, 7, 11, 13):
            assert validate_profile(maximal_profile(ell)) == []

    def test_bad_size_ratio(self):
        p = DensityProfile(
            ell=3, head=(), tail=Tail(M=1, sizeG=9, sizeGp=1, d=F(0), dp=F(0), g=4)
        )
        out = validate_profile(p)
        assert len(out) == 1 and "ratio" in out[0]

    def test_non_cm_defect_values(self):
        p = DensityProfile(
            ell=3, head=(), tail=Tail(M=1, sizeG=6, sizeGp=6, d=F(1, 2), dp=F(0), g=4)
        )
        assert any("non-CM" in v for v in validate_profile(p))

    def test_cm_one_sided(self):
        p = DensityProfile(
            ell=2, head=(), tail=Tail(M=1, sizeG=2, sizeGp=2, d=F(1, 2), dp=F(1, 2), g=2)
        )
        assert any("one-sided" in v for v in validate_profile(p))

    def test_head_indexing(self):
        p = DensityProfile(
            ell=2,
            head=(HeadLevel(2, 1, 1, F(0), F(0)),),
            tail=Tail(M=2, sizeG=2, sizeGp=2, d=F(1, 2), dp=F(1, 2), g=4),
        )
        assert any("consecutive" in v for v in validate_profile(p))

    def test_432_profile_internally_consistent(self):
        # the stated per-level data is consistent even though the stated
        # closed form is not; the literal evaluation gives 13/16, not 22/27
        assert validate_profile(profile_432()) == []
        assert eval_density(profile_432()) == F(13, 16)
        assert eval_density(profile_432()) != F(22, 27)


class TestRationalIO:
    def test_parse_format(self):
        assert parse_rational("97/120") == F(97, 120)
        assert format_rational(F(97, 120)) == "97/120"
        assert format_rational(F(3)) == "3"

    def test_decimal_truncation(self):
        assert decimal_expansion(F(97, 120)).startswith("0.80833333333333333333")
        assert decimal_expansion(F(97, 120)).endswith("...")
        assert decimal_expansion(F(13, 16)) == "0.81250000000000000000"
        assert decimal_expansion(F(-1, 2)) == "-0.50000000000000000000"

    def test_profile_roundtrip(self):
        for prof in (maximal_profile(5), profile_144(), profile_49()):
            assert profile_from_dict(profile_to_dict(prof)) == prof
