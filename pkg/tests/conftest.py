import random

import pytest

from isodense.curve import CurveOverField, FpView, RationalCurve, RationalCurvePair
from isodense.dataset import load_builtin
from isodense.ffield import PrimeField


@pytest.fixture(scope="session")
def records():
    return load_builtin()


@pytest.fixture(scope="session")
def pairs(records):
    return {rec.label: rec.to_pair() for rec in records}


@pytest.fixture(scope="session")
def sweep_cache():
    """Shared sweep results so acceptance criteria reuse the expensive runs."""
    from isodense.sweep import empirical_P

    cache = {}

    def get(pair, X, seed=0, workers=2, m_max=7, anomalous=False):
        key = (pair.label, X, seed, m_max, anomalous)
        if key not in cache:
            cache[key] = empirical_P(
                pair, X, seed=seed, workers=workers, m_max=m_max, anomalous=anomalous
            )
        return cache[key]

    return get


@pytest.fixture()
def curve_f5():
    """y^2 = x^3 + x + 1 over F_5: nine points, cyclic."""
    return CurveOverField(A=1, B=1, view=FpView(PrimeField(5)))


@pytest.fixture()
def curve_f7_ss():
    """y^2 = x^3 + x over F_7: supersingular (t = 0)."""
    return CurveOverField(A=1, B=0, view=FpView(PrimeField(7)))


def make_curve(A, B, p):
    return CurveOverField(A=A % p, B=B % p, view=FpView(PrimeField(p)))


def seeded(n=0):
    return random.Random(n)
