from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from ivbounds.observed import ObservedLaw, OutcomeJoint

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

Q = Fraction(1, 4)


def uniform_law(K=2, exact=True):
    v = Q if exact else 0.25
    return ObservedLaw([[[v, v], [v, v]] for _ in range(K)])


def uniform_joint(exact=True):
    v = Q if exact else 0.25
    return OutcomeJoint([[v, v], [v, v]])


@pytest.fixture
def uniform2():
    return uniform_law(2)


@pytest.fixture
def perfect_compliance():
    """K=1, everyone treated: p(X=1,Y=1)=0.6, p(X=1,Y=0)=0.4."""
    return ObservedLaw([[[Fraction(0), Fraction(0)], [Fraction(2, 5), Fraction(3, 5)]]])


@pytest.fixture
def iv_violation():
    """Z determines Y among the always-treated."""
    return ObservedLaw([[[0, 0], [0, 1]], [[0, 0], [1, 0]]])
