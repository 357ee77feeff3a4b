"""Shared fields and contexts. Heavy objects are session scoped."""
import sys
from fractions import Fraction

import pytest
from hypothesis import settings

from cmcoincidence.base_field import real_quadratic_field
from cmcoincidence.cm_field import class_group, cm_field_from_radicand, make_cm_field

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def cm(D, x, y, den=1):
    """L(sqrt(x/den + y/den sqrt D)) in the form O_L[t]."""
    F = real_quadratic_field(D)
    return cm_field_from_radicand(F, F.from_sqrt(Fraction(x, den), Fraction(y, den)))


@pytest.fixture(scope="session")
def F5():
    return real_quadratic_field(5)


@pytest.fixture(scope="session")
def K5(F5):
    """Q(zeta_5): t^2 + (1 - omega) t + 1 = 0."""
    return make_cm_field(F5, F5.elem(1, -1), F5.one)


@pytest.fixture(scope="session")
def K85(F5):
    """Q(sqrt(-85 + 34 sqrt 5))."""
    return cm_field_from_radicand(F5, F5.from_sqrt(-85, 34))


@pytest.fixture(scope="session")
def G5(K5):
    return class_group(K5)


@pytest.fixture(scope="session")
def G85(K85):
    return class_group(K85)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
