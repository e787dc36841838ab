from fractions import Fraction

import pytest

from tauarb import first_model, second_model


@pytest.fixture
def ex1():
    return first_model()


@pytest.fixture
def ex2():
    return second_model()


def fr(*values):
    """Tuple of Fractions from ints / strings, e.g. fr(1, "2/3")."""
    return tuple(Fraction(v) for v in values)
