from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fr
from tauarb import (
    AdaptedProcess,
    Filtration,
    MeasureDensity,
    ModelError,
    NotAdaptedError,
    NotPredictableError,
    TradingStrategy,
    apply_density,
    as_fraction,
    atom_of,
    build_filtration,
    build_space,
    conditional_expectation,
    format_fraction,
    gains,
    is_martingale,
    martingale_from_terminal,
    random_instance,
    random_martingale,
    stochastic_exponential,
)


def test_as_fraction_accepts_exact_inputs():
    assert as_fraction("2/3") == Fraction(2, 3)
    assert as_fraction("0.25") == Fraction(1, 4)
    assert as_fraction(Decimal("1.5")) == Fraction(3, 2)
    assert as_fraction(-4) == -4


@pytest.mark.parametrize("bad", [0.5, True, "abc", "1/0", None])
def test_as_fraction_rejects_inexact_or_junk(bad):
    with pytest.raises((TypeError, ValueError)):
        as_fraction(bad)


def test_format_fraction_lowest_terms():
    assert format_fraction(Fraction(4, 6)) == "2/3"
    assert format_fraction(Fraction(-3, 1)) == "-3"


@pytest.mark.parametrize("weights, msg", [
    (("1/2", "1/3"), "sum"),
    (("1", "0"), "positive"),
    (("3/2", "-1/2"), "positive"),
])
def test_space_rejects_bad_weights(weights, msg):
    with pytest.raises(ModelError, match=msg):
        build_space(("a", "b"), weights, 1)


def test_space_rejects_duplicates_and_zero_horizon():
    with pytest.raises(ModelError):
        build_space(("a", "a"), ("1/2", "1/2"), 1)
    with pytest.raises(ModelError):
        build_space(("a", "b"), ("1/2", "1/2"), 0)


def test_filtration_must_refine():
    space = build_space(("a", "b", "c"), ("1/3", "1/3", "1/3"), 2)
    with pytest.raises(ModelError, match="level 2 does not refine level 1"):
        build_filtration(space, [[["a", "b", "c"]], [["a", "b"], ["c"]], [["a"], ["b", "c"]]])


def test_filtration_must_partition():
    space = build_space(("a", "b"), ("1/2", "1/2"), 1)
    with pytest.raises(ModelError, match="not covered"):
        build_filtration(space, [[["a", "b"]], [["a"]]])
    with pytest.raises(ModelError, match="two atoms"):
        build_filtration(space, [[["a", "b"]], [["a"], ["a", "b"]]])
    with pytest.raises(ModelError, match="unknown outcome|not an outcome"):
        build_filtration(space, [[["a", "b"]], [["a"], ["z"]]])


def test_atom_lookup(ex1):
    assert atom_of(ex1.F, 1, "w3") == frozenset({"w3", "w4"})
    assert atom_of(ex1.F, 2, "w3") == frozenset({"w3"})


def test_conditional_expectation_by_hand(ex1):
    # S_2 on {w3, w4}: (2/9 * 1 + 4/9 * 1/4) / (6/9) = 1/2
    ce = conditional_expectation(ex1.space, ex1.F, ex1.S.at(2), 1)
    assert ce == fr(2, 2, "1/2", "1/2")


def test_adaptedness_is_checked(ex1):
    with pytest.raises(NotAdaptedError):
        AdaptedProcess(ex1.F, (fr(1, 1, 1, 1), fr(1, 2, 3, 4), fr(0, 0, 0, 0)), "bad")


def test_example_price_is_a_martingale(ex1, ex2):
    assert is_martingale(ex1.space, ex1.F, ex1.S)
    assert is_martingale(ex2.space, ex2.F, ex2.S)


def test_martingale_check_reports_drift(ex1):
    X = ex1.S + AdaptedProcess(ex1.F, (fr(0, 0, 0, 0), fr(0, 0, 0, 0), fr(1, 1, 1, 1)))
    check = is_martingale(ex1.space, ex1.F, X)
    assert not check and check.time == 2 and check.drift == 1


def test_strategy_must_be_predictable(ex1):
    with pytest.raises(NotPredictableError):
        TradingStrategy(ex1.F, (fr(0, 0, 0, 0), fr(0, 0, 1, -1)))


def test_gains_of_short_position(ex1):
    H = TradingStrategy.on_atoms(ex1.F, [(2, (2, 3), -1)])
    assert gains(H, ex1.S) == fr(0, 0, "-1/2", "1/4")


def test_stochastic_exponential_is_running_product(ex1):
    N = AdaptedProcess(ex1.F, (fr(0, 0, 0, 0), fr(1, 1, -1, -1), fr(1, 2, -1, -1)))
    # increments (1,1,-1,-1) then (0,1,0,0)
    assert stochastic_exponential(N).at(2) == fr(2, 4, 0, 0)


def test_density_validation(ex1):
    with pytest.raises(ModelError, match="mean"):
        MeasureDensity(ex1.space, fr(1, 1, 1, 2))
    with pytest.raises(ModelError, match="positive"):
        MeasureDensity(ex1.space, fr(9, 0, 0, 0))
    d = MeasureDensity(ex1.space, fr(1, 1, 1, 1))
    assert d.is_identity and apply_density(ex1.space, d).weights == ex1.space.weights


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_tower_property(seed):
    space, F, _ = random_instance(seed, 6, 3)
    X = random_martingale(space, F, seed).at(F.horizon)
    for n in range(F.horizon):
        inner = conditional_expectation(space, F, X, n + 1)
        assert conditional_expectation(space, F, inner, n) == conditional_expectation(space, F, X, n)
    assert space.expectation(conditional_expectation(space, F, X, 0)) == space.expectation(X)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_martingale_gains_have_zero_mean(seed, hseed):
    import random

    space, F, _ = random_instance(seed, 6, 3)
    M = random_martingale(space, F, seed)
    rng = random.Random(hseed)
    positions = [(n, atom, rng.randint(-3, 3)) for n in range(1, F.horizon + 1) for atom in F.atoms(n - 1)]
    H = TradingStrategy.on_atoms(F, positions)
    assert space.expectation(gains(H, M)) == 0


def test_constant_terminal_gives_constant_martingale(ex1):
    M = martingale_from_terminal(ex1.space, ex1.F, fr(3, 3, 3, 3))
    assert all(row == fr(3, 3, 3, 3) for row in M.values)


def test_martingale_from_terminal_recovers_price(ex1):
    assert martingale_from_terminal(ex1.space, ex1.F, ex1.S.at(2)).values == ex1.S.values


def test_filtration_refines_relation(ex1):
    trivial = Filtration(ex1.F.outcomes, (((0, 1, 2, 3),),) * 3)
    assert ex1.F.refines(trivial) and not trivial.refines(ex1.F)
