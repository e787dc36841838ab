import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from tauarb.lp import max_min_weights, maximize


def test_symmetric_two_state_weights():
    result = max_min_weights([Fraction(1, 2)] * 2, [1, -1])
    assert result.status == "optimal"
    assert result.x == (Fraction(1, 2), Fraction(1, 2)) and result.value == Fraction(1, 2)


def test_skewed_binomial_weights():
    # w (u - 1) + (1 - w)(d - 1) = 0 with u = 2, d = 1/2 gives w = 1/3
    result = max_min_weights([Fraction(1, 10), Fraction(9, 10)], [1, Fraction(-1, 2)])
    assert result.x == (Fraction(1, 3), Fraction(2, 3))


def test_single_signed_has_no_positive_weights():
    result = max_min_weights([Fraction(1, 2)] * 2, [0, 3])
    assert result.status == "optimal" and result.value == 0
    assert max_min_weights([Fraction(1, 2)] * 2, [1, 2]).status == "infeasible"


def test_unbounded_and_infeasible():
    assert maximize([1, 0], [[1, -1]], [0]).status == "unbounded"
    assert maximize([1], [[1], [1]], [1, 2]).status == "infeasible"


def test_redundant_rows_are_tolerated():
    result = maximize([1, 1], [[1, 1], [2, 2]], [1, 2])
    assert result.status == "optimal" and result.value == 1


@pytest.mark.parametrize("seed", range(150))
def test_agrees_with_floating_point_solver(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 4), rng.randint(2, 6)
    A = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(m)]
    # bounded box through a slack-free sum constraint keeps most problems bounded
    A.append([1] * n)
    x0 = [rng.randint(0, 3) for _ in range(n)]
    b = [sum(a * x for a, x in zip(row, x0)) for row in A[:-1]] + [sum(x0) + rng.randint(0, 2)]
    if rng.random() < 0.2:
        b[0] += 7  # sometimes infeasible
    c = [rng.randint(-5, 5) for _ in range(n)]
    exact = maximize(c, A, b)
    ref = linprog(-np.array(c, dtype=float), A_eq=np.array(A, dtype=float), b_eq=np.array(b, dtype=float),
                  bounds=[(0, None)] * n, method="highs")
    if ref.status == 2:
        assert exact.status == "infeasible"
    elif ref.status == 3:
        assert exact.status == "unbounded"
    else:
        assert exact.status == "optimal"
        assert float(exact.value) == pytest.approx(-ref.fun, abs=1e-7)
        assert all(sum(Fraction(a) * x for a, x in zip(row, exact.x)) == bi for row, bi in zip(A, b))
        assert all(x >= 0 for x in exact.x)
