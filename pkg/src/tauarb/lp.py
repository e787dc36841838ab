"""Exact linear programming over ``Fraction``: a dense two-phase simplex with
Bland's rule.  Problems here are tiny (one atom, a handful of children), so
clarity wins over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class LPResult:
    status: str            # "optimal", "infeasible" or "unbounded"
    value: Fraction | None = None
    x: tuple | None = None


def _pivot(tableau, basis, row, col):
    pivot = tableau[row][col]
    tableau[row] = [v / pivot for v in tableau[row]]
    for r in range(len(tableau)):
        if r != row and tableau[r][col] != 0:
            factor = tableau[r][col]
            tableau[r] = [a - factor * b for a, b in zip(tableau[r], tableau[row])]
    basis[row] = col


def _run(tableau, basis, allowed):
    """Maximise the objective held in the last row (stored as reduced costs)."""
    m = len(tableau) - 1
    while True:
        obj = tableau[m]
        col = next((j for j in allowed if obj[j] < 0), None)
        if col is None:
            return "optimal"
        best = None
        for r in range(m):
            a = tableau[r][col]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            return "unbounded"
        _pivot(tableau, basis, best[1], col)


def maximize(c, A_eq, b_eq) -> LPResult:
    """Maximise ``c @ x`` subject to ``A_eq @ x = b_eq`` and ``x >= 0``, exactly."""
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A_eq]
    b = [Fraction(v) for v in b_eq]
    m, n = len(A), len(c)
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    # phase one: artificials n..n+m-1, minimise their sum
    width = n + m
    tableau = [A[i] + [Fraction(int(i == k)) for k in range(m)] + [b[i]] for i in range(m)]
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(n):
            obj[j] -= tableau[i][j]
        obj[-1] -= b[i]
    tableau.append(obj)
    basis = list(range(n, n + m))
    _run(tableau, basis, range(width))
    if tableau[m][-1] != 0:
        return LPResult("infeasible")

    # drive remaining artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if tableau[r][j] != 0), None)
            if col is not None:
                _pivot(tableau, basis, r, col)
    keep = [r for r in range(m) if basis[r] < n]
    tableau = [tableau[r][:n] + [tableau[r][-1]] for r in keep]
    basis = [basis[r] for r in keep]

    # phase two
    obj = [-v for v in c] + [Fraction(0)]
    for r, j in enumerate(basis):
        if obj[j] != 0:
            factor = obj[j]
            obj = [a - factor * v for a, v in zip(obj, tableau[r])]
    tableau.append(obj)
    status = _run(tableau, basis, range(n))
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for r, j in enumerate(basis):
        x[j] = tableau[r][-1]
    return LPResult("optimal", tableau[-1][-1], tuple(x))


def max_min_weights(probs, values) -> LPResult:
    """Weights ``w >= 0`` with ``sum w = 1`` and ``sum w * values = 0`` maximising ``min w``.

    Variables are ``w_1..w_k, t, s_1..s_k`` with ``w_j - t - s_j = 0``.  ``probs``
    is unused by the program itself; it only fixes the number of children.
    """
    k = len(values)
    if len(probs) != k:
        raise ValueError("probs and values differ in length")
    n = 2 * k + 1
    rows, rhs = [], []
    rows.append([1] * k + [0] + [0] * k)
    rhs.append(1)
    rows.append(list(values) + [0] + [0] * k)
    rhs.append(0)
    for j in range(k):
        row = [0] * n
        row[j] = 1
        row[k] = -1
        row[k + 1 + j] = -1
        rows.append(row)
        rhs.append(0)
    c = [0] * k + [1] + [0] * k
    result = maximize(c, rows, rhs)
    if result.status != "optimal":
        return result
    return LPResult("optimal", result.value, result.x[:k])
