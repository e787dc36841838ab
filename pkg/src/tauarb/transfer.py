"""Explicit constructions around a random time: enlarged-filtration
compensators, deflators, measure changes, per-period densities and the
truncated processes used to transfer no-arbitrage between filtrations.

Every quotient is formed only on the event that forces its denominator to be
positive; the indicator is evaluated first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantBreach, NotHonestError, NotMartingaleError
from .filtered_space import (
    ONE,
    ZERO,
    AdaptedProcess,
    MeasureDensity,
    SampleSpace,
    conditional_expectation,
    is_martingale,
    stochastic_exponential,
)
from .random_time import AzemaPair, RandomTime, after_part, is_honest, progressive_enlargement, stop_at


def _prev_ce(space, azema, rv, n):
    return conditional_expectation(space, azema.filtration, rv, n - 1)


def _mul(a, b):
    return tuple(x * y for x, y in zip(a, b))


def _require_honest(azema: AzemaPair, tau: RandomTime):
    check = is_honest(azema.filtration, tau)
    if not check:
        n, atom, seen = check.counterexample
        raise NotHonestError(f"tau is not honest: values {list(seen)} on {sorted(atom)} before time {n}")


def _require_martingale(space, M: AdaptedProcess, F):
    check = is_martingale(space, F, M)
    if not check:
        raise NotMartingaleError(
            f"{M.name or 'M'} is not an F-martingale: drift {check.drift} at time {check.time} "
            f"on {sorted(check.atom)}"
        )


def _from_steps(filtration, start, steps, name):
    size = len(filtration.outcomes)
    rows = [tuple(start) if start is not None else (ZERO,) * size]
    for step in steps:
        rows.append(tuple(a + b for a, b in zip(rows[-1], step)))
    return AdaptedProcess(filtration, tuple(rows), name)


# ---------------------------------------------------------------------------
# compensated martingales in the enlarged filtration
# ---------------------------------------------------------------------------


def g_compensated_before(space: SampleSpace, M: AdaptedProcess, azema: AzemaPair, tau: RandomTime) -> AdaptedProcess:
    """``M^tau`` minus its compensator in the enlarged filtration; a G-martingale."""
    F = azema.filtration
    _require_martingale(space, M, F)
    G = progressive_enlargement(F, tau)
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for k in range(1, F.horizon + 1):
        drift = _prev_ce(space, azema, _mul(M.increment(k), Zt.at(k)), k)
        steps.append(tuple(
            drift[i] / Z.at(k - 1)[i] if t >= k else ZERO for i, t in enumerate(tau.values)
        ))
    compensator = _from_steps(G, None, steps, "C")
    out = (stop_at(M.under(F), tau, G) - compensator).renamed(f"{M.name or 'M'}^(b)")
    check = is_martingale(space, G, out)
    if not check:
        raise InvariantBreach(f"before-tau compensated process fails the G-martingale test at {check.time}")
    return out


def g_compensated_after(space: SampleSpace, M: AdaptedProcess, azema: AzemaPair, tau: RandomTime) -> AdaptedProcess:
    """``M - M^tau`` minus its compensator in the enlarged filtration (honest ``tau``)."""
    F = azema.filtration
    _require_honest(azema, tau)
    _require_martingale(space, M, F)
    G = progressive_enlargement(F, tau)
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for k in range(1, F.horizon + 1):
        drift = _prev_ce(space, azema, _mul(M.increment(k), tuple(1 - z for z in Zt.at(k))), k)
        steps.append(tuple(
            drift[i] / (1 - Z.at(k - 1)[i]) if t < k else ZERO for i, t in enumerate(tau.values)
        ))
    compensator = _from_steps(G, None, steps, "C")
    out = (after_part(M.under(F), tau, G) - compensator).renamed(f"{M.name or 'M'}^(a)")
    check = is_martingale(space, G, out)
    if not check:
        raise InvariantBreach(f"after-tau compensated process fails the G-martingale test at {check.time}")
    return out


# ---------------------------------------------------------------------------
# deflators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeflatorReport:
    deflator: AdaptedProcess
    exponential: AdaptedProcess
    one_plus_jumps_positive: bool
    martingale_verified: bool


def _deflator_report(space, G, steps, name):
    N = _from_steps(G, None, steps, name)
    positive = all(1 + d > 0 for step in steps for d in step)
    return DeflatorReport(N, stochastic_exponential(N), positive, bool(is_martingale(space, G, N)))


def deflator_before(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> DeflatorReport:
    F = azema.filtration
    G = progressive_enlargement(F, tau)
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for k in range(1, F.horizon + 1):
        alive = _prev_ce(space, azema, tuple(ONE if z > 0 else ZERO for z in Zt.at(k)), k)
        steps.append(tuple(
            Z.at(k - 1)[i] / Zt.at(k)[i] - alive[i] if t >= k else ZERO
            for i, t in enumerate(tau.values)
        ))
    return _deflator_report(space, G, steps, "N^(b)")


def deflator_after(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> DeflatorReport:
    F = azema.filtration
    _require_honest(azema, tau)
    G = progressive_enlargement(F, tau)
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for k in range(1, F.horizon + 1):
        below = _prev_ce(space, azema, tuple(ONE if z < 1 else ZERO for z in Zt.at(k)), k)
        steps.append(tuple(
            (1 - Z.at(k - 1)[i]) / (1 - Zt.at(k)[i]) - below[i] if t < k else ZERO
            for i, t in enumerate(tau.values)
        ))
    return _deflator_report(space, G, steps, "N^(a)")


# ---------------------------------------------------------------------------
# measure changes in F
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureChangeReport:
    increments: AdaptedProcess      # Y, with Y_0 = 0
    density_process: AdaptedProcess  # D = E(Y)
    terminal: MeasureDensity
    equals_base: bool
    martingale_verified: bool
    one_plus_jumps_positive: bool


def _measure_change(space, azema, steps, name):
    F = azema.filtration
    Y = _from_steps(F, None, steps, name)
    positive = all(1 + d > 0 for step in steps for d in step)
    D = stochastic_exponential(Y)
    if not positive:
        raise InvariantBreach(f"1 + d{name} is not strictly positive")
    terminal = MeasureDensity(space, D.at(F.horizon), F)
    return MeasureChangeReport(
        Y, D, terminal, all(d == 0 for step in steps for d in step),
        bool(is_martingale(space, F, Y)), positive,
    )


def measure_change_before(space: SampleSpace, azema: AzemaPair) -> MeasureChangeReport:
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for n in range(1, azema.horizon + 1):
        dead = tuple(ONE if z == 0 else ZERO for z in Zt.at(n))
        p_dead = _prev_ce(space, azema, dead, n)
        zp = Z.at(n - 1)
        steps.append(tuple(
            (Zt.at(n)[i] * p_dead[i] if zp[i] > 0 else ZERO) - zp[i] * dead[i]
            for i in range(len(zp))
        ))
    return _measure_change(space, azema, steps, "Y")


def measure_change_after(space: SampleSpace, azema: AzemaPair) -> MeasureChangeReport:
    Z, Zt = azema.Z, azema.Ztilde
    steps = []
    for n in range(1, azema.horizon + 1):
        full = tuple(ONE if z == 1 else ZERO for z in Zt.at(n))
        p_full = _prev_ce(space, azema, full, n)
        zp = Z.at(n - 1)
        steps.append(tuple(
            ((1 - Zt.at(n)[i]) * p_full[i] if zp[i] < 1 else ZERO) - (1 - zp[i]) * full[i]
            for i in range(len(zp))
        ))
    return _measure_change(space, azema, steps, "Y^(a)")


# ---------------------------------------------------------------------------
# per-period densities (G-measurable) and the Q^(e) pair (F-measurable)
# ---------------------------------------------------------------------------


def per_period_factors_before(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> tuple:
    """``factors[n - 1]`` is ``q_n`` per outcome."""
    Z, Zt = azema.Z, azema.Ztilde
    out = []
    for n in range(1, azema.horizon + 1):
        p_alive = _prev_ce(space, azema, tuple(ONE if z > 0 else ZERO for z in Zt.at(n)), n)
        out.append(tuple(
            (Z.at(n - 1)[i] / Zt.at(n)[i]) / p_alive[i] if n <= t else ONE
            for i, t in enumerate(tau.values)
        ))
    return tuple(out)


def per_period_factors_after(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> tuple:
    _require_honest(azema, tau)
    Z, Zt = azema.Z, azema.Ztilde
    out = []
    for n in range(1, azema.horizon + 1):
        p_below = _prev_ce(space, azema, tuple(ONE if z < 1 else ZERO for z in Zt.at(n)), n)
        out.append(tuple(
            ((1 - Z.at(n - 1)[i]) / (1 - Zt.at(n)[i])) / p_below[i] if n > t else ONE
            for i, t in enumerate(tau.values)
        ))
    return tuple(out)


def _product(space, factors, filtration):
    terminal = [ONE] * space.size
    for row in factors:
        terminal = [a * b for a, b in zip(terminal, row)]
    return MeasureDensity(space, tuple(terminal), filtration)


def per_period_density_before(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> MeasureDensity:
    G = progressive_enlargement(azema.filtration, tau)
    return _product(space, per_period_factors_before(space, azema, tau), G)


def per_period_density_after(space: SampleSpace, azema: AzemaPair, tau: RandomTime) -> MeasureDensity:
    G = progressive_enlargement(azema.filtration, tau)
    return _product(space, per_period_factors_after(space, azema, tau), G)


def qe_factors(space: SampleSpace, azema: AzemaPair) -> tuple:
    """One-step factors of the two F-measurable measures, as ``(before, after)``."""
    Z, Zt = azema.Z, azema.Ztilde
    before, after = [], []
    for n in range(1, azema.horizon + 1):
        zp, zt = Z.at(n - 1), Zt.at(n)
        gap0 = tuple(ONE if zt[i] == 0 < zp[i] else ZERO for i in range(len(zp)))
        gap1 = tuple(ONE if zt[i] == 1 > zp[i] else ZERO for i in range(len(zp)))
        norm0 = _prev_ce(space, azema, gap0, n)
        norm1 = _prev_ce(space, azema, gap1, n)
        row0, row1 = [], []
        for i in range(len(zp)):
            num0 = (zt[i] / zp[i] if zp[i] > 0 else ZERO) + gap0[i] + (ONE if zp[i] == 0 else ZERO)
            num1 = ((1 - zt[i]) / (1 - zp[i]) if zp[i] < 1 else ZERO) + gap1[i] + (ONE if zp[i] == 1 else ZERO)
            row0.append(num0 / (1 + norm0[i]))
            row1.append(num1 / (1 + norm1[i]))
        before.append(tuple(row0))
        after.append(tuple(row1))
    return tuple(before), tuple(after)


def qe_measures(space: SampleSpace, azema: AzemaPair):
    before, after = qe_factors(space, azema)
    F = azema.filtration
    return _product(space, before, F), _product(space, after, F)


# ---------------------------------------------------------------------------
# truncated processes and orthogonality
# ---------------------------------------------------------------------------


def truncate_before(X: AdaptedProcess, azema: AzemaPair) -> AdaptedProcess:
    """Increments of ``X`` switched off where ``Ztilde_n = 0``."""
    steps = [tuple(d if z > 0 else ZERO for d, z in zip(X.increment(n), azema.Ztilde.at(n)))
             for n in range(1, X.horizon + 1)]
    return _from_steps(X.filtration, X.at(0), steps, f"{X.name or 'X'}^(e)")


def truncate_after(X: AdaptedProcess, azema: AzemaPair) -> AdaptedProcess:
    """Increments of ``X`` switched off where ``Ztilde_n = 1``."""
    steps = [tuple(d if z < 1 else ZERO for d, z in zip(X.increment(n), azema.Ztilde.at(n)))
             for n in range(1, X.horizon + 1)]
    return _from_steps(X.filtration, X.at(0), steps, f"~{X.name or 'X'}^(e)")


@dataclass(frozen=True)
class OrthogonalityCheck:
    holds: bool
    per_time: tuple               # per_time[n - 1] for n = 1..N
    witness: tuple | None = None  # (n, atom names, conditional value)

    def __bool__(self):
        return self.holds


def _orthogonality(space, F, X, weights_per_time):
    per_time = []
    witness = None
    for n in range(1, X.horizon + 1):
        ce = conditional_expectation(space, F, _mul(X.increment(n), weights_per_time(n)), n - 1)
        ok = True
        for atom in F.atoms(n - 1):
            if ce[atom[0]] != 0:
                ok = False
                if witness is None:
                    witness = (n, F.names(atom), ce[atom[0]])
        per_time.append(ok)
    return OrthogonalityCheck(all(per_time), tuple(per_time), witness)


def orthogonality_check(space: SampleSpace, X: AdaptedProcess, azema: AzemaPair, side: str = "before") -> OrthogonalityCheck:
    """``E[dX_n 1{Ztilde_n = 0} | F_{n-1}] = 0`` (before) or with ``1{Ztilde_n = 1}`` (after)."""
    target = {"before": ZERO, "after": ONE}[side]
    Zt = azema.Ztilde
    return _orthogonality(space, azema.filtration, X,
                          lambda n: tuple(ONE if z == target else ZERO for z in Zt.at(n)))


def pairwise_orthogonality(space: SampleSpace, X: AdaptedProcess, Y: AdaptedProcess) -> OrthogonalityCheck:
    """``E[dX_n dY_n | F_{n-1}] = 0`` for every n, with F the filtration of ``X``."""
    return _orthogonality(space, X.filtration, X, Y.increment)


# ---------------------------------------------------------------------------
# the three-way characterisations for a fixed martingale S
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MainTheoremReport:
    q_martingale: bool           # S is an F-martingale under the measure change
    orthogonal: bool             # E[dS dY | F] = 0 (equivalently against D)
    deflated_g_martingale: bool  # E(N) times the stopped / post-time S is a G-martingale
    indicator_orthogonal: bool   # the weaker indicator condition
    per_period_g_martingale: bool  # stopped / post-time S is a G-martingale under prod q_n

    @property
    def consistent(self) -> bool:
        return self.q_martingale == self.orthogonal == self.deflated_g_martingale


def main_theorem_before(space: SampleSpace, azema: AzemaPair, tau: RandomTime, S: AdaptedProcess) -> MainTheoremReport:
    from .filtered_space import apply_density

    F = azema.filtration
    _require_martingale(space, S, F)
    G = progressive_enlargement(F, tau)
    mc = measure_change_before(space, azema)
    Q = apply_density(space, mc.terminal)
    defl = deflator_before(space, azema, tau)
    stopped = stop_at(S.under(F), tau, G)
    qpp = apply_density(space, per_period_density_before(space, azema, tau))
    return MainTheoremReport(
        bool(is_martingale(Q, F, S)),
        bool(pairwise_orthogonality(space, S.under(F), mc.increments)),
        bool(is_martingale(space, G, defl.exponential * stopped)),
        bool(orthogonality_check(space, S.under(F), azema, "before")),
        bool(is_martingale(qpp, G, stopped)),
    )


def main_theorem_after(space: SampleSpace, azema: AzemaPair, tau: RandomTime, S: AdaptedProcess) -> MainTheoremReport:
    from .filtered_space import apply_density

    F = azema.filtration
    _require_honest(azema, tau)
    _require_martingale(space, S, F)
    G = progressive_enlargement(F, tau)
    mc = measure_change_after(space, azema)
    Q = apply_density(space, mc.terminal)
    defl = deflator_after(space, azema, tau)
    post = after_part(S.under(F), tau, G)
    qpp = apply_density(space, per_period_density_after(space, azema, tau))
    return MainTheoremReport(
        bool(is_martingale(Q, F, S)),
        bool(pairwise_orthogonality(space, S.under(F), mc.increments)),
        bool(is_martingale(space, G, defl.exponential * post)),
        bool(orthogonality_check(space, S.under(F), azema, "after")),
        bool(is_martingale(qpp, G, post)),
    )


__all__ = [name for name in dir() if not name.startswith("_") and name not in {"annotations", "dataclass", "Fraction"}]
