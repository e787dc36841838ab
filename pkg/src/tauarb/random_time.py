"""Random times on a finite filtered space: Azéma supermartingales, the
progressive enlargement, hitting times of the levels 0 and 1, honesty, and
stopping / post-time truncation of processes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvariantBreach, ModelError, NotAdaptedError
from .filtered_space import (
    ONE,
    ZERO,
    AdaptedProcess,
    Filtration,
    SampleSpace,
    conditional_expectation,
    is_martingale,
)

INF = math.inf


@dataclass(frozen=True)
class RandomTime:
    """Integer time per outcome, in ``0..horizon``.

    With ``beyond_horizon=True`` the value ``horizon + 1`` is also accepted and
    stands for "after the horizon" (it behaves as ``tau > N`` in every formula).
    """

    outcomes: tuple
    values: tuple
    horizon: int
    beyond_horizon: bool = False
    name: str = "tau"

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != len(self.outcomes):
            raise ModelError(f"{len(self.outcomes)} outcomes but {len(self.values)} values", path=self.name)
        top = self.horizon + 1 if self.beyond_horizon else self.horizon
        for o, v in zip(self.outcomes, self.values):
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v <= top:
                raise ModelError(f"value {v!r} at {o!r} outside 0..{top}", path=self.name)

    @classmethod
    def from_mapping(cls, space: SampleSpace, mapping: dict, name: str = "tau", beyond_horizon=False):
        missing = [o for o in space.outcomes if o not in mapping]
        if missing:
            raise ModelError(f"no value for outcomes {missing!r}", path=name)
        extra = [o for o in mapping if o not in space.outcomes]
        if extra:
            raise ModelError(f"unknown outcomes {extra!r}", path=name)
        return cls(space.outcomes, tuple(mapping[o] for o in space.outcomes), space.horizon,
                   beyond_horizon, name)

    @classmethod
    def constant(cls, space: SampleSpace, value: int, name: str = "tau"):
        return cls(space.outcomes, (value,) * space.size, space.horizon, name=name)

    def indicator(self, predicate) -> tuple:
        return tuple(ONE if predicate(t) else ZERO for t in self.values)


@dataclass(frozen=True)
class ExtendedTime:
    """Per-outcome time in ``0..N`` or ``INF`` (empty infimum within the horizon)."""

    outcomes: tuple
    values: tuple

    def __getitem__(self, i):
        return self.values[i]

    def shifted(self, k: int, horizon: int) -> "ExtendedTime":
        """``self + k`` with results past the horizon mapped to ``INF``."""
        return ExtendedTime(self.outcomes, tuple(
            INF if v == INF or v + k > horizon else v + k for v in self.values))

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.values))


def format_time(v) -> str:
    return "+inf" if v == INF else str(v)


@dataclass(frozen=True)
class AzemaPair:
    Z: AdaptedProcess
    Ztilde: AdaptedProcess

    def __post_init__(self):
        for n in range(self.Z.horizon + 1):
            for z, zt in zip(self.Z.at(n), self.Ztilde.at(n)):
                if not 0 <= z <= zt <= 1:
                    raise InvariantBreach(f"0 <= Z <= Ztilde <= 1 fails at time {n}")

    @property
    def horizon(self) -> int:
        return self.Z.horizon

    @property
    def filtration(self) -> Filtration:
        return self.Z.filtration


def _check(space: SampleSpace, F: Filtration, tau: RandomTime):
    if not (space.outcomes == F.outcomes == tau.outcomes):
        raise ModelError("space, filtration and random time disagree on outcomes")
    if F.horizon != space.horizon or tau.horizon != space.horizon:
        raise ModelError("horizon mismatch between space, filtration and random time")


def azema_supermartingales(space: SampleSpace, F: Filtration, tau: RandomTime) -> AzemaPair:
    """``Z_n = P[tau > n | F_n]`` and ``Ztilde_n = P[tau >= n | F_n]``."""
    _check(space, F, tau)
    N = space.horizon
    Z = tuple(conditional_expectation(space, F, tau.indicator(lambda t, n=n: t > n), n) for n in range(N + 1))
    Zt = tuple(conditional_expectation(space, F, tau.indicator(lambda t, n=n: t >= n), n) for n in range(N + 1))
    return AzemaPair(AdaptedProcess(F, Z, "Z"), AdaptedProcess(F, Zt, "Ztilde"))


def m_A_decomposition(space: SampleSpace, F: Filtration, tau: RandomTime):
    """``Z = m - A`` with ``A_n = sum_{k<=n} P[tau = k | F_k]``; ``m`` is checked to be a martingale."""
    azema = azema_supermartingales(space, F, tau)
    N = space.horizon
    rows = []
    running = (ZERO,) * space.size
    for k in range(N + 1):
        jump = conditional_expectation(space, F, tau.indicator(lambda t, k=k: t == k), k)
        running = tuple(a + b for a, b in zip(running, jump))
        rows.append(running)
    A = AdaptedProcess(F, tuple(rows), "A")
    m = (azema.Z + A).renamed("m")
    check = is_martingale(space, F, m)
    if not check:
        raise InvariantBreach(f"m fails the martingale test at time {check.time}")
    return m, A


def progressive_enlargement(F: Filtration, tau: RandomTime) -> Filtration:
    """Smallest filtration containing ``F`` that makes ``tau`` a stopping time.

    The atom of level n containing an outcome is its F-atom intersected with
    ``{tau = k}`` when ``k = tau(outcome) <= n`` and with ``{tau > n}`` otherwise.
    """
    if F.outcomes != tau.outcomes:
        raise ModelError("filtration and random time disagree on outcomes")
    levels = []
    for n in range(F.horizon + 1):
        atoms = []
        for atom in F.atoms(n):
            groups: dict = {}
            for i in atom:
                t = tau.values[i]
                groups.setdefault(t if t <= n else "alive", []).append(i)
            atoms.extend(groups.values())
        levels.append(atoms)
    return Filtration(F.outcomes, tuple(levels))


def is_stopping_time(F: Filtration, tau: RandomTime) -> bool:
    return all(
        F.is_measurable(n, tau.indicator(lambda t, n=n: t == n)) for n in range(F.horizon + 1)
    )


def is_predictable_time(F: Filtration, time: ExtendedTime) -> bool:
    """``{R = n}`` is a union of atoms of level ``n - 1`` for every finite n (level -1 := level 0)."""
    for n in range(F.horizon + 1):
        hit = tuple(v == n for v in time.values)
        if not F.is_measurable(max(n - 1, 0), hit):
            return False
    return True


def _first_hit(outcomes, horizon, start, predicate) -> ExtendedTime:
    values = []
    for i in range(len(outcomes)):
        values.append(next((n for n in range(start, horizon + 1) if predicate(n, i)), INF))
    return ExtendedTime(tuple(outcomes), tuple(values))


def zero_hitting_times(azema: AzemaPair):
    """``R1 = inf{n>=0: Z_n=0}``, ``R2 = inf{n>=1: Z_{n-1}=0}``, ``R3 = inf{n>=0: Ztilde_n=0}``."""
    Z, Zt, N = azema.Z.values, azema.Ztilde.values, azema.horizon
    outcomes = azema.filtration.outcomes
    R1 = _first_hit(outcomes, N, 0, lambda n, i: Z[n][i] == 0)
    R2 = _first_hit(outcomes, N, 1, lambda n, i: Z[n - 1][i] == 0)
    R3 = _first_hit(outcomes, N, 0, lambda n, i: Zt[n][i] == 0)
    return R1, R2, R3


def one_hitting_times(azema: AzemaPair):
    """``s1 = inf{n>=1: Z_n<1}``, ``s2 = inf{n>=1: Z_{n-1}<1}``, ``s3 = inf{n>=1: Ztilde_n<1}``."""
    Z, Zt, N = azema.Z.values, azema.Ztilde.values, azema.horizon
    outcomes = azema.filtration.outcomes
    s1 = _first_hit(outcomes, N, 1, lambda n, i: Z[n][i] < 1)
    s2 = _first_hit(outcomes, N, 1, lambda n, i: Z[n - 1][i] < 1)
    s3 = _first_hit(outcomes, N, 1, lambda n, i: Zt[n][i] < 1)
    return s1, s2, s3


@dataclass(frozen=True)
class HonestyCheck:
    holds: bool
    witnesses: tuple = ()          # witnesses[n - 1] = tau_n per outcome, n = 1..N
    counterexample: tuple | None = None   # (n, atom names, values seen)

    def __bool__(self):
        return self.holds


def is_honest(F: Filtration, tau: RandomTime, strict: bool = True) -> HonestyCheck:
    """Honesty: on ``{tau < n}`` the time coincides with a variable known at time n.

    ``strict=True`` (default) asks the variable on ``{tau < n}`` to be known one
    step earlier, i.e. constant on the atoms of level ``n - 1``; this is the form
    under which the after-time conditional expectation identities hold.
    ``strict=False`` uses atoms of level ``n``.  Witness values on atoms that do
    not meet ``{tau < n}`` are set to 0.
    """
    if F.outcomes != tau.outcomes:
        raise ModelError("filtration and random time disagree on outcomes")
    witnesses = []
    for n in range(1, F.horizon + 1):
        level = n - 1 if strict else n
        tau_n = [0] * len(F.outcomes)
        for atom in F.atoms(level):
            seen = sorted({tau.values[i] for i in atom if tau.values[i] < n})
            if len(seen) > 1:
                return HonestyCheck(False, tuple(witnesses), (n, F.names(atom), tuple(seen)))
            for i in atom:
                tau_n[i] = seen[0] if seen else 0
        witnesses.append(tuple(tau_n))
    return HonestyCheck(True, tuple(witnesses))


def _stopped_rows(process: AdaptedProcess, times) -> tuple:
    N = process.horizon
    rows = []
    for n in range(N + 1):
        rows.append(tuple(
            process.values[n if t == INF else min(n, t)][i] for i, t in enumerate(times)
        ))
    return tuple(rows)


def stop_at(process: AdaptedProcess, time, filtration: Filtration | None = None) -> AdaptedProcess:
    """``X^T_n = X_{n ^ T}`` per outcome, declared (and validated) against ``filtration``."""
    f = filtration or process.filtration
    try:
        return AdaptedProcess(f, _stopped_rows(process, time.values),
                              f"{process.name or 'X'}^{getattr(time, 'name', 'T')}")
    except NotAdaptedError as exc:
        raise NotAdaptedError(f"stopped process is not adapted to the given filtration ({exc})") from None


def after_part(process: AdaptedProcess, tau: RandomTime, filtration: Filtration | None = None) -> AdaptedProcess:
    """``X - X^tau``: only the increments strictly after ``tau``."""
    f = filtration or process.filtration
    stopped = _stopped_rows(process, tau.values)
    rows = tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(process.values, stopped))
    try:
        return AdaptedProcess(f, rows, f"{process.name or 'X'}-{process.name or 'X'}^{tau.name}")
    except NotAdaptedError as exc:
        raise NotAdaptedError(f"post-time process is not adapted to the given filtration ({exc})") from None


def dual_optional_increments(azema: AzemaPair) -> tuple:
    """``Ztilde_n - Z_n = P[tau = n | F_n]`` for ``n = 0..N``."""
    return tuple(
        tuple(b - a for a, b in zip(azema.Z.at(n), azema.Ztilde.at(n))) for n in range(azema.horizon + 1)
    )
