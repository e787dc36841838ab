"""No-arbitrage verdicts, explicit arbitrages, equivalent martingale measures,
equivalence validators for the before/after conditions, and seeded random
instances for fuzzing.

Prices are scalar.  On a finite space a one-period market admits no arbitrage
exactly when, on every atom, the increment is either zero or takes both signs;
the multi-period statement reduces to that per-period test.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ArbitrageExists, InstanceTooLarge, InvariantBreach, ModelError
from .filtered_space import (
    ONE,
    ZERO,
    AdaptedProcess,
    Filtration,
    MeasureDensity,
    SampleSpace,
    TradingStrategy,
    apply_density,
    conditional_expectation,
    gains,
    is_martingale,
)
from .lp import max_min_weights
from .random_time import (
    AzemaPair,
    RandomTime,
    after_part,
    azema_supermartingales,
    is_honest,
    is_predictable_time,
    one_hitting_times,
    progressive_enlargement,
    stop_at,
    zero_hitting_times,
)
from .transfer import measure_change_after, measure_change_before, truncate_after, truncate_before


@dataclass(frozen=True)
class NAVerdict:
    holds: bool
    witness: tuple | None = None          # (n, atom names, sign)
    strategy: TradingStrategy | None = None
    emm: MeasureDensity | None = None
    violations: tuple = ()                # every (n, atom names, sign) found

    def __bool__(self):
        return self.holds


def _prepared(space: SampleSpace, filtration: Filtration, X: AdaptedProcess) -> AdaptedProcess:
    if space.outcomes != filtration.outcomes:
        raise ModelError("space and filtration disagree on outcomes")
    return X.under(filtration)


def _sign_of(values) -> int:
    """+1 / -1 when the values are single-signed and not all zero, else 0."""
    pos = any(v > 0 for v in values)
    neg = any(v < 0 for v in values)
    if pos and not neg:
        return 1
    if neg and not pos:
        return -1
    return 0


def _slots(filtration: Filtration, X: AdaptedProcess):
    """Yield ``(n, atom, child atoms, child increments)`` for every predictable slot."""
    for n in range(1, filtration.horizon + 1):
        step = X.increment(n)
        for atom in filtration.atoms(n - 1):
            children = filtration.children(n - 1, atom)
            yield n, atom, children, [step[c[0]] for c in children]


def _arbitrage_verdict(filtration, X, found) -> NAVerdict:
    """``found`` lists ``(n, atom, sign)``; the strategy stacks one short/long position per entry."""
    strategy = TradingStrategy.on_atoms(filtration, [(n, atom, sign) for n, atom, sign in found])
    payoff = gains(strategy, X)
    if any(g < 0 for g in payoff) or not any(g > 0 for g in payoff):
        raise InvariantBreach("extracted strategy is not an arbitrage")
    named = tuple((n, filtration.names(atom), sign) for n, atom, sign in found)
    return NAVerdict(False, named[0], strategy, None, named)


def _conditional_probs(space, children):
    masses = [space.prob(c) for c in children]
    total = sum(masses, ZERO)
    return [m / total for m in masses]


def _glue(space: SampleSpace, filtration: Filtration, factors) -> MeasureDensity:
    terminal = [ONE] * space.size
    for child, f in factors:
        for i in child:
            terminal[i] *= f
    return MeasureDensity(space, tuple(terminal), filtration)


def construct_emm(space: SampleSpace, filtration: Filtration, X: AdaptedProcess) -> MeasureDensity:
    """Equivalent martingale measure in closed form, one atom at a time.

    On an atom with conditional child probabilities ``p`` and increments ``x``,
    positive children are reweighted by ``s * E-`` and negative ones by
    ``s * E+`` (``E+-`` the one-sided conditional means), zero children keep
    their weight, and ``s`` restores total mass.  If ``X`` is already a
    martingale every factor is 1.
    """
    X = _prepared(space, filtration, X)
    factors = []
    for n, atom, children, xs in _slots(filtration, X):
        if all(x == 0 for x in xs):
            continue
        if _sign_of(xs):
            raise ArbitrageExists(f"increment at time {n} is single-signed on {sorted(filtration.names(atom))}")
        probs = _conditional_probs(space, children)
        e_pos = sum((p * x for p, x in zip(probs, xs) if x > 0), ZERO)
        e_neg = sum((-p * x for p, x in zip(probs, xs) if x < 0), ZERO)
        p_pos = sum((p for p, x in zip(probs, xs) if x > 0), ZERO)
        p_neg = sum((p for p, x in zip(probs, xs) if x < 0), ZERO)
        p_zero = 1 - p_pos - p_neg
        s = (1 - p_zero) / (e_neg * p_pos + e_pos * p_neg)
        for child, x in zip(children, xs):
            factors.append((child, s * e_neg if x > 0 else s * e_pos if x < 0 else ONE))
    density = _glue(space, filtration, factors)
    if not is_martingale(apply_density(space, density), filtration, X):
        raise InvariantBreach("constructed measure does not make X a martingale")
    return density


def na_check(space: SampleSpace, filtration: Filtration, X: AdaptedProcess) -> NAVerdict:
    """Per-atom sign test; returns an arbitrage strategy or an EMM."""
    X = _prepared(space, filtration, X)
    found = []
    for n, atom, _, xs in _slots(filtration, X):
        sign = _sign_of(xs)
        if sign:
            # a single-signed increment: go long when it can only rise, short when it can only fall
            found.append((n, atom, sign))
    if found:
        return _arbitrage_verdict(filtration, X, found)
    return NAVerdict(True, emm=construct_emm(space, filtration, X))


def na_check_lp(space: SampleSpace, filtration: Filtration, X: AdaptedProcess) -> NAVerdict:
    """Decide no-arbitrage through exact max-min-weight programs, one per atom.

    Feasible with a positive optimum on every atom means a strictly positive
    martingale measure exists; the optimal weights are glued into one.
    """
    X = _prepared(space, filtration, X)
    found, factors = [], []
    for n, atom, children, xs in _slots(filtration, X):
        probs = _conditional_probs(space, children)
        if all(x == 0 for x in xs):
            continue
        result = max_min_weights(probs, xs)
        if result.status != "optimal" or result.value <= 0:
            found.append((n, atom, 1 if max(xs) > 0 else -1))
            continue
        for child, w, p in zip(children, result.x, probs):
            factors.append((child, w / p))
    if found:
        return _arbitrage_verdict(filtration, X, found)
    density = _glue(space, filtration, factors)
    if not is_martingale(apply_density(space, density), filtration, X):
        raise InvariantBreach("glued program weights do not give a martingale measure")
    return NAVerdict(True, emm=density)


BRUTE_FORCE_LIMIT = 3 ** 12


def brute_force_na(space: SampleSpace, filtration: Filtration, X: AdaptedProcess, grid=(-1, 0, 1)) -> NAVerdict:
    """Exhaustive search over strategies taking values in ``grid`` on every atom.

    Slots whose increment vanishes identically are skipped.  For scalar
    increments the grid {-1, 0, 1} is already complete: a single-signed atom is
    won by trading that atom alone.  No measure is produced on success.
    """
    X = _prepared(space, filtration, X)
    grid = [Fraction(g) for g in grid]
    slots = [(n, atom) for n, atom, _, xs in _slots(filtration, X) if any(x != 0 for x in xs)]
    if not slots:
        return NAVerdict(True)
    combos = len(grid) ** len(slots)
    if combos > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"{combos} grid strategies exceed the limit of {BRUTE_FORCE_LIMIT}")

    rows = []
    for n, atom in slots:
        step = X.increment(n)
        members = set(atom)
        rows.append([step[i] if i in members else ZERO for i in range(space.size)])
    denom = math.lcm(*(v.denominator for row in rows for v in row), *(g.denominator for g in grid))
    ints = [[int(v * denom) for v in row] for row in rows]
    levels = [int(g * denom) for g in grid]
    bound = max(map(abs, levels)) * sum(max(map(abs, row)) for row in ints)
    dtype = np.int64 if bound < 2 ** 62 else object
    payoff = np.array(ints, dtype=dtype)
    levels = np.array(levels, dtype=dtype)
    nonzero = np.array([g != 0 for g in grid], dtype=np.int64)
    # keep the winner trading on the most atoms; ties go to the first in enumeration order
    best, best_support = None, -1
    for chunk in _chunks(itertools.product(range(len(grid)), repeat=len(slots)), 8192):
        idx = np.array(chunk, dtype=np.int64)
        total = levels[idx].dot(payoff)
        ok = np.all(total >= 0, axis=1) & np.any(total > 0, axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            support = nonzero[idx[hits]].sum(axis=1)
            top = int(np.argmax(support))
            if support[top] > best_support:
                best, best_support = chunk[int(hits[top])], int(support[top])
    if best is None:
        return NAVerdict(True)
    found = [(n, atom, grid[k]) for (n, atom), k in zip(slots, best) if grid[k] != 0]
    strategy = TradingStrategy.on_atoms(filtration, found)
    named = tuple((n, filtration.names(atom), amount) for n, atom, amount in found)
    return NAVerdict(False, named[0], strategy, None, named)


def _chunks(iterable, size):
    chunk = []
    for item in iterable:
        chunk.append(item)
        if len(chunk) == size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


# ---------------------------------------------------------------------------
# equivalence validators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    side: str
    b: bool   # level sets of Ztilde_n and Z_{n-1} coincide
    c: bool   # hitting-time identity
    d: bool   # the Ztilde hitting time is predictable
    e: bool   # the measure change is trivial
    details: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.b == self.c == self.d == self.e

    @property
    def all_true(self) -> bool:
        return self.b and self.c and self.d and self.e

    def as_dict(self) -> dict:
        return {"side": self.side, "b": self.b, "c": self.c, "d": self.d, "e": self.e,
                "consistent": self.consistent, **self.details}


def _level_sets_agree(azema: AzemaPair, level) -> tuple:
    Z, Zt = azema.Z, azema.Ztilde
    for n in range(1, azema.horizon + 1):
        for i, (zt, zp) in enumerate(zip(Zt.at(n), Z.at(n - 1))):
            if (zt == level) != (zp == level):
                return False, {"time": n, "outcome": azema.filtration.outcomes[i]}
    return True, None


def _breach(report: EquivalenceReport, strict: bool) -> EquivalenceReport:
    if strict and not report.consistent:
        raise InvariantBreach(f"{report.side} conditions disagree: {report.as_dict()}")
    return report


def validate_before_theorem(space: SampleSpace, F: Filtration, tau: RandomTime, strict: bool = False) -> EquivalenceReport:
    azema = azema_supermartingales(space, F, tau)
    b, where = _level_sets_agree(azema, 0)
    R1, R2, R3 = zero_hitting_times(azema)
    c = R1.shifted(1, azema.horizon).values == R2.values == R3.values
    d = is_predictable_time(F, R3)
    e = measure_change_before(space, azema).equals_base
    report = EquivalenceReport("before", b, c, d, e, {"first_mismatch": where})
    return _breach(report, strict)


def validate_after_theorem(space: SampleSpace, F: Filtration, tau: RandomTime, strict: bool = False) -> EquivalenceReport:
    """After-time conditions for an honest ``tau``.

    The hitting-time clause compares ``s2`` with ``s3``; whether ``s1 + 1``
    also matches is reported separately as ``s1_shift_matches`` since it fails
    as soon as ``Z_0 < 1`` regardless of the other conditions.
    """
    check = is_honest(F, tau)
    if not check:
        from .errors import NotHonestError
        n, atom, seen = check.counterexample
        raise NotHonestError(f"tau is not honest: values {list(seen)} on {sorted(atom)} before time {n}")
    azema = azema_supermartingales(space, F, tau)
    b, where = _level_sets_agree(azema, 1)
    s1, s2, s3 = one_hitting_times(azema)
    c = s2.values == s3.values
    d = is_predictable_time(F, s3)
    e = measure_change_after(space, azema).equals_base
    report = EquivalenceReport("after", b, c, d, e, {
        "first_mismatch": where,
        "s1_shift_matches": s1.shifted(1, azema.horizon).values == s2.values,
    })
    return _breach(report, strict)


# ---------------------------------------------------------------------------
# paired verdicts: enlarged filtration versus truncated process in F
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReversePair:
    side: str
    in_g: NAVerdict
    in_f: NAVerdict

    @property
    def match(self) -> bool:
        return self.in_g.holds == self.in_f.holds


def validate_reverse_before(space, F, tau, X, strict: bool = False) -> ReversePair:
    """Stopped ``X`` under G versus ``X`` with increments dropped where ``Ztilde = 0``, under F."""
    X = X.under(F)
    azema = azema_supermartingales(space, F, tau)
    G = progressive_enlargement(F, tau)
    pair = ReversePair("before", na_check(space, G, stop_at(X, tau, G)),
                       na_check(space, F, truncate_before(X, azema)))
    if strict and not pair.match:
        raise InvariantBreach("before-time paired verdicts disagree")
    return pair


def validate_reverse_after(space, F, tau, X, strict: bool = False) -> ReversePair:
    """Post-time ``X`` under G versus ``X`` with increments dropped where ``Ztilde = 1``, under F."""
    check = is_honest(F, tau)
    if not check:
        from .errors import NotHonestError
        raise NotHonestError("tau is not honest")
    X = X.under(F)
    azema = azema_supermartingales(space, F, tau)
    G = progressive_enlargement(F, tau)
    pair = ReversePair("after", na_check(space, G, after_part(X, tau, G)),
                       na_check(space, F, truncate_after(X, azema)))
    if strict and not pair.match:
        raise InvariantBreach("after-time paired verdicts disagree")
    return pair


# ---------------------------------------------------------------------------
# negative direction: a martingale whose stopped / post-time part is exploitable
# ---------------------------------------------------------------------------


def _compensated(space, F, jumps, name) -> AdaptedProcess:
    """``M_n = sum_{k<=n} (J_k - E[J_k | F_{k-1}])`` for an adapted sequence ``J``."""
    rows = [(ZERO,) * space.size]
    for k in range(1, F.horizon + 1):
        drift = conditional_expectation(space, F, jumps[k], k - 1)
        rows.append(tuple(r + j - c for r, j, c in zip(rows[-1], jumps[k], drift)))
    return AdaptedProcess(F, tuple(rows), name)


def before_counter_martingale(space: SampleSpace, F: Filtration, tau: RandomTime) -> AdaptedProcess:
    """Compensated ``1{R3 > n}``; its stopped increments are non-negative and predictable in G."""
    azema = azema_supermartingales(space, F, tau)
    _, _, R3 = zero_hitting_times(azema)
    alive = [tuple(ONE if r > n else ZERO for r in R3.values) for n in range(F.horizon + 1)]
    jumps = [None] + [tuple(b - a for a, b in zip(alive[k - 1], alive[k])) for k in range(1, F.horizon + 1)]
    return _compensated(space, F, jumps, "V")


def after_counter_martingale(space: SampleSpace, F: Filtration, tau: RandomTime) -> AdaptedProcess:
    """Compensated count of the times with ``Ztilde_k = 1``; non-increasing after ``tau``."""
    azema = azema_supermartingales(space, F, tau)
    jumps = [None] + [tuple(ONE if z == 1 else ZERO for z in azema.Ztilde.at(k)) for k in range(1, F.horizon + 1)]
    return _compensated(space, F, jumps, "M")


@dataclass(frozen=True)
class CounterExample:
    martingale: AdaptedProcess
    traded: AdaptedProcess
    verdict: NAVerdict


def demonstrate_before_arbitrage(space: SampleSpace, F: Filtration, tau: RandomTime) -> CounterExample:
    M = before_counter_martingale(space, F, tau)
    if not is_martingale(space, F, M):
        raise InvariantBreach("compensated indicator is not a martingale")
    G = progressive_enlargement(F, tau)
    traded = stop_at(M, tau, G)
    verdict = na_check(space, G, traded)
    if verdict.holds:
        raise InvariantBreach("no arbitrage found on the stopped counter-martingale")
    return CounterExample(M, traded, verdict)


def demonstrate_after_arbitrage(space: SampleSpace, F: Filtration, tau: RandomTime) -> CounterExample:
    M = after_counter_martingale(space, F, tau)
    if not is_martingale(space, F, M):
        raise InvariantBreach("compensated indicator is not a martingale")
    G = progressive_enlargement(F, tau)
    traded = after_part(M, tau, G)
    verdict = na_check(space, G, traded)
    if verdict.holds:
        raise InvariantBreach("no arbitrage found after tau on the counter-martingale")
    return CounterExample(M, traded, verdict)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def _coarsen(rng: random.Random, atoms: list) -> list:
    groups = rng.randint(1, len(atoms))
    buckets: dict = {}
    for atom in atoms:
        buckets.setdefault(rng.randrange(groups), []).extend(atom)
    return [sorted(b) for b in buckets.values()]


def random_filtration(rng: random.Random, space: SampleSpace, horizon: int) -> Filtration:
    size = space.size
    if rng.random() < 0.7:
        top = [[i] for i in range(size)]
    else:
        top = _coarsen(rng, [[i] for i in range(size)])
    levels = [top]
    for _ in range(horizon):
        levels.append(_coarsen(rng, levels[-1]))
    levels.reverse()
    if rng.random() < 0.8:
        levels[0] = [list(range(size))]
        # keep refinement intact after forcing a trivial start
    return Filtration(space.outcomes, tuple(tuple(tuple(a) for a in level) for level in levels))


def random_instance(seed: int, max_outcomes: int = 8, max_horizon: int = 4, honest: bool = False):
    """Seeded ``(space, F, tau)``; with ``honest=True`` tau is the end of a random optional set."""
    if max_outcomes < 2 or max_horizon < 1:
        raise ValueError("need max_outcomes >= 2 and max_horizon >= 1")
    rng = random.Random(seed)
    size = rng.randint(2, max_outcomes)
    horizon = rng.randint(1, max_horizon)
    raw = [rng.randint(1, 9) for _ in range(size)]
    weights = tuple(Fraction(r, sum(raw)) for r in raw)
    space = SampleSpace(tuple(f"w{i + 1}" for i in range(size)), weights, horizon)
    F = random_filtration(rng, space, horizon)
    if honest:
        values = [0] * size
        for n in range(horizon + 1):
            for atom in F.atoms(n):
                if rng.random() < 0.5:
                    for i in atom:
                        values[i] = n
    else:
        values = [rng.randint(0, horizon) for _ in range(size)]
    return space, F, RandomTime(space.outcomes, tuple(values), horizon)


def random_martingale(space: SampleSpace, F: Filtration, seed: int, name: str = "X") -> AdaptedProcess:
    """Random terminal values, rolled back by conditional expectation."""
    rng = random.Random(seed)
    terminal = tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(space.size))
    return martingale_from_terminal(space, F, terminal, name)


def martingale_from_terminal(space: SampleSpace, F: Filtration, terminal, name: str = "X") -> AdaptedProcess:
    rows = tuple(conditional_expectation(space, F, terminal, n) for n in range(F.horizon + 1))
    return AdaptedProcess(F, rows, name)


def random_adapted(space: SampleSpace, F: Filtration, seed: int, name: str = "X") -> AdaptedProcess:
    """Random adapted process with small integer values, so flat or one-sided atoms are common."""
    rng = random.Random(seed)
    rows = []
    for n in range(F.horizon + 1):
        row = [ZERO] * space.size
        for atom in F.atoms(n):
            v = Fraction(rng.randint(-2, 2))
            for i in atom:
                row[i] = v
        rows.append(tuple(row))
    return AdaptedProcess(F, tuple(rows), name)


__all__ = [
    "NAVerdict", "na_check", "na_check_lp", "construct_emm", "brute_force_na", "BRUTE_FORCE_LIMIT",
    "EquivalenceReport", "validate_before_theorem", "validate_after_theorem",
    "ReversePair", "validate_reverse_before", "validate_reverse_after",
    "before_counter_martingale", "after_counter_martingale", "CounterExample",
    "demonstrate_before_arbitrage", "demonstrate_after_arbitrage",
    "random_instance", "random_filtration", "random_martingale", "martingale_from_terminal", "random_adapted",
]
