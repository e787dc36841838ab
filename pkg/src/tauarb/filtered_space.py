"""Finite filtered probability spaces with exact rational arithmetic.

Outcomes are kept in input order and every outcome-indexed quantity is a
tuple of :class:`~fractions.Fraction` aligned with ``outcomes``.  Filtration
levels are partitions of the outcome indices; atoms are tuples of indices in
ascending order and the atoms of one level are ordered by their first index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ModelError, NotAdaptedError, NotPredictableError

ZERO = Fraction(0)
ONE = Fraction(1)

RV = tuple  # tuple[Fraction, ...] aligned with the outcome order


def as_fraction(value) -> Fraction:
    """Exact conversion of ints, Fractions and strings ("2/3", "0.25", "-1")."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                return Fraction(text)
            return Fraction(Decimal(text))
        except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
            raise ValueError(f"not an exact rational: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a Fraction or a string")
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# sample space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSpace:
    outcomes: tuple
    weights: tuple
    horizon: int
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        weights = tuple(as_fraction(w) for w in self.weights)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "weights", weights)
        if not outcomes:
            raise ModelError("empty outcome set")
        if len(set(outcomes)) != len(outcomes):
            seen = set()
            dup = next(o for o in outcomes if o in seen or seen.add(o))
            raise ModelError(f"duplicate outcome {dup!r}")
        if len(weights) != len(outcomes):
            raise ModelError(f"{len(outcomes)} outcomes but {len(weights)} weights")
        for o, w in zip(outcomes, weights):
            if w <= 0:
                raise ModelError(f"non-positive weight {format_fraction(w)} for outcome {o!r}")
        total = sum(weights, ZERO)
        if total != 1:
            raise ModelError(f"weights sum to {format_fraction(total)}, not 1")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ModelError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        object.__setattr__(self, "_index", {o: i for i, o in enumerate(outcomes)})

    @property
    def size(self) -> int:
        return len(self.outcomes)

    def index(self, outcome) -> int:
        try:
            return self._index[outcome]
        except KeyError:
            raise ModelError(f"unknown outcome {outcome!r}") from None

    def prob(self, indices: Iterable[int]) -> Fraction:
        return sum((self.weights[i] for i in indices), ZERO)

    def expectation(self, rv: Sequence[Fraction]) -> Fraction:
        return sum((w * x for w, x in zip(self.weights, rv)), ZERO)


def build_space(outcomes, weights, horizon: int) -> SampleSpace:
    return SampleSpace(tuple(outcomes), tuple(weights), horizon)


# ---------------------------------------------------------------------------
# filtration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Filtration:
    """Refining sequence of partitions, one per time ``0..N``."""

    outcomes: tuple
    levels: tuple
    _lookup: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        size = len(self.outcomes)
        levels = []
        lookup = []
        for n, level in enumerate(self.levels):
            atoms = sorted((tuple(sorted(a)) for a in level), key=lambda a: a[0] if a else -1)
            where = [-1] * size
            for k, atom in enumerate(atoms):
                if not atom:
                    raise ModelError("empty atom", path=f"filtration[{n}]")
                for i in atom:
                    if not 0 <= i < size:
                        raise ModelError(f"atom index {i} out of range", path=f"filtration[{n}]")
                    if where[i] != -1:
                        raise ModelError(
                            f"outcome {self.outcomes[i]!r} appears in two atoms",
                            path=f"filtration[{n}]",
                        )
                    where[i] = k
            missing = [self.outcomes[i] for i in range(size) if where[i] == -1]
            if missing:
                raise ModelError(f"outcomes {missing!r} not covered", path=f"filtration[{n}]")
            levels.append(tuple(atoms))
            lookup.append(tuple(where))
        if len(levels) < 2:
            raise ModelError("a filtration needs at least times 0 and 1")
        for n in range(1, len(levels)):
            coarse = lookup[n - 1]
            for atom in levels[n]:
                parents = {coarse[i] for i in atom}
                if len(parents) > 1:
                    raise ModelError(
                        f"level {n} does not refine level {n - 1}: atom "
                        f"{[self.outcomes[i] for i in atom]!r} straddles atoms of level {n - 1}",
                        path=f"filtration[{n}]",
                    )
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "levels", tuple(levels))
        object.__setattr__(self, "_lookup", tuple(lookup))

    @property
    def horizon(self) -> int:
        return len(self.levels) - 1

    def atoms(self, n: int) -> tuple:
        return self.levels[n]

    def atom_number(self, n: int, i: int) -> int:
        return self._lookup[n][i]

    def atom_containing(self, n: int, i: int) -> tuple:
        return self.levels[n][self._lookup[n][i]]

    def names(self, atom: Iterable[int]) -> frozenset:
        return frozenset(self.outcomes[i] for i in atom)

    def children(self, n: int, atom: tuple) -> list:
        """Atoms of level ``n + 1`` contained in ``atom`` (an atom of level ``n``)."""
        seen = []
        for i in atom:
            child = self.atom_containing(n + 1, i)
            if child not in seen:
                seen.append(child)
        return seen

    def is_measurable(self, n: int, rv: Sequence) -> bool:
        return all(len({rv[i] for i in atom}) == 1 for atom in self.levels[n])

    def refines(self, other: "Filtration") -> bool:
        """True when every level of ``self`` is at least as fine as that of ``other``."""
        if self.outcomes != other.outcomes or self.horizon != other.horizon:
            return False
        return all(
            len({other._lookup[n][i] for i in atom}) == 1
            for n in range(self.horizon + 1)
            for atom in self.levels[n]
        )


def _check_outcomes(space: SampleSpace, filtration: Filtration):
    if space.outcomes != filtration.outcomes:
        raise ModelError("space and filtration have different outcome lists")


def build_filtration(space: SampleSpace, partitions) -> Filtration:
    """``partitions[n]`` is a list of atoms, each a list of outcome names."""
    if len(partitions) != space.horizon + 1:
        raise ModelError(
            f"need {space.horizon + 1} partitions (times 0..{space.horizon}), got {len(partitions)}"
        )
    levels = []
    for n, level in enumerate(partitions):
        atoms = []
        for k, atom in enumerate(level):
            try:
                atoms.append([space.index(o) for o in atom])
            except ModelError as exc:
                raise ModelError(str(exc), path=f"filtration[{n}][{k}]") from None
        levels.append(atoms)
    return Filtration(space.outcomes, tuple(levels))


def trivial_filtration(space: SampleSpace) -> Filtration:
    everything = tuple(range(space.size))
    return Filtration(space.outcomes, tuple((everything,) for _ in range(space.horizon + 1)))


def atom_of(filtration: Filtration, time: int, outcome) -> frozenset:
    try:
        i = filtration.outcomes.index(outcome)
    except ValueError:
        raise ModelError(f"unknown outcome {outcome!r}") from None
    return filtration.names(filtration.atom_containing(time, i))


# ---------------------------------------------------------------------------
# random variables
# ---------------------------------------------------------------------------


def constant(size: int, c) -> RV:
    c = as_fraction(c)
    return (c,) * size


def indicator(rv: Sequence, predicate: Callable) -> RV:
    return tuple(ONE if predicate(x) else ZERO for x in rv)


def conditional_expectation(space: SampleSpace, filtration: Filtration, rv: Sequence, time: int) -> RV:
    _check_outcomes(space, filtration)
    out = [ZERO] * space.size
    w = space.weights
    for atom in filtration.atoms(time):
        mass = sum((w[i] for i in atom), ZERO)
        value = sum((w[i] * rv[i] for i in atom), ZERO) / mass
        for i in atom:
            out[i] = value
    return tuple(out)


# ---------------------------------------------------------------------------
# processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdaptedProcess:
    """``values[n][i]`` is the value at time ``n`` on outcome ``i``; measurable per level."""

    filtration: Filtration
    values: tuple
    name: str = ""

    def __post_init__(self):
        values = tuple(tuple(as_fraction(x) for x in row) for row in self.values)
        object.__setattr__(self, "values", values)
        f = self.filtration
        if len(values) != f.horizon + 1:
            raise ModelError(
                f"expected {f.horizon + 1} time rows, got {len(values)}", path=self.name or None
            )
        for n, row in enumerate(values):
            if len(row) != len(f.outcomes):
                raise ModelError(f"row {n} has {len(row)} entries", path=self.name or None)
            for atom in f.atoms(n):
                if len({row[i] for i in atom}) != 1:
                    raise NotAdaptedError(
                        f"not constant on atom {sorted(f.names(atom), key=f.outcomes.index)!r}",
                        path=f"{self.name or 'process'}[{n}]",
                    )

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    def at(self, n: int) -> RV:
        return self.values[n]

    def increment(self, n: int) -> RV:
        return tuple(b - a for a, b in zip(self.values[n - 1], self.values[n]))

    def under(self, filtration: Filtration) -> "AdaptedProcess":
        """Re-declare against another filtration on the same outcomes (re-validated)."""
        if filtration == self.filtration:
            return self
        if filtration.outcomes != self.filtration.outcomes:
            raise ModelError("filtrations have different outcome lists")
        return AdaptedProcess(filtration, self.values, self.name)

    def renamed(self, name: str) -> "AdaptedProcess":
        return AdaptedProcess(self.filtration, self.values, name)

    def _combine(self, other, op) -> "AdaptedProcess":
        if isinstance(other, AdaptedProcess):
            if other.filtration.outcomes != self.filtration.outcomes:
                raise ModelError("processes live on different outcome sets")
            f = self.filtration if self.filtration.refines(other.filtration) else other.filtration
            rows = tuple(
                tuple(op(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.values, other.values)
            )
            return AdaptedProcess(f, rows)
        c = as_fraction(other)
        return AdaptedProcess(self.filtration, tuple(tuple(op(a, c) for a in r) for r in self.values))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    def __neg__(self):
        return self * -1

    @classmethod
    def constant(cls, filtration: Filtration, c=0, name: str = "") -> "AdaptedProcess":
        row = constant(len(filtration.outcomes), c)
        return cls(filtration, tuple(row for _ in range(filtration.horizon + 1)), name)

    @classmethod
    def from_increments(cls, filtration: Filtration, start: Sequence, steps, name: str = ""):
        """Build ``X`` from ``X_0`` and a mapping/sequence ``steps[n]`` of increments for n >= 1."""
        rows = [tuple(as_fraction(x) for x in start)]
        for n in range(1, filtration.horizon + 1):
            rows.append(tuple(a + as_fraction(b) for a, b in zip(rows[-1], steps[n])))
        return cls(filtration, tuple(rows), name)


def increments(process: AdaptedProcess) -> tuple:
    """``out[n]`` is ``X_n - X_{n-1}`` for ``n >= 1``; ``out[0]`` is all zeros."""
    size = len(process.filtration.outcomes)
    return ((ZERO,) * size,) + tuple(process.increment(n) for n in range(1, process.horizon + 1))


@dataclass(frozen=True)
class MartingaleCheck:
    holds: bool
    time: int | None = None
    atom: frozenset | None = None
    drift: Fraction | None = None

    def __bool__(self):
        return self.holds


def is_martingale(space: SampleSpace, filtration: Filtration, process: AdaptedProcess) -> MartingaleCheck:
    """Exact test of ``E[X_n - X_{n-1} | level n-1] = 0`` for every n; reports the first failure."""
    _check_outcomes(space, filtration)
    process = process.under(filtration)
    w = space.weights
    for n in range(1, filtration.horizon + 1):
        step = process.increment(n)
        for atom in filtration.atoms(n - 1):
            drift = sum((w[i] * step[i] for i in atom), ZERO)
            if drift != 0:
                mass = sum((w[i] for i in atom), ZERO)
                return MartingaleCheck(False, n, filtration.names(atom), drift / mass)
    return MartingaleCheck(True)


# ---------------------------------------------------------------------------
# strategies and gains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TradingStrategy:
    """``values[n - 1]`` holds ``H_n`` for ``n = 1..N``; ``H_n`` is constant on atoms of level n-1."""

    filtration: Filtration
    values: tuple

    def __post_init__(self):
        values = tuple(tuple(as_fraction(x) for x in row) for row in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.filtration.horizon:
            raise ModelError(f"strategy needs {self.filtration.horizon} rows, got {len(values)}")
        _check_predictable(self.filtration, values)

    def at(self, n: int) -> RV:
        return self.values[n - 1]

    @classmethod
    def zero(cls, filtration: Filtration) -> "TradingStrategy":
        row = (ZERO,) * len(filtration.outcomes)
        return cls(filtration, tuple(row for _ in range(filtration.horizon)))

    @classmethod
    def on_atoms(cls, filtration: Filtration, positions) -> "TradingStrategy":
        """``positions`` is an iterable of ``(n, atom, amount)`` with ``atom`` an index tuple."""
        rows = [[ZERO] * len(filtration.outcomes) for _ in range(filtration.horizon)]
        for n, atom, amount in positions:
            for i in atom:
                rows[n - 1][i] += as_fraction(amount)
        return cls(filtration, tuple(tuple(r) for r in rows))


def _check_predictable(filtration: Filtration, values):
    for n, row in enumerate(values, start=1):
        for atom in filtration.atoms(n - 1):
            if len({row[i] for i in atom}) != 1:
                raise NotPredictableError(
                    f"H_{n} is not constant on atom {sorted(filtration.names(atom), key=filtration.outcomes.index)!r} "
                    f"of level {n - 1}"
                )


def gains(strategy: TradingStrategy, process: AdaptedProcess) -> RV:
    """Terminal gains ``sum_n H_n (X_n - X_{n-1})`` per outcome."""
    if strategy.filtration != process.filtration:
        _check_predictable(process.filtration, strategy.values)
    total = [ZERO] * len(process.filtration.outcomes)
    for n in range(1, process.horizon + 1):
        h = strategy.at(n)
        for i, dx in enumerate(process.increment(n)):
            total[i] += h[i] * dx
    return tuple(total)


# ---------------------------------------------------------------------------
# exponentials and measure changes
# ---------------------------------------------------------------------------


def stochastic_exponential(process: AdaptedProcess) -> AdaptedProcess:
    """``E(N)_n = prod_{k <= n} (1 + dN_k)`` with ``E(N)_0 = 1``."""
    size = len(process.filtration.outcomes)
    rows = [(ONE,) * size]
    for n in range(1, process.horizon + 1):
        rows.append(tuple(e * (1 + d) for e, d in zip(rows[-1], process.increment(n))))
    return AdaptedProcess(process.filtration, tuple(rows))


@dataclass(frozen=True)
class MeasureDensity:
    """Terminal density ``dQ/dP`` relative to ``space``; strictly positive with unit mean."""

    space: SampleSpace
    terminal: tuple
    filtration: Filtration | None = None

    def __post_init__(self):
        terminal = tuple(as_fraction(x) for x in self.terminal)
        object.__setattr__(self, "terminal", terminal)
        if len(terminal) != self.space.size:
            raise ModelError(f"density has {len(terminal)} entries for {self.space.size} outcomes")
        for o, d in zip(self.space.outcomes, terminal):
            if d <= 0:
                raise ModelError(f"density {format_fraction(d)} at {o!r} is not strictly positive")
        mean = self.space.expectation(terminal)
        if mean != 1:
            raise ModelError(f"density has mean {format_fraction(mean)}, not 1")
        if self.filtration is not None and not self.filtration.is_measurable(
            self.filtration.horizon, terminal
        ):
            raise NotAdaptedError("density is not measurable at the terminal level")

    @property
    def is_identity(self) -> bool:
        return all(d == 1 for d in self.terminal)

    @property
    def bounds(self) -> tuple:
        return min(self.terminal), max(self.terminal)


def apply_density(space: SampleSpace, density) -> SampleSpace:
    if not isinstance(density, MeasureDensity):
        density = MeasureDensity(space, tuple(density))
    elif density.space.weights != space.weights:
        raise ModelError("density was built against a different base measure")
    weights = tuple(w * d for w, d in zip(space.weights, density.terminal))
    return SampleSpace(space.outcomes, weights, space.horizon)
