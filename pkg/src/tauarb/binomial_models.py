"""The two four-outcome binomial models with a random time used throughout the
demos, tests and the ``examples`` subcommand."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ModelError
from .filtered_space import AdaptedProcess, Filtration, SampleSpace, as_fraction
from .random_time import RandomTime

OUTCOMES = ("w1", "w2", "w3", "w4")


@dataclass(frozen=True)
class BinomialModel:
    space: SampleSpace
    F: Filtration
    S: AdaptedProcess
    tau: RandomTime
    params: dict


def _check(u, d, s0):
    if not u > 1:
        raise ModelError(f"u must exceed 1, got {u}", path="u")
    if not 0 < d < 1:
        raise ModelError(f"d must lie in (0, 1), got {d}", path="d")
    if not s0 > 0:
        raise ModelError(f"s0 must be positive, got {s0}", path="s0")


def _filtration():
    return Filtration(OUTCOMES, (((0, 1, 2, 3),), ((0, 1), (2, 3)), ((0,), (1,), (2,), (3,))))


def first_model(u="2", d="1/2", s0="1") -> BinomialModel:
    """Two-period tree under its martingale measure; ``tau = 1`` on w3 and 2 elsewhere."""
    u, d, s0 = as_fraction(u), as_fraction(d), as_fraction(s0)
    _check(u, d, s0)
    p = (1 - d) / (u - d)
    space = SampleSpace(OUTCOMES, (p * p, p * (1 - p), (1 - p) * p, (1 - p) ** 2), 2)
    F = _filtration()
    S = AdaptedProcess(F, (
        (s0,) * 4,
        (u * s0, u * s0, d * s0, d * s0),
        (u * u * s0, u * d * s0, u * d * s0, d * d * s0),
    ), "S")
    tau = RandomTime(OUTCOMES, (2, 2, 1, 2), 2)
    return BinomialModel(space, F, S, tau, {"u": u, "d": d, "s0": s0, "p": p})


def second_model(u="2", d="1/2", lam="1/2", s0="1") -> BinomialModel:
    """Same tree with the down branch frozen after time 1 and weights split by ``lam``."""
    u, d, lam, s0 = as_fraction(u), as_fraction(d), as_fraction(lam), as_fraction(s0)
    _check(u, d, s0)
    if not 0 < lam < 1:
        raise ModelError(f"lambda must lie in (0, 1), got {lam}", path="lambda")
    q = (u - 1) / (u - d)
    space = SampleSpace(OUTCOMES, (
        (1 - d) ** 2 / (u - d) ** 2, (u - 1) * (1 - d) / (u - d) ** 2, lam * q, (1 - lam) * q,
    ), 2)
    F = _filtration()
    S = AdaptedProcess(F, (
        (s0,) * 4,
        (u * s0, u * s0, d * s0, d * s0),
        (u * u * s0, u * d * s0, d * s0, d * s0),
    ), "S")
    tau = RandomTime(OUTCOMES, (2, 2, 1, 2), 2)
    return BinomialModel(space, F, S, tau, {"u": u, "d": d, "lambda": lam, "s0": s0, "p": Fraction(1) - q})
