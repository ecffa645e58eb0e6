"""Classical p-values for the symmetry tests: Fisher's permutation test and the sign test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .symmetry import ENUMERATION_CAP, EnumerationCapError, as_sample

SIDES = ("one_sided", "two_sided")


@dataclass(frozen=True)
class PValue:
    value: float
    side: str
    exact: Fraction | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"p-value out of [0, 1]: {self.value}")


def _side(side: str) -> str:
    aliases = {"one": "one_sided", "two": "two_sided"}
    side = aliases.get(side, side)
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    return side


def _finish(one: Fraction, side: str) -> PValue:
    p = one if side == "one_sided" else min(Fraction(1), 2 * one)
    return PValue(float(p), side, p)


def fisher_permutation_pvalue(s, side: str = "one_sided", cap: int = ENUMERATION_CAP) -> PValue:
    """Fraction of sign flips whose sum is at least the observed sum.

    Sums within a relative ``1e-11`` of the observed one count as ties, so the
    identity flip is always included despite rounding.
    """
    side = _side(side)
    z = as_sample(s).values
    if z.size > cap:
        raise EnumerationCapError(f"permutation p-value enumerates 2**{z.size} flips, cap is 2**{cap}")
    m = np.ascontiguousarray(np.abs(z))
    observed = math.fsum(z)
    slack = 1e-11 * math.fsum(m)
    count = kernels.signflip_tail_count(m, observed - slack)
    return _finish(Fraction(count, 1 << z.size), side)


def sign_test_pvalue(s, side: str = "one_sided") -> PValue:
    """Binomial tail ``P(Bin(n, 1/2) >= k)``."""
    side = _side(side)
    z = as_sample(s).values
    n, k = z.size, int(np.count_nonzero(z > 0))
    tail = sum(math.comb(n, j) for j in range(k, n + 1))
    return _finish(Fraction(tail, 1 << n), side)
