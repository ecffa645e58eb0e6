"""Fisher-type, sign and Wilcoxon signed-rank e-tests of symmetry.

Each family is ``exp(lambda * S - C)`` for a statistic ``S`` (the sum, the
number of positives, the signed-rank sum) with ``C`` the log of the null
moment generating function, which makes every member admissible. Parameter-free
variants come from mixing over the test parameter, either in closed form or on
a :class:`ParamGrid`.

The private ``_*_log`` helpers broadcast over the last axis so the same code
serves single samples, the exact enumeration oracle and Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .numerics import (
    LOG2,
    log1p_exp,
    log_beta,
    log_cosh_mean,
    log_sum_exp,
    log_upper_incomplete_beta,
)
from .symmetry import Sample, as_sample

FAMILIES = ("fisher", "delapena", "sign_p", "sign_lambda", "wilcoxon")
NORMALIZATIONS = ("none", "std_sample", "std_population")
# reproduces the published lambda = 0.5 value on the Darwin maize data
DEFAULT_NORMALIZATION = "std_population"


@dataclass(frozen=True)
class EValue:
    """An e-value held as its logarithm; ``+inf`` allowed, NaN rejected."""

    log_value: float

    def __post_init__(self):
        lv = float(self.log_value)
        if math.isnan(lv):
            raise ValueError("e-value logarithm is NaN")
        object.__setattr__(self, "log_value", lv)

    @classmethod
    def from_value(cls, value: float) -> "EValue":
        if value < 0 or math.isnan(value):
            raise ValueError(f"e-values are nonnegative, got {value}")
        return cls(math.log(value) if value > 0 else -math.inf)

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.78 else math.inf

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class ParamGrid:
    points: tuple
    weights: tuple

    def __init__(self, points, weights=None):
        pts = tuple(float(p) for p in points)
        if not pts:
            raise ValueError("a parameter grid needs at least one point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("grid points must be strictly ascending")
        if not all(math.isfinite(p) for p in pts):
            raise ValueError("grid points must be finite")
        if weights is None:
            w = (1.0 / len(pts),) * len(pts)
        else:
            w = tuple(float(x) for x in weights)
        if len(w) != len(pts):
            raise ValueError("grid needs one weight per point")
        if any(x < 0 for x in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("grid weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def trapezoid(cls, lower: float, upper: float, count: int = 1001) -> "ParamGrid":
        """Equally spaced points with trapezoidal weights (end weights halved)."""
        if count == 1:
            return cls([lower])
        if not lower < upper:
            raise ValueError("grid needs lower < upper")
        pts = np.linspace(lower, upper, count)
        w = np.ones(count)
        w[0] = w[-1] = 0.5
        w /= w.sum()
        return cls(pts, w)

    @classmethod
    def parse(cls, text: str) -> tuple[str | None, "ParamGrid"]:
        """Parse ``"lo:hi:count"`` or ``"name:lo:hi:count"`` (e.g. ``"p:0:1:1001"``)."""
        parts = text.split(":")
        name = None
        if len(parts) == 4:
            name, parts = parts[0].strip() or None, parts[1:]
        if len(parts) != 3:
            raise ValueError(f"grid spec {text!r} is not of the form [name:]lo:hi:count")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"grid spec {text!r} has a non-numeric field") from None
        if count < 1:
            raise ValueError("grid count must be positive")
        return name, cls.trapezoid(lo, hi, count)


@dataclass(frozen=True)
class SignedRankStats:
    k: int
    ranks_of_positive: frozenset
    V: int


class TiedMagnitudesError(ValueError):
    pass


# ---------------------------------------------------------------------------
# normalization


def normalize(s, method: str = DEFAULT_NORMALIZATION) -> Sample:
    """Divide by the sample standard deviation (mean-centred).

    ``std_sample`` uses denominator ``n - 1``, ``std_population`` uses ``n``.
    """
    s = as_sample(s)
    if method == "none":
        return s
    if method not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {method!r}; choose from {NORMALIZATIONS}")
    ddof = 1 if method == "std_sample" else 0
    if s.n <= ddof:
        raise ValueError(f"{method} normalization needs more than {ddof} observations")
    sd = float(np.std(s.values, ddof=ddof))
    if sd == 0:
        raise ValueError("cannot normalize a sample with zero spread")
    return Sample(s.values / sd)


# ---------------------------------------------------------------------------
# Fisher-type


def _fisher_normalizer(lam, z):
    return np.sum(log_cosh_mean(lam * np.asarray(z, dtype=float)), axis=-1)


def _fisher_log(lam, z):
    z = np.asarray(z, dtype=float)
    return lam * np.sum(z, axis=-1) - _fisher_normalizer(lam, z)


def _delapena_log(lam, z):
    z = np.asarray(z, dtype=float)
    return np.sum(lam * z - 0.5 * (lam * z) ** 2, axis=-1)


def _fisher_mix_log(z):
    z = np.asarray(z, dtype=float)
    ss = np.sum(z * z, axis=-1)
    total = np.sum(z, axis=-1)
    return -0.5 * np.log1p(ss) + total**2 / (2.0 + 2.0 * ss)


def fisher_log_normalizer(lam: float, s) -> float:
    return float(_fisher_normalizer(lam, as_sample(s).values))


def fisher_e(lam: float, s) -> EValue:
    return EValue(_fisher_log(lam, as_sample(s).values))


def delapena_e(lam: float, s) -> EValue:
    """Simplified product ``prod exp(lambda z - lambda^2 z^2 / 2)``; never above :func:`fisher_e`."""
    return EValue(_delapena_log(lam, as_sample(s).values))


def fisher_mix_e(s) -> EValue:
    """De la Peña variable mixed over ``lambda ~ N(0, 1)``, in closed form."""
    return EValue(_fisher_mix_log(as_sample(s).values))


# ---------------------------------------------------------------------------
# sign


def sign_count(s) -> int:
    return int(np.count_nonzero(as_sample(s).values > 0))


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise ValueError(f"sign e-test needs p in (0, 1), got {p}")


def _sign_p_log(p, k, n):
    return k * math.log(p) + (n - k) * math.log1p(-p) + n * LOG2


def _sign_p_log_closed(p, k, n):
    # p in [0, 1], with 0**0 = 1 at the boundary
    if 0.0 < p < 1.0:
        return _sign_p_log(p, k, n)
    if p == 0.0:
        return n * LOG2 if k == 0 else -math.inf
    if p == 1.0:
        return n * LOG2 if k == n else -math.inf
    raise ValueError(f"sign e-test needs p in [0, 1], got {p}")


def _row_counts(rows):
    return np.count_nonzero(np.asarray(rows) > 0, axis=-1)


def _sign_p_log_rows(p, rows):
    k = _row_counts(rows)
    n = np.shape(rows)[-1]
    return k * math.log(p) + (n - k) * math.log1p(-p) + n * LOG2


def _sign_lambda_log(lam, k, n):
    return lam * k - n * (log1p_exp(lam) - LOG2)


def sign_e_p(p: float, s) -> EValue:
    _check_p(p)
    s = as_sample(s)
    return EValue(_sign_p_log(p, sign_count(s), s.n))


def sign_e_lambda(lam: float, s) -> EValue:
    """``exp(lambda k) (2 / (1 + exp(lambda)))**n``; ``lambda`` is the log-odds of ``p``."""
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    s = as_sample(s)
    return EValue(_sign_lambda_log(lam, sign_count(s), s.n))


def _sign_mix_two_log(k, n):
    return n * LOG2 + log_beta(k + 1, n - k + 1)


def _sign_mix_one_log(k, n):
    return (n + 1) * LOG2 + log_upper_incomplete_beta(0.5, k + 1, n - k + 1)


def sign_mix_two_sided(s) -> EValue:
    """Sign e-test averaged over ``p`` uniform on ``[0, 1]``: ``2**n B(k+1, n-k+1)``."""
    s = as_sample(s)
    return EValue(_sign_mix_two_log(sign_count(s), s.n))


def sign_mix_one_sided(s) -> EValue:
    """Sign e-test averaged over ``p`` uniform on ``[1/2, 1]``."""
    s = as_sample(s)
    return EValue(_sign_mix_one_log(sign_count(s), s.n))


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank


def signed_rank_stats(s) -> SignedRankStats:
    """Ranks by ascending magnitude (rank 1 is the smallest) and their sum over positives.

    Raises
    ------
    TiedMagnitudesError
        If two observations share a magnitude; ranks would be ambiguous.
    """
    z = as_sample(s).values
    mags = np.abs(z)
    order = np.argsort(mags, kind="stable")
    sorted_mags = mags[order]
    dup = np.flatnonzero(sorted_mags[1:] == sorted_mags[:-1])
    if dup.size:
        tied = sorted(int(i) for i in np.flatnonzero(mags == sorted_mags[dup[0]]))
        raise TiedMagnitudesError(
            f"observations at indices {tied} have equal magnitude {sorted_mags[dup[0]]}; "
            "signed ranks need distinct magnitudes"
        )
    ranks = np.empty(z.size, dtype=np.int64)
    ranks[order] = np.arange(1, z.size + 1)
    pos = frozenset(int(r) for r in ranks[z > 0])
    return SignedRankStats(k=len(pos), ranks_of_positive=pos, V=int(sum(pos)))


def wilcoxon_log_normalizer(lam: float, n: int) -> float:
    """``sum_{i=1..n} log((1 + exp(lambda i)) / 2)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    i = np.arange(1, n + 1, dtype=float)
    return math.fsum(np.asarray(log1p_exp(lam * i), dtype=float).reshape(-1) - LOG2)


def wilcoxon_e(lam: float, s) -> EValue:
    s = as_sample(s)
    st = signed_rank_stats(s)
    return EValue(lam * st.V - wilcoxon_log_normalizer(lam, s.n))


def _wilcoxon_log_rows(lam, rows):
    rows = np.ascontiguousarray(rows, dtype=float)
    n = rows.shape[1]
    v = kernels.signed_rank_prefix_sums(rows, np.array([n], dtype=np.int64))[:, 0]
    return lam * v - wilcoxon_log_normalizer(lam, n)


# ---------------------------------------------------------------------------
# grids and batched statistics


def _point_log(family: str, param: float, s: Sample, closed: bool = False) -> float:
    z = s.values
    if family == "fisher":
        return float(_fisher_log(param, z))
    if family == "delapena":
        return float(_delapena_log(param, z))
    if family == "sign_p":
        k = sign_count(s)
        if closed:
            return _sign_p_log_closed(param, k, s.n)
        _check_p(param)
        return _sign_p_log(param, k, s.n)
    if family == "sign_lambda":
        return float(_sign_lambda_log(param, sign_count(s), s.n))
    if family == "wilcoxon":
        return wilcoxon_e(param, s).log_value
    raise ValueError(f"unknown e-test family {family!r}; choose from {FAMILIES}")


def point_e(family: str, param: float, s) -> EValue:
    return EValue(_point_log(family, param, as_sample(s)))


def grid_average_e(family: str, grid: ParamGrid, s) -> EValue:
    """Weighted average of a family's e-values over the grid points.

    For ``sign_p`` the closed endpoints ``p = 0`` and ``p = 1`` are admitted and
    evaluated as limits, so grids spanning ``[0, 1]`` work; anything outside
    ``[0, 1]`` is rejected.
    """
    s = as_sample(s)
    if family == "wilcoxon":
        signed_rank_stats(s)  # surface ties before looping
    logs, log_w = [], []
    for p, w in zip(grid.points, grid.weights):
        if w == 0:
            continue
        logs.append(_point_log(family, p, s, closed=True))
        log_w.append(math.log(w))
    return EValue(log_sum_exp(np.add(logs, log_w)))


def batched_e(family: str, param: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized e-variable for rows of signed samples, for ``kernel_expectation(batched=True)``."""
    if family == "fisher":
        return lambda rows: np.exp(_fisher_log(param, rows))
    if family == "delapena":
        return lambda rows: np.exp(_delapena_log(param, rows))
    if family == "fisher_mix":
        return lambda rows: np.exp(_fisher_mix_log(rows))
    if family == "sign_p":
        _check_p(param)
        return lambda rows: np.exp(_sign_p_log_rows(param, rows))
    if family == "sign_lambda":
        return lambda rows: np.exp(_sign_lambda_log(param, _row_counts(rows), np.shape(rows)[-1]))
    if family in ("sign_mix_two", "sign_mix_one"):
        one = family == "sign_mix_one"

        def f(rows):
            n = np.shape(rows)[-1]
            table = np.array([_sign_mix_one_log(k, n) if one else _sign_mix_two_log(k, n)
                              for k in range(n + 1)])
            return np.exp(table[_row_counts(rows)])
        return f
    if family == "wilcoxon":
        return lambda rows: np.exp(_wilcoxon_log_rows(param, rows))
    raise ValueError(f"unknown e-test family {family!r}")
