"""Merging independent e-values: subset products, their convex mixtures, and the lift.

Products are taken in log domain; an infinite entry absorbs everything except
a zero (``0 * inf`` is treated as 0, i.e. an e-value of 0 vetoes a product).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .etests import EValue
from .numerics import log_sum_exp


@dataclass(frozen=True)
class EVector:
    entries: tuple
    independent: bool = True

    def __init__(self, entries, independent: bool = True):
        vals = tuple(e if isinstance(e, EValue) else EValue.from_value(float(e)) for e in entries)
        object.__setattr__(self, "entries", vals)
        object.__setattr__(self, "independent", bool(independent))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class MergeSpec:
    """Convex combination of subset products; subsets use 1-based indices."""

    terms: tuple

    def __init__(self, terms):
        norm = tuple((frozenset(int(i) for i in subset), float(w)) for subset, w in terms)
        if not norm:
            raise ValueError("merge spec needs at least one term")
        if any(w < 0 for _, w in norm) or abs(math.fsum(w for _, w in norm) - 1.0) > 1e-12:
            raise ValueError("merge weights must be nonnegative and sum to 1")
        object.__setattr__(self, "terms", norm)


def _check_indices(v: EVector, subset):
    for i in subset:
        if not 1 <= i <= len(v):
            raise IndexError(f"index {i} outside 1..{len(v)}")


def _log_product(logs):
    logs = list(logs)
    if any(x == -math.inf for x in logs):
        return -math.inf
    return math.fsum(logs) if not any(x == math.inf for x in logs) else math.inf


def product_merge(v: EVector, subset=()) -> EValue:
    subset = sorted(set(subset))
    _check_indices(v, subset)
    return EValue(_log_product(v.entries[i - 1].log_value for i in subset))


def mixture_merge(v: EVector, spec: MergeSpec) -> EValue:
    logs = []
    for subset, w in spec.terms:
        if w == 0:
            continue
        logs.append(math.log(w) + product_merge(v, subset).log_value)
    return EValue(log_sum_exp(logs))


def u_statistic_merge(v: EVector, order: int) -> EValue:
    """Average of the products over all ``order``-element subsets."""
    K = len(v)
    if not 1 <= order <= K:
        raise ValueError(f"order must be in 1..{K}, got {order}")
    subsets = list(combinations(range(1, K + 1), order))
    logs = [product_merge(v, s).log_value for s in subsets]
    return EValue(log_sum_exp(logs) - math.log(len(subsets)))


def lift(lam: float, e: EValue) -> EValue:
    """``1 - lam + lam * E`` for ``lam`` in ``(0, 1]``."""
    if not 0 < lam <= 1:
        raise ValueError(f"lift needs lambda in (0, 1], got {lam}")
    if lam == 1:
        return e
    return EValue(np.logaddexp(math.log1p(-lam), math.log(lam) + e.log_value))


@dataclass(frozen=True)
class EPowerEstimate:
    mean: float
    se: float
    count: int


def e_power_estimate(log_values) -> EPowerEstimate:
    """Monte Carlo e-power: mean observed e-power with its standard error."""
    x = np.asarray(log_values, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("e-power estimate needs at least one observed e-power")
    mean = math.fsum(x) / x.size
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return EPowerEstimate(mean, se, int(x.size))
