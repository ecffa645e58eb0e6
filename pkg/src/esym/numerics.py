"""Log-domain scalar kernels and an adaptive quadrature oracle.

Everything downstream keeps e-values as logarithms, so this module only
exposes primitives that are safe for arguments far beyond the range of
``exp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import special

LOG2 = math.log(2.0)


class QuadratureError(ArithmeticError):
    """Raised when adaptive quadrature runs out of subdivisions.

    The best available estimate is kept on ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureSpec:
    lower: float
    upper: float
    rel_tol: float = 1e-9
    max_subdivisions: int = 200_000

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be a positive integer")


def log_sum_exp(xs: Iterable[float]) -> float:
    xs = np.asarray(list(xs) if not isinstance(xs, np.ndarray) else xs, dtype=float)
    if xs.size == 0:
        raise ValueError("log_sum_exp of an empty list")
    top = xs.max()
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return float(top + math.log(math.fsum(np.exp(xs - top))))


def log_cosh_mean(x):
    """``log((exp(x) + exp(-x)) / 2)``, i.e. ``log cosh x``, without overflow.

    Accepts scalars or arrays.
    """
    a = np.abs(x)
    out = a + np.log1p(np.exp(-2.0 * a)) - LOG2
    if np.ndim(out) == 0:
        return float(out)
    return out


def log1p_exp(x):
    """``log(1 + exp(x))`` computed with a branch on the sign of ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, x + np.log1p(np.exp(-np.abs(x))), np.log1p(np.exp(-np.abs(x))))
    if out.ndim == 0:
        return float(out)
    return out


def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise ValueError(f"beta function needs positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete beta ``B(x; a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"incomplete beta needs x in [0, 1], got {x}")
    if not (a > 0 and b > 0):
        raise ValueError(f"beta function needs positive arguments, got ({a}, {b})")
    if x == 0.0:
        return 0.0
    return float(special.betainc(a, b, x)) * math.exp(log_beta(a, b))


def log_upper_incomplete_beta(x: float, a: float, b: float) -> float:
    """``log(B(a, b) - B(x; a, b))``, evaluated through the reflected regularized
    function so no cancellation occurs when ``B(x; a, b)`` is close to ``B(a, b)``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"incomplete beta needs x in [0, 1], got {x}")
    if x == 1.0:
        return -math.inf
    tail = float(special.betainc(b, a, 1.0 - x))
    return math.log(tail) + log_beta(a, b) if tail > 0 else -math.inf


def gaussian_integral(A: float, B: float) -> float:
    """Closed form of ``int exp(-A x^2 + B x) dx`` over the real line."""
    if not A > 0:
        raise ValueError(f"gaussian_integral needs A > 0, got {A}")
    return math.sqrt(math.pi / A) * math.exp(B * B / (4.0 * A))


def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


def integrate(f: Callable[[float], float], spec: QuadratureSpec, *, panels: int = 64) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[spec.lower, spec.upper]``.

    The interval is first cut into ``panels`` equal pieces so that narrow peaks
    on a wide domain are not missed by the initial coarse estimate. Each piece
    is then refined until the Richardson-corrected error estimate falls below
    its share of ``rel_tol * |estimate|``.
    """
    a, b = spec.lower, spec.upper
    edges = np.linspace(a, b, panels + 1)
    stack = []
    coarse = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        whole = _simpson(flo, fmid, fhi, hi - lo)
        coarse += whole
        stack.append((lo, hi, flo, fmid, fhi, whole))

    scale = abs(coarse)
    if scale == 0.0:
        scale = max(abs(s[-1]) for s in stack) or 1.0
    tol_total = spec.rel_tol * scale
    width = b - a

    parts = []
    splits = 0
    while stack:
        lo, hi, flo, fmid, fhi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        err = left + right - whole
        tol = tol_total * (hi - lo) / width
        if abs(err) <= 15.0 * tol or hi - lo <= 1e-14 * width:
            parts.append(left + right + err / 15.0)
            continue
        splits += 1
        if splits > spec.max_subdivisions:
            best = math.fsum(parts) + math.fsum(s[-1] for s in stack) + left + right
            raise QuadratureError(
                f"adaptive quadrature exceeded {spec.max_subdivisions} subdivisions", best
            )
        stack.append((lo, mid, flo, flm, fmid, left))
        stack.append((mid, hi, fmid, frm, fhi, right))
    return math.fsum(parts)
