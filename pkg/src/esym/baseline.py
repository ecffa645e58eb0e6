"""Gaussian assay model ``N(theta, 1)`` against the null ``N(0, 1)``."""

from __future__ import annotations

import math

import numpy as np

from .etests import EValue
from .symmetry import as_sample


def _gauss_lr_log(theta, z):
    z = np.asarray(z, dtype=float)
    n = z.shape[-1]
    return theta * np.sum(z, axis=-1) - 0.5 * n * theta * theta


def _gauss_mix_log(z):
    z = np.asarray(z, dtype=float)
    n = z.shape[-1]
    return -0.5 * math.log(n + 1) + np.sum(z, axis=-1) ** 2 / (2 * n + 2)


def gauss_lr_e(theta: float, s) -> EValue:
    """Likelihood ratio of ``N(theta, 1)`` to ``N(0, 1)`` for IID observations."""
    return EValue(_gauss_lr_log(theta, as_sample(s).values))


def gauss_mix_e(s) -> EValue:
    """Likelihood ratio mixed over ``theta ~ N(0, 1)``; valid only for the Gaussian null."""
    return EValue(_gauss_mix_log(as_sample(s).values))


def kl_gauss(theta: float) -> float:
    return 0.5 * theta * theta


def gauss_optimal_epower(theta: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be at least 1")
    return n * kl_gauss(theta)


def baseline_n(beta: float, theta: float) -> int:
    """Fewest observations for which the likelihood ratio reaches e-power ``beta``."""
    if not beta > 0:
        raise ValueError("target e-power beta must be positive")
    if theta == 0:
        raise ValueError("theta = 0: the null itself, no finite sample size reaches beta")
    # guard against 2*beta/theta**2 landing a hair above an integer
    raw = 2.0 * beta / (theta * theta)
    return max(1, math.ceil(raw - 1e-9 * raw))
