"""Monte Carlo estimates of Pitman-type relative efficiency against ``N(theta, 1)``.

For a family of e-tests tuned to the alternative ``theta``, the minimal sample
size reaching e-power ``beta`` is found by search on a simulated e-power curve
and compared with the likelihood-ratio baseline ``ceil(2 beta / theta**2)``.

Replications are split into fixed-size chunks, each drawing from its own
Philox stream. Observations are generated observation-major, so the first
``n`` columns of a chunk are the same whatever the largest ``n`` requested:
every sample size sees common random numbers. Chunk results are concatenated
in chunk order, which makes output independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import kernels
from .baseline import baseline_n
from .etests import LOG2, wilcoxon_log_normalizer
from .merging import EPowerEstimate, e_power_estimate
from .numerics import log_cosh_mean
from .symmetry import RngSeed, as_sample

FAMILIES = ("fisher", "sign", "wilcoxon", "gauss_lr")
CHUNK = 500
DEFAULT_SEED = RngSeed(20230517)


class SearchCapError(RuntimeError):
    pass


def _check_family(family):
    if family not in FAMILIES:
        raise ValueError(f"unknown test family {family!r}; choose from {FAMILIES}")


def tuned_parameter(family: str, theta: float, n: int = 1, sign_convention: str = "exact") -> float:
    """Parameter of ``family`` matched to the alternative ``N(theta, 1)``.

    Fisher and the likelihood ratio use ``lambda = theta``. The sign test uses
    ``p = Phi(theta)``, the true chance of a positive draw, or with
    ``sign_convention="first_order"`` its linearization ``1/2 + theta/sqrt(2 pi)``.
    Wilcoxon uses ``lambda = 3 n theta / (C(n, 2) sqrt(pi))``.
    """
    _check_family(family)
    if family in ("fisher", "gauss_lr"):
        return float(theta)
    if family == "sign":
        if sign_convention == "exact":
            return float(norm.cdf(theta))
        if sign_convention == "first_order":
            return 0.5 + theta / math.sqrt(2 * math.pi)
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    if n < 2:
        raise ValueError("Wilcoxon tuning needs n >= 2")
    return 3 * n * theta / (math.comb(n, 2) * math.sqrt(math.pi))


def asymptotic_epower(family: str, theta: float, n: int) -> float:
    _check_family(family)
    rate = {"fisher": 0.5, "gauss_lr": 0.5, "sign": 1 / math.pi, "wilcoxon": 1.5 / math.pi}
    return rate[family] * n * theta * theta


@dataclass(frozen=True)
class WilcoxonTStat:
    t: float


def wilcoxon_t(s) -> WilcoxonTStat:
    """Signed-rank sum divided by ``C(n, 2)``; note it can exceed 1."""
    from .etests import signed_rank_stats

    s = as_sample(s)
    if s.n < 2:
        raise ValueError("T statistic needs at least two observations")
    return WilcoxonTStat(signed_rank_stats(s).V / math.comb(s.n, 2))


# ---------------------------------------------------------------------------
# simulation


def _chunk_log_e(family, theta, ns, z, sign_convention):
    """Observed e-powers, shape ``(rows, len(ns))``, for prefixes of ``z``."""
    idx = np.asarray(ns) - 1
    if family == "wilcoxon":
        v = kernels.signed_rank_prefix_sums(z, np.asarray(ns, dtype=np.int64))
        out = np.empty(v.shape)
        for q, n in enumerate(ns):
            lam = tuned_parameter("wilcoxon", theta, int(n))
            out[:, q] = lam * v[:, q] - wilcoxon_log_normalizer(lam, int(n))
        return out
    if family == "gauss_lr":
        terms = theta * z - 0.5 * theta * theta
    elif family == "fisher":
        terms = theta * z - log_cosh_mean(theta * z)
    else:
        p = tuned_parameter("sign", theta, sign_convention=sign_convention)
        terms = np.where(z > 0, math.log(2 * p), math.log(2 * (1 - p)))
    return np.cumsum(terms, axis=1)[:, idx]


def simulate_log_e(family: str, theta: float, ns, reps: int, seed: RngSeed,
                   workers: int = 1, sign_convention: str = "exact") -> np.ndarray:
    """Observed e-power of the tuned e-test on ``reps`` samples from ``N(theta, 1)``.

    Returns an array of shape ``(reps, len(ns))``; column ``q`` uses the first
    ``ns[q]`` observations of each replication.
    """
    _check_family(family)
    ns = [int(n) for n in ns]
    if not ns or min(ns) < 1:
        raise ValueError("sample sizes must be positive")
    if reps < 1:
        raise ValueError("reps must be positive")
    order = np.argsort(ns, kind="stable")
    sorted_ns = [ns[i] for i in order]
    nmax = sorted_ns[-1]
    n_chunks = -(-reps // CHUNK)

    def run(c):
        rows = min(CHUNK, reps - c * CHUNK)
        g = seed.generator(c)
        z = np.ascontiguousarray(g.standard_normal((nmax, rows)).T) + theta
        return _chunk_log_e(family, theta, sorted_ns, z, sign_convention)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(c) for c in range(n_chunks)]
    out = np.empty((reps, len(ns)))
    out[:, order] = np.vstack(parts)
    return out


def epower_curve(family: str, theta: float, n: int, reps: int = 10_000,
                 seed: RngSeed = DEFAULT_SEED, workers: int = 1,
                 sign_convention: str = "exact") -> EPowerEstimate:
    logs = simulate_log_e(family, theta, [n], reps, seed, workers, sign_convention)
    return e_power_estimate(logs[:, 0])


@dataclass(frozen=True)
class AreConfig:
    theta_sequence: tuple = (0.4, 0.3, 0.2, 0.15, 0.1)
    beta: float = 2.0
    replications: int = 10_000
    seed: RngSeed = DEFAULT_SEED
    n_cap: int = 200_000
    workers: int = 1
    bootstrap: int = 200
    sign_convention: str = "exact"

    def __post_init__(self):
        ts = tuple(float(t) for t in self.theta_sequence)
        if not ts or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
            raise ValueError("theta sequence must be positive and strictly decreasing")
        object.__setattr__(self, "theta_sequence", ts)
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.replications < 1000:
            raise ValueError("at least 1000 replications are required")
        if self.workers < 1:
            raise ValueError("workers must be positive")


class _Curve:
    """Memoized e-power point estimates at the sample sizes visited by the search."""

    def __init__(self, family, theta, cfg: AreConfig, seed: RngSeed):
        self.family, self.theta, self.cfg, self.seed = family, theta, cfg, seed
        self.cache = {}

    def __call__(self, n):
        if n not in self.cache:
            logs = simulate_log_e(self.family, self.theta, [n], self.cfg.replications,
                                  self.seed, self.cfg.workers, self.cfg.sign_convention)
            self.cache[n] = math.fsum(logs[:, 0]) / logs.shape[0]
        return self.cache[n]


def _search(curve, beta, n0, n_cap, min_n=1):
    n0 = min(max(n0, min_n), n_cap)
    if curve(n0) >= beta:
        hi, lo = n0, None
        while lo is None:
            cand = max(min_n, hi // 2)
            if cand == hi:
                return hi
            if curve(cand) >= beta:
                hi = cand
            else:
                lo = cand
    else:
        lo, hi = n0, None
        while hi is None:
            if lo >= n_cap:
                raise SearchCapError(f"e-power {beta} not reached within n_cap={n_cap}")
            cand = min(n_cap, 2 * lo)
            if curve(cand) >= beta:
                hi = cand
            else:
                lo = cand
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if curve(mid) >= beta:
            hi = mid
        else:
            lo = mid
    return hi


def min_n_for_epower(family: str, theta: float, beta: float, cfg: AreConfig | None = None,
                     seed: RngSeed | None = None) -> int:
    """Smallest ``n`` whose simulated e-power reaches ``beta``.

    The search starts at the closed-form asymptotic prediction, doubles or
    halves to bracket the crossing, then bisects.

    Raises
    ------
    SearchCapError
        When ``cfg.n_cap`` observations are not enough.
    """
    _check_family(family)
    if not theta > 0:
        raise ValueError("theta must be positive")
    cfg = cfg or AreConfig()
    curve = _Curve(family, theta, cfg, seed or cfg.seed)
    n0 = math.ceil(beta / asymptotic_epower(family, theta, 1))
    return _search(curve, beta, n0, cfg.n_cap, min_n=2 if family == "wilcoxon" else 1)


@dataclass(frozen=True)
class AreRecord:
    theta: float
    n_test: int
    n_baseline: int
    ratio: float


@dataclass(frozen=True)
class AreResult:
    family: str
    records: tuple
    extrapolated_are: float
    se: float
    beta: float = field(default=2.0)


def _bootstrap_se(family, theta, n_test, n_base, cfg, seed):
    """Bootstrap the crossing sample size over replications on a window around ``n_test``."""
    lo = max(2 if family == "wilcoxon" else 1, int(0.8 * n_test))
    hi = max(lo + 2, int(math.ceil(1.25 * n_test)))
    ns = np.unique(np.linspace(lo, hi, 25).round().astype(int))
    logs = simulate_log_e(family, theta, ns, cfg.replications, seed, cfg.workers,
                          cfg.sign_convention)
    g = seed.generator(2**32 - 1)
    ratios = np.empty(cfg.bootstrap)
    reps = logs.shape[0]
    for b in range(cfg.bootstrap):
        curve = logs[g.integers(0, reps, reps)].mean(axis=0)
        above = np.flatnonzero(curve >= cfg.beta)
        if above.size == 0:
            n_star = float(ns[-1])
        elif above[0] == 0:
            n_star = float(ns[0])
        else:
            j = above[0]
            # linear interpolation of the crossing between ns[j-1] and ns[j]
            y0, y1 = curve[j - 1], curve[j]
            n_star = ns[j - 1] + (ns[j] - ns[j - 1]) * (cfg.beta - y0) / (y1 - y0)
        ratios[b] = n_base / n_star
    return float(np.std(ratios, ddof=1))


def are_estimate(family: str, cfg: AreConfig | None = None) -> AreResult:
    """Ratios ``n_baseline / n_test`` along the theta sequence.

    The baseline count is exact; ``n_test`` comes from :func:`min_n_for_epower`.
    The reported efficiency is the ratio at the smallest theta, with a
    bootstrap standard error over replications.
    """
    _check_family(family)
    cfg = cfg or AreConfig()
    records = []
    for nu, theta in enumerate(cfg.theta_sequence):
        seed = cfg.seed.child(nu)
        n_test = min_n_for_epower(family, theta, cfg.beta, cfg, seed)
        n_base = baseline_n(cfg.beta, theta)
        records.append(AreRecord(theta, n_test, n_base, n_base / n_test))
    last = records[-1]
    se = 0.0
    if cfg.bootstrap > 1:
        se = _bootstrap_se(family, last.theta, last.n_test, last.n_baseline, cfg,
                           cfg.seed.child(len(records) - 1))
    return AreResult(family, tuple(records), last.ratio, se, cfg.beta)
