"""The symmetry model: magnitudes as the summary, uniform sign flips as the kernel.

Given the magnitudes ``|z_i|``, the null hypothesis of symmetry makes the signs
independent fair coin flips. Exact expectations under this kernel are computed
by enumerating all ``2**n`` sign vectors; for larger ``n`` use
:func:`kernel_sample_batch` and Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

ENUMERATION_CAP = 24
_BLOCK_BITS = 16


class EnumerationCapError(ValueError):
    pass


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations ``z_1, ..., z_n``; finite and nonzero so every sign is defined."""

    values: np.ndarray

    def __init__(self, values, *, _check: bool = True):
        arr = _frozen(values)
        if _check:
            if arr.size == 0:
                raise ValueError("a sample needs at least one observation")
            if not np.all(np.isfinite(arr)):
                raise ValueError("sample values must be finite")
            zeros = np.flatnonzero(arr == 0)
            if zeros.size:
                raise ValueError(
                    f"zero observation at index {int(zeros[0])}: the sign of a zero is undefined "
                    "under the symmetry model, drop or perturb it"
                )
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, Sample) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"Sample({self.values.tolist()})"


def as_sample(s) -> Sample:
    return s if isinstance(s, Sample) else Sample(s)


@dataclass(frozen=True, eq=False)
class Summary:
    magnitudes: np.ndarray

    def __init__(self, magnitudes):
        arr = _frozen(magnitudes)
        if arr.size == 0 or np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("magnitudes must be a nonempty list of finite nonnegative reals")
        object.__setattr__(self, "magnitudes", arr)

    @property
    def n(self) -> int:
        return int(self.magnitudes.size)

    def __eq__(self, other):
        return isinstance(other, Summary) and np.array_equal(self.magnitudes, other.magnitudes)


@dataclass(frozen=True)
class SignVector:
    signs: tuple

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be -1 or +1")

    def apply(self, m: Summary) -> Sample:
        if len(self.signs) != m.n:
            raise ValueError("sign vector length differs from the summary")
        return Sample(np.asarray(self.signs) * m.magnitudes, _check=False)


@dataclass(frozen=True)
class RngSeed:
    """Master seed plus stream id for a counter-based (Philox) generator.

    ``path`` extends the stream so that independent sub-streams can be derived
    deterministically (one per replication chunk, per parameter value, ...).
    """

    seed: int
    stream: int = 0
    path: tuple = field(default=())

    def __post_init__(self):
        for name, v in (("seed", self.seed), ("stream", self.stream)):
            if not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def child(self, *key: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream, self.path + tuple(int(k) for k in key))

    def generator(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *self.path, *key))
        return np.random.Generator(np.random.Philox(ss))


def summarize(s) -> Summary:
    return Summary(np.abs(as_sample(s).values))


def _check_cap(n: int, cap: int):
    if n > cap:
        raise EnumerationCapError(
            f"exact enumeration over 2**{n} sign vectors exceeds the cap of 2**{cap}; "
            "use kernel_sample_batch for a Monte Carlo estimate"
        )


def sign_blocks(n: int, block_bits: int = _BLOCK_BITS):
    """Yield ``(±1)`` matrices covering all ``2**n`` sign vectors in index order.

    Bit ``i`` of the row index set means a minus sign at position ``i``.
    """
    total = 1 << n
    step = 1 << min(block_bits, n)
    bits = np.arange(n)
    for start in range(0, total, step):
        idx = np.arange(start, start + step, dtype=np.int64)
        yield 1 - 2 * ((idx[:, None] >> bits[None, :]) & 1)


def kernel_expectation(
    f: Callable, m: Summary, *, batched: bool = False, cap: int = ENUMERATION_CAP
) -> float:
    """Exact mean of ``f`` over the uniform sign-flip kernel at summary ``m``.

    With ``batched=False`` ``f`` receives one :class:`Sample` per sign vector.
    With ``batched=True`` it receives a 2-D array whose rows are signed samples,
    and must return one value per row; this is orders of magnitude faster.

    Block sums are combined with ``math.fsum`` so the result does not depend on
    evaluation order.
    """
    if not isinstance(m, Summary):
        m = Summary(m)
    n = m.n
    _check_cap(n, cap)
    partials = []
    for signs in sign_blocks(n):
        rows = signs * m.magnitudes[None, :]
        if batched:
            vals = np.asarray(f(rows), dtype=float)
        else:
            vals = np.fromiter((f(Sample(r, _check=False)) for r in rows), float, len(rows))
        partials.append(math.fsum(vals))
    return math.fsum(partials) / (1 << n)


def kernel_sample(m: Summary, seed: RngSeed) -> Sample:
    """One uniform random sign flip of ``m``."""
    return Sample(kernel_sample_batch(m, seed, 1)[0], _check=False)


def kernel_sample_batch(m: Summary, seed: RngSeed, size: int) -> np.ndarray:
    if not isinstance(m, Summary):
        m = Summary(m)
    signs = 1 - 2 * seed.generator().integers(0, 2, size=(size, m.n))
    return signs * m.magnitudes[None, :]


@dataclass(frozen=True)
class VerificationReport:
    mean: float
    is_e_variable: bool
    is_admissible: bool


def verify_e_variable(
    f: Callable, m: Summary, tol: float = 1e-9, *, batched: bool = False,
    cap: int = ENUMERATION_CAP,
) -> VerificationReport:
    mean = kernel_expectation(f, m, batched=batched, cap=cap)
    return VerificationReport(mean, mean <= 1 + tol, abs(mean - 1) <= tol)
