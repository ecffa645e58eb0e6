"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

BACKEND = "python"


def signed_rank_prefix_sums(z, ns):
    z = np.ascontiguousarray(z, dtype=np.float64)
    ns = np.asarray(ns, dtype=np.int64)
    out = np.zeros((z.shape[0], ns.shape[0]), dtype=np.int64)
    if ns.size and ns[-1] > z.shape[1]:
        raise ValueError("prefix length exceeds sample width")
    for q, n in enumerate(ns):
        if n == 0:
            continue
        head = z[:, :n]
        order = np.argsort(np.abs(head), axis=1, kind="stable")
        ranks = np.empty_like(order)
        np.put_along_axis(ranks, order, np.arange(1, n + 1)[None, :], axis=1)
        out[:, q] = np.where(head > 0, ranks, 0).sum(axis=1)
    return out


def _half_sums(m):
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    idx = np.arange(1 << n)
    s = np.zeros(1 << n, dtype=np.float64)
    for i in range(n):
        s = np.where((idx >> i) & 1, s - m[i], s + m[i])
    return s


def signflip_tail_count(m, threshold, low_bits=12):
    m = np.ascontiguousarray(m, dtype=np.float64)
    n = m.shape[0]
    if n > 62:
        raise ValueError("sign-flip enumeration supports at most 62 observations")
    lo_n = min(low_bits, n)
    lo = _half_sums(m[:lo_n])
    hi = _half_sums(m[lo_n:])
    count = 0
    block = max(1, (1 << 20) // lo.shape[0])
    for start in range(0, hi.shape[0], block):
        part = hi[start:start + block]
        count += int(np.count_nonzero(part[:, None] + lo[None, :] >= threshold))
    return count
