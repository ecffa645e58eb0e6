# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. ``_fallback.py`` mirrors every function here."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

BACKEND = "cython"


cdef inline void _fen_add(long long *tree, Py_ssize_t size, Py_ssize_t pos) noexcept nogil:
    pos += 1
    while pos <= size:
        tree[pos] += 1
        pos += pos & (-pos)


cdef inline long long _fen_prefix(long long *tree, Py_ssize_t pos) noexcept nogil:
    # count of inserted positions strictly below ``pos``
    cdef long long total = 0
    while pos > 0:
        total += tree[pos]
        pos -= pos & (-pos)
    return total


def signed_rank_prefix_sums(double[:, ::1] z, long long[::1] ns):
    """Wilcoxon ``V`` of every row prefix ``z[r, :n]`` for each ``n`` in ``ns``.

    ``ns`` must be ascending and bounded by ``z.shape[1]``. Each row is swept
    once; two Fenwick trees over the row's magnitude order track how many
    observations (all, and positive only) sit below the newcomer.
    """
    cdef Py_ssize_t reps = z.shape[0], width = z.shape[1], nq = ns.shape[0]
    cdef Py_ssize_t r, j, q, pos
    cdef long long v, below, pos_above, n_pos
    out = np.zeros((reps, nq), dtype=np.int64)
    cdef long long[:, ::1] res = out
    if nq == 0 or reps == 0:
        return out
    if ns[nq - 1] > width:
        raise ValueError("prefix length exceeds sample width")
    order = np.argsort(np.abs(np.asarray(z)), axis=1, kind="stable")
    slot_arr = np.empty((reps, width), dtype=np.int64)
    np.put_along_axis(slot_arr, order, np.arange(width, dtype=np.int64)[None, :], axis=1)
    cdef long long[:, ::1] slot = slot_arr
    cdef long long *all_tree = <long long *> malloc((width + 1) * sizeof(long long))
    cdef long long *pos_tree = <long long *> malloc((width + 1) * sizeof(long long))
    if all_tree == NULL or pos_tree == NULL:
        free(all_tree)
        free(pos_tree)
        raise MemoryError()
    try:
        with nogil:
            for r in range(reps):
                memset(all_tree, 0, (width + 1) * sizeof(long long))
                memset(pos_tree, 0, (width + 1) * sizeof(long long))
                v = 0
                n_pos = 0
                q = 0
                for j in range(width):
                    while q < nq and ns[q] == j:
                        res[r, q] = v
                        q += 1
                    if q == nq:
                        break
                    pos = slot[r, j]
                    below = _fen_prefix(all_tree, pos)
                    pos_above = n_pos - _fen_prefix(pos_tree, pos)
                    v += pos_above
                    if z[r, j] > 0:
                        v += below + 1
                        n_pos += 1
                        _fen_add(pos_tree, width, pos)
                    _fen_add(all_tree, width, pos)
                while q < nq:
                    res[r, q] = v
                    q += 1
    finally:
        free(all_tree)
        free(pos_tree)
    return out


def signflip_tail_count(double[::1] m, double threshold, int low_bits=12):
    """Number of sign vectors ``j`` with ``sum(j * m) >= threshold``.

    Sums are assembled as ``high_part + low_part`` from two tables whose entries
    are each accumulated in index order, so the arithmetic matches the
    fallback exactly.
    """
    cdef Py_ssize_t n = m.shape[0]
    if n > 62:
        raise ValueError("sign-flip enumeration supports at most 62 observations")
    cdef int lo_n = low_bits if n > low_bits else <int> n
    lo_tab = _half_sums(np.asarray(m[:lo_n]))
    hi_tab = _half_sums(np.asarray(m[lo_n:]))
    cdef double[::1] lo = lo_tab
    cdef double[::1] hi = hi_tab
    cdef Py_ssize_t a, b, nlo = lo.shape[0], nhi = hi.shape[0]
    cdef long long count = 0
    with nogil:
        for a in range(nhi):
            for b in range(nlo):
                if hi[a] + lo[b] >= threshold:
                    count += 1
    return int(count)


def _half_sums(m):
    """All ``2**len(m)`` signed sums; bit ``i`` of the index set means ``-m[i]``."""
    m = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], size = 1 << n, idx, i
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] mv = m
    cdef double s
    with nogil:
        for idx in range(size):
            s = 0.0
            for i in range(n):
                if (idx >> i) & 1:
                    s = s - mv[i]
                else:
                    s = s + mv[i]
            o[idx] = s
    return out
