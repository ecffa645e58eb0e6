"""Compiled and fallback kernels must agree bit for bit."""

import itertools

import numpy as np
import pytest

from esym import kernels

BACKENDS = kernels.available_backends()


def brute_signed_rank(row):
    mags = np.abs(row)
    ranks = np.argsort(np.argsort(mags)) + 1
    return int(ranks[row > 0].sum())


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_signed_rank_prefix_sums_against_bruteforce(name, rng):
    z = rng.normal(0.2, 1.0, size=(40, 30))
    ns = np.array([0, 1, 2, 7, 7, 19, 30], dtype=np.int64)
    out = BACKENDS[name].signed_rank_prefix_sums(z, ns)
    for r in range(z.shape[0]):
        for q, n in enumerate(ns):
            assert out[r, q] == (brute_signed_rank(z[r, :n]) if n else 0)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_signed_rank_prefix_width_check(name):
    with pytest.raises(ValueError):
        BACKENDS[name].signed_rank_prefix_sums(np.ones((2, 3)), np.array([4], dtype=np.int64))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_signflip_tail_count_against_itertools(name, rng):
    m = np.abs(rng.normal(size=9))
    sums = [float(np.dot(s, m)) for s in itertools.product((1, -1), repeat=9)]
    for thr in (-10.0, -0.5, 0.0, 0.7, 2.0, 100.0):
        assert BACKENDS[name].signflip_tail_count(m, thr) == sum(s >= thr for s in sums)


def test_backends_agree_on_large_inputs(rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    z = rng.normal(0.1, 1.0, size=(300, 250))
    ns = np.array([10, 100, 249, 250], dtype=np.int64)
    np.testing.assert_array_equal(py.signed_rank_prefix_sums(z, ns),
                                  cy.signed_rank_prefix_sums(z, ns))
    m = np.abs(rng.normal(size=18))
    for thr in (0.0, 1.3, 4.0):
        assert py.signflip_tail_count(m, thr) == cy.signflip_tail_count(m, thr)


def test_backend_is_reported():
    assert kernels.BACKEND in BACKENDS
