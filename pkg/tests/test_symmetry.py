import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esym.etests import batched_e, delapena_e, fisher_e
from esym.symmetry import (
    EnumerationCapError,
    RngSeed,
    Sample,
    SignVector,
    Summary,
    kernel_expectation,
    kernel_sample,
    kernel_sample_batch,
    summarize,
    verify_e_variable,
)


def test_sample_rejects_zero_and_nonfinite():
    with pytest.raises(ValueError, match="index 1"):
        Sample([1.0, 0.0])
    with pytest.raises(ValueError):
        Sample([1.0, math.nan])
    with pytest.raises(ValueError):
        Sample([])


def test_summarize_examples(darwin):
    assert summarize([1, -2, 3]).magnitudes.tolist() == [1, 2, 3]
    assert summarize([-5]).magnitudes.tolist() == [5]
    assert summarize(darwin).magnitudes.tolist() == [abs(x) for x in darwin]


def test_sign_vector_apply():
    s = SignVector((1, -1, -1)).apply(Summary([1, 2, 3]))
    assert s.values.tolist() == [1, -2, -3]
    with pytest.raises(ValueError):
        SignVector((0, 1))


def test_kernel_expectation_examples():
    m = Summary([1, 2, 3])
    assert kernel_expectation(lambda s: 1.0, m) == 1.0
    assert kernel_expectation(lambda s: float(s.values.sum()), m) == 0.0
    # independent oracle: itertools over the 8 flips
    oracle = sum(math.exp(0.7 * (a + 2 * b + 3 * c)) for a, b, c in itertools.product((1, -1), repeat=3)) / 8
    direct = kernel_expectation(lambda s: fisher_e(0.7, s).value, m)
    assert direct == pytest.approx(1.0, abs=1e-12)
    # E = exp(0.7 S) / oracle, so the mean of unnormalized exp(0.7 S) is the oracle itself
    assert kernel_expectation(lambda s: math.exp(0.7 * s.values.sum()), m) == pytest.approx(oracle, rel=1e-14)


def test_kernel_expectation_batched_matches_scalar(rng):
    m = Summary(np.abs(rng.normal(size=7)))
    f = batched_e("fisher", 1.3)
    assert kernel_expectation(f, m, batched=True) == pytest.approx(
        kernel_expectation(lambda s: fisher_e(1.3, s).value, m), rel=1e-13)


def test_kernel_expectation_cap():
    with pytest.raises(EnumerationCapError, match="Monte Carlo"):
        kernel_expectation(lambda s: 1.0, Summary(np.ones(25)))
    with pytest.raises(EnumerationCapError):
        kernel_expectation(lambda s: 1.0, Summary(np.ones(5)), cap=4)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.01, 5), min_size=2, max_size=8), st.randoms(use_true_random=False))
def test_kernel_expectation_permutation_invariant(mags, rnd):
    shuffled = list(mags)
    rnd.shuffle(shuffled)
    f = batched_e("fisher", 0.9)
    a = kernel_expectation(lambda r: np.exp(np.abs(r.sum(axis=1))), Summary(mags), batched=True)
    b = kernel_expectation(lambda r: np.exp(np.abs(r.sum(axis=1))), Summary(shuffled), batched=True)
    assert a == pytest.approx(b, rel=1e-12)
    assert kernel_expectation(f, Summary(mags), batched=True) == pytest.approx(1.0, abs=1e-12)


def test_kernel_sample_single_observation_sees_both_signs():
    seen = {float(kernel_sample(Summary([1.0]), RngSeed(7, s)).values[0]) for s in range(40)}
    assert seen == {1.0, -1.0}


def test_kernel_sample_deterministic():
    m = Summary([1, 2, 3, 4])
    a = kernel_sample(m, RngSeed(99, 3))
    b = kernel_sample(m, RngSeed(99, 3))
    assert a == b
    np.testing.assert_array_equal(kernel_sample_batch(m, RngSeed(5), 50),
                                  kernel_sample_batch(m, RngSeed(5), 50))


def test_kernel_sample_frequencies():
    draws = 100_000
    rows = kernel_sample_batch(Summary([1, 2]), RngSeed(2024), draws)
    codes = (rows[:, 0] > 0).astype(int) * 2 + (rows[:, 1] > 0).astype(int)
    freq = np.bincount(codes, minlength=4) / draws
    sigma = math.sqrt(0.25 * 0.75 / draws)
    assert np.all(np.abs(freq - 0.25) < 3 * sigma)


def test_monte_carlo_reproduces_exact_expectation():
    m = Summary([0.3, 1.1, 0.7, 2.0])
    f = lambda rows: np.tanh(rows.sum(axis=1)) + rows[:, 0] ** 2
    exact = kernel_expectation(f, m, batched=True)
    draws = (2**m.n) * 1000
    vals = f(kernel_sample_batch(m, RngSeed(31), draws))
    se = vals.std(ddof=1) / math.sqrt(draws)
    assert abs(vals.mean() - exact) < 4 * se


def test_verify_e_variable_examples():
    for lam in (0.1, 1.0, 5.0):
        rep = verify_e_variable(lambda s: fisher_e(lam, s).value, Summary([0.4, 1.7, 2.2]))
        assert rep.is_e_variable and rep.is_admissible
    rep = verify_e_variable(lambda s: delapena_e(1.0, s).value, Summary([1, 2, 3]))
    assert rep.is_e_variable and not rep.is_admissible and rep.mean < 1
    rep = verify_e_variable(lambda s: 1.5, Summary([1, 2]))
    assert not rep.is_e_variable and not rep.is_admissible


def test_rng_seed_streams_differ():
    a = RngSeed(1, 0).generator().standard_normal(5)
    b = RngSeed(1, 1).generator().standard_normal(5)
    c = RngSeed(1, 0).child(3).generator().standard_normal(5)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ValueError):
        RngSeed(-1)
