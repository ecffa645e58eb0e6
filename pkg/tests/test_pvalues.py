import itertools
from fractions import Fraction

import numpy as np
import pytest

from esym.pvalues import PValue, fisher_permutation_pvalue, sign_test_pvalue
from esym.symmetry import EnumerationCapError


def test_fisher_pvalue_darwin_matches_enumeration(darwin):
    mags = [abs(x) for x in darwin]
    observed = sum(darwin)
    count = sum(1 for s in itertools.product((1, -1), repeat=15)
                if sum(a * m for a, m in zip(s, mags)) >= observed)
    assert count == 863
    one = fisher_permutation_pvalue(darwin, "one_sided")
    two = fisher_permutation_pvalue(darwin, "two_sided")
    assert one.exact == Fraction(863, 32768)
    assert two.exact == 2 * one.exact
    assert round(one.value * 100, 3) == 2.634
    assert round(two.value * 100, 3) == 5.267


def test_fisher_pvalue_single_observation():
    assert fisher_permutation_pvalue([1.0]).value == 0.5
    assert fisher_permutation_pvalue([-1.0]).value == 1.0
    assert fisher_permutation_pvalue([-1.0], "two").value == 1.0


def test_fisher_pvalue_scale_invariant(rng):
    z = rng.normal(0.4, 1, size=12)
    assert fisher_permutation_pvalue(z).exact == fisher_permutation_pvalue(z * 37.5).exact


def test_fisher_pvalue_cap():
    with pytest.raises(EnumerationCapError):
        fisher_permutation_pvalue(np.ones(25))


def test_fisher_pvalue_monte_carlo_agrees(darwin):
    rng = np.random.default_rng(5)
    draws = 200_000
    signs = rng.choice([-1, 1], size=(draws, 15))
    hits = (signs @ np.abs(darwin) >= sum(darwin)).mean()
    exact = fisher_permutation_pvalue(darwin).value
    se = np.sqrt(exact * (1 - exact) / draws)
    assert abs(hits - exact) < 4 * se


def test_sign_pvalue_darwin(darwin):
    one = sign_test_pvalue(darwin, "one_sided")
    two = sign_test_pvalue(darwin, "two_sided")
    assert one.exact == Fraction(121, 32768)
    assert two.exact == Fraction(242, 32768)
    assert round(one.value, 5) == 0.00369
    assert round(two.value, 5) == 0.00739


def test_sign_pvalue_small():
    assert sign_test_pvalue([1.0]).value == 0.5
    assert sign_test_pvalue([-1.0, -2.0], "two").value == 1.0


def test_pvalue_bounds_and_doubling(rng):
    for _ in range(20):
        z = rng.normal(0, 1, size=int(rng.integers(1, 13)))
        for fn in (fisher_permutation_pvalue, sign_test_pvalue):
            one, two = fn(z, "one"), fn(z, "two")
            assert 0 < one.value <= 1 and 0 < two.value <= 1
            assert two.exact == min(1, 2 * one.exact)


def test_pvalue_validation():
    with pytest.raises(ValueError):
        PValue(1.5, "one_sided")
    with pytest.raises(ValueError):
        sign_test_pvalue([1.0], "three")
