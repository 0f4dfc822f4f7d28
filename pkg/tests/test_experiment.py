import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockbench.core import Blocking, InfeasibleDesignError
from blockbench.experiment import (
    balanced_block_randomize,
    estimate,
    estimate_many,
    inverse_treated_moments,
    randomize_many,
)


def test_pairs_get_one_treated_and_triples_one_or_two():
    b = Blocking([[0, 1], [2, 3], [4, 5, 6]])
    for rep in range(50):
        a = balanced_block_randomize(b, seed=11, replication=rep)
        counts = a.treated_counts
        assert counts[:2] == [1, 1]
        assert counts[2] in (1, 2)


def test_randomization_is_deterministic():
    b = Blocking([[0, 1, 2], [3, 4]])
    assert balanced_block_randomize(b, 5, 3) == balanced_block_randomize(b, 5, 3)
    draws = {balanced_block_randomize(b, 5, r).indicators for r in range(40)}
    assert len(draws) > 1


def test_singleton_block_is_rejected():
    with pytest.raises(InfeasibleDesignError):
        balanced_block_randomize(Blocking([[0], [1, 2]]), 0)
    with pytest.raises(InfeasibleDesignError):
        randomize_many(Blocking([[0], [1, 2]]), np.random.default_rng(0), 3)


def test_estimate_hand_example():
    b = Blocking([[0, 1], [2, 3, 4]])
    treated = np.array([1, 0, 1, 1, 0], dtype=bool)
    y = np.array([5.0, 1.0, 4.0, 2.0, 0.0])
    # (2/5)*(5-1) + (3/5)*(3-0)
    assert estimate(b, treated, y) == pytest.approx(0.4 * 4 + 0.6 * 3)


def test_estimate_requires_both_arms():
    with pytest.raises(InfeasibleDesignError):
        estimate_many(Blocking([[0, 1]]), np.array([[True, True]]), np.zeros(2))


@pytest.mark.parametrize("n_b", [2, 3, 4, 5, 6, 7])
def test_inverse_treated_moments_closed_form(n_b):
    lo, hi = n_b // 2, (n_b + 1) // 2
    vals = np.array([1 / lo, 1 / hi])
    mean, sd = inverse_treated_moments(n_b)
    assert mean == pytest.approx(vals.mean())
    assert sd == pytest.approx(vals.std())


def test_unbiased_under_constant_effect():
    rng = np.random.default_rng(7)
    b = Blocking([[0, 1, 2], [3, 4], [5, 6, 7, 8, 9]])
    y0 = rng.normal(size=10) * 3
    delta = 1.25
    treated = randomize_many(b, rng, 100_000)
    est = estimate_many(b, treated, np.where(treated, y0 + delta, y0))
    se = est.std() / np.sqrt(len(est))
    assert abs(est.mean() - delta) < 4 * se


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 5), min_size=1, max_size=4), st.integers(0, 2**31 - 1))
def test_arm_swap_negates_estimate(sizes, seed):
    starts = np.cumsum([0] + sizes)
    b = Blocking([range(a, c) for a, c in zip(starts[:-1], starts[1:])])
    rng = np.random.default_rng(seed)
    y = rng.normal(size=b.n)
    t = randomize_many(b, rng, 1)[0]
    assert estimate(b, ~t, y) == pytest.approx(-estimate(b, t, y), abs=1e-12)


def test_membership_is_uniform_within_block():
    b = Blocking([[0, 1, 2]])
    t = randomize_many(b, np.random.default_rng(1), 60_000)
    np.testing.assert_allclose(t.mean(axis=0), 0.5, atol=0.01)
    np.testing.assert_allclose(np.bincount(t.sum(axis=1), minlength=3)[1:] / len(t), 0.5, atol=0.01)
