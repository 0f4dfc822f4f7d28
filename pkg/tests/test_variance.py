import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockbench.core import Blocking, DesignSpec, InfeasibleDesignError, Sample
from blockbench.enumeration import covariate_pattern_classes, format_pattern
from blockbench.variance import (
    BinaryOutcomeParams,
    binary_design_blocking,
    conditional_variance_binary,
    conditional_variance_general,
    enumerate_unconditional,
    enumerate_unconditional_draws,
    unconditional_variance_closed_form,
)


def brute_force_variance(blocking, mu, sigma2):
    """Var of the estimator given covariates, over every balanced assignment.

    Uses Var = E[Var(est | T)] + Var(E[est | T]) with a constant effect,
    which cancels from the variance.
    """
    n = blocking.n
    per_block = []
    for b in blocking.blocks:
        n_b = len(b)
        counts = [n_b // 2] if n_b % 2 == 0 else [n_b // 2, n_b // 2 + 1]
        options = []
        for t in counts:
            subsets = list(itertools.combinations(b, t))
            for s in subsets:
                ctrl = [i for i in b if i not in s]
                mean = np.mean(mu[list(s)]) - np.mean(mu[ctrl])
                var = np.sum(sigma2[list(s)]) / t**2 + np.sum(sigma2[ctrl]) / len(ctrl) ** 2
                options.append((1 / len(counts) / len(subsets), n_b / n * mean, (n_b / n) ** 2 * var))
        per_block.append(options)
    e_mean, e_mean2, e_var = 0.0, 0.0, 0.0
    for combo in itertools.product(*per_block):
        p = math.prod(c[0] for c in combo)
        m = sum(c[1] for c in combo)
        e_mean += p * m
        e_mean2 += p * m * m
        e_var += p * sum(c[2] for c in combo)
    return e_var + e_mean2 - e_mean**2


TABLE_VARIANCE = {
    "{{1,0}, {1,0}, {1,0}}": 4 / 3,
    "{{1,1}, {1,0}, {0,0}}": 8 / 9,
    "{{1,1,1}, {0,0,0}}": 0.75,
    "{{1,1,0}, {1,0,0}}": 1.25,
    "{{1,1,1,0}, {0,0}}": 8 / 9,
    "{{1,1,0,0}, {1,0}}": 32 / 27,
    "{{1,0,0,0}, {1,1}}": 8 / 9,
    "{{1,1,1,0,0,0}}": 16 / 15,
}


def test_binary_sample_variances():
    x = np.array([1, 1, 1, 0, 0, 0], dtype=float)
    params = BinaryOutcomeParams.with_predictiveness(1.0, 2.0)
    for cls in covariate_pattern_classes(Sample.from_array(x), DesignSpec.threshold(2)):
        got = conditional_variance_binary(cls.representative, x, params)
        assert got == pytest.approx(TABLE_VARIANCE[format_pattern(cls.pattern)], abs=1e-12)
        mu = params.mu0 + (params.mu1 - params.mu0) * x
        assert brute_force_variance(cls.representative, mu, np.ones(6)) == pytest.approx(got, abs=1e-12)


def test_less_predictive_covariate_flips_order():
    x = np.array([1, 1, 1, 0, 0, 0], dtype=float)
    triples = Blocking([[0, 1, 2], [3, 4, 5]])
    pairs = Blocking([[0, 1], [2, 3], [4, 5]])
    weak = BinaryOutcomeParams.with_predictiveness(1.0, 0.5)
    strong = BinaryOutcomeParams.with_predictiveness(1.0, 2.0)
    assert conditional_variance_binary(triples, x, weak) == pytest.approx(0.75)
    assert conditional_variance_binary(pairs, x, weak) == pytest.approx(0.7222, abs=1e-4)
    assert conditional_variance_binary(triples, x, strong) < conditional_variance_binary(pairs, x, strong)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 4), min_size=1, max_size=3), st.integers(0, 2**31 - 1))
def test_general_formula_matches_brute_force(sizes, seed):
    starts = np.cumsum([0] + sizes)
    b = Blocking([range(a, c) for a, c in zip(starts[:-1], starts[1:])])
    rng = np.random.default_rng(seed)
    mu = rng.normal(size=b.n) * 2
    s2 = rng.uniform(0.1, 2.0, size=b.n)
    assert conditional_variance_general(b, mu, s2) == pytest.approx(brute_force_variance(b, mu, s2), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=4, max_size=8), st.floats(0, 4), st.floats(0, 4), st.randoms(use_true_random=False))
def test_binary_formula_is_general_formula(bits, sigma2, d2, rnd):
    x = np.array(bits, dtype=float)
    n = len(x)
    order = list(range(n))
    rnd.shuffle(order)
    cut = rnd.randrange(2, n - 1) if n >= 4 else n
    b = Blocking([order[:cut], order[cut:]])
    params = BinaryOutcomeParams.with_predictiveness(sigma2, d2)
    mu = params.mu0 + (params.mu1 - params.mu0) * x
    assert conditional_variance_binary(b, x, params) == pytest.approx(
        conditional_variance_general(b, mu, sigma2), abs=1e-12)


def test_closed_forms_at_six_units():
    p = BinaryOutcomeParams.with_predictiveness(1.0, 2.0)
    assert unconditional_variance_closed_form("C", 6, p) == pytest.approx(6.0)
    assert unconditional_variance_closed_form("F2", 6, p) == pytest.approx(14 / 3)
    assert unconditional_variance_closed_form("T2", 6, p) == pytest.approx(4.40625)
    with pytest.raises(ValueError):
        unconditional_variance_closed_form("C", 5, p)


@pytest.mark.parametrize("method", ["C", "F2", "T2"])
@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_sum_keyed_expectation_matches_all_draws(method, n):
    p = BinaryOutcomeParams.with_predictiveness(1.5, 0.7)
    assert enumerate_unconditional(method, n, p) == pytest.approx(enumerate_unconditional_draws(method, n, p), abs=1e-12)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_threshold_mapping_is_surrogate_optimal(n):
    """The Σx-keyed threshold blocking attains the exhaustive optimum and its block count."""
    from blockbench.optimizer import optimal_blocking_exhaustive
    from blockbench.objectives import evaluate
    for k in range(n + 1):
        x = np.array([1.0] * k + [0.0] * (n - k))
        for method, design in (("T2", DesignSpec.threshold(2)), ("F2", DesignSpec.fixed(2))):
            mapped = binary_design_blocking(method, x)
            best, value = optimal_blocking_exhaustive(Sample.from_array(x), design)
            assert evaluate(mapped, x) == pytest.approx(value, abs=1e-12)
            assert len(mapped) == len(best)


def test_proposition_signs():
    for n in range(6, 21, 2):
        null = BinaryOutcomeParams.with_predictiveness(1.0, 0.0)
        assert unconditional_variance_closed_form("T2", n, null) > unconditional_variance_closed_form("C", n, null)
        informative = BinaryOutcomeParams.with_predictiveness(1.0, 1.0)  # 3*sigma2 < 4*delta2
        assert unconditional_variance_closed_form("T2", n, informative) < unconditional_variance_closed_form("F2", n, informative)


def test_singleton_blocks_rejected():
    with pytest.raises(InfeasibleDesignError):
        conditional_variance_general(Blocking([[0], [1, 2]]), np.zeros(3), 1.0)


def test_two_units_threshold_equals_pairs():
    p = BinaryOutcomeParams.with_predictiveness(1.0, 2.0)
    assert unconditional_variance_closed_form("T2", 2, p) == unconditional_variance_closed_form("F2", 2, p)
    assert unconditional_variance_closed_form("T2", 2, p) == pytest.approx(enumerate_unconditional("T2", 2, p))
