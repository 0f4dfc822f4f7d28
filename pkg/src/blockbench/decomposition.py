"""Three-term decomposition of the normalized unconditional variance.

``n Var = 4 W1 + 4 W2 + 2 W3`` where W1 is the expected conditional outcome
variance, W2 the expected size-weighted within-block variance of predicted
outcomes, and W3 the penalty from a varying number of treated units in odd
blocks. Expectations are exact over a finite covariate distribution or
Monte Carlo over a sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Blocking, InfeasibleDesignError, OutcomeModel
from .experiment import inverse_treated_moments
from .variance import BinaryOutcomeParams, binary_representative, binomial_sum_distribution

DesignMapping = Callable[[np.ndarray], Blocking]


@dataclass(frozen=True)
class FiniteDistribution:
    """Covariate samples ``x`` (each ``(n, dim)`` or ``(n,)``) with probabilities."""

    support: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self):
        total = math.fsum(p for _, p in self.support)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")


@dataclass(frozen=True)
class SampledDistribution:
    """Monte Carlo covariate distribution: ``sampler(rng)`` returns one sample."""

    sampler: Callable[[np.random.Generator], np.ndarray]
    draws: int = 100_000
    seed: int = 0


def binary_fair_coin(n: int) -> FiniteDistribution:
    """``n`` independent fair-coin covariates, one representative per covariate sum."""
    return FiniteDistribution(tuple((binary_representative(n, k), p) for k, p in binomial_sum_distribution(n)))


def binary_model(params: BinaryOutcomeParams, effect: float = 0.0) -> OutcomeModel:
    d = params.mu1 - params.mu0
    return OutcomeModel(
        mu0=lambda x: params.mu0 + d * x[:, 0],
        conditional_sd=lambda x: np.full(x.shape[0], math.sqrt(params.sigma2)),
        constant_effect=effect,
    )


@dataclass(frozen=True)
class BlockDiagnostic:
    size: int
    mu_variance: float          # sample variance of predicted outcomes in the block
    inverse_treated_sd: float   # SD(1/T_b | n_b)
    expected_outcome_variance: float  # E(s^2_yb | x)


@dataclass(frozen=True)
class DrawDiagnostics:
    probability: float
    blocking: Blocking
    blocks: tuple[BlockDiagnostic, ...]


@dataclass(frozen=True)
class DecompositionReport:
    w1: float
    w2: float
    w3: float
    diagnostics: tuple[DrawDiagnostics, ...] = ()
    standard_errors: Optional[dict] = field(default=None)

    @property
    def total(self) -> float:
        return 4 * self.w1 + 4 * self.w2 + 2 * self.w3


def block_diagnostics(blocking: Blocking, mu: np.ndarray, sigma2: np.ndarray) -> tuple[BlockDiagnostic, ...]:
    out = []
    for b in blocking.blocks:
        idx = list(b)
        n_b = len(idx)
        if n_b < 2:
            raise InfeasibleDesignError("decomposition is undefined for a block of size 1")
        s_mu = float(np.var(mu[idx], ddof=1))
        sd = inverse_treated_moments(n_b)[1]
        out.append(BlockDiagnostic(n_b, s_mu, sd, float(np.mean(sigma2[idx])) + s_mu))
    return tuple(out)


def _terms(design: DesignMapping, x: np.ndarray, model: OutcomeModel):
    x2 = x[:, None] if x.ndim == 1 else x
    blocking = design(x)
    mu = model.mean0(x2)
    sigma2 = model.sd(x2) ** 2
    n = len(mu)
    diags = block_diagnostics(blocking, mu, sigma2)
    w1 = float(np.mean(sigma2))
    w2 = math.fsum(d.size / n * d.mu_variance for d in diags)
    w3 = math.fsum(d.size / n * d.inverse_treated_sd * d.expected_outcome_variance for d in diags)
    return (w1, w2, w3), blocking, diags


def decompose(design: DesignMapping, distribution, model: OutcomeModel) -> DecompositionReport:
    """W1, W2 and W3 for ``design`` under a covariate distribution and outcome model."""
    if isinstance(distribution, FiniteDistribution):
        acc = [[], [], []]
        diags = []
        for x, p in distribution.support:
            x = np.asarray(x, dtype=float)
            terms, blocking, d = _terms(design, x, model)
            for a, t in zip(acc, terms):
                a.append(p * t)
            diags.append(DrawDiagnostics(p, blocking, d))
        w1, w2, w3 = (math.fsum(a) for a in acc)
        return DecompositionReport(w1, w2, w3, tuple(diags))

    if isinstance(distribution, SampledDistribution):
        root = np.random.SeedSequence(distribution.seed)
        values = np.empty((distribution.draws, 3))
        for i, child in enumerate(root.spawn(distribution.draws)):
            x = np.asarray(distribution.sampler(np.random.default_rng(child)), dtype=float)
            values[i] = _terms(design, x, model)[0]
        means = values.mean(axis=0)
        ses = values.std(axis=0, ddof=1) / math.sqrt(distribution.draws) if distribution.draws > 1 else np.full(3, np.nan)
        total_se = float(np.std(values @ np.array([4.0, 4.0, 2.0]), ddof=1) / math.sqrt(distribution.draws)) \
            if distribution.draws > 1 else float("nan")
        return DecompositionReport(
            *map(float, means),
            standard_errors={"w1": float(ses[0]), "w2": float(ses[1]), "w3": float(ses[2]), "total": total_se},
        )
    raise TypeError("distribution must be a FiniteDistribution or SampledDistribution")


def w2_linear(design: DesignMapping, distribution, beta: Sequence[float], alpha: float = 0.0) -> float:
    """W2 under a linear predicted outcome ``alpha + x @ beta``.

    Equals ``beta' E[sum_b (n_b/n) Q_b] beta`` with ``Q_b`` the within-block
    sample covariance of the covariates. ``alpha`` drops out.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))

    def weighted_cov(x):
        x = np.asarray(x, dtype=float)
        x = x[:, None] if x.ndim == 1 else x
        if x.shape[1] != beta.shape[0]:
            raise ValueError(f"beta has {beta.shape[0]} entries but covariates have {x.shape[1]} columns")
        blocking = design(x if x.shape[1] > 1 else x[:, 0])
        n = x.shape[0]
        q = np.zeros((x.shape[1], x.shape[1]))
        for b in blocking.blocks:
            idx = list(b)
            if len(idx) < 2:
                raise InfeasibleDesignError("decomposition is undefined for a block of size 1")
            q += len(idx) / n * np.atleast_2d(np.cov(x[idx], rowvar=False, ddof=1))
        return q

    if isinstance(distribution, FiniteDistribution):
        expected = sum(p * weighted_cov(x) for x, p in distribution.support)
    elif isinstance(distribution, SampledDistribution):
        root = np.random.SeedSequence(distribution.seed)
        expected = sum(weighted_cov(distribution.sampler(np.random.default_rng(c))) for c in root.spawn(distribution.draws))
        expected = expected / distribution.draws
    else:
        raise TypeError("distribution must be a FiniteDistribution or SampledDistribution")
    return float(beta @ expected @ beta)
