"""Analytic conditional and unconditional variances of the block estimator.

All formulas assume two treatment arms, balanced block randomization and a
constant treatment effect. Unconditional results are normalized (``n * Var``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Blocking, InfeasibleDesignError

DESIGNS = ("C", "F2", "T2")


@dataclass(frozen=True)
class BinaryOutcomeParams:
    """Outcome model for one binary covariate with constant conditional variance.

    ``mu0`` and ``mu1`` are the expected control outcomes at ``x = 0`` and
    ``x = 1``; their squared difference measures how predictive ``x`` is.
    """

    sigma2: float
    mu0: float = 0.0
    mu1: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")

    @classmethod
    def with_predictiveness(cls, sigma2: float, delta_mu_sq: float) -> "BinaryOutcomeParams":
        if delta_mu_sq < 0:
            raise ValueError("squared mean difference must be nonnegative")
        return cls(sigma2, 0.0, math.sqrt(delta_mu_sq))

    @property
    def delta_mu_sq(self) -> float:
        return (self.mu1 - self.mu0) ** 2


def _require_pairs_or_more(blocking: Blocking) -> None:
    if any(len(b) < 2 for b in blocking.blocks):
        raise InfeasibleDesignError("variance is undefined for a block of size 1")


def odd_block_inflation(n_b: int) -> float:
    """The ``1 + o_b / (n_b^2 - 1)`` factor for a block of ``n_b`` units."""
    return 1.0 + (n_b % 2) / (n_b**2 - 1)


def conditional_variance_general(blocking: Blocking, mu, sigma2) -> float:
    """Variance of the estimator given covariates, for arbitrary per-unit moments.

    ``mu`` and ``sigma2`` hold each unit's conditional mean and variance of the
    control outcome (``sigma2`` may be a scalar).
    """
    _require_pairs_or_more(blocking)
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=float), mu.shape)
    n = blocking.n
    total = 0.0
    for b in blocking.blocks:
        idx = list(b)
        n_b = len(idx)
        m = mu[idx]
        spread = float(np.sum((m[:, None] - m[None, :]) ** 2)) / (2 * n_b * (n_b - 1))
        total += n_b / n * odd_block_inflation(n_b) * (float(np.sum(sigma2[idx])) / n_b + spread)
    return 4.0 / n * total


def conditional_variance_binary(blocking: Blocking, x, params: BinaryOutcomeParams) -> float:
    """Variance given a binary covariate, via each block's sample variance of ``x``."""
    _require_pairs_or_more(blocking)
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("covariate must be binary (0/1)")
    n = blocking.n
    total = 0.0
    for b in blocking.blocks:
        n_b = len(b)
        s2 = float(np.var(x[list(b)], ddof=1))
        total += n_b / n * odd_block_inflation(n_b) * (params.sigma2 + s2 * params.delta_mu_sq)
    return 4.0 / n * total


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"n must be an even integer >= 2, got {n}")


def unconditional_variance_closed_form(method: str, n: int, params: BinaryOutcomeParams) -> float:
    """Normalized unconditional variance for a fair-coin binary covariate.

    The three-term threshold expression holds for ``n >= 4``. With two units
    the only admissible blocking is the pair, so threshold and paired
    blocking coincide.
    """
    _check_even(n)
    s2, d2 = params.sigma2, params.delta_mu_sq
    if method == "C":
        return 4 * s2 + d2
    if method == "F2":
        return 4 * s2 + 2 * d2 / n
    if method == "T2":
        if n == 2:
            return 4 * s2 + d2
        return 4 * s2 + 8 * d2 / 2**n + 3 * (2 ** (n - 1) - 2 * n) * s2 / (2**n * n)
    raise ValueError(f"unknown method {method!r}; expected one of {DESIGNS}")


def binary_representative(n: int, ones: int) -> np.ndarray:
    """Covariate vector with ``ones`` leading ones, standing for every draw with that sum."""
    return np.array([1.0] * ones + [0.0] * (n - ones))


def _runs(start: int, sizes: list[int]) -> list[list[int]]:
    out, i = [], start
    for s in sizes:
        out.append(list(range(i, i + s)))
        i += s
    return out


def binary_design_blocking(method: str, x) -> Blocking:
    """Blocking produced by a design for a binary covariate vector.

    Complete randomization uses one block. Paired blocking makes homogeneous
    pairs plus, when the number of ones is odd, one mixed pair. Threshold
    blocking (size two, ties broken towards smaller blocks) makes homogeneous
    pairs, replaces one pair per value by a triple when the number of ones is
    odd, and falls back to one mixed pair when a value occurs only once.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = len(x)
    _check_even(n)
    ones = [i for i in range(n) if x[i] == 1]
    zeros = [i for i in range(n) if x[i] == 0]
    if len(ones) + len(zeros) != n:
        raise ValueError("covariate must be binary (0/1)")
    if method == "C":
        return Blocking([range(n)])
    k = len(ones)
    if method not in ("F2", "T2"):
        raise ValueError(f"unknown method {method!r}; expected one of {DESIGNS}")
    if k % 2 == 0:
        sizes1, sizes0, mixed = [2] * (k // 2), [2] * ((n - k) // 2), False
    elif method == "T2" and 3 <= k <= n - 3:
        sizes1, sizes0, mixed = [3] + [2] * ((k - 3) // 2), [3] + [2] * ((n - k - 3) // 2), False
    else:
        sizes1, sizes0, mixed = [2] * ((k - 1) // 2), [2] * ((n - k - 1) // 2), True
    blocks = [[ones[i] for i in r] for r in _runs(0, sizes1)]
    blocks += [[zeros[i] for i in r] for r in _runs(0, sizes0)]
    if mixed:
        blocks.append([ones[-1], zeros[-1]])
    return Blocking(blocks)


def binomial_sum_distribution(n: int) -> list[tuple[int, float]]:
    """``(k, Pr(sum = k))`` for ``n`` fair coins."""
    return [(k, math.comb(n, k) / 2**n) for k in range(n + 1)]


def enumerate_unconditional(method: str, n: int, params: BinaryOutcomeParams) -> float:
    """Normalized unconditional variance by exact expectation over covariate draws.

    Every design's blocking depends on a binary sample only through its sum,
    so the expectation runs over the binomial distribution of that sum.
    """
    _check_even(n)
    return math.fsum(
        p * n * conditional_variance_binary(binary_design_blocking(method, binary_representative(n, k)),
                                            binary_representative(n, k), params)
        for k, p in binomial_sum_distribution(n)
    )


def enumerate_unconditional_draws(method: str, n: int, params: BinaryOutcomeParams,
                                  design: Callable[[np.ndarray], Blocking] | None = None) -> float:
    """Same expectation over all ``2**n`` raw draws (slow; for cross-checks)."""
    _check_even(n)
    design = design or (lambda x: binary_design_blocking(method, x))
    total = []
    for code in range(2**n):
        x = np.array([(code >> i) & 1 for i in range(n)], dtype=float)
        total.append(n * conditional_variance_binary(design(x), x, params))
    return math.fsum(total) / 2**n
