"""Balanced block randomization and the within-block difference-in-means estimator."""

from __future__ import annotations

from typing import Union

import numpy as np

from .core import Assignment, Blocking, InfeasibleDesignError

Seed = Union[int, np.random.SeedSequence]


def _check_blocks(blocking: Blocking) -> None:
    small = [b for b in blocking.blocks if len(b) < 2]
    if small:
        raise InfeasibleDesignError(
            f"block of size {len(small[0])} cannot hold both treatment arms; the estimator is undefined"
        )


def block_stream(seed: Seed, replication: int, block_index: int) -> np.random.Generator:
    """Generator for one block of one replication, independent of iteration order."""
    entropy = seed.entropy if isinstance(seed, np.random.SeedSequence) else seed
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(replication, block_index)))


def _draw_block(rng: np.random.Generator, size: int) -> np.ndarray:
    treated = size // 2 + (size % 2) * int(rng.integers(2))
    chosen = rng.permutation(size)[:treated]
    out = np.zeros(size, dtype=bool)
    out[chosen] = True
    return out


def balanced_block_randomize(blocking: Blocking, seed: Seed, replication: int = 0) -> Assignment:
    """Draw one balanced block randomization.

    In every block, ``floor(n_b/2)`` or ``ceil(n_b/2)`` units (each with
    probability one half) are treated, chosen uniformly. Block ``k`` of
    replication ``r`` draws from its own stream keyed by ``(r, k)``.
    """
    _check_blocks(blocking)
    indicators = np.zeros(blocking.n, dtype=int)
    for k, block in enumerate(blocking.blocks):
        draw = _draw_block(block_stream(seed, replication, k), len(block))
        indicators[list(block)] = draw
    return Assignment(blocking, tuple(int(t) for t in indicators))


def randomize_many(blocking: Blocking, rng: np.random.Generator, reps: int) -> np.ndarray:
    """``reps`` independent balanced randomizations as a ``(reps, n)`` boolean array.

    Vectorized counterpart of :func:`balanced_block_randomize` for simulation
    loops; draws come from ``rng`` in block order.
    """
    _check_blocks(blocking)
    out = np.zeros((reps, blocking.n), dtype=bool)
    for block in blocking.blocks:
        size = len(block)
        treated = size // 2 + (size % 2) * rng.integers(2, size=reps)
        ranks = np.argsort(np.argsort(rng.random((reps, size)), axis=1), axis=1)
        out[:, list(block)] = ranks < np.asarray(treated).reshape(-1, 1)
    return out


def estimate(blocking: Blocking, assignment: Union[Assignment, np.ndarray], observed) -> float:
    """Size-weighted average of within-block treated-minus-control mean differences."""
    treated = assignment.as_array() if isinstance(assignment, Assignment) else np.asarray(assignment, dtype=bool)
    return float(estimate_many(blocking, treated[None, :], np.asarray(observed, dtype=float))[0])


def estimate_many(blocking: Blocking, treated: np.ndarray, observed: np.ndarray) -> np.ndarray:
    """Vectorized estimator over rows of ``treated`` (and of ``observed`` if 2-D)."""
    treated = np.asarray(treated, dtype=bool)
    observed = np.broadcast_to(np.asarray(observed, dtype=float), treated.shape)
    n = blocking.n
    total = np.zeros(treated.shape[0])
    for block in blocking.blocks:
        idx = list(block)
        t = treated[:, idx]
        y = observed[:, idx]
        n_t = t.sum(axis=1)
        n_c = len(idx) - n_t
        if np.any(n_t == 0) or np.any(n_c == 0):
            raise InfeasibleDesignError("a block has no treated or no control units")
        diff = (y * t).sum(axis=1) / n_t - (y * ~t).sum(axis=1) / n_c
        total += len(idx) / n * diff
    return total


def inverse_treated_moments(n_b: int) -> tuple[float, float]:
    """Mean and standard deviation of ``1/T_b`` under balanced randomization."""
    o = n_b % 2
    return 2 * n_b / (n_b**2 - o), 2 * o / (n_b**2 - 1)

