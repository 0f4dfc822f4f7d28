"""Optimal fixed-sized and threshold blockings.

Two solvers are provided. The exhaustive solver scans every admissible
blocking and works for any covariate dimension and objective, but only for
small samples. The one-dimensional solver sweeps units in sorted covariate
order and is exact for Euclidean weighted-average and sum objectives; it
does not assume that optimal blocks are contiguous in that order (they need
not be).

Ties in the objective are broken by the smallest mean block size (i.e. the
most blocks). The exhaustive solver resolves remaining ties by canonical
lexicographic order; the sweep keeps the first optimum its fixed transition
order reaches.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Blocking, DesignSpec, InfeasibleDesignError, Method, Sample
from .enumeration import DEFAULT_MAX_BLOCKINGS, iter_block_tuples
from .objectives import (
    ABS_TOL,
    DEFAULT_OBJECTIVE,
    Metric,
    ObjectiveKind,
    ObjectiveSpec,
    distance_matrix,
    evaluate,
    exact_distances,
)


@dataclass(frozen=True)
class Optimum:
    blocking: Blocking
    value: float
    solver: str


def _objective(design: DesignSpec) -> ObjectiveSpec:
    return design.objective if design.objective is not None else DEFAULT_OBJECTIVE


def check_feasible(n: int, design: DesignSpec) -> None:
    if design.method is Method.FIXED and n % design.size != 0:
        raise InfeasibleDesignError(f"fixed-sized blocking infeasible: {n} not a multiple of {design.size}")
    if design.method is Method.THRESHOLD and n < design.size:
        raise InfeasibleDesignError(f"threshold blocking infeasible: {n} units is below the size requirement {design.size}")


def _block_cost(dist, block, n: int, kind: ObjectiveKind):
    if kind is ObjectiveKind.MAX:
        return max((dist[i][j] for i in block for j in block), default=0)
    pair_sum = sum(dist[i][j] for p, i in enumerate(block) for j in block[p + 1:])
    if kind is ObjectiveKind.SUM:
        return pair_sum
    return 2 * pair_sum / (n * len(block))


def _better(value, nblocks, blocks, best) -> bool:
    """Tie-break order: objective value, then more blocks, then canonical order."""
    if best is None:
        return True
    b_value, b_nblocks, b_blocks = best
    exact = isinstance(value, Fraction) and isinstance(b_value, Fraction)
    if exact:
        if value != b_value:
            return value < b_value
    elif abs(value - b_value) > ABS_TOL:
        return value < b_value
    if nblocks != b_nblocks:
        return nblocks > b_nblocks
    return blocks < b_blocks


def optimal_blocking_exhaustive(
    sample: Sample, design: DesignSpec, max_blockings: int = DEFAULT_MAX_BLOCKINGS
) -> tuple[Blocking, float]:
    """Global minimizer of the design's objective over all admissible blockings."""
    n = sample.n
    check_feasible(n, design)
    spec = _objective(design)
    x = sample.covariates
    dist = exact_distances(x, spec.metric)
    if dist is None:
        dist = distance_matrix(x, spec.metric).tolist()
    cache: dict = {}
    best = None
    use_max = spec.kind is ObjectiveKind.MAX
    for blocks in iter_block_tuples(n, design, max_blockings):
        costs = []
        for b in blocks:
            c = cache.get(b)
            if c is None:
                c = cache[b] = _block_cost(dist, b, n, spec.kind)
            costs.append(c)
        value = max(costs) if use_max else sum(costs)
        if _better(value, len(blocks), blocks, best):
            best = (value, len(blocks), blocks)
    if best is None:
        raise InfeasibleDesignError("no admissible blocking")
    return Blocking(best[2]), float(best[0])


def _sorted_order(x: np.ndarray) -> np.ndarray:
    # equal covariates keep unit-index order
    return np.lexsort((np.arange(len(x)), x))


def optimal_blocking_1d(sample: Sample, design: DesignSpec) -> tuple[Blocking, float]:
    """Exact optimum for a single covariate under a Euclidean distance objective.

    Units are swept in sorted covariate order. In one dimension a block's
    pair-distance sum is ``sum_q v_q (2q - k + 1)`` over its sorted members,
    so once a block's final size ``k`` is fixed at opening time every member
    contributes independently. The dynamic program therefore tracks only how
    many blocks of each (final size, members so far) type are open. Splitting
    a block of ``2S`` or more units never raises the objective, so under the
    smallest-mean-size tie-break only sizes ``S..2S-1`` need to be considered.
    """
    if sample.dim != 1:
        raise ValueError("the one-dimensional solver needs exactly one covariate")
    blocking = optimal_blocking_1d_array(sample.covariates[:, 0], design)
    return blocking, evaluate(blocking, sample, _objective(design))


def optimal_blocking_1d_array(x: np.ndarray, design: DesignSpec) -> Blocking:
    """Array-level core of :func:`optimal_blocking_1d` (no Sample construction)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    check_feasible(n, design)
    spec = _objective(design)
    if spec.kind is ObjectiveKind.MAX or Metric(spec.metric) is not Metric.EUCLIDEAN:
        raise ValueError("the one-dimensional solver supports Euclidean weighted-average and sum objectives only")
    if design.method is Method.COMPLETE:
        return Blocking([range(n)])
    S = design.size
    sizes = [S] if design.method is Method.FIXED else list(range(S, 2 * S))
    # open-block types (final size k, members so far q), 1 <= q < k
    types = [(k, q) for k in sizes for q in range(1, k)]
    slot = {t: i for i, t in enumerate(types)}
    need = [k - q for k, q in types]
    weight = {k: (1.0 if spec.kind is ObjectiveKind.SUM else 2.0 / (n * k)) for k in sizes}

    order = _sorted_order(x)
    v = x[order]
    empty = (0,) * len(types)
    layer = {empty: (0.0, 0)}
    history = []
    for p in range(n):
        remaining = n - p - 1
        nxt: dict = {}
        back: dict = {}

        def push(state, value, nb, prev, action):
            if sum(c * r for c, r in zip(state, need)) > remaining:
                return
            cur = nxt.get(state)
            if cur is not None:
                if value > cur[0] + ABS_TOL:
                    return
                if abs(value - cur[0]) <= ABS_TOL and nb <= cur[1]:
                    return
            nxt[state] = (value, nb)
            back[state] = (prev, action)

        for state, (value, nb) in layer.items():
            for k in sizes:
                contrib = v[p] * (1 - k) * weight[k]
                if k == 1:
                    push(state, value + contrib, nb + 1, state, ("open", k))
                    continue
                new = list(state)
                new[slot[(k, 1)]] += 1
                push(tuple(new), value + contrib, nb + 1, state, ("open", k))
            for i, (k, q) in enumerate(types):
                if state[i] == 0:
                    continue
                new = list(state)
                new[i] -= 1
                if q + 1 < k:
                    new[slot[(k, q + 1)]] += 1
                push(tuple(new), value + v[p] * (2 * q - k + 1) * weight[k], nb, state, ("join", (k, q)))
        history.append(back)
        layer = nxt
    if empty not in layer:
        raise InfeasibleDesignError("no admissible blocking")

    actions = []
    state = empty
    for back in reversed(history):
        prev, action = back[state]
        actions.append(action)
        state = prev
    actions.reverse()

    blocks: list[list[int]] = []
    waiting: dict = {}
    for p, (kind, arg) in enumerate(actions):
        unit = int(order[p])
        if kind == "open":
            blocks.append([unit])
            if arg > 1:
                waiting.setdefault((arg, 1), []).append(len(blocks) - 1)
        else:
            k, q = arg
            b = waiting[(k, q)].pop(0)
            blocks[b].append(unit)
            if q + 1 < k:
                waiting.setdefault((k, q + 1), []).append(b)
    return Blocking(blocks)


def optimal_blocking(
    sample: Sample,
    design: DesignSpec,
    solver: str = "auto",
    max_blockings: int = DEFAULT_MAX_BLOCKINGS,
) -> Optimum:
    """Dispatch to a solver.

    ``auto`` uses the dynamic program for one covariate with a supported
    objective and falls back to exhaustive search otherwise.
    """
    if design.method is Method.COMPLETE:
        blocking = Blocking([range(sample.n)])
        return Optimum(blocking, evaluate(blocking, sample, _objective(design)), "complete")
    spec = _objective(design)
    dp_ok = sample.dim == 1 and spec.kind is not ObjectiveKind.MAX and spec.metric is Metric.EUCLIDEAN
    if solver == "auto":
        solver = "dp" if dp_ok else "exhaustive"
    if solver == "dp":
        blocking, value = optimal_blocking_1d(sample, design)
    elif solver == "exhaustive":
        blocking, value = optimal_blocking_exhaustive(sample, design, max_blockings)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return Optimum(blocking, value, solver)


@dataclass(frozen=True)
class DominanceReport:
    threshold_value: float
    fixed_value: float
    threshold_blocking: Blocking
    fixed_blocking: Blocking

    @property
    def holds(self) -> bool:
        return self.threshold_value <= self.fixed_value + ABS_TOL

    @property
    def strict(self) -> bool:
        return self.threshold_value < self.fixed_value - ABS_TOL


def assert_dominance(
    sample: Sample,
    size: int,
    objective: Optional[ObjectiveSpec] = None,
    solver: str = "exhaustive",
    max_blockings: int = DEFAULT_MAX_BLOCKINGS,
) -> DominanceReport:
    """Compare the optimal threshold and fixed-sized blockings of one sample.

    Raises ``AssertionError`` if the threshold optimum is worse.
    """
    if sample.n % size != 0:
        raise InfeasibleDesignError(f"fixed-sized blocking infeasible: {sample.n} not a multiple of {size}")
    t = optimal_blocking(sample, DesignSpec.threshold(size, objective=objective), solver, max_blockings)
    f = optimal_blocking(sample, DesignSpec.fixed(size, objective=objective), solver, max_blockings)
    report = DominanceReport(t.value, f.value, t.blocking, f.blocking)
    if not report.holds:
        raise AssertionError(f"threshold optimum {t.value} exceeds fixed-sized optimum {f.value}")
    return report
