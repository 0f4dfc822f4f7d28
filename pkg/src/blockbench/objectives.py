"""Covariate-balance objectives over blockings (lower is better)."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Blocking, Sample

ABS_TOL = 1e-12


class ObjectiveKind(str, enum.Enum):
    WEIGHTED_AVERAGE = "weighted-average"
    SUM = "sum"
    MAX = "max"


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "sqeuclidean"


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: ObjectiveKind = ObjectiveKind.WEIGHTED_AVERAGE
    metric: Metric = Metric.EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        object.__setattr__(self, "metric", Metric(self.metric))


DEFAULT_OBJECTIVE = ObjectiveSpec()


def pairwise_distance(a, b, metric: Metric = Metric.EUCLIDEAN) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sq = float(np.sum((a - b) ** 2))
    return sq if Metric(metric) is Metric.SQUARED_EUCLIDEAN else float(np.sqrt(sq))


def distance_matrix(x, metric: Metric = Metric.EUCLIDEAN) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    diff = x[:, None, :] - x[None, :, :]
    sq = np.sum(diff**2, axis=-1)
    return sq if Metric(metric) is Metric.SQUARED_EUCLIDEAN else np.sqrt(sq)


def _evaluate_with(dist, blocking: Blocking, n: int, kind: ObjectiveKind, zero):
    if kind is ObjectiveKind.MAX:
        best = zero
        for b in blocking:
            for i in b:
                for j in b:
                    if dist[i][j] > best:
                        best = dist[i][j]
        return best
    total = zero
    for b in blocking:
        pair_sum = zero
        for p, i in enumerate(b):
            for j in b[p + 1:]:
                pair_sum += dist[i][j]
        if kind is ObjectiveKind.SUM:
            total += pair_sum
        else:
            # (n_b / n) * (sum over ordered pairs incl. i == j) / n_b**2
            total += 2 * pair_sum / (n * len(b))
    return total


def evaluate(blocking: Blocking, sample: Sample | np.ndarray, spec: ObjectiveSpec = DEFAULT_OBJECTIVE) -> float:
    """Value of the objective ``spec`` for ``blocking`` on ``sample``'s covariates."""
    x = sample.covariates if isinstance(sample, Sample) else np.asarray(sample, dtype=float)
    d = distance_matrix(x, spec.metric)
    return float(_evaluate_with(d.tolist(), blocking, d.shape[0], spec.kind, 0.0))


def exact_distances(x, metric: Metric) -> list[list[Fraction]] | None:
    """Rational distance matrix when every distance is rational, else ``None``.

    Holds for integer covariates under the squared metric, and for a single
    integer covariate under the plain Euclidean metric.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if not np.all(x == np.round(x)):
        return None
    xi = x.astype(np.int64)
    metric = Metric(metric)
    if metric is Metric.EUCLIDEAN and xi.shape[1] != 1:
        return None
    n = xi.shape[0]
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            diff = xi[i] - xi[j]
            v = int(np.sum(diff * diff)) if metric is Metric.SQUARED_EUCLIDEAN else abs(int(diff[0]))
            out[i][j] = Fraction(v)
    return out


def evaluate_exact(blocking: Blocking, x, spec: ObjectiveSpec = DEFAULT_OBJECTIVE) -> Fraction | None:
    d = exact_distances(x, spec.metric)
    if d is None:
        return None
    return _evaluate_with(d, blocking, len(d), spec.kind, Fraction(0))
