"""Monte Carlo comparison of complete randomization, paired and threshold blocking.

A single covariate is drawn uniformly on [-5, 5]. Under the ``informative``
model ``y(1) = 2x^2 + e1`` and ``y(0) = 1.7x^2 + e0``; under ``noise`` both
potential outcomes are pure standard normal noise. For every covariate draw
each design builds its blocking once, then ``reps_per_sample`` balanced
randomizations are estimated and scored against three targets: the
population effect (PATE), the covariate-conditional effect (CATE) and the
sample effect (SATE).

Random streams are keyed by (sample index, purpose), so results do not
depend on the number of worker processes and the covariates (hence the
objective column) do not depend on the outcome model.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .core import Blocking, DesignSpec, InfeasibleDesignError, OutcomeModel, PotentialOutcomes, Sample
from .experiment import estimate_many, randomize_many
from .objectives import DEFAULT_OBJECTIVE, ObjectiveSpec, evaluate
from .optimizer import optimal_blocking_1d_array

MODELS = ("informative", "noise")
DESIGN_NAMES = ("complete", "fixed", "threshold")
MEASURES = ("objective", "pate", "cate", "sate")
COVARIATE_LOW, COVARIATE_HIGH = -5.0, 5.0

_STREAM_COVARIATES, _STREAM_NOISE, _STREAM_ASSIGN = 0, 1, 2


def outcome_model(model: str) -> OutcomeModel:
    if model == "informative":
        return OutcomeModel(
            mu0=lambda x: 1.7 * x[:, 0] ** 2,
            mu1=lambda x: 2.0 * x[:, 0] ** 2,
            conditional_sd=lambda x: np.ones(x.shape[0]),
        )
    if model == "noise":
        return OutcomeModel(
            mu0=lambda x: np.zeros(x.shape[0]),
            mu1=lambda x: np.zeros(x.shape[0]),
            conditional_sd=lambda x: np.ones(x.shape[0]),
        )
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def population_ate(model: str) -> float:
    """Population average effect: ``0.3 E[x^2] = 0.3 * 25/3`` or zero."""
    if model == "informative":
        return 0.3 * (COVARIATE_HIGH**3 - COVARIATE_LOW**3) / (3 * (COVARIATE_HIGH - COVARIATE_LOW))
    if model == "noise":
        return 0.0
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def draw_sample(model: str, n: int, rng: np.random.Generator,
                noise_rng: Optional[np.random.Generator] = None) -> tuple[Sample, PotentialOutcomes]:
    """Covariates and potential outcomes for one sample.

    Noise comes from ``noise_rng`` when given, so covariates can be shared
    across outcome models.
    """
    x = rng.uniform(COVARIATE_LOW, COVARIATE_HIGH, size=n)
    po = outcome_model(model).draw(x, noise_rng if noise_rng is not None else rng)
    return Sample.from_array(x), po


@dataclass(frozen=True)
class SimulationConfig:
    n: int = 12
    model: str = "informative"
    designs: tuple[str, ...] = DESIGN_NAMES
    size: int = 2
    objective: ObjectiveSpec = DEFAULT_OBJECTIVE
    num_samples: int = 10_000
    reps_per_sample: int = 10
    seed: int = 20240101
    threads: int = 1

    def __post_init__(self):
        if self.num_samples < 1 or self.reps_per_sample < 1:
            raise ValueError("num_samples and reps_per_sample must be at least 1")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        unknown = set(self.designs) - set(DESIGN_NAMES)
        if unknown:
            raise ValueError(f"unknown designs {sorted(unknown)}")
        if "fixed" in self.designs and self.n % self.size:
            raise InfeasibleDesignError(f"fixed-sized blocking infeasible: {self.n} not a multiple of {self.size}")
        if "threshold" in self.designs and self.n < self.size:
            raise InfeasibleDesignError(f"threshold blocking infeasible: {self.n} units")


@dataclass(frozen=True)
class DesignSummary:
    objective: float
    pate: float
    cate: float
    sate: float
    se: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    designs: dict[str, DesignSummary]

    def ratios(self, reference: str = "threshold") -> dict[str, dict[str, float]]:
        """Each design's measures divided by the reference design's."""
        if reference not in self.designs:
            return {}
        ref = self.designs[reference]
        return {
            name: {m: getattr(s, m) / getattr(ref, m) for m in MEASURES}
            for name, s in self.designs.items()
            if name != reference
        }

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["objective"] = {"kind": self.config.objective.kind.value, "metric": self.config.objective.metric.value}
        return {
            "schema": "blockbench/1",
            "kind": "simulation",
            "config": cfg,
            "designs": {k: asdict(v) for k, v in self.designs.items()},
            "ratios_to_threshold": self.ratios(),
        }


def _blocking(design: str, x: np.ndarray, config: SimulationConfig) -> Blocking:
    if design == "complete":
        return Blocking([range(len(x))])
    spec = DesignSpec(design, config.size, objective=config.objective)
    return optimal_blocking_1d_array(x, spec)


def _run_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    config, start, stop = args
    model = outcome_model(config.model)
    pate = population_ate(config.model)
    k = len(config.designs)
    m = stop - start
    objective = np.empty((m, k))
    mse = np.empty((m, k, 3))
    for row, i in enumerate(range(start, stop)):
        cov_rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(i, _STREAM_COVARIATES)))
        noise_rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(i, _STREAM_NOISE)))
        x = cov_rng.uniform(COVARIATE_LOW, COVARIATE_HIGH, size=config.n)
        po = model.draw(x, noise_rng)
        x2 = x[:, None]
        cate = float(np.mean(model.mean1(x2) - model.mean0(x2)))
        sate = float(np.mean(po.y1 - po.y0))
        for j, design in enumerate(config.designs):
            blocking = _blocking(design, x, config)
            objective[row, j] = evaluate(blocking, x2, config.objective)
            rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(i, _STREAM_ASSIGN, j)))
            treated = randomize_many(blocking, rng, config.reps_per_sample)
            est = estimate_many(blocking, treated, np.where(treated, po.y1, po.y0))
            errs = np.stack([est - pate, est - cate, est - sate])
            mse[row, j] = np.mean(errs**2, axis=1)
    return objective, mse


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, total, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_simulation(config: SimulationConfig) -> SimulationResult:
    """Simulate all designs on shared covariate draws and summarize MSEs."""
    threads = config.threads or os.cpu_count() or 1
    # fixed chunking keeps the reduction identical for any worker count
    chunks = _chunks(config.num_samples, max(1, min(64, config.num_samples)))
    jobs = [(config, a, b) for a, b in chunks]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    objective = np.concatenate([p[0] for p in parts])
    mse = np.concatenate([p[1] for p in parts])

    designs = {}
    s = config.num_samples
    for j, name in enumerate(config.designs):
        means = [float(np.mean(objective[:, j]))] + [float(np.mean(mse[:, j, t])) for t in range(3)]
        if s > 1:
            ses = [float(np.std(objective[:, j], ddof=1) / math.sqrt(s))] + [
                float(np.std(mse[:, j, t], ddof=1) / math.sqrt(s)) for t in range(3)
            ]
        else:
            ses = [None] * 4
        designs[name] = DesignSummary(*means, se=dict(zip(MEASURES, ses)))
    return SimulationResult(config, designs)


_LABELS = {"complete": "Complete rand.", "fixed": "Fixed-sized bl.", "threshold": "Threshold bl."}


def format_table(result: SimulationResult) -> str:
    """Aligned text table: ratios to threshold blocking, then raw values with standard errors."""
    lines = [f"n={result.config.n}  model={result.config.model}  samples={result.config.num_samples}"
             f"  reps={result.config.reps_per_sample}  seed={result.config.seed}"]
    header = f"{'Relative performance':<22}" + "".join(f"{m.upper() if m != 'objective' else 'Objective':>12}" for m in MEASURES)
    ratios = result.ratios()
    if ratios:
        lines += [header]
        for name, row in ratios.items():
            lines.append(f"{_LABELS[name]:<22}" + "".join(f"{row[m]:>12.4f}" for m in MEASURES))
        lines.append("")
    lines.append(f"{'Raw values (SE)':<22}" + "".join(f"{m.upper() if m != 'objective' else 'Objective':>22}" for m in MEASURES))
    for name, s in result.designs.items():
        cells = []
        for m in MEASURES:
            se = s.se.get(m)
            se_txt = "n/a" if se is None else f"{se:.2g}"
            cells.append(f"{getattr(s, m):.5g} ({se_txt})".rjust(22))
        lines.append(f"{_LABELS[name]:<22}" + "".join(cells))
    return "\n".join(lines)
