"""Fixed-sized and threshold blocking for randomized experiments.

Optimal blockings under covariate-distance objectives, balanced block
randomization, exact variance results for a binary covariate, a variance
decomposition and a Monte Carlo design comparison.
"""

from .core import (
    Assignment,
    Blocking,
    BlockbenchError,
    DesignSpec,
    InfeasibleDesignError,
    Method,
    OutcomeModel,
    PotentialOutcomes,
    ResourceLimitError,
    Sample,
    Unit,
    ValidityReport,
    validate_blocking,
)
from .enumeration import count_blockings, covariate_pattern_classes, enumerate_blockings
from .experiment import balanced_block_randomize, estimate, inverse_treated_moments, randomize_many
from .objectives import Metric, ObjectiveKind, ObjectiveSpec, evaluate
from .optimizer import assert_dominance, optimal_blocking, optimal_blocking_1d, optimal_blocking_exhaustive
from .simulator import SimulationConfig, SimulationResult, run_simulation
from .variance import (
    BinaryOutcomeParams,
    conditional_variance_binary,
    conditional_variance_general,
    enumerate_unconditional,
    unconditional_variance_closed_form,
)
from .decomposition import DecompositionReport, decompose, w2_linear

__all__ = [
    "Assignment", "Blocking", "BlockbenchError", "DesignSpec", "InfeasibleDesignError", "Method",
    "OutcomeModel", "PotentialOutcomes", "ResourceLimitError", "Sample", "Unit", "ValidityReport",
    "validate_blocking", "count_blockings", "covariate_pattern_classes", "enumerate_blockings",
    "balanced_block_randomize", "estimate", "inverse_treated_moments", "randomize_many",
    "Metric", "ObjectiveKind", "ObjectiveSpec", "evaluate",
    "assert_dominance", "optimal_blocking", "optimal_blocking_1d", "optimal_blocking_exhaustive",
    "SimulationConfig", "SimulationResult", "run_simulation",
    "BinaryOutcomeParams", "conditional_variance_binary", "conditional_variance_general",
    "enumerate_unconditional", "unconditional_variance_closed_form",
    "DecompositionReport", "decompose", "w2_linear",
]
