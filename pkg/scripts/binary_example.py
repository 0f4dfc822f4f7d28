"""Six-unit binary example: every blocking pattern, its distance and conditional variance.

Also prints the optimal threshold and fixed-sized blockings and how the
ranking changes when the covariate is less predictive.

    python3 scripts/binary_example.py [--sigma2 1] [--delta2 2]
"""

import argparse

import numpy as np

from blockbench.core import DesignSpec, Sample
from blockbench.enumeration import blocking_pattern, covariate_pattern_classes, format_pattern
from blockbench.objectives import evaluate
from blockbench.optimizer import optimal_blocking_exhaustive
from blockbench.variance import BinaryOutcomeParams, conditional_variance_binary

X = np.array([1, 1, 1, 0, 0, 0], dtype=float)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma2", type=float, default=1.0)
    ap.add_argument("--delta2", type=float, default=2.0)
    args = ap.parse_args()

    sample = Sample.from_array(X)
    params = BinaryOutcomeParams.with_predictiveness(args.sigma2, args.delta2)
    print(f"{'Blocking':<26}{'Count':>6}{'Distance':>10}{'Variance':>10}")
    for cls in covariate_pattern_classes(sample, DesignSpec.threshold(2)):
        b = cls.representative
        print(f"{format_pattern(cls.pattern):<26}{cls.multiplicity:>6}{evaluate(b, sample):>10.3f}"
              f"{conditional_variance_binary(b, X, params):>10.3f}")

    print()
    for label, design in (("threshold", DesignSpec.threshold(2)), ("fixed", DesignSpec.fixed(2))):
        b, v = optimal_blocking_exhaustive(sample, design)
        print(f"{label:<10} optimum {format_pattern(blocking_pattern(b, X))}  distance {v:.3f}")
        for d2 in (0.5, 2.0):
            p = BinaryOutcomeParams.with_predictiveness(args.sigma2, d2)
            print(f"{'':<12}variance at delta2={d2:g}: {conditional_variance_binary(b, X, p):.4f}")


if __name__ == "__main__":
    main()
