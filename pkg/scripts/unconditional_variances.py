"""Unconditional variances for a fair-coin binary covariate.

For each even n, prints the closed forms for complete randomization (C),
paired blocking (F2) and threshold blocking (T2), the exact enumeration
they must match, and the W1/W2/W3 decomposition.

    python3 scripts/unconditional_variances.py [--max-n 16] [--sigma2 1] [--delta2 2]
"""

import argparse

from blockbench.decomposition import binary_fair_coin, binary_model, decompose
from blockbench.variance import (
    DESIGNS,
    BinaryOutcomeParams,
    binary_design_blocking,
    enumerate_unconditional,
    unconditional_variance_closed_form,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=16)
    ap.add_argument("--sigma2", type=float, default=1.0)
    ap.add_argument("--delta2", type=float, default=2.0)
    args = ap.parse_args()
    p = BinaryOutcomeParams.with_predictiveness(args.sigma2, args.delta2)

    print(f"sigma2={args.sigma2:g} delta2={args.delta2:g}  (values are n*Var)")
    print(f"{'n':>3} {'design':<6}{'closed':>10}{'enum':>10}{'W1':>9}{'W2':>9}{'W3':>9}")
    for n in range(2, args.max_n + 1, 2):
        for m in DESIGNS:
            rep = decompose(lambda x, m=m: binary_design_blocking(m, x), binary_fair_coin(n), binary_model(p))
            print(f"{n:>3} {m:<6}{unconditional_variance_closed_form(m, n, p):>10.5f}"
                  f"{enumerate_unconditional(m, n, p):>10.5f}{rep.w1:>9.4f}{rep.w2:>9.4f}{rep.w3:>9.4f}")


if __name__ == "__main__":
    main()
