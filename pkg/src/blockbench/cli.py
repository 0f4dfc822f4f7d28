"""Command-line interface: ``blockbench {block,assign,variance,simulate}``.

Exit codes: 0 success, 1 I/O or parse error, 2 infeasible design or invalid
parameters, 3 resource ceiling reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .core import (
    Blocking,
    DesignSpec,
    InfeasibleDesignError,
    ResourceLimitError,
    Sample,
    TIE_BREAK_SMALLEST_MEAN_SIZE,
    validate_blocking,
)
from .decomposition import binary_fair_coin, binary_model, decompose
from .enumeration import DEFAULT_MAX_BLOCKINGS, covariate_pattern_classes, enumerate_blockings, format_pattern
from .experiment import balanced_block_randomize
from .objectives import Metric, ObjectiveKind, ObjectiveSpec, evaluate
from .optimizer import optimal_blocking
from .simulator import MODELS, SimulationConfig, format_table, run_simulation
from .variance import (
    DESIGNS,
    BinaryOutcomeParams,
    binary_design_blocking,
    conditional_variance_binary,
    conditional_variance_general,
    enumerate_unconditional,
    unconditional_variance_closed_form,
)

SCHEMA = "blockbench/1"
EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3
THREADS_ENV = "BLOCKBENCH_THREADS"

# six-unit binary sample whose blockings are tabulated by the table1 preset
TABLE1_X = [1, 1, 1, 0, 0, 0]
# binary covariate plus an integer covariate that does not affect outcomes
APPENDIX_C_X = [[1, 36], [1, 38], [1, 40], [0, 36], [0, 38], [0, 40]]


class ParseError(Exception):
    """Malformed input file."""


class InvalidParameter(Exception):
    """Flag values outside the domain of a command."""


def read_csv(path: str) -> Sample:
    """Read ``id,x1[,x2,...]`` rows into a sample. Blank cells are errors."""
    try:
        handle = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    with handle:
        rows = list(csv.reader(handle))
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("empty CSV")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "id":
        raise ParseError("header must be id,x1[,x2,...]")
    ids, values = [], []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        cells = [c.strip() for c in row]
        if any(c == "" for c in cells):
            raise ParseError(f"line {line}: blank cell")
        try:
            values.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise ParseError(f"line {line}: {exc}") from exc
        ids.append(cells[0])
    if not ids:
        raise ParseError("CSV has no data rows")
    try:
        return Sample.from_array(np.array(values), ids=ids)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _emit(payload: dict, text: str, fmt: str) -> None:
    print(json.dumps(payload, indent=2) if fmt == "json" else text)


def cmd_block(args) -> int:
    sample = read_csv(args.input)
    objective = ObjectiveSpec(args.objective, args.metric)
    design = DesignSpec(args.method, args.size, objective=objective)
    opt = optimal_blocking(sample, design, solver=args.solver, max_blockings=args.max_blockings)
    ids = sample.ids
    payload = {
        "schema": SCHEMA,
        "kind": "blocking",
        "n": sample.n,
        "ids": ids,
        "method": design.method.value,
        "size": design.size,
        "objective": {"kind": objective.kind.value, "metric": objective.metric.value, "value": opt.value},
        "solver": opt.solver,
        "tie_break": TIE_BREAK_SMALLEST_MEAN_SIZE,
        "blocks": opt.blocking.one_based(),
        "block_ids": [[ids[i] for i in b] for b in opt.blocking.blocks],
    }
    lines = [
        f"method: {design.method.value} (size {design.size})",
        f"solver: {opt.solver}",
        f"objective ({objective.kind.value}, {objective.metric.value}): {opt.value:.6g}",
        f"blocks: {opt.blocking}",
        "ties: smallest mean block size, then canonical order",
    ]
    if ids != [str(i + 1) for i in range(sample.n)]:
        lines.append("unit ids: " + "; ".join("{" + ",".join(b) + "}" for b in payload["block_ids"]))
    _emit(payload, "\n".join(lines), args.format)
    return EXIT_OK


def _load_blocking(path: str) -> tuple[Blocking, list[str]]:
    try:
        with (sys.stdin if path == "-" else open(path, encoding="utf-8")) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read blocking from {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("schema") != SCHEMA or "blocks" not in data:
        raise ParseError(f"expected a {SCHEMA} blocking document")
    try:
        blocks = [[int(i) - 1 for i in b] for b in data["blocks"]]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad block list: {exc}") from exc
    n = int(data.get("n", sum(len(b) for b in blocks)))
    ids = data.get("ids") or [str(i + 1) for i in range(n)]
    blocking = Blocking(blocks)
    report = validate_blocking(n, blocking)
    if not report.valid:
        raise ParseError("invalid blocking: " + "; ".join(report.messages()))
    return blocking, [str(i) for i in ids]


def cmd_assign(args) -> int:
    blocking, ids = _load_blocking(args.blocking)
    assignment = balanced_block_randomize(blocking, args.seed, args.replication)
    payload = {
        "schema": SCHEMA,
        "kind": "assignment",
        "seed": args.seed,
        "replication": args.replication,
        "ids": ids,
        "treated": list(assignment.indicators),
        "blocks": [
            {"members": [i + 1 for i in b], "treated_count": t}
            for b, t in zip(blocking.blocks, assignment.treated_counts)
        ],
    }
    lines = [f"{'id':<10}{'block':>6}{'treated':>9}"]
    block_of = {i: k + 1 for k, b in enumerate(blocking.blocks) for i in b}
    for i, uid in enumerate(ids):
        lines.append(f"{uid:<10}{block_of[i]:>6}{assignment.indicators[i]:>9}")
    lines.append("treated per block: " + ", ".join(map(str, assignment.treated_counts)))
    _emit(payload, "\n".join(lines), args.format)
    return EXIT_OK


def _params(args) -> BinaryOutcomeParams:
    if args.sigma2 < 0 or args.delta2 < 0:
        raise InvalidParameter("--sigma2 and --delta2 must be nonnegative")
    return BinaryOutcomeParams.with_predictiveness(args.sigma2, args.delta2)


def _even_n(n: int) -> int:
    if n < 2 or n % 2:
        raise InvalidParameter(f"--n must be an even integer >= 2, got {n}")
    return n


def _preset_table1(args) -> tuple[dict, str]:
    params = _params(args)
    sample = Sample.from_array(TABLE1_X)
    x = np.array(TABLE1_X, dtype=float)
    fixed = DesignSpec.fixed(2)
    rows = []
    for cls in covariate_pattern_classes(sample, DesignSpec.threshold(2)):
        b = cls.representative
        rows.append({
            "pattern": format_pattern(cls.pattern),
            "valid_for": "both" if validate_blocking(sample, b, fixed).valid else "threshold",
            "multiplicity": cls.multiplicity,
            "distance": evaluate(b, sample),
            "variance": conditional_variance_binary(b, x, params),
        })
    rows.sort(key=lambda r: (r["valid_for"] != "both", -r["pattern"].count("{"), r["pattern"]))
    text = [f"{'Blocking':<26}{'Valid for':<11}{'Count':>6}{'Distance':>10}{'Variance':>10}"]
    for r in rows:
        text.append(f"{r['pattern']:<26}{r['valid_for']:<11}{r['multiplicity']:>6}"
                    f"{r['distance']:>10.3f}{r['variance']:>10.3f}")
    return {"rows": rows}, "\n".join(text)


def _preset_appendix_c(args) -> tuple[dict, str]:
    params = _params(args)
    sample = Sample.from_array(APPENDIX_C_X)
    x1 = np.array([r[0] for r in APPENDIX_C_X], dtype=float)
    mu = params.mu0 + (params.mu1 - params.mu0) * x1
    pairings = [(b, evaluate(b, sample)) for b in enumerate_blockings(6, DesignSpec.fixed(2))]
    best = optimal_blocking(sample, DesignSpec.fixed(2), solver="exhaustive").blocking
    complete = Blocking([range(6)])
    v_f = conditional_variance_general(best, mu, params.sigma2)
    v_c = conditional_variance_general(complete, mu, params.sigma2)
    expected = 2 * params.delta_mu_sq / 15
    payload = {
        "pairings": [{"blocks": b.one_based(), "distance": v} for b, v in pairings],
        "optimum": best.one_based(),
        "optimum_distance": evaluate(best, sample),
        "variance_fixed": v_f,
        "variance_complete": v_c,
        "difference": v_f - v_c,
        "expected_difference": expected,
    }
    text = [f"{'Pairing':<24}{'Distance':>10}"]
    text += [f"{str(b):<24}{v:>10.3f}" for b, v in pairings]
    text += [
        "",
        f"surrogate optimum: {best} (distance {payload['optimum_distance']:.3f})",
        f"conditional variance, paired optimum: {v_f:.6f}",
        f"conditional variance, complete randomization: {v_c:.6f}",
        f"excess of paired over complete: {v_f - v_c:.6f} (2*delta2/15 = {expected:.6f})",
    ]
    return payload, "\n".join(text)


def _preset_closed_forms(args) -> tuple[dict, str]:
    params = _params(args)
    n = _even_n(args.n)
    scale = 1.0 / n if args.raw else 1.0
    rows = {}
    for m in DESIGNS:
        rows[m] = {
            "closed_form": unconditional_variance_closed_form(m, n, params) * scale,
            "enumeration": enumerate_unconditional(m, n, params) * scale,
        }
    label = "Var" if args.raw else "n*Var"
    text = [f"n={n} sigma2={args.sigma2:g} delta2={args.delta2:g} ({label})",
            f"{'Design':<8}{'closed form':>14}{'enumeration':>14}"]
    text += [f"{m:<8}{r['closed_form']:>14.6f}{r['enumeration']:>14.6f}" for m, r in rows.items()]
    return {"n": n, "normalized": not args.raw, "designs": rows}, "\n".join(text)


def _preset_decomposition(args) -> tuple[dict, str]:
    params = _params(args)
    n = _even_n(args.n)
    dist = binary_fair_coin(n)
    model = binary_model(params)
    rows = {}
    for m in DESIGNS:
        rep = decompose(lambda x, m=m: binary_design_blocking(m, x), dist, model)
        oracle = enumerate_unconditional(m, n, params)
        rows[m] = {"w1": rep.w1, "w2": rep.w2, "w3": rep.w3, "total": rep.total,
                   "enumeration": oracle, "identity_holds": math.isclose(rep.total, oracle, abs_tol=1e-10)}
    text = [f"n={n} sigma2={args.sigma2:g} delta2={args.delta2:g}",
            f"{'Design':<8}{'W1':>10}{'W2':>10}{'W3':>10}{'4W1+4W2+2W3':>14}{'n*Var':>10}  identity"]
    text += [f"{m:<8}{r['w1']:>10.5f}{r['w2']:>10.5f}{r['w3']:>10.5f}{r['total']:>14.6f}"
             f"{r['enumeration']:>10.6f}  {'ok' if r['identity_holds'] else 'FAILED'}" for m, r in rows.items()]
    return {"n": n, "designs": rows}, "\n".join(text)


PRESETS = {
    "table1": _preset_table1,
    "appendixC": _preset_appendix_c,
    "closed-forms": _preset_closed_forms,
    "decomposition": _preset_decomposition,
}


def cmd_variance(args) -> int:
    payload, text = PRESETS[args.preset](args)
    payload = {"schema": SCHEMA, "kind": "variance", "preset": args.preset,
               "sigma2": args.sigma2, "delta2": args.delta2, **payload}
    _emit(payload, text, args.format)
    return EXIT_OK


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return int(raw)
    except ValueError:
        raise InvalidParameter(f"{THREADS_ENV} must be an integer, got {raw!r}")


def cmd_simulate(args) -> int:
    threads = args.threads if args.threads is not None else _default_threads()
    if threads < 0:
        raise InvalidParameter("--threads must be >= 0")
    config = SimulationConfig(
        n=args.n, model=args.model, size=args.size, num_samples=args.samples,
        reps_per_sample=args.reps, seed=args.seed, threads=threads,
    )
    result = run_simulation(config)
    text = format_table(result)
    if args.samples == 1:
        text += "\nstandard errors unavailable with a single sample draw"
    _emit(result.to_dict(), text, args.format)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share the parse-error code; 2 is reserved for infeasible designs
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockbench", description="Blocked experimental designs: build, assign, analyze, simulate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("block", help="optimal blocking for a CSV of covariates")
    p.add_argument("input", help="CSV with header id,x1[,x2,...] ('-' for stdin)")
    p.add_argument("--method", choices=["fixed", "threshold", "complete"], default="threshold")
    p.add_argument("--size", type=int, default=2, help="block size (fixed) or minimum size (threshold)")
    p.add_argument("--objective", choices=[k.value for k in ObjectiveKind], default=ObjectiveKind.WEIGHTED_AVERAGE.value)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.EUCLIDEAN.value)
    p.add_argument("--solver", choices=["auto", "exhaustive", "dp"], default="auto")
    p.add_argument("--max-blockings", type=int, default=DEFAULT_MAX_BLOCKINGS,
                   help="refuse exhaustive search beyond this many candidate blockings")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_block)

    p = sub.add_parser("assign", help="balanced randomization of a saved blocking")
    p.add_argument("blocking", help="JSON written by 'blockbench block --format json' ('-' for stdin)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--format", choices=["table", "json"], default="json")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("variance", help="analytic variance reports for binary covariates")
    p.add_argument("--preset", choices=list(PRESETS), required=True)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--sigma2", type=float, default=1.0, help="conditional outcome variance")
    p.add_argument("--delta2", type=float, default=2.0, help="squared difference of expected outcomes across x")
    p.add_argument("--raw", action="store_true", help="report Var rather than n*Var (closed-forms)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of designs")
    p.add_argument("--model", choices=list(MODELS), default="informative")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--size", type=int, default=2)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=20240101)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes, 0 = all cores (default ${THREADS_ENV} or 1)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleDesignError, InvalidParameter, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
