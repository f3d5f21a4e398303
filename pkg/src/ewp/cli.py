"""``ewp`` command line entry point.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .core import ContractError, SolverConfig
from .datagen import gen_feature_sel, gen_sim1, gen_sim2
from .harness import ALGORITHMS, SUITES, format_table, run_benchmark, tune_lambda, write_report
from .io import (
    CSVFormatError,
    read_labels,
    read_matrix,
    write_json,
    write_labels,
    write_matrix,
    write_weights,
)
from .metrics import nmi

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("ewp")


class UsageError(Exception):
    pass


def _config(args) -> SolverConfig:
    return SolverConfig(
        lam=args.lam,
        s0=args.s0,
        eta=args.eta,
        s_floor=args.s_floor,
        max_iter=args.max_iter,
        conv_tol=args.tol,
        seed=args.seed,
    )


def cmd_cluster(args) -> int:
    X, _ = read_matrix(args.input)
    n, p = X.shape
    if args.k > n:
        raise UsageError(f"k={args.k} exceeds the number of rows ({n})")
    config = _config(args)
    fit = ALGORITHMS[args.algorithm](X, args.k, config)
    if not np.isfinite(fit.final_objective):
        raise FloatingPointError("non-finite objective")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_labels(out / "labels.csv", fit.labels)
    write_weights(out / "weights.csv", fit.weights)
    write_matrix(out / "centroids.csv", fit.centroids)
    write_json(
        out / "summary.json",
        {
            "algorithm": args.algorithm,
            "input": str(args.input),
            "n": n,
            "p": p,
            "k": args.k,
            "config": config.to_dict(),
            "iterations": fit.iterations,
            "converged": fit.converged,
            "final_objective": fit.final_objective,
            "s_final": fit.final_s,
        },
    )
    print(f"{args.algorithm}: {fit.iterations} iterations, converged={fit.converged}, "
          f"objective={fit.final_objective:.6g}; wrote {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.suite == "sim1":
        ds = gen_sim1(args.d, args.seed)
    elif args.suite == "sim2":
        ds = gen_sim2(args.k, args.seed)
    elif args.suite == "featsel":
        ds = gen_feature_sel(args.seed)
    else:
        raise UsageError(f"unknown generator {args.suite!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "data.csv", ds.data)
    write_labels(out / "truth.csv", ds.truth)
    write_json(out / "metadata.json", ds.metadata())
    print(f"{args.suite}: wrote {ds.data.shape[0]} x {ds.data.shape[1]} data to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    a = read_labels(args.a)
    b = read_labels(args.b)
    if a.size != b.size:
        raise UsageError(f"label files differ in length: {a.size} vs {b.size}")
    print(f"{nmi(a, b):.4f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    report = run_benchmark(
        args.suite, args.replicates, args.seed, full=args.full, jobs=args.jobs,
        scenarios=args.scenario or None,
    )
    paths = write_report(report, args.out)
    print(format_table(report))
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_tune_lambda(args) -> int:
    X, _ = read_matrix(args.input)
    try:
        grid = [float(g) for g in args.grid.split(",") if g.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {args.grid!r}") from None
    result = tune_lambda(X, args.k, grid, args.folds, args.seed)
    print("lambda,mean_stability")
    for row in result.rows():
        print(f"{row['lambda']:.17g},{row['mean_stability']:.4f}")
    print(f"chosen lambda: {result.chosen:.17g}")
    if args.out:
        write_json(args.out, {"chosen": result.chosen, "folds": args.folds, "seed": args.seed, "table": result.rows()})
    return EXIT_OK


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="entropy regularization strength")
    p.add_argument("--s0", type=float, default=-1.0, help="initial power (negative)")
    p.add_argument("--eta", type=float, default=1.05, help="annealing rate (> 1)")
    p.add_argument("--s-floor", type=float, default=-100.0)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewp", description="Entropy weighted power k-means")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a numeric CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="ewp")
    _add_solver_args(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("generate", help="write a synthetic benchmark dataset")
    p.add_argument("--suite", required=True, help="sim1, sim2 or featsel")
    p.add_argument("--d", type=int, default=20, help="uninformative features (sim1)")
    p.add_argument("--k", type=int, default=20, help="clusters (sim2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="NMI between two label files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run a replicated benchmark suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--full", action="store_true", help="include the large-k scenarios")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--scenario", action="append", help="restrict to named scenarios (repeatable)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("tune-lambda", help="choose lambda by cross-fold stability")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid", required=True, help="comma separated lambda values")
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="optional JSON file for the stability table")
    p.set_defaults(func=cmd_tune_lambda)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, CSVFormatError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
