"""Replicated benchmark suites and stability-based lambda selection.

Seeding: every (suite, scenario, replicate) owns the substream
``SeedSequence(seed, spawn_key=(suite_code, scenario_param, replicate, stream))``
with stream 0 generating the dataset and stream 1 the shared initial
centroids. Keys use the scenario's parameter value, not its position, so
adding ``--full`` scenarios does not change the others.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata as importlib_metadata
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .baselines import lloyd_fit, power_kmeans_fit
from .core import ContractError, SolverConfig, derive_seed, spawn_rng
from .datagen import LabeledDataset, gen_feature_sel, gen_sim1, gen_sim2
from .io import FLOAT_FMT, read_json, write_json
from .metrics import nmi
from .solver import assign, ewp_fit, init_centroids

log = logging.getLogger(__name__)

ALGORITHMS: dict[str, Callable] = {"ewp": ewp_fit, "power": power_kmeans_fit, "lloyd": lloyd_fit}

SCHEMA_VERSION = 1
FEATSEL_THRESHOLD = 0.9


@dataclass(frozen=True)
class Scenario:
    name: str
    param: int
    lam: float
    make: Callable[[int], LabeledDataset]
    full_only: bool = False


@dataclass(frozen=True)
class Suite:
    name: str
    code: int
    scenarios: tuple[Scenario, ...]
    algorithms: tuple[str, ...]
    record_weights: bool = False


def _sim1(d):
    return lambda seed: gen_sim1(d, seed)


def _sim2(k):
    return lambda seed: gen_sim2(k, seed)


# Frozen lambdas, selected with tune_lambda on held-out seeds (see README).
SUITES: dict[str, Suite] = {
    "table1": Suite(
        "table1",
        1,
        tuple(Scenario(f"d={d}", d, 3.0, _sim1(d)) for d in (5, 10, 20, 50, 100)),
        ("ewp", "power", "lloyd"),
    ),
    "table2": Suite(
        "table2",
        2,
        (
            Scenario("k=20", 20, 100.0, _sim2(20)),
            Scenario("k=100", 100, 300.0, _sim2(100)),
            Scenario("k=200", 200, 1000.0, _sim2(200), full_only=True),
            Scenario("k=500", 500, 2500.0, _sim2(500), full_only=True),
        ),
        ("ewp", "power", "lloyd"),
    ),
    "featsel": Suite(
        "featsel",
        3,
        (Scenario("featsel", 20, 30.0, gen_feature_sel),),
        ("ewp",),
        record_weights=True,
    ),
}


def artifact_version() -> str:
    try:
        return importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        return "0+unknown"


def report_schema() -> dict:
    import json

    text = resources.files("ewp").joinpath("schemas/benchmark_report.schema.json").read_text()
    return json.loads(text)


def validate_report(payload: dict) -> None:
    import jsonschema

    jsonschema.validate(payload, report_schema())


def scenario_instance(suite_name: str, scenario_param: int, rep: int, seed: int, base: SolverConfig | None = None):
    """Dataset, shared initial centroids and solver config of one replicate."""
    suite = SUITES[suite_name]
    scenario = next(sc for sc in suite.scenarios if sc.param == scenario_param)
    key = (suite.code, scenario.param, rep)
    ds = scenario.make(derive_seed(seed, *key, 0))
    init = init_centroids(ds.data, ds.k, spawn_rng(seed, *key, 1))
    config = (base or SolverConfig()).with_(lam=scenario.lam, seed=derive_seed(seed, *key, 2))
    return scenario, ds, init, config


def run_replicate(suite_name: str, scenario_param: int, rep: int, seed: int, base: SolverConfig) -> dict:
    """Generate one dataset and fit every algorithm of the suite from one shared init."""
    suite = SUITES[suite_name]
    scenario, ds, init, config = scenario_instance(suite_name, scenario_param, rep, seed, base)
    k = ds.k

    out = {"scenario": scenario.name, "replicate": rep, "fits": {}}
    for alg in suite.algorithms:
        t0 = time.perf_counter()
        fit = ALGORITHMS[alg](ds.data, k, config, init=init)
        elapsed = time.perf_counter() - t0
        entry = {
            "nmi": nmi(fit.labels, ds.truth),
            "iterations": fit.iterations,
            "converged": fit.converged,
            "seconds": elapsed,
        }
        if suite.record_weights and alg == "ewp":
            entry["weights"] = fit.weights.tolist()
            entry["relevant_mass"] = float(fit.weights[list(ds.relevant_features)].sum())
            entry["relevant_features"] = list(ds.relevant_features)
        out["fits"][alg] = entry
    return out


@dataclass
class BenchmarkReport:
    suite: str
    seed: int
    replicates: int
    full: bool
    config: SolverConfig
    scenarios: list[dict] = field(default_factory=list)
    timing: list[dict] = field(default_factory=list)
    created: str = ""

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "artifact_version": artifact_version(),
            "created": self.created,
            "suite": self.suite,
            "seed": int(self.seed),
            "replicates": int(self.replicates),
            "full": bool(self.full),
            "config": self.config.to_dict(),
            "rng": "PCG64 via SeedSequence(seed, spawn_key=(suite, scenario, replicate, stream))",
            "scenarios": self.scenarios,
        }

    def cell(self, scenario: str, algorithm: str) -> dict:
        for sc in self.scenarios:
            if sc["name"] == scenario:
                for c in sc["cells"]:
                    if c["algorithm"] == algorithm:
                        return c
        raise KeyError((scenario, algorithm))


def _summarize(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def run_benchmark(
    suite_name: str,
    replicates: int,
    seed: int = 1,
    *,
    full: bool = False,
    jobs: int = 1,
    config: SolverConfig | None = None,
    scenarios: list[str] | None = None,
) -> BenchmarkReport:
    if suite_name not in SUITES:
        raise ContractError(f"unknown suite {suite_name!r}; choose from {sorted(SUITES)}")
    if replicates < 1:
        raise ContractError("replicates must be >= 1")
    suite = SUITES[suite_name]
    base = config or SolverConfig()
    chosen = [
        sc
        for sc in suite.scenarios
        if (full or not sc.full_only) and (scenarios is None or sc.name in scenarios)
    ]
    tasks = [(suite_name, sc.param, r, seed, base) for sc in chosen for r in range(replicates)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_replicate, *zip(*tasks)))
    else:
        results = [run_replicate(*t) for t in tasks]

    report = BenchmarkReport(
        suite=suite_name,
        seed=seed,
        replicates=replicates,
        full=full,
        config=base,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    by_scenario: dict[str, list[dict]] = {}
    for res in results:
        by_scenario.setdefault(res["scenario"], []).append(res)

    for sc in chosen:
        reps = sorted(by_scenario[sc.name], key=lambda r: r["replicate"])
        cells = []
        for alg in suite.algorithms:
            values = [r["fits"][alg]["nmi"] for r in reps]
            mean, sd = _summarize(values)
            cells.append(
                {
                    "algorithm": alg,
                    "mean_nmi": mean,
                    "sd_nmi": sd,
                    "replicates": len(values),
                    "nmi": values,
                    "iterations": [int(r["fits"][alg]["iterations"]) for r in reps],
                }
            )
            secs = [r["fits"][alg]["seconds"] for r in reps]
            report.timing.append(
                {
                    "scenario": sc.name,
                    "algorithm": alg,
                    "mean_seconds": float(np.mean(secs)),
                    "max_seconds": float(np.max(secs)),
                    "total_seconds": float(np.sum(secs)),
                }
            )
        entry = {"name": sc.name, "param": sc.param, "lambda": sc.lam, "cells": cells}
        if suite.record_weights:
            masses = [r["fits"]["ewp"]["relevant_mass"] for r in reps]
            entry["feature_weights"] = [r["fits"]["ewp"]["weights"] for r in reps]
            entry["relevant_features"] = reps[0]["fits"]["ewp"]["relevant_features"]
            entry["relevant_mass"] = masses
            entry["relevant_mass_threshold"] = FEATSEL_THRESHOLD
            entry["replicates_above_threshold"] = int(sum(m >= FEATSEL_THRESHOLD for m in masses))
        report.scenarios.append(entry)
    return report


def write_report(report: BenchmarkReport, out_dir) -> dict[str, Path]:
    """Write ``report.json``, ``report.csv`` and ``timing.json`` (plus ``weights.csv``
    for weight-recording suites). Wall-clock numbers live only in ``timing.json``
    so the other files are reproducible byte for byte apart from ``created``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    validate_report(payload)
    paths = {"json": out / "report.json", "csv": out / "report.csv", "timing": out / "timing.json"}
    write_json(paths["json"], payload)

    lines = ["scenario,algorithm,mean_nmi,sd_nmi,replicates,cell"]
    for sc in report.scenarios:
        for c in sc["cells"]:
            lines.append(
                f"{sc['name']},{c['algorithm']},{FLOAT_FMT % c['mean_nmi']},"
                f"{FLOAT_FMT % c['sd_nmi']},{c['replicates']},{c['mean_nmi']:.4f} ({c['sd_nmi']:.3f})"
            )
    paths["csv"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_json(paths["timing"], {"created": report.created, "cells": report.timing})

    if any("feature_weights" in sc for sc in report.scenarios):
        paths["weights"] = out / "weights.csv"
        rows = []
        for sc in report.scenarios:
            for rep, (wv, mass) in enumerate(zip(sc["feature_weights"], sc["relevant_mass"])):
                rows.append(",".join([sc["name"], str(rep), FLOAT_FMT % mass] + [FLOAT_FMT % v for v in wv]))
        p = len(report.scenarios[0]["feature_weights"][0])
        header = "scenario,replicate,relevant_mass," + ",".join(f"w{l}" for l in range(p))
        paths["weights"].write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return paths


def load_report(path) -> dict:
    payload = read_json(path)
    validate_report(payload)
    return payload


def format_table(report: BenchmarkReport) -> str:
    """Algorithms as rows, scenarios as columns, cells ``mean (sd)``."""
    suite = SUITES[report.suite]
    names = [sc["name"] for sc in report.scenarios]
    width = max(14, *(len(n) + 2 for n in names))
    lines = ["".ljust(8) + "".join(n.rjust(width + 2) for n in names)]
    for alg in suite.algorithms:
        cells = [report.cell(n, alg) for n in names]
        lines.append(
            alg.ljust(8) + "".join(f"{c['mean_nmi']:.4f} ({c['sd_nmi']:.3f})".rjust(width + 2) for c in cells)
        )
    for sc in report.scenarios:
        if "relevant_mass" in sc:
            lines.append(
                f"{sc['name']}: relevant-feature mass >= {FEATSEL_THRESHOLD} in "
                f"{sc['replicates_above_threshold']}/{len(sc['relevant_mass'])} replicates"
            )
    return "\n".join(lines)


@dataclass
class LambdaTuning:
    chosen: float
    grid: list[float]
    stability: list[float]
    per_fold: list[list[float]]

    def rows(self) -> list[dict]:
        return [
            {"lambda": lam, "mean_stability": st, "fold_stability": folds}
            for lam, st, folds in zip(self.grid, self.stability, self.per_fold)
        ]


def tune_lambda(
    X, k: int, grid, folds: int = 2, seed: int = 1, config: SolverConfig | None = None
) -> LambdaTuning:
    """Pick lambda by cross-fold clustering stability.

    For each fold, fit on the other folds and assign the held-out rows with the
    fitted centroids and weights; separately fit the held-out rows alone. The
    NMI between those two labelings of the held-out fold is the fold's
    stability. The lambda with the highest mean stability wins; ties go to the
    smaller lambda.
    """
    X = np.asarray(X, dtype=np.float64)
    grid = [float(g) for g in grid]
    if not grid or any(not g > 0 for g in grid):
        raise ContractError("grid must be a non-empty list of positive values")
    if folds < 2:
        raise ContractError("folds must be >= 2")
    n = X.shape[0]
    parts = np.array_split(spawn_rng(seed, 0).permutation(n), folds)
    if min(len(part) for part in parts) < k:
        raise ContractError(f"fold size {min(len(part) for part in parts)} is smaller than k={k}")
    base = config or SolverConfig()

    stability, per_fold = [], []
    for lam in grid:
        scores = []
        for f, held in enumerate(parts):
            train = np.setdiff1d(np.arange(n), held, assume_unique=True)
            cfg = base.with_(lam=lam, seed=derive_seed(seed, 1, f))
            fit_train = ewp_fit(X[train], k, cfg)
            transferred = assign(X[held], fit_train.centroids, fit_train.weights)
            fit_held = ewp_fit(X[held], k, cfg.with_(seed=derive_seed(seed, 2, f)))
            scores.append(nmi(transferred, fit_held.labels))
        per_fold.append(scores)
        stability.append(float(np.mean(scores)))
        log.info("lambda=%g stability=%.4f", lam, stability[-1])

    best = max(stability)
    chosen = min(lam for lam, st in zip(grid, stability) if st >= best - 1e-12)
    return LambdaTuning(chosen, grid, stability, per_fold)
