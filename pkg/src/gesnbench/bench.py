"""Experiment pipeline: dataset -> reservoir embeddings -> ridge readout ->
validation selection and bootstrapped test accuracy.

The reservoir radius is specified as a multiple of 1/alpha, where alpha is
the spectral radius of the graph actually evaluated (measured after any
undirected/LCC preprocessing), so a multiple above 1 means the state map is
run past its stability threshold.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, asdict
from itertools import product
from pathlib import Path

import numpy as np

from . import graph as graphmod
from .datasets import SplitSet, load_dataset, load_splits, make_splits
from .readout import BootstrapResult, accuracy, bootstrap_ci, fit_ridge, predict
from .reservoir import (
    ReservoirConfig,
    compute_embeddings,
    init_reservoir,
    state_trajectory,
    write_embedding_matrix,
)

__all__ = [
    "ExperimentSpec",
    "RunResult",
    "GridSearchResult",
    "PipelineError",
    "run_single",
    "grid_search",
    "export_heatmap",
    "export_embeddings",
    "write_results_jsonl",
    "read_results_jsonl",
    "write_summary_csv",
    "EXPECTED_STATS",
    "compare_stats",
]

logger = logging.getLogger(__name__)

DEFAULT_RADIUS_MULTIPLES = (0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 9.0, 12.0, 18.0, 24.0, 30.0, 35.0)
DEFAULT_INPUT_SCALINGS = (1 / 320, 1 / 80, 1 / 20, 1 / 5, 1 / 2, 1.0)
DEFAULT_UNITS = (16, 64, 256, 1024, 4096)
DEFAULT_LAMBDAS = (1e-6, 1e-3, 1.0, 10.0)


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(name, e) from e


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a dataset, preprocessing flags, and hyper-parameter
    grid lists (singletons for a single run)."""

    dataset: str
    data_dir: str
    undirected: bool = False
    lcc: bool = False
    radius_multiples: tuple[float, ...] = DEFAULT_RADIUS_MULTIPLES
    input_scalings: tuple[float, ...] = DEFAULT_INPUT_SCALINGS
    units: tuple[int, ...] = DEFAULT_UNITS
    lambdas: tuple[float, ...] = DEFAULT_LAMBDAS
    iterations: int = 100
    seeds: tuple[int, ...] = (0,)
    split_file: str | None = None
    split_fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    split_seed: int = 0
    stratified: bool = True
    bootstrap_resamples: int = 1000
    confidence: float = 0.95
    neighbors: str = "in"

    def __post_init__(self):
        for name in ("radius_multiples", "input_scalings", "units", "lambdas", "seeds"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must be non-empty")
        if any(m <= 0 for m in self.radius_multiples):
            raise ValueError("radius multiples must be positive")
        if any(s <= 0 for s in self.input_scalings):
            raise ValueError("input scalings must be positive")
        if any(h < 1 for h in self.units):
            raise ValueError("units must be at least 1")
        if any(l < 0 for l in self.lambdas):
            raise ValueError("lambdas must be nonnegative")

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = cls.__dataclass_fields__
        unknown = set(raw) - set(known)
        if unknown:
            raise ValueError(f"unknown spec fields: {sorted(unknown)}")
        for key in ("radius_multiples", "input_scalings", "units", "lambdas",
                    "seeds", "split_fractions"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_json(self, path) -> None:
        Path(path).write_text(
            json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class RunResult:
    """Metrics of one grid point under one seed."""

    dataset: str
    undirected: bool
    lcc: bool
    units: int
    radius_multiple: float
    input_scaling: float
    lam: float
    seed: int
    iterations: int
    alpha: float
    target_radius: float
    achieved_radius: float
    val_accuracy: float
    test: BootstrapResult
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.val_accuracy <= 1.0:
            raise ValueError("val_accuracy must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["test"] = asdict(self.test)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        d = dict(d)
        d["test"] = BootstrapResult(**d["test"])
        return cls(**d)

    def grid_key(self) -> tuple:
        return (self.units, self.radius_multiple, self.input_scaling, self.lam)


@dataclass(frozen=True)
class GridSearchResult:
    best: dict                      # the winning grid point
    best_runs: tuple[RunResult, ...]  # winner evaluated per seed
    mean_val_accuracy: float
    mean_test_accuracy: float
    mean_ci_low: float
    mean_ci_high: float
    results: tuple[RunResult, ...]  # every evaluated run
    failures: tuple[tuple[dict, str], ...]


def _prepare(spec: ExperimentSpec):
    """Load and preprocess the graph; returns (graph, alpha)."""
    with _stage("load"):
        ds = load_dataset(spec.data_dir, spec.dataset)
        g = ds.graph
    if spec.undirected:
        with _stage("to_undirected"):
            g = graphmod.to_undirected(g)
    if spec.lcc:
        with _stage("largest_connected_component"):
            g = graphmod.largest_connected_component(g)
    with _stage("spectral_radius"):
        alpha = graphmod.spectral_radius(g)
        if alpha <= 0.0:
            # an edgeless graph never applies the recurrent weights, so the
            # radius multiple is inert; treat it as an absolute radius
            logger.warning(
                "graph has no edges; radius multiples are used as absolute radii"
            )
            alpha = 1.0
    return g, alpha


def _splits_for_seed(spec: ExperimentSpec, g, seed: int) -> SplitSet:
    if spec.split_file is not None:
        with _stage("load_splits"):
            return load_splits(spec.split_file, num_nodes=g.num_nodes)
    with _stage("make_splits"):
        # each run seed gets its own split, mirroring the mean-over-splits
        # benchmark protocol
        return make_splits(
            g, fractions=spec.split_fractions,
            seed=spec.split_seed + seed, stratified=spec.stratified,
        )


def _evaluate_point(
    spec: ExperimentSpec,
    g,
    alpha: float,
    splits: SplitSet,
    units: int,
    multiple: float,
    scaling: float,
    lam: float,
    seed: int,
    embedding=None,
    weights=None,
    embed_seconds: float | None = None,
    started: float | None = None,
) -> RunResult:
    t0 = started if started is not None else time.perf_counter()
    target = multiple / alpha
    cfg = ReservoirConfig(
        units=units, input_scaling=scaling, target_radius=target,
        seed=seed, max_iterations=spec.iterations, neighbors=spec.neighbors,
    )
    if embedding is None or weights is None:
        t_embed = time.perf_counter()
        with _stage("init_reservoir"):
            weights = init_reservoir(cfg, g.num_features)
        with _stage("compute_embeddings"):
            embedding = compute_embeddings(g, weights, cfg)
        embed_seconds = time.perf_counter() - t_embed
    elif embed_seconds is None:
        embed_seconds = 0.0

    t_fit = time.perf_counter()
    with _stage("fit_ridge"):
        model = fit_ridge(
            embedding.states[:, splits.train], g.labels[splits.train],
            g.num_classes, lam,
        )
    fit_seconds = time.perf_counter() - t_fit

    t_eval = time.perf_counter()
    with _stage("evaluate"):
        val_acc = (
            accuracy(predict(model, embedding.states[:, splits.val]),
                     g.labels[splits.val])
            if len(splits.val) else 0.0
        )
        test_pred = predict(model, embedding.states[:, splits.test])
        test = bootstrap_ci(
            test_pred, g.labels[splits.test],
            num_resamples=spec.bootstrap_resamples,
            confidence=spec.confidence, seed=seed,
        )
    eval_seconds = time.perf_counter() - t_eval

    # a shared embedding is charged to every result that reuses it, so each
    # record reflects what the configuration costs standalone
    total = (
        time.perf_counter() - t0 if started is not None
        else embed_seconds + fit_seconds + eval_seconds
    )
    return RunResult(
        dataset=spec.dataset, undirected=spec.undirected, lcc=spec.lcc,
        units=units, radius_multiple=multiple, input_scaling=scaling,
        lam=lam, seed=seed, iterations=spec.iterations,
        alpha=alpha, target_radius=target,
        achieved_radius=weights.achieved_radius,
        val_accuracy=val_acc, test=test,
        timings={
            "embed": embed_seconds,
            "fit": fit_seconds,
            "eval": eval_seconds,
            "total": total,
        },
    )


def run_single(spec: ExperimentSpec) -> RunResult:
    """Run one grid point end to end; every grid list must be a singleton."""
    for name in ("radius_multiples", "input_scalings", "units", "lambdas", "seeds"):
        if len(getattr(spec, name)) != 1:
            raise ValueError(f"run_single needs exactly one value in {name}")
    t0 = time.perf_counter()
    g, alpha = _prepare(spec)
    seed = spec.seeds[0]
    splits = _splits_for_seed(spec, g, seed)
    return _evaluate_point(
        spec, g, alpha, splits,
        units=spec.units[0], multiple=spec.radius_multiples[0],
        scaling=spec.input_scalings[0], lam=spec.lambdas[0],
        seed=seed, started=t0,
    )


def grid_search(spec: ExperimentSpec, on_result=None) -> GridSearchResult:
    """Evaluate the full grid and select on seed-averaged validation accuracy.

    Embeddings are shared across the lambda axis (the readout penalty does
    not affect the reservoir). Ties in validation accuracy break toward
    fewer units, then smaller radius multiple, scaling, and lambda, so the
    selection is independent of evaluation order. A failing grid point is
    recorded and excluded from selection.
    """
    g, alpha = _prepare(spec)
    split_cache = {s: _splits_for_seed(spec, g, s) for s in spec.seeds}

    results: list[RunResult] = []
    failures: list[tuple[dict, str]] = []
    for units, multiple, scaling, seed in product(
        spec.units, spec.radius_multiples, spec.input_scalings, spec.seeds
    ):
        base_conf = {
            "units": units, "radius_multiple": multiple,
            "input_scaling": scaling, "seed": seed,
        }
        try:
            cfg = ReservoirConfig(
                units=units, input_scaling=scaling,
                target_radius=multiple / alpha, seed=seed,
                max_iterations=spec.iterations, neighbors=spec.neighbors,
            )
            t_embed = time.perf_counter()
            weights = init_reservoir(cfg, g.num_features)
            embedding = compute_embeddings(g, weights, cfg)
            embed_seconds = time.perf_counter() - t_embed
        except Exception as e:
            for lam in spec.lambdas:
                failures.append(({**base_conf, "lam": lam}, str(e)))
            continue
        for lam in spec.lambdas:
            try:
                result = _evaluate_point(
                    spec, g, alpha, split_cache[seed],
                    units=units, multiple=multiple, scaling=scaling,
                    lam=lam, seed=seed,
                    embedding=embedding, weights=weights,
                    embed_seconds=embed_seconds,
                )
            except Exception as e:
                failures.append(({**base_conf, "lam": lam}, str(e)))
                continue
            results.append(result)
            if on_result is not None:
                on_result(result)

    if not results:
        raise PipelineError("grid_search", RuntimeError("every grid point failed"))

    by_point: dict[tuple, list[RunResult]] = {}
    for r in results:
        by_point.setdefault(r.grid_key(), []).append(r)
    # points missing a seed (partial failure) cannot be compared fairly
    complete = {k: v for k, v in by_point.items() if len(v) == len(spec.seeds)}
    if not complete:
        raise PipelineError(
            "grid_search", RuntimeError("no grid point succeeded on every seed")
        )

    def selection_key(item):
        key, runs = item
        mean_val = float(np.mean([r.val_accuracy for r in runs]))
        return (-mean_val, *key)

    best_key, best_runs = min(complete.items(), key=selection_key)
    best_runs = tuple(sorted(best_runs, key=lambda r: r.seed))
    return GridSearchResult(
        best={
            "units": best_key[0], "radius_multiple": best_key[1],
            "input_scaling": best_key[2], "lam": best_key[3],
        },
        best_runs=best_runs,
        mean_val_accuracy=float(np.mean([r.val_accuracy for r in best_runs])),
        mean_test_accuracy=float(np.mean([r.test.mean_accuracy for r in best_runs])),
        mean_ci_low=float(np.mean([r.test.ci_low for r in best_runs])),
        mean_ci_high=float(np.mean([r.test.ci_high for r in best_runs])),
        results=tuple(results),
        failures=tuple(failures),
    )


def write_results_jsonl(path, results) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict()) + "\n")


def read_results_jsonl(path) -> list[RunResult]:
    results = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                results.append(RunResult.from_dict(json.loads(line)))
    return results


def write_summary_csv(path, results) -> None:
    """One row per grid point: seed-averaged validation and test accuracy."""
    by_point: dict[tuple, list[RunResult]] = {}
    for r in results:
        by_point.setdefault(r.grid_key(), []).append(r)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["units", "radius_multiple", "input_scaling", "lambda",
             "num_seeds", "mean_val_accuracy", "mean_test_accuracy",
             "mean_ci_low", "mean_ci_high"]
        )
        for key in sorted(by_point):
            runs = by_point[key]
            writer.writerow([
                key[0], key[1], key[2], key[3], len(runs),
                f"{np.mean([r.val_accuracy for r in runs]):.6f}",
                f"{np.mean([r.test.mean_accuracy for r in runs]):.6f}",
                f"{np.mean([r.test.ci_low for r in runs]):.6f}",
                f"{np.mean([r.test.ci_high for r in runs]):.6f}",
            ])


def export_heatmap(results, out_path, units: int | None = None,
                   lam: float | None = None) -> None:
    """Radius-by-scaling accuracy table for fixed units and lambda.

    The filtered results must cover the full cross product of the radius
    multiples and input scalings they mention; absent cells abort with the
    list of missing (radius, scaling) pairs.
    """
    pool = list(results)
    if units is None:
        candidates = sorted({r.units for r in pool})
        if len(candidates) != 1:
            raise ValueError(f"specify units: results contain {candidates}")
        units = candidates[0]
    if lam is None:
        candidates = sorted({r.lam for r in pool})
        if len(candidates) != 1:
            raise ValueError(f"specify lambda: results contain {candidates}")
        lam = candidates[0]
    pool = [r for r in pool if r.units == units and r.lam == lam]
    if not pool:
        raise ValueError(f"no results for units={units}, lambda={lam}")

    multiples = sorted({r.radius_multiple for r in pool})
    scalings = sorted({r.input_scaling for r in pool})
    cells: dict[tuple, list[RunResult]] = {}
    for r in pool:
        cells.setdefault((r.radius_multiple, r.input_scaling), []).append(r)
    missing = [
        (m, s) for m, s in product(multiples, scalings) if (m, s) not in cells
    ]
    if missing:
        raise ValueError(f"incomplete radius x scaling grid; missing cells: {missing}")

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["radius_multiple", "input_scaling", "mean_test_accuracy",
             "ci_low", "ci_high"]
        )
        for m, s in product(multiples, scalings):
            runs = cells[(m, s)]
            writer.writerow([
                m, s,
                f"{np.mean([r.test.mean_accuracy for r in runs]):.6f}",
                f"{np.mean([r.test.ci_low for r in runs]):.6f}",
                f"{np.mean([r.test.ci_high for r in runs]):.6f}",
            ])


def export_embeddings(spec: ExperimentSpec, checkpoints, out_dir) -> list[Path]:
    """Dump state snapshots at the requested iterations for one grid point."""
    for name in ("radius_multiples", "input_scalings", "units", "seeds"):
        if len(getattr(spec, name)) != 1:
            raise ValueError(f"export_embeddings needs exactly one value in {name}")
    g, alpha = _prepare(spec)
    cfg = ReservoirConfig(
        units=spec.units[0], input_scaling=spec.input_scalings[0],
        target_radius=spec.radius_multiples[0] / alpha, seed=spec.seeds[0],
        max_iterations=spec.iterations, neighbors=spec.neighbors,
    )
    with _stage("init_reservoir"):
        weights = init_reservoir(cfg, g.num_features)
    with _stage("state_trajectory"):
        snapshots = state_trajectory(g, weights, cfg, list(checkpoints))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for emb in snapshots:
        path = out_dir / f"{spec.dataset}_k{emb.iterations_run:06d}.txt"
        write_embedding_matrix(path, emb)
        paths.append(path)
    return paths


# Known statistics of the benchmark corpus in its whole-graph form.
# edge_convention says which stored count reproduces the published "Edges"
# column: unordered pairs for the web-page graphs, directed arcs for the
# citation graphs.
EXPECTED_STATS = {
    "texas":     {"nodes": 183,   "edges": 295,    "radius": 2.56,   "homophily": 0.11, "features": 1703, "classes": 5, "edge_convention": "pairs"},
    "wisconsin": {"nodes": 251,   "edges": 466,    "radius": 2.88,   "homophily": 0.21, "features": 1703, "classes": 5, "edge_convention": "pairs"},
    "actor":     {"nodes": 7600,  "edges": 26752,  "radius": 9.99,   "homophily": 0.22, "features": 932,  "classes": 5, "edge_convention": "pairs"},
    "squirrel":  {"nodes": 5201,  "edges": 198493, "radius": 138.60, "homophily": 0.22, "features": 2089, "classes": 5, "edge_convention": "pairs"},
    "chameleon": {"nodes": 2277,  "edges": 31421,  "radius": 61.90,  "homophily": 0.23, "features": 2089, "classes": 5, "edge_convention": "pairs"},
    "cornell":   {"nodes": 183,   "edges": 280,    "radius": 2.68,   "homophily": 0.30, "features": 1703, "classes": 5, "edge_convention": "pairs"},
    "citeseer":  {"nodes": 3327,  "edges": 9104,   "radius": 13.74,  "homophily": 0.74, "features": 3703, "classes": 6, "edge_convention": "arcs"},
    "pubmed":    {"nodes": 19717, "edges": 88648,  "radius": 23.24,  "homophily": 0.80, "features": 500,  "classes": 3, "edge_convention": "arcs"},
    "cora":      {"nodes": 2708,  "edges": 10556,  "radius": 14.39,  "homophily": 0.81, "features": 1433, "classes": 7, "edge_convention": "arcs"},
}

RADIUS_TOLERANCE = 0.01
HOMOPHILY_TOLERANCE = 0.005


def compare_stats(name: str, stats) -> list[tuple[str, object, object, bool]]:
    """Compare measured GraphStats with the published values for ``name``.

    Returns (field, expected, actual, ok) rows; raises KeyError for a
    dataset without published numbers.
    """
    exp = EXPECTED_STATS[name]
    measured_edges = (
        stats.num_edges if exp["edge_convention"] == "pairs" else stats.num_arcs
    )
    return [
        ("nodes", exp["nodes"], stats.num_nodes, stats.num_nodes == exp["nodes"]),
        (f"edges ({exp['edge_convention']})", exp["edges"], measured_edges,
         measured_edges == exp["edges"]),
        ("radius", exp["radius"], stats.spectral_radius,
         abs(stats.spectral_radius - exp["radius"]) <= RADIUS_TOLERANCE),
        ("homophily", exp["homophily"], stats.edge_homophily,
         abs(stats.edge_homophily - exp["homophily"]) <= HOMOPHILY_TOLERANCE),
        ("features", exp["features"], stats.num_features,
         stats.num_features == exp["features"]),
        ("classes", exp["classes"], stats.num_classes,
         stats.num_classes == exp["classes"]),
    ]
