"""Command-line harness.

Subcommands: ``run`` (one configuration), ``grid`` (full grid search from a
JSON spec), ``heatmap`` (radius x scaling CSV from saved results),
``embed-dump`` (state snapshots for external plotting), ``stats`` (dataset
statistics against the published values). Exit code 0 on success, 1 on any
stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .datasets import load_dataset
from .graph import graph_stats, largest_connected_component, to_undirected


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected 'train,val,test'")
    return tuple(parts)


def _parse_checkpoints(text: str) -> list[int]:
    return [int(p) for p in text.split(",")]


def _spec_from_run_args(args) -> bench.ExperimentSpec:
    return bench.ExperimentSpec(
        dataset=args.dataset,
        data_dir=args.data_dir,
        undirected=args.undirected,
        lcc=args.lcc,
        radius_multiples=(args.radius_mult,),
        input_scalings=(args.scaling,),
        units=(args.units,),
        lambdas=(getattr(args, "lambda"),),
        iterations=args.K,
        seeds=(args.seed,),
        split_file=args.split_file,
        split_fractions=args.split_frac,
        split_seed=args.split_seed,
        bootstrap_resamples=args.bootstrap,
        confidence=args.confidence,
    )


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run a single configuration")
    p.add_argument("--dataset", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--lcc", action="store_true")
    p.add_argument("--radius-mult", type=float, required=True,
                   help="reservoir radius as a multiple of 1/alpha")
    p.add_argument("--scaling", type=float, required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lambda")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-file", default=None)
    p.add_argument("--split-frac", type=_parse_fractions, default=(0.6, 0.2, 0.2))
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--out", default=None, help="append the result to this JSONL file")


def _cmd_run(args) -> int:
    result = bench.run_single(_spec_from_run_args(args))
    payload = result.to_dict()
    print(json.dumps(payload, indent=2))
    if args.out:
        with open(args.out, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload) + "\n")
    return 0


def _cmd_grid(args) -> int:
    spec = bench.ExperimentSpec.from_json(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jsonl = out / "results.jsonl"
    with open(jsonl, "w", encoding="utf-8") as fh:
        def append(result):
            fh.write(json.dumps(result.to_dict()) + "\n")
            fh.flush()
        outcome = bench.grid_search(spec, on_result=append)
    bench.write_summary_csv(out / "summary.csv", outcome.results)
    best = {
        "best": outcome.best,
        "mean_val_accuracy": outcome.mean_val_accuracy,
        "mean_test_accuracy": outcome.mean_test_accuracy,
        "mean_ci_low": outcome.mean_ci_low,
        "mean_ci_high": outcome.mean_ci_high,
        "failures": [{"config": c, "error": e} for c, e in outcome.failures],
    }
    (out / "best.json").write_text(json.dumps(best, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(best, indent=2))
    return 0


def _cmd_heatmap(args) -> int:
    results = bench.read_results_jsonl(getattr(args, "in"))
    bench.export_heatmap(results, args.out, units=args.units, lam=getattr(args, "lambda"))
    print(f"wrote {args.out}")
    return 0


def _cmd_embed_dump(args) -> int:
    spec = bench.ExperimentSpec(
        dataset=args.dataset,
        data_dir=args.data_dir,
        undirected=args.undirected,
        lcc=args.lcc,
        radius_multiples=(args.radius_mult,),
        input_scalings=(args.scaling,),
        units=(args.units,),
        lambdas=(1.0,),  # readout unused when dumping states
        iterations=args.K,
        seeds=(args.seed,),
    )
    paths = bench.export_embeddings(spec, args.checkpoints, args.out)
    for p in paths:
        print(p)
    return 0


def _cmd_stats(args) -> int:
    ds = load_dataset(args.data_dir, args.dataset)
    g = ds.graph
    if args.undirected:
        g = to_undirected(g)
    if args.lcc:
        g = largest_connected_component(g)
    stats = graph_stats(g)
    print(f"dataset {args.dataset} (checksum {ds.source_checksum[:12]})")
    print(f"  nodes={stats.num_nodes} edges(pairs)={stats.num_edges} "
          f"arcs={stats.num_arcs} radius={stats.spectral_radius:.4f} "
          f"homophily={stats.edge_homophily:.4f} features={stats.num_features} "
          f"classes={stats.num_classes}")
    if args.dataset not in bench.EXPECTED_STATS:
        print("  no published reference values for this dataset")
        return 0
    ok_all = True
    for fieldname, expected, actual, ok in bench.compare_stats(args.dataset, stats):
        status = "ok" if ok else "MISMATCH"
        shown = f"{actual:.4f}" if isinstance(actual, float) else actual
        print(f"  {fieldname}: expected {expected}, measured {shown} [{status}]")
        ok_all = ok_all and ok
    return 0 if ok_all else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesnbench",
        description="graph echo state network benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_parser(sub)

    p = sub.add_parser("grid", help="grid search from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("heatmap", help="radius x scaling CSV from results")
    p.add_argument("--in", required=True, dest="in")
    p.add_argument("--out", required=True)
    p.add_argument("--units", type=int, default=None)
    p.add_argument("--lambda", type=float, default=None, dest="lambda")

    p = sub.add_parser("embed-dump", help="dump state snapshots")
    p.add_argument("--dataset", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--lcc", action="store_true")
    p.add_argument("--radius-mult", type=float, required=True)
    p.add_argument("--scaling", type=float, default=1.0)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoints", type=_parse_checkpoints, required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("stats", help="dataset statistics vs published values")
    p.add_argument("--dataset", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--lcc", action="store_true")
    return parser


_COMMANDS = {
    "run": _cmd_run,
    "grid": _cmd_grid,
    "heatmap": _cmd_heatmap,
    "embed-dump": _cmd_embed_dump,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except bench.PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
