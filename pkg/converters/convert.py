#!/usr/bin/env python3
"""Convert an upstream benchmark distribution into the canonical text format.

Usage:
    convert.py --name texas --in upstream/texas --out data/

Writes ``<name>.{meta,edges,x,y,ids}`` plus ``<name>_manifest.json`` and
prints independently computed statistics for cross-checking against the
loader of the main library. All output graphs are symmetrized, with
self-loops and duplicate arcs removed. Re-running on identical inputs
produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from canonical import (
    TOOL_VERSION,
    independent_stats,
    sha256_of,
    symmetrize,
    write_canonical,
)
from upstream import parse_planetoid, parse_text_graph

TEXT_DENSE = ("cornell", "texas", "wisconsin", "chameleon", "squirrel")
TEXT_INDICES = ("actor", "film")
PLANETOID = ("cora", "citeseer", "pubmed")

# sha256 digests of upstream files, when a distribution has been pinned;
# mismatches warn rather than fail because mirrors repack these archives
PINNED_UPSTREAM_SHA256: dict[str, dict[str, str]] = {}


def upstream_files(name: str, upstream_dir: Path) -> list[Path]:
    if name in TEXT_DENSE or name in TEXT_INDICES:
        return [
            upstream_dir / "out1_node_feature_label.txt",
            upstream_dir / "out1_graph_edges.txt",
        ]
    return [
        upstream_dir / f"ind.{name}.{ext}"
        for ext in ("allx", "tx", "ally", "ty", "graph", "test.index")
    ]


def convert(name: str, upstream_dir, out_dir) -> dict:
    """Parse, symmetrize, write canonical files; returns the manifest."""
    upstream_dir = Path(upstream_dir)
    if name in TEXT_DENSE:
        features, labels, arcs = parse_text_graph(upstream_dir, "dense")
    elif name in TEXT_INDICES:
        features, labels, arcs = parse_text_graph(upstream_dir, "indices")
    elif name in PLANETOID:
        features, labels, arcs = parse_planetoid(upstream_dir, name)
    else:
        raise ValueError(
            f"unknown dataset {name!r}; expected one of "
            f"{TEXT_DENSE + TEXT_INDICES + PLANETOID}"
        )

    sources = []
    pinned = PINNED_UPSTREAM_SHA256.get(name, {})
    for path in upstream_files(name, upstream_dir):
        digest = sha256_of(path)
        sources.append({"file": path.name, "sha256": digest})
        if path.name in pinned and pinned[path.name] != digest:
            print(
                f"warning: {path.name} digest {digest[:12]} does not match "
                f"the pinned upstream digest {pinned[path.name][:12]}; "
                f"continuing (mirrors vary)",
                file=sys.stderr,
            )

    num_nodes = features.shape[0]
    arcs = symmetrize(num_nodes, arcs)
    num_classes = int(labels.max()) + 1
    written = write_canonical(
        out_dir, name, num_nodes, arcs, features, labels, num_classes
    )
    stats = independent_stats(num_nodes, arcs, features, labels)

    manifest = {
        "dataset": name,
        "tool_version": TOOL_VERSION,
        "upstream_files": sources,
        "outputs": [{"file": p.name, "sha256": sha256_of(p)} for p in written],
        "stats": stats,
    }
    manifest_path = Path(out_dir) / f"{name}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--name", required=True)
    parser.add_argument("--in", required=True, dest="upstream_dir")
    parser.add_argument("--out", required=True, dest="out_dir")
    args = parser.parse_args(argv)
    try:
        manifest = convert(args.name, args.upstream_dir, args.out_dir)
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    stats = manifest["stats"]
    print(f"converted {args.name} (tool {manifest['tool_version']})")
    print(
        f"  nodes={stats['nodes']} edges(pairs)={stats['edges']} "
        f"arcs={stats['arcs']} features={stats['features']} "
        f"classes={stats['classes']} homophily={stats['homophily']:.4f} "
        f"radius={stats['radius']:.4f}"
    )
    print(f"  manifest: {args.out_dir}/{args.name}_manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
