"""Canonical text format writer and independent graph statistics.

This module deliberately reimplements the statistics (homophily, spectral
radius, edge counts) with different machinery than the main library, so the
conversion step cross-checks the loader rather than echoing it.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

TOOL_VERSION = "1.0.0"


def symmetrize(num_nodes: int, arcs) -> list[tuple[int, int]]:
    """Undirected arc set: both directions, no self-loops, no duplicates,
    sorted for byte-stable output."""
    pairs = set()
    for u, v in arcs:
        if u != v:
            pairs.add((int(u), int(v)))
            pairs.add((int(v), int(u)))
    return sorted(pairs)


def write_canonical(out_dir, name, num_nodes, arcs, features, labels,
                    num_classes) -> list[Path]:
    """Write the five canonical files; arcs must already be symmetric."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    meta = out_dir / f"{name}.meta"
    meta.write_text(
        f"nodes={num_nodes}\nfeatures={features.shape[1]}\n"
        f"classes={num_classes}\ndirected=0\n",
        encoding="utf-8",
    )
    paths.append(meta)

    edges = out_dir / f"{name}.edges"
    edges.write_text("".join(f"{u}\t{v}\n" for u, v in arcs), encoding="utf-8")
    paths.append(edges)

    x = out_dir / f"{name}.x"
    x.write_text(
        "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in features),
        encoding="utf-8",
    )
    paths.append(x)

    y = out_dir / f"{name}.y"
    y.write_text("".join(f"{v}\n" for v in labels), encoding="utf-8")
    paths.append(y)

    ids = out_dir / f"{name}.ids"
    ids.write_text("".join(f"{v}\n" for v in range(num_nodes)), encoding="utf-8")
    paths.append(ids)
    return paths


def independent_stats(num_nodes, arcs, features, labels) -> dict:
    """Node/edge counts, homophily and spectral radius from first principles.

    The radius comes from a Lanczos eigensolver on the symmetrized
    adjacency (dense eigensolver below the Lanczos minimum), not from the
    main library's power iteration.
    """
    pairs = sorted({(min(u, v), max(u, v)) for u, v in arcs if u != v})
    adj = sp.coo_matrix(
        (
            np.ones(2 * len(pairs)),
            (
                [p[0] for p in pairs] + [p[1] for p in pairs],
                [p[1] for p in pairs] + [p[0] for p in pairs],
            ),
        ),
        shape=(num_nodes, num_nodes),
    ).tocsr()

    if pairs:
        same = sum(1 for u, v in pairs if labels[u] == labels[v])
        homophily = same / len(pairs)
    else:
        homophily = float("nan")

    if num_nodes == 0 or not pairs:
        radius = 0.0
    elif num_nodes < 12:
        radius = float(np.abs(np.linalg.eigvalsh(adj.toarray())).max())
    else:
        # adjacency of an undirected graph is symmetric with a nonnegative
        # dominant eigenvalue, so the largest algebraic eigenvalue is rho
        radius = float(spla.eigsh(
            adj, k=1, which="LA", return_eigenvectors=False, tol=1e-10
        )[0])

    return {
        "nodes": int(num_nodes),
        "edges": len(pairs),
        "arcs": 2 * len(pairs),
        "features": int(features.shape[1]),
        "classes": int(labels.max()) + 1 if num_nodes else 0,
        "homophily": homophily,
        "radius": radius,
    }


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
