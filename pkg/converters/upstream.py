"""Parsers for the upstream benchmark distributions.

Two families are supported:

* text graphs (WebKB Cornell/Texas/Wisconsin, Wikipedia Chameleon/Squirrel,
  Actor): ``out1_node_feature_label.txt`` (header line, then
  ``node_id<TAB>features<TAB>label``) plus ``out1_graph_edges.txt`` (header
  line, then ``src<TAB>dst``). WebKB/Wikipedia features are comma-separated
  dense 0/1 vectors; Actor features are comma-separated indices of the
  active dimensions out of 932.

* pickled citation graphs (Planetoid Cora/Citeseer/Pubmed):
  ``ind.<name>.{x,tx,allx,y,ty,ally,graph}`` plus ``ind.<name>.test.index``.
"""

from __future__ import annotations

import pickle
from pathlib import Path

import numpy as np
import scipy.sparse as sp

ACTOR_FEATURE_DIM = 932


class UpstreamFormatError(ValueError):
    pass


def _read_rows(path: Path) -> list[str]:
    if not path.exists():
        raise UpstreamFormatError(f"{path}: upstream file not found")
    rows = path.read_text(encoding="utf-8").splitlines()
    return [r for r in rows[1:] if r.strip()]  # first line is a header


def parse_text_graph(upstream_dir, feature_mode: str):
    """Parse the text family; returns (features, labels, arcs).

    ``feature_mode`` is "dense" for comma-separated vectors or "indices"
    for comma-separated active positions (Actor).
    """
    upstream_dir = Path(upstream_dir)
    node_path = upstream_dir / "out1_node_feature_label.txt"
    edge_path = upstream_dir / "out1_graph_edges.txt"

    feature_rows: dict[int, np.ndarray] = {}
    labels: dict[int, int] = {}
    for i, row in enumerate(_read_rows(node_path), start=2):
        parts = row.split("\t")
        if len(parts) != 3:
            raise UpstreamFormatError(
                f"{node_path}:{i}: expected 'id<TAB>features<TAB>label'"
            )
        node = int(parts[0])
        if feature_mode == "dense":
            feature_rows[node] = np.array([float(v) for v in parts[1].split(",")])
        elif feature_mode == "indices":
            vec = np.zeros(ACTOR_FEATURE_DIM)
            vec[[int(v) for v in parts[1].split(",")]] = 1.0
            feature_rows[node] = vec
        else:
            raise ValueError(f"unknown feature mode {feature_mode!r}")
        labels[node] = int(parts[2])

    n = max(feature_rows) + 1
    if sorted(feature_rows) != list(range(n)):
        raise UpstreamFormatError(f"{node_path}: node ids are not contiguous from 0")
    widths = {len(v) for v in feature_rows.values()}
    if len(widths) != 1:
        raise UpstreamFormatError(f"{node_path}: inconsistent feature widths {widths}")

    features = np.stack([feature_rows[v] for v in range(n)])
    label_arr = np.array([labels[v] for v in range(n)], dtype=np.int64)

    arcs = []
    for i, row in enumerate(_read_rows(edge_path), start=2):
        parts = row.split("\t")
        if len(parts) != 2:
            raise UpstreamFormatError(f"{edge_path}:{i}: expected 'src<TAB>dst'")
        src, dst = int(parts[0]), int(parts[1])
        if not (0 <= src < n and 0 <= dst < n):
            raise UpstreamFormatError(f"{edge_path}:{i}: endpoint outside [0, {n})")
        arcs.append((src, dst))
    return features, label_arr, arcs


def _load_pickle(path: Path):
    if not path.exists():
        raise UpstreamFormatError(f"{path}: upstream file not found")
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def parse_planetoid(upstream_dir, name: str):
    """Reassemble a Planetoid citation graph; returns (features, labels, arcs).

    Nodes below ``allx.shape[0]`` carry allx/ally rows; row i of tx/ty
    belongs to the node named on line i of ``test.index``. Ids inside the
    test range that the index skips (Citeseer) become all-zero rows, per
    the established reassembly of these files.
    """
    upstream_dir = Path(upstream_dir)
    allx = sp.csr_matrix(_load_pickle(upstream_dir / f"ind.{name}.allx"))
    tx = sp.csr_matrix(_load_pickle(upstream_dir / f"ind.{name}.tx"))
    ally = np.asarray(_load_pickle(upstream_dir / f"ind.{name}.ally"))
    ty = np.asarray(_load_pickle(upstream_dir / f"ind.{name}.ty"))
    graph = _load_pickle(upstream_dir / f"ind.{name}.graph")

    index_path = upstream_dir / f"ind.{name}.test.index"
    if not index_path.exists():
        raise UpstreamFormatError(f"{index_path}: upstream file not found")
    test_idx = np.array(
        [int(line) for line in index_path.read_text().split()], dtype=np.int64
    )
    if test_idx.size == 0:
        raise UpstreamFormatError(f"{index_path}: empty test index")
    if len(np.unique(test_idx)) != len(test_idx):
        raise UpstreamFormatError(f"{index_path}: duplicate test indices")

    base = allx.shape[0]
    if allx.shape[1] != tx.shape[1] or ally.shape[1] != ty.shape[1]:
        raise UpstreamFormatError(f"{name}: allx/tx or ally/ty widths disagree")
    if tx.shape[0] != len(test_idx) or ty.shape[0] != len(test_idx):
        raise UpstreamFormatError(f"{name}: tx/ty row count != test index length")
    if test_idx.min() < base:
        raise UpstreamFormatError(f"{name}: test index overlaps the allx block")

    n = int(test_idx.max()) + 1
    features = np.zeros((n, allx.shape[1]))
    features[:base] = allx.toarray()
    features[test_idx] = tx.toarray()
    onehot = np.zeros((n, ally.shape[1]))
    onehot[:base] = ally
    onehot[test_idx] = ty
    labels = onehot.argmax(axis=1).astype(np.int64)  # gap fillers land in class 0

    arcs = []
    for u, neighbors in graph.items():
        for v in neighbors:
            if not (0 <= u < n and 0 <= v < n):
                raise UpstreamFormatError(
                    f"{name}: graph edge ({u}, {v}) outside [0, {n})"
                )
            arcs.append((int(u), int(v)))
    return features, labels, arcs
