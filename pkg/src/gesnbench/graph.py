"""Immutable sparse graph with the structural and spectral measurements
used throughout the package.

Arcs are stored in CSR form: row ``u`` of (indptr, indices) lists the targets
of arcs leaving ``u``. Undirected graphs store both arc directions and are
validated to be symmetric. Self-loops and duplicate arcs are dropped at
construction; normalization re-introduces self-loops where it needs them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .linalg import nonnegative_spectral_radius

__all__ = [
    "SparseGraph",
    "GraphStats",
    "spectral_radius",
    "edge_homophily",
    "largest_connected_component",
    "to_undirected",
    "normalized_adjacency",
    "graph_stats",
]


@dataclass(frozen=True)
class SparseGraph:
    """Fixed node-attributed graph: CSR arcs, dense features, class labels."""

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    directed: bool
    features: np.ndarray  # (num_nodes, num_features)
    labels: np.ndarray    # (num_nodes,) ints in [0, num_classes)
    num_classes: int
    node_ids: np.ndarray  # original identifiers, survives subgraph extraction

    def __post_init__(self):
        n = self.num_nodes
        if n < 0:
            raise ValueError("num_nodes must be nonnegative")
        if len(self.indptr) != n + 1:
            raise ValueError(f"indptr length {len(self.indptr)} != num_nodes+1 ({n + 1})")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("CSR offsets must be non-decreasing")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise ValueError("CSR offsets do not span the index array")
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= n):
            raise ValueError("column index out of range")
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise ValueError(f"features must be ({n}, X), got {self.features.shape}")
        if self.labels.shape != (n,):
            raise ValueError(f"labels must have length {n}")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("label outside [0, num_classes)")
        if self.node_ids.shape != (n,):
            raise ValueError(f"node_ids must have length {n}")
        rows = self._arc_rows()
        if np.any(rows == self.indices):
            raise ValueError("self-loops must not be stored")
        if not self.directed:
            a = self.adjacency()
            if (a != a.T).nnz != 0:
                raise ValueError("undirected graph must store a symmetric arc set")

    @classmethod
    def from_arcs(
        cls,
        num_nodes: int,
        arcs,
        *,
        directed: bool,
        features: np.ndarray | None = None,
        labels: np.ndarray | None = None,
        num_classes: int | None = None,
        node_ids: np.ndarray | None = None,
    ) -> "SparseGraph":
        """Build a graph from an iterable of (src, dst) pairs.

        Duplicate arcs are collapsed and self-loops dropped. For
        ``directed=False`` the arc set is symmetrized.
        """
        arcs = np.asarray(list(arcs) if not isinstance(arcs, np.ndarray) else arcs,
                          dtype=np.int64)
        if arcs.size == 0:
            arcs = arcs.reshape(0, 2)
        if arcs.ndim != 2 or arcs.shape[1] != 2:
            raise ValueError("arcs must be an iterable of (src, dst) pairs")
        src, dst = arcs[:, 0], arcs[:, 1]
        if not directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        keep = src != dst
        src, dst = src[keep], dst[keep]
        if len(src) and (src.min() < 0 or src.max() >= num_nodes
                         or dst.min() < 0 or dst.max() >= num_nodes):
            raise ValueError("arc endpoint out of range")
        a = sp.csr_matrix(
            (np.ones(len(src)), (src, dst)), shape=(num_nodes, num_nodes)
        )
        a.sum_duplicates()
        a.data[:] = 1.0

        if features is None:
            features = np.zeros((num_nodes, 0))
        features = np.asarray(features, dtype=np.float64)
        if labels is None:
            labels = np.zeros(num_nodes, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        if num_classes is None:
            num_classes = int(labels.max()) + 1 if num_nodes else 0
        if node_ids is None:
            node_ids = np.arange(num_nodes, dtype=np.int64)
        node_ids = np.asarray(node_ids, dtype=np.int64)
        return cls(
            num_nodes=num_nodes,
            indptr=a.indptr.astype(np.int64),
            indices=a.indices.astype(np.int64),
            directed=directed,
            features=features,
            labels=labels,
            num_classes=int(num_classes),
            node_ids=node_ids,
        )

    def adjacency(self) -> sp.csr_matrix:
        """Arc structure as a 0/1 CSR matrix; entry (u, v) = 1 iff arc u->v."""
        return sp.csr_matrix(
            (np.ones(len(self.indices)), self.indices, self.indptr),
            shape=(self.num_nodes, self.num_nodes),
        )

    def num_arcs(self) -> int:
        return len(self.indices)

    def num_undirected_edges(self) -> int:
        """Unordered endpoint pairs of the symmetrized arc set."""
        a = self.adjacency()
        sym = a.maximum(a.T)
        return sp.triu(sym, k=1).nnz

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def _arc_rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_nodes), np.diff(self.indptr))


@dataclass(frozen=True)
class GraphStats:
    """Aggregate structural measurements of one graph.

    ``num_edges`` counts unordered endpoint pairs; ``num_arcs`` counts stored
    directed arcs. Published edge counts for the benchmark corpus use one or
    the other depending on the dataset, so both are kept.
    """

    num_nodes: int
    num_edges: int
    num_arcs: int
    spectral_radius: float
    edge_homophily: float
    num_features: int
    num_classes: int

    def __post_init__(self):
        if self.spectral_radius < 0:
            raise ValueError("spectral_radius must be nonnegative")
        if not 0.0 <= self.edge_homophily <= 1.0:
            raise ValueError("edge_homophily must lie in [0, 1]")


def spectral_radius(g: SparseGraph, tol: float = 1e-8, max_iters: int = 10_000) -> float:
    """Spectral radius of the stored arc structure.

    Power iteration with an all-ones start vector (deterministic); converged
    when successive Rayleigh estimates move by less than ``tol``. Raises
    ConvergenceError carrying the last estimate if the budget runs out.
    """
    if g.num_nodes == 0:
        raise ValueError("spectral radius of an empty graph is undefined")
    return nonnegative_spectral_radius(g.adjacency(), tol=tol, max_iters=max_iters)


def edge_homophily(g: SparseGraph) -> float:
    """Fraction of undirected edges whose endpoints share a class label."""
    a = g.adjacency()
    sym = sp.coo_matrix(sp.triu(a.maximum(a.T), k=1))
    if sym.nnz == 0:
        raise ValueError("edge homophily is undefined on a graph with no edges")
    same = g.labels[sym.row] == g.labels[sym.col]
    return float(np.mean(same))


def largest_connected_component(g: SparseGraph) -> SparseGraph:
    """Subgraph induced on the largest weakly connected component.

    Node indices are compacted; ``node_ids`` keeps the identifiers the nodes
    had in ``g``. Ties between equal-size components go to the component
    containing the smallest node index of ``g`` (components are discovered in
    index order, so the first maximal one wins).
    """
    if g.num_nodes == 0:
        return g
    n_comp, comp = connected_components(
        g.adjacency(), directed=g.directed, connection="weak"
    )
    sizes = np.bincount(comp, minlength=n_comp)
    best = int(np.argmax(sizes))  # argmax takes the first maximum: smallest index wins
    keep = np.flatnonzero(comp == best)
    remap = -np.ones(g.num_nodes, dtype=np.int64)
    remap[keep] = np.arange(len(keep))

    rows = g._arc_rows()
    mask = (comp[rows] == best) & (comp[g.indices] == best)
    new_arcs = np.column_stack([remap[rows[mask]], remap[g.indices[mask]]])
    return SparseGraph.from_arcs(
        num_nodes=len(keep),
        arcs=new_arcs,
        directed=g.directed,
        features=g.features[keep],
        labels=g.labels[keep],
        num_classes=g.num_classes,
        node_ids=g.node_ids[keep],
    )


def to_undirected(g: SparseGraph) -> SparseGraph:
    """Symmetrize the arc set (idempotent)."""
    rows = g._arc_rows()
    return SparseGraph.from_arcs(
        num_nodes=g.num_nodes,
        arcs=np.column_stack([rows, g.indices]),
        directed=False,
        features=g.features,
        labels=g.labels,
        num_classes=g.num_classes,
        node_ids=g.node_ids,
    )


def normalized_adjacency(g: SparseGraph) -> sp.csr_matrix:
    """Degree-normalized adjacency with self-loops.

    Returns D^{-1/2} (A + I) D^{-1/2} where D is the degree matrix of A + I
    (symmetric normalization, the graph-convolution convention). An isolated
    node keeps a unit diagonal entry.
    """
    if g.directed:
        raise ValueError("normalized adjacency requires an undirected graph")
    a_loop = g.adjacency() + sp.identity(g.num_nodes, format="csr")
    inv_sqrt_deg = 1.0 / np.sqrt(np.asarray(a_loop.sum(axis=1)).ravel())
    d = sp.diags(inv_sqrt_deg)
    return sp.csr_matrix(d @ a_loop @ d)


def graph_stats(g: SparseGraph, tol: float = 1e-8, max_iters: int = 10_000) -> GraphStats:
    """Aggregate node/edge counts, spectral radius and homophily for ``g``."""
    return GraphStats(
        num_nodes=g.num_nodes,
        num_edges=g.num_undirected_edges(),
        num_arcs=g.num_arcs(),
        spectral_radius=spectral_radius(g, tol=tol, max_iters=max_iters),
        edge_homophily=edge_homophily(g),
        num_features=g.num_features,
        num_classes=g.num_classes,
    )
