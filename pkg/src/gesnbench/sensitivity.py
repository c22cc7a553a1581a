"""Empirical probes of how far input perturbations propagate through
stacked graph convolutions.

An untrained relu convolution stack is run forward, its node-to-node
Jacobians are measured by central finite differences, and each measurement
is compared against the product of the layers' operator norms times the
corresponding entry of the powered normalized adjacency. That product is
the theoretical ceiling on cross-node sensitivity; the gap between the two
is what "squashes" long-range signal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import SparseGraph
from .linalg import operator_norm

__all__ = [
    "GcnStack",
    "SensitivityReport",
    "gcn_forward",
    "adjacency_power_entry",
    "empirical_jacobian_norm",
    "sensitivity_report",
    "write_sensitivity_csv",
]


@dataclass(frozen=True)
class GcnStack:
    """Untrained convolution stack: per-layer dense weights over one
    normalized adjacency. Layer 1 maps the input feature width; the rest
    map hidden width to hidden width."""

    layer_weights: tuple[np.ndarray, ...]
    normalized_adjacency: sp.spmatrix

    def __post_init__(self):
        if len(self.layer_weights) < 1:
            raise ValueError("a stack needs at least one layer")
        n = self.normalized_adjacency.shape
        if n[0] != n[1]:
            raise ValueError("adjacency must be square")
        for prev, nxt in zip(self.layer_weights, self.layer_weights[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise ValueError(
                    f"layer widths do not chain: {prev.shape} then {nxt.shape}"
                )

    @property
    def depth(self) -> int:
        return len(self.layer_weights)


@dataclass(frozen=True)
class SensitivityReport:
    """One measured source->target sensitivity against its ceiling."""

    source: int
    target: int
    depth: int
    jacobian_norm: float
    bound: float
    adjacency_mass: float

    def __post_init__(self):
        if self.jacobian_norm > self.bound + 1e-6:
            raise ValueError(
                f"measured jacobian norm {self.jacobian_norm:.6g} exceeds "
                f"the sensitivity ceiling {self.bound:.6g}"
            )


def gcn_forward(stack: GcnStack, features: np.ndarray) -> np.ndarray:
    """Run the stack: each layer is relu(adjacency @ h @ W^T)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != stack.normalized_adjacency.shape[0]:
        raise ValueError(
            f"features must be ({stack.normalized_adjacency.shape[0]}, X), "
            f"got {features.shape}"
        )
    if features.shape[1] != stack.layer_weights[0].shape[1]:
        raise ValueError(
            f"first layer expects width {stack.layer_weights[0].shape[1]}, "
            f"features have {features.shape[1]}"
        )
    h = features
    for w in stack.layer_weights:
        h = np.maximum(stack.normalized_adjacency @ h @ w.T, 0.0)
    return h


def adjacency_power_entry(norm_adj, depth: int, v: int, v_src: int) -> float:
    """Entry (v, v_src) of the depth-th power of a square sparse matrix,
    via repeated matrix-vector products against the source indicator."""
    n = norm_adj.shape[0]
    if norm_adj.shape[0] != norm_adj.shape[1]:
        raise ValueError("matrix must be square")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if not (0 <= v < n and 0 <= v_src < n):
        raise ValueError(f"node index out of range [0, {n})")
    e = np.zeros(n)
    e[v_src] = 1.0
    for _ in range(depth):
        e = norm_adj @ e
    return float(e[v])


def empirical_jacobian_norm(
    embed_fn,
    g: SparseGraph,
    v: int,
    v_src: int,
    epsilon: float = 1e-5,
) -> float:
    """Operator norm of d(state of v)/d(features of v_src), measured by
    central differences.

    ``embed_fn`` maps a full (num_nodes, X) feature matrix to per-node
    states arranged (num_nodes, state_dim); it can wrap the convolution
    stack or a fixed-iteration reservoir equally well.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not (0 <= v < g.num_nodes and 0 <= v_src < g.num_nodes):
        raise ValueError(f"node index out of range [0, {g.num_nodes})")
    base = np.asarray(g.features, dtype=np.float64)
    num_inputs = base.shape[1]
    columns = []
    for j in range(num_inputs):
        bumped = base.copy()
        bumped[v_src, j] += epsilon
        plus = np.asarray(embed_fn(bumped))[v]
        bumped[v_src, j] -= 2.0 * epsilon
        minus = np.asarray(embed_fn(bumped))[v]
        columns.append((plus - minus) / (2.0 * epsilon))
    jac = np.column_stack(columns) if columns else np.zeros((0, 0))
    if not np.isfinite(jac).all():
        raise FloatingPointError("finite differences produced non-finite values")
    if jac.size == 0:
        return 0.0
    return float(np.linalg.norm(jac, 2))


def sensitivity_report(
    g: SparseGraph,
    stack: GcnStack,
    v: int,
    v_src: int,
    epsilon: float = 1e-5,
) -> SensitivityReport:
    """Measure one node pair and compare against the norm-product ceiling.

    The ceiling is the product of the layers' operator 2-norms times the
    (v, v_src) entry of the depth-th adjacency power.
    """
    mass = adjacency_power_entry(stack.normalized_adjacency, stack.depth, v, v_src)
    lipschitz = 1.0
    for w in stack.layer_weights:
        lipschitz *= operator_norm(w)
    measured = empirical_jacobian_norm(
        lambda f: gcn_forward(stack, f), g, v, v_src, epsilon=epsilon
    )
    return SensitivityReport(
        source=v_src,
        target=v,
        depth=stack.depth,
        jacobian_norm=measured,
        bound=lipschitz * mass,
        adjacency_mass=mass,
    )


def write_sensitivity_csv(path, reports) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source", "target", "depth", "jacobian_norm", "bound", "adjacency_mass"]
        )
        for r in reports:
            writer.writerow(
                [r.source, r.target, r.depth,
                 f"{r.jacobian_norm:.17g}", f"{r.bound:.17g}", f"{r.adjacency_mass:.17g}"]
            )
