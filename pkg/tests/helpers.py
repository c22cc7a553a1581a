import numpy as np

from gesnbench import SparseGraph


def make_graph(num_nodes, arcs, directed=False, features=None, labels=None,
               num_classes=None):
    if features is None:
        rng = np.random.default_rng(7)
        features = rng.uniform(-1.0, 1.0, (num_nodes, 3))
    if labels is None:
        labels = np.arange(num_nodes) % 2
    return SparseGraph.from_arcs(
        num_nodes=num_nodes, arcs=arcs, directed=directed,
        features=np.asarray(features, dtype=float),
        labels=np.asarray(labels), num_classes=num_classes,
    )


def random_undirected_graph(rng, num_nodes, edge_prob=0.3, num_features=3,
                            num_classes=2):
    arcs = []
    for u in range(num_nodes):
        for v in range(u + 1, num_nodes):
            if rng.random() < edge_prob:
                arcs.append((u, v))
    return SparseGraph.from_arcs(
        num_nodes=num_nodes, arcs=arcs, directed=False,
        features=rng.uniform(-1.0, 1.0, (num_nodes, num_features)),
        labels=rng.integers(0, num_classes, num_nodes),
        num_classes=num_classes,
    )
