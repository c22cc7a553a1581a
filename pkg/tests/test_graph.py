import numpy as np
import pytest

from gesnbench import (
    SparseGraph,
    edge_homophily,
    graph_stats,
    largest_connected_component,
    normalized_adjacency,
    spectral_radius,
    to_undirected,
)
from gesnbench.linalg import nonnegative_spectral_radius

from helpers import make_graph, random_undirected_graph


class TestConstruction:
    def test_duplicate_arcs_collapse(self):
        g = make_graph(3, [(0, 1), (0, 1), (1, 2)], directed=True)
        assert g.num_arcs() == 2

    def test_self_loops_dropped(self):
        g = make_graph(3, [(0, 0), (0, 1)], directed=True)
        assert g.num_arcs() == 1

    def test_endpoint_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            make_graph(2, [(0, 5)])

    def test_label_out_of_range(self):
        with pytest.raises(ValueError, match="label"):
            make_graph(2, [(0, 1)], labels=[0, 7], num_classes=2)

    def test_asymmetric_undirected_rejected(self):
        arcs = np.array([[0, 1]])
        with pytest.raises(ValueError, match="symmetric"):
            SparseGraph(
                num_nodes=2,
                indptr=np.array([0, 1, 1]),
                indices=np.array([1]),
                directed=False,
                features=np.zeros((2, 1)),
                labels=np.zeros(2, dtype=np.int64),
                num_classes=2,
                node_ids=np.arange(2),
            )
        del arcs


class TestSpectralRadius:
    def test_single_edge(self):
        g = make_graph(2, [(0, 1)])
        assert spectral_radius(g) == pytest.approx(1.0, abs=1e-8)

    def test_four_cycle_is_regular(self):
        g = make_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        assert spectral_radius(g) == pytest.approx(2.0, abs=1e-8)

    def test_star_matches_dense_oracle(self):
        # hub 0 with 4 leaves; oracle: dense eigensolver on the 5x5 adjacency
        g = make_graph(5, [(0, i) for i in range(1, 5)])
        dense = np.zeros((5, 5))
        for i in range(1, 5):
            dense[0, i] = dense[i, 0] = 1.0
        oracle = np.abs(np.linalg.eigvalsh(dense)).max()
        assert oracle == pytest.approx(2.0)  # sqrt(4)
        assert spectral_radius(g) == pytest.approx(oracle, abs=1e-6)

    def test_disjoint_union_takes_max(self):
        # 4-cycle (rho=2) plus a lone edge (rho=1)
        g = make_graph(6, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5)])
        assert spectral_radius(g) == pytest.approx(2.0, abs=1e-8)

    def test_empty_graph_rejected(self):
        g = SparseGraph.from_arcs(num_nodes=0, arcs=[], directed=False)
        with pytest.raises(ValueError):
            spectral_radius(g)


class TestEdgeHomophily:
    def test_single_same_class_edge(self):
        g = make_graph(2, [(0, 1)], labels=[0, 0], num_classes=2)
        assert edge_homophily(g) == 1.0

    def test_triangle_one_of_three(self, triangle):
        assert edge_homophily(triangle) == pytest.approx(1 / 3)

    def test_no_edges_rejected(self):
        g = make_graph(3, [])
        with pytest.raises(ValueError, match="no edges"):
            edge_homophily(g)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        g = random_undirected_graph(rng, 12, num_classes=3)
        perm = rng.permutation(12)
        inv = np.argsort(perm)
        rows = np.repeat(np.arange(12), np.diff(g.indptr))
        permuted = SparseGraph.from_arcs(
            num_nodes=12,
            arcs=np.column_stack([perm[rows], perm[g.indices]]),
            directed=False,
            features=g.features[inv],
            labels=g.labels[inv],
            num_classes=g.num_classes,
        )
        assert edge_homophily(permuted) == pytest.approx(edge_homophily(g))


class TestLargestConnectedComponent:
    def test_connected_graph_unchanged(self, path4):
        out = largest_connected_component(path4)
        assert out.num_nodes == 4
        assert out.num_arcs() == path4.num_arcs()

    def test_picks_larger_component(self):
        g = make_graph(5, [(0, 1), (1, 2), (3, 4)], labels=[0, 0, 1, 1, 0],
                       num_classes=2)
        out = largest_connected_component(g)
        assert out.num_nodes == 3
        assert list(out.node_ids) == [0, 1, 2]

    def test_tie_takes_smallest_index_component(self):
        # components {1,3,5} and {0,2,4}, equal size; enumerate both layouts
        for arcs, expected in [
            ([(1, 3), (3, 5), (0, 2), (2, 4)], [0, 2, 4]),
            ([(0, 3), (3, 5), (1, 2), (2, 4)], [0, 3, 5]),
        ]:
            g = make_graph(6, arcs)
            out = largest_connected_component(g)
            assert sorted(out.node_ids) == expected

    def test_features_and_labels_sliced(self):
        feats = np.arange(10, dtype=float).reshape(5, 2)
        g = make_graph(5, [(0, 1), (1, 2), (3, 4)], features=feats,
                       labels=[0, 1, 0, 1, 1], num_classes=2)
        out = largest_connected_component(g)
        np.testing.assert_array_equal(out.features, feats[:3])
        np.testing.assert_array_equal(out.labels, [0, 1, 0])

    def test_idempotent(self):
        g = make_graph(5, [(0, 1), (1, 2), (3, 4)])
        once = largest_connected_component(g)
        twice = largest_connected_component(once)
        assert once.num_nodes == twice.num_nodes
        np.testing.assert_array_equal(once.indices, twice.indices)

    def test_weak_connectivity_on_directed(self):
        g = make_graph(4, [(0, 1), (2, 1), (3, 2)], directed=True)
        out = largest_connected_component(g)
        assert out.num_nodes == 4


class TestToUndirected:
    def test_already_undirected_unchanged(self, path4):
        out = to_undirected(path4)
        np.testing.assert_array_equal(out.indptr, path4.indptr)
        np.testing.assert_array_equal(out.indices, path4.indices)

    def test_single_arc_symmetrized(self):
        g = make_graph(2, [(0, 1)], directed=True)
        out = to_undirected(g)
        assert not out.directed
        assert out.num_arcs() == 2

    def test_mixed_arcs(self):
        g = make_graph(3, [(0, 1), (1, 0), (1, 2)], directed=True)
        out = to_undirected(g)
        assert out.num_undirected_edges() == 2
        assert out.num_arcs() == 4

    def test_idempotent(self):
        g = make_graph(3, [(0, 1), (1, 2)], directed=True)
        once = to_undirected(g)
        twice = to_undirected(once)
        np.testing.assert_array_equal(once.indices, twice.indices)


class TestNormalizedAdjacency:
    def test_isolated_node_unit_diagonal(self):
        g = make_graph(1, [])
        np.testing.assert_allclose(normalized_adjacency(g).toarray(), [[1.0]])

    def test_single_edge_all_half(self):
        g = make_graph(2, [(0, 1)])
        np.testing.assert_allclose(
            normalized_adjacency(g).toarray(), np.full((2, 2), 0.5)
        )

    def test_four_cycle_rows_sum_to_one(self):
        g = make_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        rows = np.asarray(normalized_adjacency(g).sum(axis=1)).ravel()
        np.testing.assert_allclose(rows, 1.0, atol=1e-12)

    def test_symmetric_nonnegative_radius_at_most_one(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            g = random_undirected_graph(rng, int(rng.integers(2, 15)))
            a_hat = normalized_adjacency(g)
            dense = a_hat.toarray()
            np.testing.assert_allclose(dense, dense.T, atol=1e-15)
            assert dense.min() >= 0.0
            rho = nonnegative_spectral_radius(a_hat)
            assert rho <= 1.0 + 1e-9

    def test_directed_rejected(self):
        g = make_graph(2, [(0, 1)], directed=True)
        with pytest.raises(ValueError, match="undirected"):
            normalized_adjacency(g)


class TestGraphStats:
    def test_aggregates_fields(self, triangle):
        stats = graph_stats(triangle)
        assert stats.num_nodes == 3
        assert stats.num_edges == 3
        assert stats.num_arcs == 6
        assert stats.spectral_radius == pytest.approx(2.0, abs=1e-8)
        assert stats.edge_homophily == pytest.approx(1 / 3)
        assert stats.num_features == 3
        assert stats.num_classes == 2

    def test_featureless_single_node_errors_on_homophily(self):
        g = SparseGraph.from_arcs(
            num_nodes=1, arcs=[], directed=False,
            features=np.zeros((1, 0)), labels=np.zeros(1, dtype=np.int64),
            num_classes=1,
        )
        assert g.num_features == 0
        with pytest.raises(ValueError, match="no edges"):
            graph_stats(g)
