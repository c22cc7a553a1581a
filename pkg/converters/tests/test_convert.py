import json
import os
import pickle
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

import convert
import convert_splits
from convert import convert as run_convert
from convert_splits import SplitConversionError, convert_split_file
from upstream import UpstreamFormatError, parse_planetoid, parse_text_graph

from gesnbench import graph_stats, load_dataset, load_splits
from gesnbench.cli import main as gesnbench_cli


def write_webkb_fixture(base):
    """Tiny directed web graph with a self-loop and a duplicate arc."""
    base.mkdir(parents=True, exist_ok=True)
    nodes = [
        "node_id\tfeature\tlabel",
        "0\t1,0,0,1\t0",
        "1\t0,1,0,0\t0",
        "2\t0,0,1,1\t1",
        "3\t1,1,0,0\t1",
        "4\t0,0,0,1\t2",
    ]
    edges = [
        "src\tdst",
        "0\t1",
        "0\t1",  # duplicate
        "1\t2",
        "2\t2",  # self-loop
        "3\t4",
        "4\t0",
    ]
    (base / "out1_node_feature_label.txt").write_text("\n".join(nodes) + "\n")
    (base / "out1_graph_edges.txt").write_text("\n".join(edges) + "\n")


def write_actor_fixture(base):
    base.mkdir(parents=True, exist_ok=True)
    nodes = [
        "node_id\tfeature\tlabel",
        "0\t0,5,931\t0",
        "1\t1\t1",
        "2\t2,3\t2",
        "3\t10,20,30\t1",
    ]
    edges = ["src\tdst", "0\t1", "1\t2", "2\t3"]
    (base / "out1_node_feature_label.txt").write_text("\n".join(nodes) + "\n")
    (base / "out1_graph_edges.txt").write_text("\n".join(edges) + "\n")


def write_planetoid_fixture(base, name="cora", gapped=False):
    """Six base nodes plus three test nodes (ids 6.. with optional gap)."""
    base.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    allx = sp.csr_matrix((rng.random((6, 4)) < 0.5).astype(float))
    ally = np.zeros((6, 3))
    ally[np.arange(6), [0, 1, 2, 0, 1, 2]] = 1
    tx = sp.csr_matrix(np.array([
        [1.0, 0, 0, 0],
        [0, 1.0, 0, 0],
        [0, 0, 1.0, 0],
    ]))
    ty = np.zeros((3, 3))
    ty[np.arange(3), [2, 1, 0]] = 1
    if gapped:
        test_index = [8, 6, 9]  # node 7 is skipped and zero-filled
        n = 10
    else:
        test_index = [8, 6, 7]
        n = 9
    graph = {i: [] for i in range(n)}
    for u, v in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 8)]:
        graph[u].append(v)
        graph[v].append(u)
    graph[0].append(0)  # self-loop to be dropped

    for ext, obj in (("allx", allx), ("tx", tx), ("ally", ally),
                     ("ty", ty), ("graph", graph)):
        with open(base / f"ind.{name}.{ext}", "wb") as fh:
            pickle.dump(obj, fh)
    (base / f"ind.{name}.test.index").write_text(
        "".join(f"{i}\n" for i in test_index)
    )


class TestTextParsers:
    def test_webkb_dense_features(self, tmp_path):
        write_webkb_fixture(tmp_path / "up")
        features, labels, arcs = parse_text_graph(tmp_path / "up", "dense")
        assert features.shape == (5, 4)
        np.testing.assert_array_equal(labels, [0, 0, 1, 1, 2])
        assert (2, 2) in arcs  # raw parse keeps the self-loop; convert drops it
        assert len(arcs) == 6

    def test_actor_index_features(self, tmp_path):
        write_actor_fixture(tmp_path / "up")
        features, labels, arcs = parse_text_graph(tmp_path / "up", "indices")
        assert features.shape == (4, 932)
        assert features[0, 0] == features[0, 5] == features[0, 931] == 1.0
        assert features.sum() == 9.0

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(UpstreamFormatError, match="not found"):
            parse_text_graph(tmp_path, "dense")

    def test_malformed_row_reported_with_line(self, tmp_path):
        write_webkb_fixture(tmp_path / "up")
        bad = tmp_path / "up" / "out1_node_feature_label.txt"
        bad.write_text("header\n0\t1,0,0,1\n")
        with pytest.raises(UpstreamFormatError, match=":2"):
            parse_text_graph(tmp_path / "up", "dense")


class TestPlanetoidParser:
    def test_contiguous_reassembly(self, tmp_path):
        write_planetoid_fixture(tmp_path, gapped=False)
        features, labels, arcs = parse_planetoid(tmp_path, "cora")
        assert features.shape == (9, 4)
        # tx row i belongs to the node on line i of test.index: [8, 6, 7]
        np.testing.assert_array_equal(features[8], [1, 0, 0, 0])
        np.testing.assert_array_equal(features[6], [0, 1, 0, 0])
        np.testing.assert_array_equal(features[7], [0, 0, 1, 0])
        assert labels[8] == 2 and labels[6] == 1 and labels[7] == 0

    def test_gapped_reassembly_zero_fills(self, tmp_path):
        write_planetoid_fixture(tmp_path, name="citeseer", gapped=True)
        features, labels, arcs = parse_planetoid(tmp_path, "citeseer")
        assert features.shape == (10, 4)
        np.testing.assert_array_equal(features[7], np.zeros(4))  # the gap
        assert labels[7] == 0
        np.testing.assert_array_equal(features[8], [1, 0, 0, 0])
        np.testing.assert_array_equal(features[6], [0, 1, 0, 0])
        np.testing.assert_array_equal(features[9], [0, 0, 1, 0])

    def test_row_count_mismatch_rejected(self, tmp_path):
        write_planetoid_fixture(tmp_path)
        (tmp_path / "ind.cora.test.index").write_text("8\n6\n")
        with pytest.raises(UpstreamFormatError, match="row count"):
            parse_planetoid(tmp_path, "cora")


class TestConvert:
    @pytest.mark.parametrize("family,writer,name", [
        ("webkb", write_webkb_fixture, "texas"),
        ("actor", write_actor_fixture, "actor"),
        ("planetoid", write_planetoid_fixture, "cora"),
    ])
    def test_loader_parity(self, tmp_path, family, writer, name):
        # the [SECONDARY] round-trip: converter-computed statistics must
        # equal what the main library measures on the written files
        up = tmp_path / "up"
        writer(up)
        out = tmp_path / "data"
        manifest = run_convert(name, up, out)
        loaded = graph_stats(load_dataset(out, name).graph)
        stats = manifest["stats"]
        assert stats["nodes"] == loaded.num_nodes
        assert stats["edges"] == loaded.num_edges
        assert stats["arcs"] == loaded.num_arcs
        assert stats["features"] == loaded.num_features
        assert stats["classes"] == loaded.num_classes
        assert stats["homophily"] == loaded.edge_homophily
        assert stats["radius"] == pytest.approx(loaded.spectral_radius, abs=1e-6)

    def test_output_is_undirected_without_self_loops(self, tmp_path):
        write_webkb_fixture(tmp_path / "up")
        run_convert("texas", tmp_path / "up", tmp_path / "data")
        g = load_dataset(tmp_path / "data", "texas").graph
        assert not g.directed
        # arcs 0->1 (deduped), 1->2, 3->4, 4->0 symmetrized; self-loop gone
        assert g.num_undirected_edges() == 4
        assert g.num_arcs() == 8

    def test_byte_idempotent(self, tmp_path):
        write_webkb_fixture(tmp_path / "up")
        first = run_convert("texas", tmp_path / "up", tmp_path / "a")
        second = run_convert("texas", tmp_path / "up", tmp_path / "b")
        assert first["outputs"] == second["outputs"]
        for entry in first["outputs"]:
            a = (tmp_path / "a" / entry["file"]).read_bytes()
            b = (tmp_path / "b" / entry["file"]).read_bytes()
            assert a == b
        again = run_convert("texas", tmp_path / "up", tmp_path / "a")
        assert again == first

    def test_unknown_dataset_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown dataset"):
            run_convert("karate", tmp_path, tmp_path / "out")

    def test_pinned_digest_mismatch_warns(self, tmp_path, monkeypatch, capsys):
        write_webkb_fixture(tmp_path / "up")
        monkeypatch.setitem(
            convert.PINNED_UPSTREAM_SHA256, "texas",
            {"out1_graph_edges.txt": "0" * 64},
        )
        run_convert("texas", tmp_path / "up", tmp_path / "data")
        assert "does not match the pinned" in capsys.readouterr().err

    def test_cli_prints_stats_and_manifest(self, tmp_path, capsys):
        write_webkb_fixture(tmp_path / "up")
        code = convert.main(
            ["--name", "texas", "--in", str(tmp_path / "up"),
             "--out", str(tmp_path / "data")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "nodes=5" in out
        manifest = json.loads((tmp_path / "data" / "texas_manifest.json").read_text())
        assert manifest["dataset"] == "texas"
        assert len(manifest["outputs"]) == 5

    def test_primary_stats_cli_reads_converted_output(self, tmp_path, capsys):
        write_webkb_fixture(tmp_path / "up")
        run_convert("texas", tmp_path / "up", tmp_path / "data")
        code = gesnbench_cli(
            ["stats", "--dataset", "texas", "--data-dir", str(tmp_path / "data")]
        )
        out = capsys.readouterr().out
        assert "nodes=5" in out
        assert code == 1  # five nodes is not the published texas; mismatch flagged


class TestNineDatasetRoundTrip:
    """Full-corpus version of the parity check; runs when the upstream
    distributions are supplied under $GESN_UPSTREAM_DIR/<name>/."""

    NINE = ("cornell", "texas", "wisconsin", "chameleon", "squirrel",
            "actor", "cora", "citeseer", "pubmed")

    @pytest.mark.parametrize("name", NINE)
    def test_round_trip(self, tmp_path, name):
        upstream_root = Path(os.environ.get("GESN_UPSTREAM_DIR", "/nonexistent"))
        updir = upstream_root / name
        if not updir.exists():
            pytest.skip(
                f"upstream distribution for '{name}' not found under "
                f"{upstream_root} (set GESN_UPSTREAM_DIR)"
            )
        first = run_convert(name, updir, tmp_path / "a")
        second = run_convert(name, updir, tmp_path / "b")
        assert first["outputs"] == second["outputs"]  # byte-idempotent
        loaded = graph_stats(load_dataset(tmp_path / "a", name).graph)
        stats = first["stats"]
        assert stats["nodes"] == loaded.num_nodes
        assert stats["edges"] == loaded.num_edges
        assert stats["arcs"] == loaded.num_arcs
        assert stats["homophily"] == loaded.edge_homophily
        assert stats["radius"] == pytest.approx(loaded.spectral_radius, abs=1e-6)


class TestConvertSplits:
    def write_masks(self, path, train, val, test, n=8):
        masks = {}
        for key, idx in (("train_mask", train), ("val_mask", val),
                         ("test_mask", test)):
            m = np.zeros(n, dtype=bool)
            m[idx] = True
            masks[key] = m
        np.savez(path, **masks)

    def test_valid_masks_round_trip(self, tmp_path):
        npz = tmp_path / "s0.npz"
        self.write_masks(npz, [0, 1, 2, 3], [4, 5], [6, 7])
        out = convert_splits.convert_splits("texas", [npz], tmp_path / "splits")
        assert out[0].name == "texas_split_0.txt"
        loaded = load_splits(out[0], num_nodes=8)
        np.testing.assert_array_equal(loaded.train, [0, 1, 2, 3])
        np.testing.assert_array_equal(loaded.val, [4, 5])
        np.testing.assert_array_equal(loaded.test, [6, 7])

    def test_overlap_rejected(self, tmp_path):
        npz = tmp_path / "s0.npz"
        self.write_masks(npz, [0, 1], [1, 2], [3])
        with pytest.raises(SplitConversionError, match="overlap"):
            convert_split_file(npz, tmp_path / "out.txt")

    def test_empty_val_rejected(self, tmp_path):
        npz = tmp_path / "s0.npz"
        self.write_masks(npz, [0, 1], [], [2, 3])
        with pytest.raises(SplitConversionError, match="val_mask selects no"):
            convert_split_file(npz, tmp_path / "out.txt")

    def test_missing_array_rejected(self, tmp_path):
        npz = tmp_path / "s0.npz"
        np.savez(npz, train_mask=np.ones(4, dtype=bool))
        with pytest.raises(SplitConversionError, match="missing arrays"):
            convert_split_file(npz, tmp_path / "out.txt")

    def test_cli_converts_multiple(self, tmp_path, capsys):
        for i in range(2):
            self.write_masks(tmp_path / f"s{i}.npz", [0, 1], [2], [3])
        code = convert_splits.main(
            ["--name", "cora", "--in", str(tmp_path / "s0.npz"),
             str(tmp_path / "s1.npz"), "--out", str(tmp_path / "splits")]
        )
        assert code == 0
        assert (tmp_path / "splits" / "cora_split_1.txt").exists()
