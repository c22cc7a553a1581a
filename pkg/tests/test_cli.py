import csv
import json

import numpy as np

from gesnbench.cli import main
from gesnbench.reservoir import read_embedding_matrix

from test_bench import separable_dataset, single_point_spec


def run_cli(*argv):
    return main(list(argv))


class TestRunCommand:
    def test_run_writes_jsonl(self, tmp_path, capsys):
        separable_dataset(tmp_path)
        out = tmp_path / "results.jsonl"
        code = run_cli(
            "run", "--dataset", "toy", "--data-dir", str(tmp_path),
            "--radius-mult", "2", "--scaling", "1", "--units", "8",
            "--lambda", "1e-3", "--K", "20", "--seed", "0",
            "--bootstrap", "100", "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text().splitlines()[0])
        assert payload["dataset"] == "toy"
        assert 0.0 <= payload["test"]["mean_accuracy"] <= 1.0
        shown = json.loads(capsys.readouterr().out)
        assert shown["units"] == 8

    def test_missing_dataset_exits_nonzero(self, tmp_path, capsys):
        code = run_cli(
            "run", "--dataset", "absent", "--data-dir", str(tmp_path),
            "--radius-mult", "2", "--scaling", "1", "--units", "8",
            "--lambda", "1e-3",
        )
        assert code == 1
        assert "stage 'load'" in capsys.readouterr().err


class TestGridCommand:
    def test_grid_outputs(self, tmp_path, capsys):
        separable_dataset(tmp_path)
        spec = single_point_spec(tmp_path, radius_multiples=(0.5, 2.0))
        spec_path = tmp_path / "spec.json"
        spec.to_json(spec_path)
        out_dir = tmp_path / "out"
        code = run_cli("grid", "--spec", str(spec_path), "--out", str(out_dir))
        assert code == 0
        lines = (out_dir / "results.jsonl").read_text().splitlines()
        assert len(lines) == 2
        best = json.loads((out_dir / "best.json").read_text())
        assert best["best"]["units"] == 8
        rows = list(csv.DictReader(open(out_dir / "summary.csv")))
        assert len(rows) == 2


class TestHeatmapCommand:
    def test_heatmap_from_results(self, tmp_path):
        separable_dataset(tmp_path)
        spec = single_point_spec(
            tmp_path, radius_multiples=(0.5, 2.0), input_scalings=(0.5, 1.0)
        )
        spec_path = tmp_path / "spec.json"
        spec.to_json(spec_path)
        out_dir = tmp_path / "out"
        assert run_cli("grid", "--spec", str(spec_path), "--out", str(out_dir)) == 0
        heatmap = tmp_path / "heatmap.csv"
        code = run_cli(
            "heatmap", "--in", str(out_dir / "results.jsonl"),
            "--out", str(heatmap),
        )
        assert code == 0
        rows = list(csv.DictReader(open(heatmap)))
        assert len(rows) == 4
        assert set(rows[0]) == {
            "radius_multiple", "input_scaling", "mean_test_accuracy",
            "ci_low", "ci_high",
        }


class TestEmbedDumpCommand:
    def test_dumps_checkpoints(self, tmp_path, capsys):
        separable_dataset(tmp_path)
        out_dir = tmp_path / "dumps"
        code = run_cli(
            "embed-dump", "--dataset", "toy", "--data-dir", str(tmp_path),
            "--radius-mult", "2", "--scaling", "1", "--units", "4",
            "--K", "10", "--checkpoints", "0,5,10", "--out", str(out_dir),
        )
        assert code == 0
        paths = sorted(out_dir.glob("*.txt"))
        assert len(paths) == 3
        states, iteration = read_embedding_matrix(paths[0])
        assert iteration == 0
        np.testing.assert_array_equal(states, 0.0)


class TestStatsCommand:
    def test_stats_on_unpublished_dataset(self, tmp_path, capsys):
        separable_dataset(tmp_path)
        code = run_cli("stats", "--dataset", "toy", "--data-dir", str(tmp_path))
        assert code == 0
        out = capsys.readouterr().out
        assert "no published reference" in out
        assert "nodes=24" in out

    def test_stats_mismatch_exits_nonzero(self, tmp_path, capsys):
        # name the fixture like a published dataset; counts will not match
        separable_dataset(tmp_path, name="texas")
        code = run_cli("stats", "--dataset", "texas", "--data-dir", str(tmp_path))
        assert code == 1
        out = capsys.readouterr().out
        assert "MISMATCH" in out
