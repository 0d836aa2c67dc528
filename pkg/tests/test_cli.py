"""Command-line driver: file plumbing, determinism, error reporting."""

import csv

import numpy as np
import pytest

import coblock as cb
from coblock.cli import main
from coblock.dataio import load_dataset, read_labels_csv, read_params_json, write_params_json


@pytest.fixture
def dataset(tmp_path):
    """A small separated dataset on disk, plus its truth params file."""
    truth = cb.separated_params(2, 2, p=1, mean_scale=8.0, intercept_scale=3.0, seed=31)
    params_path = tmp_path / "truth.json"
    write_params_json(params_path, truth)
    out = tmp_path / "sim"
    rc = main([
        "simulate", "--params", str(params_path), "--n", "60", "--m", "16",
        "--out", str(out), "--seed", "5",
    ])
    assert rc == 0
    return {
        "x": out / "x.csv",
        "y": out / "y.csv",
        "truth_labels": out / "truth_labels.csv",
        "params": params_path,
        "dir": out,
    }


def read_all_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestSimulate:
    def test_writes_parseable_files(self, dataset):
        x, y = load_dataset(dataset["x"], dataset["y"])
        assert (x.n, x.m, y.p) == (60, 16, 1)
        labels = read_labels_csv(dataset["truth_labels"])
        assert labels.row_labels.size == 60
        assert labels.col_labels.size == 16

    def test_seed_changes_bytes_not_shapes(self, dataset, tmp_path):
        other = tmp_path / "sim2"
        rc = main([
            "simulate", "--params", str(dataset["params"]), "--n", "60", "--m", "16",
            "--out", str(other), "--seed", "6",
        ])
        assert rc == 0
        assert (other / "x.csv").read_bytes() != dataset["x"].read_bytes()
        x, y = load_dataset(other / "x.csv", other / "y.csv")
        assert (x.n, x.m, y.p) == (60, 16, 1)


class TestFit:
    def test_outputs_and_recovery(self, dataset, tmp_path):
        out = tmp_path / "fit"
        rc = main([
            "fit", "--x", str(dataset["x"]), "--y", str(dataset["y"]),
            "--g", "2", "--d", "2", "--out", str(out), "--restarts", "4", "--seed", "0",
        ])
        assert rc == 0
        for name in ("labels.csv", "params.json", "free_energy.csv", "manifest.json"):
            assert (out / name).exists()
        est = read_labels_csv(out / "labels.csv")
        tru = read_labels_csv(dataset["truth_labels"])
        assert cb.label_error_rate(est.row_labels, tru.row_labels) <= 0.1
        fitted = read_params_json(out / "params.json")
        assert (fitted.g, fitted.d) == (2, 2)

    def test_rerun_is_byte_identical(self, dataset, tmp_path):
        argv = lambda out: [
            "fit", "--x", str(dataset["x"]), "--y", str(dataset["y"]),
            "--g", "2", "--d", "2", "--out", str(out), "--restarts", "2", "--seed", "1",
        ]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(argv(a)) == 0
        assert main(argv(b)) == 0
        assert read_all_bytes(a) == read_all_bytes(b)

    def test_free_energy_csv_is_nondecreasing(self, dataset, tmp_path):
        out = tmp_path / "fit"
        main([
            "fit", "--x", str(dataset["x"]), "--y", str(dataset["y"]),
            "--g", "2", "--d", "2", "--out", str(out), "--restarts", "2", "--seed", "2",
        ])
        with open(out / "free_energy.csv") as fh:
            vals = [float(row["value"]) for row in csv.DictReader(fh)]
        diffs = np.diff(vals)
        assert np.all(diffs >= -1e-9 * np.abs(np.array(vals[:-1])))


class TestSelect:
    def test_grid_csv_and_best(self, dataset, tmp_path):
        out = tmp_path / "sel"
        rc = main([
            "select", "--x", str(dataset["x"]), "--y", str(dataset["y"]),
            "--g-range", "1:2", "--d-range", "1:2", "--out", str(out),
            "--restarts", "2", "--seed", "3", "--cov-weight", "1",
        ])
        assert rc == 0
        with open(out / "bic_grid.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        assert {(int(r["g"]), int(r["d"])) for r in rows} == {(1, 1), (1, 2), (2, 1), (2, 2)}
        best_row = min(rows, key=lambda r: float(r["bic"]))
        manifest = (out / "manifest.json").read_text()
        assert f'"best_g": {best_row["g"]}' in manifest
        assert f'"best_d": {best_row["d"]}' in manifest


class TestInfluence:
    def test_report_files(self, dataset, tmp_path):
        out = tmp_path / "inf"
        rc = main([
            "influence", "--x", str(dataset["x"]), "--y", str(dataset["y"]),
            "--g", "2", "--d", "2", "--out", str(out), "--restarts", "2", "--seed", "4",
        ])
        assert rc == 0
        with open(out / "influence.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16
        ranks = sorted(int(r["rank"]) for r in rows)
        assert ranks == list(range(1, 17))
        by_rank = sorted(rows, key=lambda r: int(r["rank"]))
        scores = [float(r["score"]) for r in by_rank]
        assert scores == sorted(scores, reverse=True)


class TestErrors:
    def test_missing_input_file(self, tmp_path, capsys):
        rc = main([
            "fit", "--x", str(tmp_path / "nope.csv"), "--y", str(tmp_path / "nope2.csv"),
            "--g", "1", "--d", "1", "--out", str(tmp_path / "out"),
        ])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.count("\n") == 1

    def test_non_binary_cell(self, tmp_path, capsys):
        (tmp_path / "x.csv").write_text("0,2\n1,0\n")
        (tmp_path / "y.csv").write_text("1\n2\n")
        rc = main([
            "fit", "--x", str(tmp_path / "x.csv"), "--y", str(tmp_path / "y.csv"),
            "--g", "1", "--d", "1", "--out", str(tmp_path / "out"),
        ])
        assert rc == 1
        assert "line 1, column 2" in capsys.readouterr().err

    def test_bad_range_syntax(self, tmp_path, capsys):
        (tmp_path / "x.csv").write_text("0,1\n")
        (tmp_path / "y.csv").write_text("1\n")
        rc = main([
            "select", "--x", str(tmp_path / "x.csv"), "--y", str(tmp_path / "y.csv"),
            "--g-range", "2-3", "--d-range", "1:1", "--out", str(tmp_path / "out"),
        ])
        assert rc == 1
        assert "error:" in capsys.readouterr().err
