import numpy as np
import pytest

import oracles
from dsom.cli import main
from dsom.dissim import DissimMatrix, read_matrix, write_matrix
from dsom.export import read_map


def _write_random_matrix(path, n=12, seed=0):
    rng = np.random.default_rng(seed)
    m = DissimMatrix(oracles.random_dissim(rng, n), [f"o{i}" for i in range(n)])
    write_matrix(m, path)
    return m


def test_preprocess_matches_golden_tables(tmp_path, fixtures_dir, capsys):
    out = tmp_path / "tables"
    code = main(
        [
            "preprocess",
            "--log", str(fixtures_dir / "fixture.log"),
            "--server", "www.example.org",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    for name in ("navigations.tsv", "modal.tsv", "binary.tsv"):
        got = (out / name).read_bytes()
        want = (fixtures_dir / f"golden_{name.replace('.tsv', '')}.tsv").read_bytes()
        assert got == want, name
    stdout = capsys.readouterr().out
    assert "retained = 13" in stdout
    assert "navigations = 4" in stdout
    assert "dropped status = 2" in stdout
    assert "dropped image = 3" in stdout
    assert "dropped robot = 2" in stdout


def test_preprocess_usage_errors(tmp_path, fixtures_dir):
    log = str(fixtures_dir / "fixture.log")
    assert main(["preprocess", "--out-dir", str(tmp_path)]) == 1  # no --log
    assert main(["preprocess", "--log", log, "--out-dir", str(tmp_path)]) == 1  # no --server
    assert main(["preprocess", "--log", log, "--server", "a", "--server", "b",
                 "--out-dir", str(tmp_path)]) == 1


def test_preprocess_missing_log_is_io_error(tmp_path):
    code = main(
        ["preprocess", "--log", str(tmp_path / "nope.log"), "--server", "s",
         "--out-dir", str(tmp_path)]
    )
    assert code == 2


def test_preprocess_error_rate_threshold(tmp_path, fixtures_dir):
    log = tmp_path / "dirty.log"
    good = (fixtures_dir / "fixture.log").read_text().splitlines()[0]
    log.write_text(good + "\n" + "garbage line\n")
    args = ["preprocess", "--log", str(log), "--server", "s", "--out-dir", str(tmp_path / "o")]
    assert main(args) == 3
    assert main(args + ["--max-error-rate", "0.6"]) == 0


def test_dissim_source_flags_are_exclusive(tmp_path, fixtures_dir):
    out = str(tmp_path / "m.dissim")
    assert main(["dissim", "--out", out]) == 1
    assert main(["dissim", "--modal", "x", "--binary", "y", "--out", out]) == 1
    assert main(["dissim", "--binary", "x", "--weights", "1,2", "--out", out]) == 1


def test_dissim_from_tables_and_points(tmp_path, fixtures_dir):
    modal_out = tmp_path / "modal.dissim"
    assert main(["dissim", "--modal", str(fixtures_dir / "golden_modal.tsv"),
                 "--out", str(modal_out)]) == 0
    m = read_matrix(modal_out)
    assert m.n == 4
    assert m.labels == ["0", "1", "2", "3"]

    binary_out = tmp_path / "binary.dissim"
    assert main(["dissim", "--binary", str(fixtures_dir / "golden_binary.tsv"),
                 "--out", str(binary_out)]) == 0
    b = read_matrix(binary_out)
    assert b.n == 4
    assert b.labels[0] == "www.example.org/"

    pts = tmp_path / "pts.csv"
    pts.write_text("label,x0\np0,0.0\np1,1.0\np2,3.0\n")
    points_out = tmp_path / "points.dissim"
    assert main(["dissim", "--points", str(pts), "--out", str(points_out)]) == 0
    p = read_matrix(points_out)
    assert np.array_equal(p.values, [[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]])


def test_dissim_weights_change_the_matrix(tmp_path, fixtures_dir):
    modal = str(fixtures_dir / "golden_modal.tsv")
    a, b = tmp_path / "a.dissim", tmp_path / "b.dissim"
    assert main(["dissim", "--modal", modal, "--out", str(a)]) == 0
    assert main(["dissim", "--modal", modal, "--out", str(b), "--weights", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()  # single variable: weights normalize away


def test_train_and_export_pipeline(tmp_path):
    matrix_path = tmp_path / "m.dissim"
    m = _write_random_matrix(matrix_path, n=12)
    map_path = tmp_path / "map.dsom"
    code = main(
        ["train", "--matrix", str(matrix_path), "--grid", "2x3", "--steps", "12",
         "--restarts", "2", "--out", str(map_path)]
    )
    assert code == 0
    doc = read_map(map_path)
    assert (doc.rows, doc.cols) == (2, 3)
    assert doc.params["steps"] == "12"
    assert len(doc.assignments) == 12
    proto_labels = [label for row in doc.prototypes for label in row]
    assert len(proto_labels) == 6
    assert len(set(proto_labels)) == 6
    assert set(proto_labels) <= set(m.labels)

    text_path = tmp_path / "map.txt"
    assert main(["export", "--map", str(map_path), "--format", "text",
                 "--out", str(text_path)]) == 0
    assert "(n=" in text_path.read_text()

    csv_path = tmp_path / "map.csv"
    assert main(["export", "--map", str(map_path), "--format", "csv", "--out", str(csv_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "label,neuron,row,col"
    assert len(lines) == 13

    svg_path = tmp_path / "map.svg"
    assert main(["export", "--map", str(map_path), "--format", "svg", "--out", str(svg_path)]) == 0
    assert svg_path.read_text().startswith("<svg ")


def test_export_to_stdout(tmp_path, capsys):
    matrix_path = tmp_path / "m.dissim"
    _write_random_matrix(matrix_path, n=8)
    map_path = tmp_path / "map.dsom"
    main(["train", "--matrix", str(matrix_path), "--grid", "2x2", "--steps", "5",
          "--restarts", "1", "--out", str(map_path)])
    capsys.readouterr()
    assert main(["export", "--map", str(map_path), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("label,neuron,row,col")


def test_train_exit_codes(tmp_path):
    matrix_path = tmp_path / "m.dissim"
    _write_random_matrix(matrix_path, n=10)
    out = str(tmp_path / "map.dsom")
    assert main(["train", "--matrix", str(matrix_path), "--grid", "nonsense",
                 "--out", out]) == 1
    assert main(["train", "--matrix", str(tmp_path / "missing.dissim"), "--grid", "2x2",
                 "--out", out]) == 2
    bad = tmp_path / "bad.dissim"
    bad.write_text("dissim v1 2\na,b\n0.0,1.0\n2.0,0.0\n")
    assert main(["train", "--matrix", str(bad), "--grid", "2x2", "--out", out]) == 3
    # more neurons than observations is a validation failure
    assert main(["train", "--matrix", str(matrix_path), "--grid", "6x6", "--out", out]) == 3


def test_unknown_flags_and_commands_are_usage_errors(tmp_path):
    assert main(["no-such-command"]) == 1
    assert main(["train", "--bogus"]) == 1
    assert main([]) == 1


def test_internal_errors_exit_4(tmp_path, monkeypatch):
    matrix_path = tmp_path / "m.dissim"
    _write_random_matrix(matrix_path, n=8)

    def boom(*args, **kwargs):
        raise RuntimeError("kaput")

    monkeypatch.setattr("dsom.cli.core.train", boom)
    code = main(["train", "--matrix", str(matrix_path), "--grid", "2x2",
                 "--out", str(tmp_path / "map.dsom")])
    assert code == 4


def test_config_file_defaults_and_flag_override(tmp_path):
    matrix_path = tmp_path / "m.dissim"
    _write_random_matrix(matrix_path, n=10)
    cfg = tmp_path / "train.cfg"
    cfg.write_text("# training defaults\nsteps = 6\nseed = 4\nrestarts = 2\n")
    map_a = tmp_path / "a.dsom"
    assert main(["train", "--matrix", str(matrix_path), "--grid", "2x2",
                 "--config", str(cfg), "--out", str(map_a)]) == 0
    doc = read_map(map_a)
    assert doc.params["steps"] == "6"
    assert doc.params["seed"] == "4"
    map_b = tmp_path / "b.dsom"
    assert main(["train", "--matrix", str(matrix_path), "--grid", "2x2",
                 "--config", str(cfg), "--steps", "3", "--out", str(map_b)]) == 0
    assert read_map(map_b).params["steps"] == "3"
    cfg.write_text("steps  broken line\n")
    assert main(["train", "--matrix", str(matrix_path), "--grid", "2x2",
                 "--config", str(cfg), "--out", str(map_a)]) == 3


def test_train_output_is_deterministic(tmp_path):
    matrix_path = tmp_path / "m.dissim"
    _write_random_matrix(matrix_path, n=15, seed=3)
    a, b = tmp_path / "a.dsom", tmp_path / "b.dsom"
    args = ["--matrix", str(matrix_path), "--grid", "2x3", "--steps", "10", "--restarts", "2"]
    assert main(["train", *args, "--out", str(a)]) == 0
    assert main(["train", *args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_demo_cylinder_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "demo"
    code = main(["demo-cylinder", "--out-dir", str(out), "--n", "80", "--grid", "4x2",
                 "--steps", "10", "--restarts", "1"])
    assert code == 0
    for name in ("points.csv", "matrix.dissim", "map.dsom", "map.txt",
                 "prototypes.csv", "summary.txt"):
        assert (out / name).exists(), name
    stdout = capsys.readouterr().out
    assert "final energy = " in stdout
    assert read_map(out / "map.dsom").rows == 4
    assert main(["demo-cylinder", "--out-dir", str(out), "--n", "4", "--grid", "4x2"]) == 1


def test_version_flag():
    assert main(["--version"]) == 0
