from pathlib import Path

import numpy as np
import pytest

from dendrowave.cli import load_bundle, main
from dendrowave.haar import forward
from dendrowave.tree import load_json, save_json, to_json
from dendrowave.ultrametric import cophenetic, matrix_to_csv

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def demo_json(tmp_path, demo8):
    path = tmp_path / "demo.json"
    save_json(demo8, path)
    return str(path)


def write_points(tmp_path, values, name="points.csv"):
    path = tmp_path / name
    rows = ["v"] + [str(v) for v in values]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return str(path)


def write_data(tmp_path, X, name="data.csv"):
    path = tmp_path / name
    header = ",".join(f"f{i + 1}" for i in range(X.shape[1]))
    lines = [header] + [",".join(format(v, ".12g") for v in row) for row in X]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_cluster_happy_path(tmp_path, capsys):
    data = write_points(tmp_path, [0.0, 3.0, 4.0])
    out = tmp_path / "run"
    assert main(["cluster", data, "--linkage", "single", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "3 observations with single linkage" in text
    tree = load_json(out / "dendrogram.json")
    assert tree.levels == (1.0, 3.0)
    coph = (out / "cophenetic.csv").read_text(encoding="utf-8")
    assert coph.splitlines()[0] == "x1,x2,x3"


def test_cluster_outputs_are_deterministic(tmp_path, capsys):
    rng = np.random.default_rng(91)
    data = write_data(tmp_path, rng.normal(size=(6, 3)))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["cluster", data, "--linkage", "average", "--out", str(out1)]) == 0
    assert main(["cluster", data, "--linkage", "average", "--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("dendrogram.json", "cophenetic.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cluster_needs_two_rows(tmp_path, capsys):
    data = write_points(tmp_path, [1.0])
    assert main(["cluster", data, "--out", str(tmp_path / "o")]) == 2
    assert "need n >= 2" in capsys.readouterr().err


def test_cluster_reports_bad_cell(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("v\n1.0\nxyz\n", encoding="utf-8")
    assert main(["cluster", str(path), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "row 3, column 1" in err and "'xyz'" in err


def test_cluster_squared_changes_levels(tmp_path, capsys):
    data = write_points(tmp_path, [0.0, 3.0, 4.0])
    out = tmp_path / "sq"
    assert main(["cluster", data, "--squared", "--out", str(out)]) == 0
    capsys.readouterr()
    tree = load_json(out / "dendrogram.json")
    assert tree.levels == (1.0, 9.0)


def test_transform_indicator_writes_golden_branch_codes(tmp_path, capsys, demo_json):
    out = tmp_path / "w"
    assert main(["transform", "-", demo_json, "--mode", "indicator",
                 "--check", "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "check passed" in captured.out
    assert "round-trip max abs error" in captured.out
    assert "recursive vs matrix form max abs error" in captured.out
    assert captured.err == ""
    lines = (out / "C.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "terminal,cluster_1,cluster_2,cluster_3,cluster_4,cluster_5,cluster_6,cluster_7"
    assert lines[1] == "x1,1,1,0,0,1,0,1"
    assert lines[8] == "x8,0,0,0,0,0,-1,-1"
    for name in ("D.csv", "smooth.csv", "dendrogram.json", "meta.json"):
        assert (out / name).exists()


def test_transform_indicator_warns_when_data_given(tmp_path, capsys, demo_json):
    data = write_points(tmp_path, list(range(8)))
    out = tmp_path / "w"
    assert main(["transform", data, demo_json, "--mode", "indicator", "--out", str(out)]) == 0
    assert "ignoring" in capsys.readouterr().err


def test_transform_ultrametric_roundtrip(tmp_path, capsys, demo_json, demo8):
    rng = np.random.default_rng(92)
    X = rng.normal(size=(8, 3))
    data = write_data(tmp_path, X)
    out = tmp_path / "w"
    assert main(["transform", data, demo_json, "--check", "--out", str(out)]) == 0
    assert "check passed" in capsys.readouterr().out
    w, features = load_bundle(out)
    direct = forward(X, demo8)
    assert features == ["f1", "f2", "f3"]
    assert np.array_equal(w.branch_codes, direct.branch_codes)
    assert np.allclose(w.details, direct.details, atol=1e-9)
    assert np.allclose(w.smooth, direct.smooth, atol=1e-9)


def test_transform_ultrametric_requires_data(tmp_path, capsys, demo_json):
    assert main(["transform", "-", demo_json, "--out", str(tmp_path / "w")]) == 2
    assert "needs a data CSV" in capsys.readouterr().err


def make_bundle(tmp_path, demo_json, capsys):
    rng = np.random.default_rng(93)
    data = write_data(tmp_path, rng.normal(size=(8, 2)))
    out = tmp_path / "bundle"
    assert main(["transform", data, demo_json, "--out", str(out)]) == 0
    capsys.readouterr()
    return out


def test_filter_sweep(tmp_path, capsys, demo_json):
    out = make_bundle(tmp_path, demo_json, capsys)
    assert main(["filter", str(out), "--sweep"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if l.strip().startswith("k=")]
    assert len(lines) == 8
    assert lines[0].strip().startswith("k=0:")
    last = float(lines[-1].split(":")[1])
    assert last <= 1e-9


def test_filter_keep_k(tmp_path, capsys, demo_json):
    out = make_bundle(tmp_path, demo_json, capsys)
    dest = tmp_path / "filtered_run"
    assert main(["filter", str(out), "--rule", "keep-k", "--value", "3",
                 "--out", str(dest)]) == 0
    text = capsys.readouterr().out
    assert "detail rows changed" in text
    assert (dest / "filtered" / "D.csv").exists()
    assert (dest / "reconstruction.csv").exists()
    w, _ = load_bundle(dest / "filtered")
    kept = int(np.sum(np.any(w.details != 0.0, axis=1)))
    assert kept == 3


def test_filter_absolute_zero_is_identity(tmp_path, capsys, demo_json):
    out = make_bundle(tmp_path, demo_json, capsys)
    dest = tmp_path / "zero"
    assert main(["filter", str(out), "--rule", "absolute", "--value", "0",
                 "--out", str(dest)]) == 0
    text = capsys.readouterr().out
    assert "0 detail rows changed" in text
    assert (out / "D.csv").read_bytes() == (dest / "filtered" / "D.csv").read_bytes()


def test_filter_needs_value(tmp_path, capsys, demo_json):
    out = make_bundle(tmp_path, demo_json, capsys)
    assert main(["filter", str(out)]) == 2
    assert "--value is required" in capsys.readouterr().err


def test_padic_encode(capsys, demo_json):
    assert main(["padic", "encode", demo_json]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "base p = 3"
    assert out[1] == "x1 = +p^1+p^2+p^5+p^7 (2442)"
    assert out[8] == "x8 = -p^6-p^7 (-2916)"


def test_padic_dist_and_norm(capsys, demo_json):
    assert main(["padic", "dist", demo_json, "x1", "x2"]) == 0
    assert capsys.readouterr().out.strip() == "p^-1"
    assert main(["padic", "dist", demo_json, "q1", "q3"]) == 0
    assert capsys.readouterr().out.strip() == "p^-5"
    assert main(["padic", "norm", demo_json, "q2"]) == 0
    assert capsys.readouterr().out.strip() == "p^-2"
    assert main(["padic", "norm", demo_json, "x1"]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert main(["padic", "norm", demo_json, "q7"]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_padic_unknown_node(capsys, demo_json):
    assert main(["padic", "dist", demo_json, "x1", "nosuch"]) == 2
    assert "unknown node" in capsys.readouterr().err


def test_padic_dilate_all_base_two(capsys, demo_json):
    assert main(["padic", "--base", "2", "dilate", demo_json, "--all"]) == 0
    captured = capsys.readouterr()
    assert "base 2" in captured.err
    first = captured.out.splitlines()[0]
    assert first == "x1: +2^1+2^2+2^5+2^7 -> +2^1+2^4+2^6"


def test_padic_dilate_single_node(capsys, demo_json):
    assert main(["padic", "dilate", demo_json, "q2"]) == 0
    assert capsys.readouterr().out.strip() == "+3^5+3^7 -> +3^4+3^6"


def test_padic_decode_restores_tree(tmp_path, capsys, demo_json, demo8):
    out = tmp_path / "w"
    assert main(["transform", "-", demo_json, "--mode", "indicator", "--out", str(out)]) == 0
    dest = tmp_path / "decoded"
    assert main(["padic", "decode", str(out / "C.csv"), "--out", str(dest)]) == 0
    text = capsys.readouterr().out
    assert "decoded 8 terminals, 7 clusters" in text
    rebuilt = load_json(dest / "dendrogram.json")
    assert rebuilt == demo8
    written = (dest / "dendrogram.json").read_text(encoding="utf-8")
    assert written == to_json(demo8) + "\n"


def test_check_demo_matches_golden(capsys):
    assert main(["check", "--demo", "fig2"]) == 0
    out = capsys.readouterr().out
    want = (GOLDEN_DIR / "demo_walkthrough.txt").read_text(encoding="utf-8")
    assert out == want


def test_check_unknown_demo(capsys):
    assert main(["check", "--demo", "nope"]) == 2
    assert "unknown demo" in capsys.readouterr().err


def test_check_matrix_pass(tmp_path, capsys, demo8):
    M = cophenetic(demo8)
    path = tmp_path / "coph.csv"
    path.write_text(matrix_to_csv(M, demo8.labels), encoding="utf-8")
    assert main(["check", str(path)]) == 0
    out = capsys.readouterr().out
    assert "ultrametric: PASS" in out
    assert "equilateral=0 isosceles-small-base=56 violating=0" in out
    assert "canonical layout under single-linkage order: PASS" in out


def test_check_matrix_fail_names_witness(tmp_path, capsys):
    path = tmp_path / "line.csv"
    path.write_text("a,b,c\n0,3,4\n3,0,1\n4,1,0\n", encoding="utf-8")
    assert main(["check", str(path)]) == 1
    out = capsys.readouterr().out
    assert "ultrametric: FAIL" in out
    assert "witness: (" in out
    assert "violating=1" in out


def test_check_dendrogram_json(capsys, demo_json):
    assert main(["check", demo_json]) == 0
    out = capsys.readouterr().out
    assert "8 terminals, 7 ranked merges" in out
    assert "levels: absent" in out
    assert "cophenetic ranks ultrametric: PASS" in out


def test_check_needs_input(capsys):
    assert main(["check"]) == 2
    assert "needs a matrix CSV" in capsys.readouterr().err


def test_usage_errors_exit_two(capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_missing_input_file_exits_two(tmp_path, capsys):
    ghost = str(tmp_path / "nowhere.json")
    assert main(["check", ghost]) == 2
    assert capsys.readouterr().err.startswith("error:")
    assert main(["padic", "encode", ghost]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_version_exits_zero(capsys):
    assert main(["--version"]) == 0
    assert "dendrowave" in capsys.readouterr().out


def test_outdir_env_fallback(tmp_path, capsys, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("DENDROWAVE_OUTDIR", str(target))
    data = write_points(tmp_path, [0.0, 3.0, 4.0])
    assert main(["cluster", data]) == 0
    capsys.readouterr()
    assert (target / "dendrogram.json").exists()
    assert (target / "cophenetic.csv").exists()
