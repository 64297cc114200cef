import json

import pytest

from mixlap.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_plain(capsys):
    code, out, _ = run_cli(capsys, "list")
    assert code == 0
    for name in ("intro_banana", "skewed1d", "ex6", "ex7", "ex8", "ex9", "dlm"):
        assert name in out


def test_list_json(capsys):
    code, out, _ = run_cli(capsys, "list", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["skewed1d"] == 1 and doc["ex9"] == 9


def test_run_writes_expected_files_1d(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys,
        "run", "--target", "skewed1d", "--variant", "modified",
        "--seed", "0", "--out", str(tmp_path), "--n-c-max", "4",
    )
    assert code == 0
    d = tmp_path / "modified"
    assert (d / "report.json").exists()
    assert (d / "mixture.json").exists()
    assert (d / "ordered.csv").exists()
    assert not (d / "contour.csv").exists()  # 1D target: no contour export
    report = json.loads((d / "report.json").read_text())
    assert report["target"] == "skewed1d"
    assert report["variant"] == "modified"
    assert 0.0 <= report["s_stat"] <= 2.0
    assert report["grid"]["n_points"] == 1201
    assert "n_components" in out


def test_run_both_variants_2d_writes_contours(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys,
        "run", "--target", "ex6", "--variant", "both",
        "--seed", "1", "--out", str(tmp_path),
        "--n-c-max", "3", "--grid=-40:40:41,-5:45:41",
    )
    assert code == 0
    for variant in ("original", "modified"):
        d = tmp_path / variant
        assert (d / "contour.csv").exists()
        lines = (d / "contour.csv").read_text().splitlines()
        assert lines[0] == "x1,x2,r,r_tilde"
        assert len(lines) == 1 + 41 * 41


def test_run_unknown_target_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "run", "--target", "nope", "--out", str(tmp_path))
    assert code == 2
    assert "nope" in err and "ex6" in err


def test_run_bad_grid_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        "run", "--target", "skewed1d", "--out", str(tmp_path),
        "--grid=-5:5:100,-5:5:100",
    )
    assert code == 2
    assert "configuration error" in err


def test_run_bad_config_value_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        "run", "--target", "skewed1d", "--out", str(tmp_path), "--n-c-max", "0",
    )
    assert code == 2
    assert "configuration error" in err


def test_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_c_max": 2, "n_x": 20}))
    out_dir = tmp_path / "out"
    # the flag says 50 components; the config file must win with 2
    code, _, _ = run_cli(
        capsys,
        "run", "--target", "skewed1d", "--out", str(out_dir),
        "--config", str(cfg), "--n-c-max", "50",
    )
    assert code == 0
    report = json.loads((out_dir / "modified" / "report.json").read_text())
    assert report["n_components"] <= 2


def test_run_deterministic_outputs(tmp_path, capsys):
    args = [
        "run", "--target", "skewed1d", "--variant", "modified",
        "--seed", "5", "--n-c-max", "3",
    ]
    run_cli(capsys, *args, "--out", str(tmp_path / "a"))
    run_cli(capsys, *args, "--out", str(tmp_path / "b"))
    for name in ("mixture.json", "ordered.csv"):
        a = (tmp_path / "a" / "modified" / name).read_bytes()
        b = (tmp_path / "b" / "modified" / name).read_bytes()
        assert a == b


def test_compare_prints_table(tmp_path, capsys):
    run_cli(
        capsys,
        "run", "--target", "skewed1d", "--variant", "both",
        "--seed", "0", "--out", str(tmp_path), "--n-c-max", "3",
    )
    code, out, _ = run_cli(
        capsys, "compare", str(tmp_path / "original"), str(tmp_path / "modified")
    )
    assert code == 0
    lines = out.splitlines()
    assert "s_stat" in lines[0]
    assert len(lines) == 3
    assert "original" in lines[1] and "modified" in lines[2]


def test_compare_rejects_mismatched_grids(tmp_path, capsys):
    base = ["run", "--target", "skewed1d", "--seed", "0", "--n-c-max", "2"]
    run_cli(capsys, *base, "--out", str(tmp_path / "a"))
    run_cli(capsys, *base, "--out", str(tmp_path / "b"), "--grid=-10:10:101")
    code, _, err = run_cli(
        capsys, "compare", str(tmp_path / "a" / "modified"), str(tmp_path / "b" / "modified")
    )
    assert code == 2
    assert "not comparable" in err


def test_compare_missing_report_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "compare", str(tmp_path / "x"), str(tmp_path / "y"))
    assert code == 2
    assert "cannot read" in err
