import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sptrunc import cli
from sptrunc.io import OutputError, eigenvalues_to_csv, fmt, read_csv_columns, read_eigenvalue_csv, rows_to_csv, write_text


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_ints():
    assert fmt(3) == "3"
    assert fmt(np.int64(7)) == "7"
    assert fmt(0.1) == "0.1"


def test_eigenvalue_csv_round_trip():
    r = np.random.default_rng(0)
    eigs = r.normal(size=(5, 3)) + 1j * r.normal(size=(5, 3))
    text = eigenvalues_to_csv(eigs)
    idx, vals = read_eigenvalue_csv(text)
    np.testing.assert_array_equal(idx, np.repeat(np.arange(5), 3))
    np.testing.assert_array_equal(vals, eigs.ravel())


def test_rows_csv_empty_and_columns():
    cols = read_csv_columns(rows_to_csv(["a", "b"], []))
    assert list(cols) == ["a", "b"] and cols["a"].size == 0


def test_write_text_errors(tmp_path):
    with pytest.raises(OutputError):
        write_text(str(tmp_path / "missing" / "x.csv"), "hi")
    p = tmp_path / "ok.csv"
    write_text(str(p), "hi")
    assert p.read_text() == "hi"


def test_sample_rows_and_reproducibility(capsys, tmp_path):
    out = tmp_path / "a.csv"
    code, _, _ = run(capsys, "sample", "--n", "4", "--m", "2", "--samples", "1000", "--seed", "7", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sample,re,im"
    assert len(lines) == 4001
    out2 = tmp_path / "b.csv"
    run(capsys, "sample", "--n", "4", "--m", "2", "--samples", "1000", "--seed", "7", "--out", str(out2))
    assert out.read_bytes() == out2.read_bytes()
    _, vals = read_eigenvalue_csv(str(out))
    assert np.all(np.abs(vals) < 1) and np.all(vals.imag >= 0)


def test_sample_json_and_threads(capsys):
    code, out, _ = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "20", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["eigenvalues"]) == 20 and len(doc["eigenvalues"][0]) == 2
    _, a, _ = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "300")
    _, b, _ = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "300", "--threads", "2")
    assert a == b


def test_env_seed_overrides(capsys, monkeypatch):
    _, a, _ = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "5", "--seed", "3")
    monkeypatch.setenv("RMT_SEED", "3")
    _, b, _ = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "5", "--seed", "99")
    assert a == b
    monkeypatch.setenv("RMT_SEED", "abc")
    code, _, err = run(capsys, "sample", "--n", "2", "--m", "1", "--samples", "5")
    assert code == 1 and "RMT_SEED" in err


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["sample", "--n", "0"], "--n"),
        (["sample", "--m", "-1"], "--m"),
        (["sample", "--samples", "x"], "--samples"),
        (["density", "--mode", "nope"], "--mode"),
    ],
)
def test_usage_errors_name_the_flag(capsys, argv, flag):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert flag in err


def test_unknown_flag_and_missing_command(capsys):
    assert run(capsys, "sample", "--bogus", "1")[0] == 1
    assert run(capsys)[0] == 1


def test_io_error_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, "sample", "--samples", "2", "--out", str(tmp_path / "no" / "dir.csv"))
    assert code == 2
    assert "cannot write" in err


def test_density_exact_grid(capsys):
    code, out, _ = run(capsys, "density", "--mode", "exact", "--n", "6", "--m", "6", "--grid", "21")
    assert code == 0
    cols = read_csv_columns(out)
    assert list(cols) == ["x", "y", "density"]
    assert cols["x"].size == 21 * 21
    assert np.all(np.isfinite(cols["density"]))
    assert np.all(cols["density"][cols["y"] == 0] == 0)


def test_density_ridge_in_weak_regime(capsys):
    _, out, _ = run(capsys, "density", "--mode", "exact", "--n", "60", "--m", "1", "--grid", "41")
    cols = read_csv_columns(out)
    k = np.argmax(cols["density"])
    assert np.hypot(cols["x"][k], cols["y"][k]) > 0.9


def test_density_strong_and_weak_modes(capsys):
    code, out, _ = run(capsys, "density", "--mode", "strong", "--n", "10", "--m", "10", "--grid", "11")
    assert code == 0
    cols = read_csv_columns(out)
    inside = cols["x"] ** 2 + cols["y"] ** 2 < 0.5
    assert np.all(cols["density"][~inside] == 0)
    for M in range(1, 5):
        code, out, _ = run(capsys, "density", "--mode", "weak", "--m", str(M), "--grid", "200", "--qmax", "8")
        cols = read_csv_columns(out)
        assert list(cols) == ["r", "density"]
        d = cols["density"]
        k = int(np.argmax(d))
        assert np.all(np.diff(d[: k + 1]) > 0) and np.all(np.diff(d[k:]) < 0)


def test_density_edge_and_mc(capsys):
    code, out, _ = run(capsys, "density", "--mode", "edge", "--m", "1", "--grid", "5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["x", "y", "density"] and len(doc["rows"]) == 25
    code, out, _ = run(capsys, "density", "--mode", "mc", "--n", "2", "--m", "1", "--samples", "500", "--bins-r", "4", "--bins-phi", "4")
    assert code == 0
    assert out.splitlines()[0] == "bin_center_1,bin_center_2,empirical,stderr,oracle,zscore"


def test_corr_modes(capsys):
    code, out, _ = run(capsys, "corr", "--n", "4", "--m", "2", "--z0", "0.1+0.4j", "--grid", "10")
    assert code == 0
    cols = read_csv_columns(out)
    assert cols["R2"][0] == pytest.approx(0.0, abs=1e-12)
    assert run(capsys, "corr", "--z0", "1.2j")[0] == 1
    code, out, _ = run(capsys, "corr", "--mode", "mc", "--samples", "500", "--z0", "0.4j", "--format", "json", "--ref-radius", "0.1")
    assert code == 0 and "summary" in json.loads(out)


@pytest.mark.parametrize("check", ["strong", "weak", "edge", "annulus", "bulk"])
def test_asympt_sweeps(capsys, check):
    code, out, _ = run(capsys, "asympt", "--check", check, "--ns", "10,20", "--m", "1")
    assert code == 0
    cols = read_csv_columns(out)
    assert list(cols) == ["param", "value", "oracle", "abs_err"]
    np.testing.assert_array_equal(cols["param"], [10, 20])
    np.testing.assert_allclose(cols["abs_err"], np.abs(cols["value"] - cols["oracle"]))


def test_domain_error_exit(capsys):
    assert run(capsys, "asympt", "--check", "strong", "--z", "1.5")[0] == 1
    assert run(capsys, "density", "--mode", "edge", "--xmax", "-1")[0] == 1


def test_console_script_entry():
    res = subprocess.run(
        [sys.executable, "-m", "sptrunc.cli", "sample", "--n", "1", "--m", "1", "--samples", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert len(res.stdout.splitlines()) == 3
