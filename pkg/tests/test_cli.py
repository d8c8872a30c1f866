import csv
import io
import json

import pytest

from friable.cli import parse_grid, run, ConfigError


def _run(args, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(args, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_psi_example():
    code, out, _ = _run(["psi", "--x", "16", "--y", "3"])
    assert code == 0
    (row,) = _csv(out)
    assert row["schema"] == "friable/1" and row["exact"] == "9"
    assert float(row["predicted"]) > 0


def test_abc_example():
    code, out, _ = _run(["abc", "--x", "8", "--y", "2"])
    (row,) = _csv(out)
    assert code == 0 and row["exact"] == "3" and float(row["predicted"]) == 4.0


def test_parseval_example():
    code, out, _ = _run(["parseval", "--x", "16", "--y", "3", "--N", "32"])
    (row,) = _csv(out)
    assert code == 0 and row["exact"] == "9" and row["predicted"] == "9"
    assert float(row["rel_err"]) <= 1e-6


def test_parseval_aliasing_is_config_error():
    code, _, err = _run(["parseval", "--x", "16", "--y", "3", "--N", "16"])
    assert code == 2 and "AliasingError" in err


def test_grid_parsing():
    assert parse_grid("1e4:1e6:10") == [10000, 100000, 1000000]
    assert parse_grid("2,3,5") == [2, 3, 5]
    assert parse_grid("0.5") == [0.5]
    for bad in ("3,2", "1:10:1", "1:2", "a,b", "inf", ""):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_config_errors():
    assert _run(["psi", "--x", "10", "--y", "20"])[0] == 2
    assert _run(["psi", "--x", "10"])[0] == 2
    assert _run(["psi", "--x", "10", "--y", "2", "--tol", "nope=1"])[0] == 2
    assert _run(["psi", "--x", "10", "--y", "2", "--tol", "ht_rel_tol"])[0] == 2
    assert _run(["bogus"])[0] == 2
    assert _run(["psi", "--x", "2e9", "--y", "2"])[0] == 2


def test_csv_json_identical():
    args = ["psi", "--x", "1e3:1e5:10", "--y", "7,30"]
    _, out_csv, _ = _run(args)
    _, out_json, _ = _run(args + ["--format", "json"])
    rows_c = _csv(out_csv)
    rows_j = [json.loads(line) for line in out_json.splitlines()]
    assert len(rows_c) == len(rows_j) == 6
    for c, j in zip(rows_c, rows_j):
        for key in ("x", "y", "exact", "predicted", "abs_err", "rel_err", "alpha", "u"):
            assert float(c[key]) == float(j[key])  # bit-equal after round trip


def test_threads_keep_order(monkeypatch):
    args = ["psi", "--x", "1e3:1e6:10", "--y", "3,30,100"]
    _, serial, _ = _run(args)
    _, pooled, _ = _run(args + ["--threads", "4"])
    assert serial == pooled
    monkeypatch.setenv("FRIABLE_THREADS", "3")
    assert _run(args)[1] == serial
    monkeypatch.setenv("FRIABLE_THREADS", "zero")
    assert _run(args)[0] == 2


def test_nudge_recorded():
    _, out, _ = _run(["expsum", "--x", "1000", "--y", "30", "--theta", "0.25", "--format", "json"])
    row = json.loads(out)
    assert row["nudge"] == 1e-9 and row["x"] == 1000 * (1 + 1e-9)
    assert row["q"] == 4 and row["a"] == 1
    _, out, _ = _run(["perron", "--x", "1000.5", "--y", "30", "--T", "200", "--format", "json"])
    assert json.loads(out)["nudge"] == 0.0


def test_other_commands_run():
    for args in (
        ["alpha", "--x", "1e6", "--y", "100"],
        ["rho", "--u", "1.5,2.5", "--y", "100"],
        ["lambda", "--x", "1e5", "--y", "300"],
        ["major-arc", "--x", "1e4", "--y", "200", "--q", "3", "--eta", "2.5e-5"],
        ["perron", "--x", "1e4", "--y", "50", "--T", "1000"],
    ):
        code, out, err = _run(args)
        assert code == 0, (args, err)
        assert len(_csv(out)) >= 1


def test_soft_failure_warns_but_exits_zero():
    code, _, err = _run(["lambda", "--x", "1e5", "--y", "300", "--tol", "debruijn_rel_tol=1e-6"])
    assert code == 0 and "warning" in err


def test_hard_failure_exit_one():
    code, _, err = _run(["parseval", "--x", "1000", "--y", "7", "--tol", "parseval_rounding=-1"])
    assert code == 1 and "hard check failed" in err


def test_major_arc_rejects_non_coprime():
    assert _run(["major-arc", "--x", "1e4", "--y", "200", "--q", "4", "--a", "2"])[0] == 2


def test_verify_small_tier_report():
    code, out, _ = _run(["verify", "--tier", "small"])
    rows = _csv(out)
    ids = [r["criterion"] for r in rows]
    assert ids == [f"C{i}" for i in range(1, 13)]  # every criterion exactly once
    assert code == (0 if all(r["ok"] == "true" for r in rows if r["severity"] == "hard") else 1)
    assert sum(float(r["seconds"]) for r in rows) < 60
