from __future__ import annotations

import csv
import json

import pytest

from hol.cli import CSV_COLUMNS, main

FAST_CONFIG = """
# small budgets so the command-line tests stay quick
restarts = 2
local_restarts = 1
local_cells = 32
t_per_cell = 1
max_levels = 16
"""


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip(doc: dict) -> dict:
    doc = dict(doc)
    doc.pop("timestamp")
    return doc


@pytest.fixture
def fast_cfg(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CONFIG)
    return str(path)


def test_maximal_json_to_stdout(capsys):
    code, out, _ = _run(capsys, "maximal", "--p", "2", "--q", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "maximal"
    assert set(doc) == {"command", "version", "args", "config", "result", "timestamp"}
    assert doc["result"]["total"] == pytest.approx(2.9467, abs=3e-3)


def test_json_deterministic_modulo_timestamp(capsys):
    _, a, _ = _run(capsys, "maximal", "--u", "exp", "--v", "pow:0.5")
    _, b, _ = _run(capsys, "maximal", "--u", "exp", "--v", "pow:0.5")
    assert _strip(json.loads(a)) == _strip(json.loads(b))


@pytest.mark.parametrize("argv", [["bogus"], ["maximal", "--nope"], [],
                                  ["verify", "--suite", "nothing"]])
def test_usage_errors_exit_1(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 1


def test_bad_config_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 3\n")
    code, _, err = _run(capsys, "maximal", "--config", str(bad))
    assert code == 1 and "configuration error" in err


@pytest.mark.parametrize("argv", [
    ["constants", "--theorem", "9.9"],
    ["maximal", "--p", "1", "--v", "one"],
    ["maximal", "--u", "nonsense"],
    ["sweep", "--count", "0"],
])
def test_precondition_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and "precondition" in err


def test_config_file_and_environment(capsys, monkeypatch, fast_cfg):
    _, out, _ = _run(capsys, "maximal", "--config", fast_cfg, "--grid-points", "300")
    cfg = json.loads(out)["config"]
    assert cfg["restarts"] == 2 and cfg["grid_points"] == 300
    monkeypatch.setenv("HOL_CONFIG", fast_cfg)
    _, out, _ = _run(capsys, "maximal")
    assert json.loads(out)["config"]["max_levels"] == 16


def test_constants_command(capsys):
    code, out, _ = _run(capsys, "constants", "--theorem", "2.1")
    assert code == 0
    br = json.loads(out)["result"]["breakdown"]
    assert br["total"] == pytest.approx(br["A0"] + br["A1"] + br["A2"], rel=1e-12)


def test_verify_levels(capsys, tmp_path):
    code, _, err = _run(capsys, "verify", "--suite", "levels", "--preset", "exp", "--out", str(tmp_path))
    assert code == 0 and "PASS" in err
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["result"]["pass"] is True


def test_oracle_compare(capsys, fast_cfg):
    code, out, _ = _run(capsys, "oracle", "--config", fast_cfg, "--compare", "--witness")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["oracle"]["value"] > 0
    assert "equivalence" in res and "breakdown" in res


def test_sweep_csv_schema_and_jobs_invariance(capsys, tmp_path, fast_cfg):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    base = ["sweep", "--config", fast_cfg, "--param", "v.alpha", "--start", "-0.2", "--stop", "0.2",
            "--count", "2"]
    code1, _, _ = _run(capsys, *base, "--out", str(d1))
    code2, _, _ = _run(capsys, *base, "--out", str(d2), "--jobs", "2")
    assert code1 == code2 == 0
    with open(d1 / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [float(r[0]) for r in rows[1:]] == [-0.2, 0.2]
    assert (d1 / "sweep.csv").read_text() == (d2 / "sweep.csv").read_text()
    j1 = _strip(json.loads((d1 / "sweep.json").read_text()))
    j2 = _strip(json.loads((d2 / "sweep.json").read_text()))
    assert j1 == j2
