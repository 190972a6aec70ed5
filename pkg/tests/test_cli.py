import json
import math
import subprocess
import sys

import pytest

from moelab.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, run


def call(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = run(list(argv) + ["--out", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, doc, out


def test_certify_freeprod_accepts(tmp_path):
    code, doc, _ = call(["certify", "freeprod", "--M", "1", "--factors", "Z5", "--copies", "10^84"], tmp_path)
    assert code == EXIT_OK
    rep = doc["report"]
    assert rep["verdict"] == "ACCEPT"
    lo, hi = (float(x) for x in rep["gap"])
    assert 0 < lo <= hi and lo == pytest.approx(4.34e-83, rel=0.01)
    assert rep["gap_units"] == "nats"


def test_certify_freeprod_rejects(tmp_path):
    code, doc, _ = call(["certify", "freeprod", "--M", "1", "--factors", "Z5", "--copies", "10^83"], tmp_path)
    assert code == EXIT_FAIL
    assert doc["report"]["verdict"] == "REJECT" and doc["report"]["failed_check"] == "size-exp"


def test_verify_srd_example(tmp_path):
    code, doc, _ = call(["verify", "srd", "--G", "Z5", "--H", "Z7", "--trials", "1000", "--seed", "7"], tmp_path)
    assert code == EXIT_OK and doc["status"] == "PASS"
    assert doc["report"]["max_ratio"] <= 3 + 1e-9


def test_channel_entropy_example(tmp_path):
    code, doc, _ = call(["channel", "entropy", "--G", "F2", "--input", "delta_e", "--composed"], tmp_path)
    assert code == EXIT_OK
    rep = doc["report"]
    assert rep["units"] == "nats"
    assert rep["entropy"] == pytest.approx(1.5 * math.log(2), abs=1e-7)


def test_parse_error_exit_and_position(capsys):
    assert run(["group", "info", "--G", "Z5 ** Z7"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "position" in err


def test_usage_errors():
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["verify", "power", "--G", "Z3"]) == EXIT_USAGE


def test_budget_flag_and_env(tmp_path, monkeypatch):
    argv = ["moe", "--G", "F2", "--radius", "6", "--restarts", "1"]
    assert run(argv + ["--budget", "10"]) == EXIT_BUDGET
    monkeypatch.setenv("MOELAB_BUDGET", "10")
    assert run(["moe", "--G", "F2", "--radius", "6", "--restarts", "1", "--budget", "100000"]) == EXIT_BUDGET


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "srd", "--G", "Z5", "--H", "Z7", "--trials", "50", "--seed", "3"],
        ["channel", "entropy", "--G", "F2", "--input", "random", "--q", "2.45", "--trials", "5", "--seed", "1"],
        ["certify", "freeprod", "--M", "1", "--factors", "Z5", "--copies", "10^84"],
    ],
)
def test_determinism_byte_identical(argv, capsys):
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first and first


def test_config_defaults_and_round_trip(tmp_path):
    code, doc, _ = call(["group", "info", "--G", "Z4[1, 2, 3]"], tmp_path)
    assert code == EXIT_OK
    cfg = doc["config"]
    assert (cfg["radius"], cfg["power"], cfg["trials"], cfg["seed"], cfg["tol"], cfg["precision_bits"]) == (
        3, 1, 200, 0, 1e-9, 256,
    )
    assert cfg["spec"] == doc["report"]["canonical"]


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["constants", "--G", "F2"], EXIT_OK),
        (["norm", "--G", "Z5", "--f", "uniform"], EXIT_OK),
        (["verify", "power", "--G", "Z3", "--n", "3", "--m", "2"], EXIT_OK),
        (["certify", "main", "--G", "F2", "--q", "sqrt(6)"], EXIT_FAIL),
        (["certify", "main", "--G", "F(10^10)", "--q", "sqrt(14)"], EXIT_OK),
        (["certify", "freeprod", "--M", "1", "--factors", "Z4", "--copies", "10^84"], EXIT_FAIL),
    ],
)
def test_exit_codes_match_verdicts(argv, expected, tmp_path):
    code, doc, _ = call(argv, tmp_path)
    assert code == expected
    verdict = doc["report"].get("verdict") if isinstance(doc["report"], dict) else None
    if verdict:
        assert (verdict == "ACCEPT") == (code == EXIT_OK)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "moelab", "group", "info", "--G", "Z5"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["report"]["order"] == "5"
    assert "moelab group" in proc.stderr
