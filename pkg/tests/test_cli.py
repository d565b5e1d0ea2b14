import json
import math

import pytest

from gaussperim import parallel
from gaussperim.cli import run
from gaussperim.config import load_toml


def _doc(path):
    return json.loads(path.read_text())


def test_perimeter_1d(tmp_path):
    code = run(["perimeter", "--dim", "1", "--euclidean", "--out", str(tmp_path), "--no-plots"])
    assert code == 0
    doc = _doc(tmp_path / "perimeter.json")
    assert doc["kind"] == "perimeter"
    assert doc["payload"]["j1"]["value"] == pytest.approx(4 * (math.sqrt(2) - 1), rel=1e-8)
    assert (tmp_path / "perimeter.csv").exists()
    assert load_toml(tmp_path / "config.toml")["command"] == "perimeter"


def test_gamma_sweep_writes_artifacts(tmp_path):
    code = run(["gamma-sweep", "--dim", "1", "--euclidean", "--region", "halfspace",
                "--omega-box", "--out", str(tmp_path)])
    assert code == 0
    rep = _doc(tmp_path / "gamma_sweep.json")["payload"]["report"]
    assert rep["scaled_energies"][0] == pytest.approx((2 ** 0.5 - 1) / 0.5, rel=1e-7)
    assert (tmp_path / "gamma_sweep.svg").read_text().startswith("<svg")


def test_sweep_tolerance_not_met(tmp_path):
    code = run(["gamma-sweep", "--dim", "1", "--euclidean", "--energy", "total",
                "--gap-tol", "1e-4", "--out", str(tmp_path), "--no-plots"])
    assert code == 3
    assert _doc(tmp_path / "gamma_sweep.json")["payload"]["tolerance_met"] is False


def test_halfspace_scan(tmp_path):
    code = run(["halfspace", "--a-list=-0.25,0,0.25", "--out", str(tmp_path), "--no-plots"])
    assert code == 0
    rep = _doc(tmp_path / "halfspace.json")["payload"]["report"]
    assert rep["verdict"] == ["non-stationary", "stationary", "non-stationary"]


def test_el_residual(tmp_path):
    code = run(["el-residual", "--region", "ball", "--radius", "0.8", "--probes", "3",
                "--out", str(tmp_path)])
    assert code == 0
    assert _doc(tmp_path / "el_residual.json")["payload"]["max_deviation"] < 1e-8


def test_variation_1d(tmp_path):
    code = run(["variation", "--dim", "1", "--a", "0.5", "--field", "constant", "--vector", "1",
                "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "variation.json").exists()


@pytest.mark.parametrize("argv", [
    ["perimeter", "--dim", "4"],
    ["perimeter", "--s", "1.5"],
    ["frobnicate"],
    ["halfspace", "--euclidean"],
])
def test_invalid_configuration_exit_code(argv, tmp_path):
    assert run(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('command = "perimeter"\nwibble = 3\n')
    assert run(["perimeter", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["halfspace", "--a-list", "0,0.5", "--out", str(d)]) == 0
    assert (a / "halfspace.csv").read_bytes() == (b / "halfspace.csv").read_bytes()
    assert (a / "halfspace.svg").read_bytes() == (b / "halfspace.svg").read_bytes()
    assert _doc(a / "halfspace.json")["payload_sha256"] == _doc(b / "halfspace.json")["payload_sha256"]


def test_thread_count_does_not_change_results(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["halfspace", "--a-list", "0.25", "--out", str(a), "--threads", "1"]) == 0
    monkeypatch.setenv("GAUSSPERIM_THREADS", "3")
    parallel.set_threads(None)
    assert parallel.threads() == 3
    assert run(["halfspace", "--a-list", "0.25", "--out", str(b)]) == 0
    parallel.set_threads(None)
    assert (a / "halfspace.csv").read_bytes() == (b / "halfspace.csv").read_bytes()
