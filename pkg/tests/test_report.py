import json
import math

import jsonschema
import pytest

from gaussperim.report import canonical, envelope, payload_hash, write_csv, write_json


def test_hash_ignores_key_order_and_timestamp():
    a = envelope("selftest", {"b": 1, "a": [1.5, 2]})
    b = envelope("selftest", {"a": [1.5, 2], "b": 1}, timestamp=False)
    assert a["payload_sha256"] == b["payload_sha256"]
    assert "timestamp" in a["meta"] and "timestamp" not in b["meta"]
    assert canonical({"b": 1, "a": 2}) == b'{"a":2,"b":1}'
    assert len(payload_hash({})) == 64


def test_write_json_validates(tmp_path):
    payload = {"seed": 1, "checks": [], "passed": True}
    doc = write_json(tmp_path / "s.json", "selftest", payload)
    assert json.loads((tmp_path / "s.json").read_text())["payload_sha256"] == doc["payload_sha256"]
    with pytest.raises(jsonschema.ValidationError):
        write_json(tmp_path / "t.json", "selftest", {"seed": "x"})


def test_non_finite_values_become_strings(tmp_path):
    payload = {"seed": 1, "checks": [{"name": "x", "value": -math.inf, "reference": 0.0,
                                      "tolerance": 1.0, "passed": False}], "passed": False}
    doc = write_json(tmp_path / "s.json", "selftest", payload)
    assert doc["payload"]["checks"][0]["value"] == "-inf"


def test_csv_round_trips_floats(tmp_path):
    x = 0.1 + 0.2
    write_csv(tmp_path / "a.csv", ["x", "y"], [(x, 1)])
    line = (tmp_path / "a.csv").read_text().splitlines()[1]
    assert float(line.split(",")[0]) == x
