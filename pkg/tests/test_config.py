import pytest

from gaussperim.config import ConfigError, build_config, dump_toml, load_toml
from gaussperim.geometry import FullSpace, Halfspace
from gaussperim.kernels import Cutoff


def test_defaults():
    cfg = build_config({"command": "perimeter"}, {})
    assert cfg.params.n == 2 and cfg.params.s == 0.5
    assert cfg.region == Halfspace((0.0, 1.0), 0.0)
    assert cfg.domain.dim == 2
    assert isinstance(build_config({"command": "halfspace"}, {}).domain, FullSpace)


def test_overrides_win_and_none_is_ignored():
    cfg = build_config({"command": "gamma-sweep", "params": {"s": 0.3}, "sweep": {"gap_tol": 0.2}},
                       {"params": {"s": 0.7, "n": None}, "sweep": {"energy": "total"}})
    assert cfg.params.s == 0.7 and cfg.params.n == 2
    assert cfg.options["gap_tol"] == 0.2 and cfg.options["energy"] == "total"


@pytest.mark.parametrize("data", [
    {"command": "nope"},
    {"command": "perimeter", "bogus": 1},
    {"command": "perimeter", "params": {"n": 4}},
    {"command": "perimeter", "params": {"q": 1}},
    {"command": "perimeter", "quad": {"gl_order": 1}},
    {"command": "perimeter", "params": {"n": 1},
     "region": {"type": "halfspace", "omega": [0.0, 1.0], "a": 0.0}},
    {"command": "perimeter", "region": {"type": "torus"}},
    {"command": "perimeter", "threads": 0},
    {"command": "perimeter", "params": {"regularization": {"type": "soft", "delta": 0.1}}},
])
def test_invalid(data):
    with pytest.raises(ConfigError):
        build_config(data, {})


def test_toml_round_trip(tmp_path):
    cfg = build_config({"command": "perimeter",
                        "params": {"n": 1, "s": 0.4, "regularization": {"type": "cutoff",
                                                                        "delta": 0.1}},
                        "region": {"type": "halfspace", "omega": [1.0], "a": 0.2}}, {})
    path = tmp_path / "c.toml"
    dump_toml(cfg, path)
    again = build_config(load_toml(path), {})
    assert again.params == cfg.params and again.region == cfg.region
    assert again.params.regularization == Cutoff(0.1)
    assert again.to_dict() == cfg.to_dict()


def test_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("command = ")
    with pytest.raises(ConfigError):
        load_toml(p)
    with pytest.raises(ConfigError):
        load_toml(tmp_path / "missing.toml")
