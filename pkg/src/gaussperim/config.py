"""Run configuration: TOML file plus command-line overrides (flags win)."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import domain_from_dict, domain_to_dict, region_from_dict, region_to_dict
from .kernels import Additive, Cutoff, FracParams
from .quad.integrate import QuadSpec

FULLSPACE_COMMANDS = ("el-residual", "halfspace", "variation")
COMMANDS = ("perimeter", "gamma-sweep", "el-residual", "halfspace", "variation", "selftest")

TOP_KEYS = {"command", "output_dir", "emit_plots", "threads", "region", "domain", "params", "quad",
            "sweep", "halfspace", "variation", "el_residual"}
SECTION_KEYS = {
    "params": {"n", "s", "weight_mode", "regularization"},
    "quad": {"gl_order", "max_depth", "rel_tol", "abs_tol", "mc_budget", "seed", "pv_radii",
             "grading_levels", "angular_levels", "max_cells"},
    "sweep": {"s_list", "energy", "method", "gap_tol"},
    "halfspace": {"a_list", "probes"},
    "variation": {"field", "t_list", "nu_mode", "mixed_term", "which", "d1_tol", "d2_tol"},
    "el_residual": {"probes", "points"},
}

DEFAULTS = {
    "sweep": {"s_list": [0.5, 0.7, 0.8, 0.9, 0.95], "energy": "j1", "method": None,
              "gap_tol": 0.05},
    "halfspace": {"a_list": [-0.5, -0.25, 0.0, 0.25, 0.5], "probes": [0.0, 0.75, 1.5]},
    "variation": {"field": {"type": "constant"}, "t_list": [0.08, 0.04, 0.02],
                  "nu_mode": "squared", "mixed_term": "proof", "which": "first",
                  "d1_tol": 1e-3, "d2_tol": 5e-2},
    "el_residual": {"probes": 5, "points": None},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending location."""


@dataclass
class RunConfig:
    command: str
    region: Any
    domain: Any
    params: FracParams
    quad: QuadSpec
    output_dir: Path
    emit_plots: bool = True
    threads: Optional[int] = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        reg = self.params.regularization
        p = {"n": self.params.n, "s": self.params.s, "weight_mode": self.params.weight_mode}
        if reg is not None:
            p["regularization"] = {"type": "cutoff" if isinstance(reg, Cutoff) else "additive",
                                   "delta": reg.delta}
        q = {k: getattr(self.quad, k) for k in SECTION_KEYS["quad"]}
        q["pv_radii"] = list(q["pv_radii"])
        out = {"command": self.command, "output_dir": str(self.output_dir),
               "emit_plots": self.emit_plots, "region": region_to_dict(self.region),
               "domain": domain_to_dict(self.domain), "params": p, "quad": q}
        if self.threads is not None:
            out["threads"] = self.threads
        section = self.command.replace("-", "_") if self.command != "gamma-sweep" else "sweep"
        if section in DEFAULTS:
            out[section] = {k: v for k, v in self.options.items() if v is not None}
        return out


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def dump_toml(cfg: RunConfig, path) -> None:
    with open(path, "wb") as fh:
        tomli_w.dump(cfg.to_dict(), fh)


def _check_keys(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a table")
    bad = sorted(set(d) - allowed)
    if bad:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, bad))}")


def _regularization(d):
    if d is None:
        return None
    _check_keys(d, {"type", "delta"}, "[params.regularization]")
    kind = d.get("type")
    if kind == "cutoff":
        return Cutoff(float(d["delta"]))
    if kind == "additive":
        return Additive(float(d["delta"]))
    raise ConfigError(f"[params.regularization] type: unknown value {kind!r}")


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if v is None:
            continue
        if isinstance(v, dict) and k not in ("region", "domain", "field"):
            out[k] = _merge(out.get(k) if isinstance(out.get(k), dict) else {}, v)
        else:
            out[k] = v
    return out


def build_config(file_data: Optional[dict], overrides: dict) -> RunConfig:
    """Validate ``file_data`` (parsed TOML) merged with ``overrides`` (flags win)."""
    data = _merge(file_data or {}, overrides)
    _check_keys(data, TOP_KEYS, "top level")
    for sec, allowed in SECTION_KEYS.items():
        if sec in data:
            _check_keys(data[sec], allowed, f"[{sec}]")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    pd = data.get("params", {})
    try:
        params = FracParams(int(pd.get("n", 2)), float(pd.get("s", 0.5)),
                            pd.get("weight_mode", "gaussian"),
                            _regularization(pd.get("regularization")))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"[params]: {exc}") from None
    try:
        qd = dict(data.get("quad", {}))
        if "pv_radii" in qd:
            qd["pv_radii"] = tuple(qd["pv_radii"])
        quad = QuadSpec(**qd)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[quad]: {exc}") from None
    n = params.n
    try:
        region = region_from_dict(data.get("region", {"type": "halfspace",
                                                      "omega": [0.0] * (n - 1) + [1.0], "a": 0.0}))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"[region]: {exc}") from None
    if region.dim != n:
        raise ConfigError(f"[region]: dimension {region.dim} differs from params.n = {n}")
    try:
        default = ({"type": "fullspace"} if command in FULLSPACE_COMMANDS
                   else {"type": "cube", "dim": n})
        domain = domain_from_dict(data.get("domain", default))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"[domain]: {exc}") from None
    if hasattr(domain, "dim") and domain.dim != n:
        raise ConfigError(f"[domain]: dimension {domain.dim} differs from params.n = {n}")
    section = {"gamma-sweep": "sweep", "el-residual": "el_residual"}.get(command, command)
    options = _merge(DEFAULTS.get(section, {}), data.get(section, {}))
    threads = data.get("threads")
    if threads is not None and (not isinstance(threads, int) or threads < 1):
        raise ConfigError("threads: expected a positive integer")
    return RunConfig(command, region, domain, params, quad, Path(data.get("output_dir", ".")),
                     bool(data.get("emit_plots", True)), threads, options)
