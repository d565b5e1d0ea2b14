"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 tolerance not met (results
are still written and flagged).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import parallel
from .config import ConfigError, RunConfig, build_config, dump_toml, load_toml
from .fields import NormalField, field_from_dict
from .functionals import gamma_sweep, j1, j2, local_perimeter
from .geometry import Ball, FullSpace, Halfspace
from .kernels import EUCLIDEAN, GAUSSIAN
from .report import dichotomy_svg, sweep_svg, write_csv, write_json
from .stationarity import INCONCLUSIVE, dichotomy_scan, el_residual_stats

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 2, 3

HELP = {
    "perimeter": "Gaussian and Euclidean perimeter of E in the window and the energies J1, J2, "
                 "J = J1 + J2.\nCSV columns: quantity, value, error.",
    "gamma-sweep": "(1 - s) J over a list of s, extrapolated linearly in 1 - s to s = 1 and "
                   "compared with omega_{n-1} times the perimeter.\nCSV columns: s, "
                   "scaled_energy, error.",
    "el-residual": "Multiplier lambda(x) = -exp(|x|^2/2) PV(x) at boundary probes and its spread."
                   "\nCSV columns: x1..xn, lambda, error.",
    "halfspace": "Stationarity dichotomy scan for halfspaces {x_n < a}.\nCSV columns: a, probe "
                 "(|x'|), lambda.",
    "variation": "First and/or second variation against finite differences along exact flows."
                 "\nCSV columns: order, t, difference_quotient.",
    "selftest": "Quick invariant suite; nonzero exit on any failure.\nCSV columns: name, value, "
                "reference, tolerance, passed.",
}


def _floats(text: str):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", type=Path, help="TOML configuration file (flags override it)")
    g.add_argument("--out", type=Path, help="output directory")
    g.add_argument("--threads", type=int, help="worker cap (default: $GAUSSPERIM_THREADS or 1)")
    g.add_argument("--seed", type=int, help="Monte Carlo seed")
    g.add_argument("--tol", type=float, help="relative tolerance")
    g.add_argument("--mc-budget", type=int, help="Monte Carlo sample budget")
    g.add_argument("--dim", type=int, help="dimension n (1, 2 or 3)")
    g.add_argument("--s", type=float, help="fractional order s in (0, 1)")
    w = g.add_mutually_exclusive_group()
    w.add_argument("--euclidean", action="store_const", const=EUCLIDEAN, dest="weight_mode")
    w.add_argument("--gaussian", action="store_const", const=GAUSSIAN, dest="weight_mode")
    r = g.add_mutually_exclusive_group()
    r.add_argument("--cutoff", type=float, metavar="DELTA", help="cutoff-regularized kernel")
    r.add_argument("--additive", type=float, metavar="DELTA", help="additively regularized kernel")
    g.add_argument("--region", choices=("halfspace", "ball"),
                   help="halfspace {x_n < a} or ball of radius --radius centered at the origin")
    g.add_argument("--a", type=float, default=None, help="halfspace offset")
    g.add_argument("--radius", type=float, default=None, help="ball radius")
    d = g.add_mutually_exclusive_group()
    d.add_argument("--omega-box", action="store_true", help="window Q = (-1/2, 1/2)^n")
    d.add_argument("--full-space", action="store_true", help="no window")
    g.add_argument("--no-plots", action="store_true", help="skip SVG output")

    p = argparse.ArgumentParser(prog="gaussperim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    mk = lambda name: sub.add_parser(name, parents=[common], description=HELP[name],
                                     help=HELP[name].split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    mk("perimeter")
    sw = mk("gamma-sweep")
    sw.add_argument("--s-list", type=_floats, help="increasing s values")
    sw.add_argument("--energy", choices=("j1", "total"), help="energy to sweep (default j1)")
    sw.add_argument("--method", choices=("deterministic", "monte_carlo"))
    sw.add_argument("--gap-tol", type=float, help="accepted relative gap to the target")
    el = mk("el-residual")
    el.add_argument("--probes", type=int, help="number of boundary probes")
    hs = mk("halfspace")
    hs.add_argument("--a-list", type=_floats, help="offsets a")
    hs.add_argument("--probes", type=_floats, help="probe radii |x'|")
    va = mk("variation")
    va.add_argument("--field", choices=("constant", "scaling", "normal"))
    va.add_argument("--vector", type=_floats, help="vector of a constant field (default e_n)")
    va.add_argument("--phi", choices=("one", "monomial", "cosine"), help="normal-field profile")
    va.add_argument("--axis", type=int, default=0)
    va.add_argument("--degree", type=int, default=1)
    va.add_argument("--frequency", type=float, default=1.0)
    va.add_argument("--t-list", type=_floats, help="decreasing flow steps")
    va.add_argument("--which", choices=("first", "second", "both"))
    va.add_argument("--nu-mode", choices=("squared", "abs"))
    va.add_argument("--mixed-term", choices=("proof", "printed"))
    mk("selftest")
    return p


def _overrides(ns, file_data) -> dict:
    o = {"command": ns.command}
    if ns.out is not None:
        o["output_dir"] = str(ns.out)
    if ns.threads is not None:
        o["threads"] = ns.threads
    if ns.no_plots:
        o["emit_plots"] = False
    params = {"n": ns.dim, "s": ns.s, "weight_mode": ns.weight_mode}
    if ns.cutoff is not None:
        params["regularization"] = {"type": "cutoff", "delta": ns.cutoff}
    if ns.additive is not None:
        params["regularization"] = {"type": "additive", "delta": ns.additive}
    o["params"] = params
    o["quad"] = {"seed": ns.seed, "rel_tol": ns.tol, "mc_budget": ns.mc_budget}
    n = ns.dim or (file_data.get("params", {}).get("n", 2))
    if ns.region == "halfspace" or (ns.region is None and ns.a is not None):
        o["region"] = {"type": "halfspace", "omega": [0.0] * (n - 1) + [1.0],
                       "a": 0.0 if ns.a is None else ns.a}
    elif ns.region == "ball":
        o["region"] = {"type": "ball", "center": [0.0] * n,
                       "radius": 0.5 if ns.radius is None else ns.radius}
    elif ns.dim is not None and "region" not in file_data:
        o["region"] = {"type": "halfspace", "omega": [0.0] * (n - 1) + [1.0], "a": 0.0}
    if ns.omega_box:
        o["domain"] = {"type": "cube", "dim": n}
    elif ns.full_space:
        o["domain"] = {"type": "fullspace"}
    if ns.command == "gamma-sweep":
        o["sweep"] = {"s_list": ns.s_list, "energy": ns.energy, "method": ns.method,
                      "gap_tol": ns.gap_tol}
    elif ns.command == "el-residual":
        o["el_residual"] = {"probes": ns.probes}
    elif ns.command == "halfspace":
        o["halfspace"] = {"a_list": ns.a_list, "probes": ns.probes}
    elif ns.command == "variation":
        v = {"t_list": ns.t_list, "which": ns.which, "nu_mode": ns.nu_mode,
             "mixed_term": ns.mixed_term}
        if ns.field is not None:
            fd = {"type": ns.field}
            if ns.field == "constant":
                fd["v"] = ns.vector if ns.vector else [0.0] * (n - 1) + [1.0]
            if ns.field == "normal":
                fd["family"] = ns.phi or "one"
                fd.update(axis=ns.axis, degree=ns.degree, frequency=ns.frequency)
            v["field"] = fd
        o["variation"] = v
    return o


def _payload_config(cfg: RunConfig) -> dict:
    d = cfg.to_dict()
    for k in ("output_dir", "emit_plots", "threads"):
        d.pop(k, None)
    return d


def _res(r) -> dict:
    return {"value": r.value, "error_estimate": r.error_estimate, "converged": r.converged}


def _perimeter(cfg: RunConfig) -> bool:
    E, dom, p, q = cfg.region, cfg.domain, cfg.params, cfg.quad
    a, b = j1(E, dom, p, q), j2(E, dom, p, q)
    t = a + b
    pg, pe = local_perimeter(E, dom, GAUSSIAN), local_perimeter(E, dom, EUCLIDEAN)
    ok = a.converged and b.converged
    write_json(cfg.output_dir / "perimeter.json", "perimeter",
               {"config": _payload_config(cfg), "gaussian_perimeter": pg,
                "euclidean_perimeter": pe, "j1": _res(a), "j2": _res(b), "j_total": _res(t),
                "tolerance_met": ok})
    write_csv(cfg.output_dir / "perimeter.csv", ["quantity", "value", "error"],
              [("gaussian_perimeter", pg, 0.0), ("euclidean_perimeter", pe, 0.0),
               ("j1", a.value, a.error_estimate), ("j2", b.value, b.error_estimate),
               ("j_total", t.value, t.error_estimate)])
    return ok


def _sweep(cfg: RunConfig) -> bool:
    o = cfg.options
    rep = gamma_sweep(cfg.region, cfg.domain, o["s_list"], cfg.params, cfg.quad, o["energy"],
                      o.get("method"))
    ok = rep.relative_gap <= o["gap_tol"] and not rep.ill_conditioned
    write_json(cfg.output_dir / "gamma_sweep.json", "gamma_sweep",
               {"config": _payload_config(cfg), "report": rep.to_dict(), "tolerance_met": ok})
    write_csv(cfg.output_dir / "gamma_sweep.csv", ["s", "scaled_energy", "error"],
              zip(rep.s_values, rep.scaled_energies, rep.errors))
    if cfg.emit_plots:
        sweep_svg(cfg.output_dir / "gamma_sweep.svg", rep.s_values, rep.scaled_energies,
                  rep.target, rep.extrapolated_limit)
    return ok


def _el_residual(cfg: RunConfig) -> bool:
    if not isinstance(cfg.domain, FullSpace):
        raise ConfigError("[domain]: the multiplier is defined on full space")
    o = cfg.options
    mean, dev, probes = el_residual_stats(cfg.region, cfg.params, cfg.quad, o["probes"],
                                          o.get("points"))
    write_json(cfg.output_dir / "el_residual.json", "el_residual",
               {"config": _payload_config(cfg), "mean": mean, "max_deviation": dev,
                "probes": [{"point": list(v.point), "lambda": v.lam, "error": v.error}
                           for v in probes]})
    n = cfg.params.n
    write_csv(cfg.output_dir / "el_residual.csv", [f"x{i + 1}" for i in range(n)]
              + ["lambda", "error"], [(*v.point, v.lam, v.error) for v in probes])
    return True


def _halfspace(cfg: RunConfig) -> bool:
    o = cfg.options
    rep = dichotomy_scan(o["a_list"], cfg.params, cfg.quad, o["probes"])
    ok = INCONCLUSIVE not in rep.verdict
    write_json(cfg.output_dir / "halfspace.json", "halfspace",
               {"config": _payload_config(cfg), "report": rep.to_dict(), "tolerance_met": ok})
    rows = [(a, r, lam) for a, row in zip(rep.a_values, rep.lambdas)
            for r, lam in zip(rep.probes, row)]
    write_csv(cfg.output_dir / "halfspace.csv", ["a", "probe", "lambda"], rows)
    if cfg.emit_plots:
        dichotomy_svg(cfg.output_dir / "halfspace.svg", rep.a_values, rep.deviation,
                      rep.noise_floor)
    return ok


def _variation(cfg: RunConfig) -> bool:
    from .variations import (boundary_pair_term, fd_variation_oracle, first_variation,
                             second_variation)

    if not isinstance(cfg.domain, FullSpace):
        raise ConfigError("[domain]: variations are evaluated on full space")
    if not isinstance(cfg.region, (Halfspace, Ball)):
        raise ConfigError("[region]: variations need a halfspace or a ball")
    o = cfg.options
    fdict = dict(o["field"])
    if fdict.get("type") == "constant" and "v" not in fdict:
        fdict["v"] = [0.0] * (cfg.params.n - 1) + [1.0]
    try:
        X = field_from_dict(fdict)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"[variation] field: {exc}") from None
    E, p, q, ts = cfg.region, cfg.params, cfg.quad, o["t_list"]
    first = second = None
    ok = True
    rows = []
    if o["which"] in ("first", "both"):
        an = first_variation(E, X, p, q, cfg.domain)
        rep = fd_variation_oracle(E, X, p, q, ts, cfg.domain, analytic_d1=an)
        first = rep.to_dict()
        ok &= rep.relative_gap_d1 <= o["d1_tol"]
        rows += [("1", t, v) for t, v in zip(rep.t_values, rep.fd_d1_steps)]
    if o["which"] in ("second", "both"):
        if not isinstance(X, NormalField):
            raise ConfigError("[variation] field: the second variation needs a normal field")
        try:
            an = second_variation(E, X.phi, p, q, o["nu_mode"], o["mixed_term"], cfg.domain)
        except ValueError as exc:
            raise ConfigError(f"[variation]: {exc}") from None
        t1 = boundary_pair_term(E, X.phi, p, q, o["nu_mode"], cfg.domain)
        rep = fd_variation_oracle(E, X, p, q, ts, cfg.domain, analytic_d2=an,
                                  gap_scale_d2=abs(t1) if np.isfinite(t1) else None)
        second = rep.to_dict()
        second["pair_term"] = t1
        ok &= bool(rep.relative_gap_d2 is not None and rep.relative_gap_d2 <= o["d2_tol"])
        rows += [("2", t, v) for t, v in zip(rep.t_values, rep.fd_d2_steps)]
    write_json(cfg.output_dir / "variation.json", "variation",
               {"config": _payload_config(cfg), "first": first, "second": second,
                "tolerance_met": bool(ok)})
    write_csv(cfg.output_dir / "variation.csv", ["order", "t", "difference_quotient"], rows)
    return bool(ok)


def _selftest(cfg: RunConfig) -> bool:
    from .selftest import run_checks

    checks = run_checks(cfg.quad)
    ok = all(c.passed for c in checks)
    write_json(cfg.output_dir / "selftest.json", "selftest",
               {"seed": cfg.quad.seed, "checks": [c.to_dict() for c in checks], "passed": ok})
    write_csv(cfg.output_dir / "selftest.csv", ["name", "value", "reference", "tolerance",
                                                "passed"],
              [(c.name, c.value, c.reference, c.tolerance, c.passed) for c in checks])
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.10g} "
              f"(reference {c.reference:.10g}, tolerance {c.tolerance:.3g})", file=sys.stderr)
    return ok


DISPATCH = {"perimeter": _perimeter, "gamma-sweep": _sweep, "el-residual": _el_residual,
            "halfspace": _halfspace, "variation": _variation, "selftest": _selftest}


def run(argv=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        file_data = load_toml(ns.config) if ns.config else {}
        cfg = build_config(file_data, _overrides(ns, file_data))
        parallel.set_threads(cfg.threads)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        dump_toml(cfg, cfg.output_dir / "config.toml")
        ok = DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"gaussperim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, TypeError) as exc:
        print(f"gaussperim: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not ok:
        print(f"gaussperim: {cfg.command}: tolerance not met (results written to "
              f"{cfg.output_dir})", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def main() -> None:
    sys.exit(run())
