"""Quick invariant suite behind the ``selftest`` subcommand."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .fields import Constant
from .functionals import (UnitBallConstants, j1, j_total, local_perimeter, localization_grid_max,
                          scaling_identity_check)
from .geometry import FullSpace, Halfspace, complement, translate_domain, translate_region, unit_cube
from .kernels import EUCLIDEAN, FracParams
from .quad.integrate import QuadSpec
from .quad.pairs import double_integral_pair, inside
from .quad.pv import pv_boundary_integral
from .stationarity import STATIONARY, b_term, dichotomy_scan, lambda_halfspace
from .variations import first_variation, fd_variation_oracle


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "reference": self.reference,
                "tolerance": self.tolerance, "passed": bool(self.passed)}


def _close(name, value, ref, tol, relative=True):
    scale = abs(ref) if relative and ref != 0 else 1.0
    return Check(name, float(value), float(ref), float(tol), abs(value - ref) <= tol * scale)


def run_checks(spec: QuadSpec = QuadSpec()) -> list[Check]:
    out = []
    H1, Q1, Q2 = Halfspace((1.0,), 0.0), unit_cube(1), unit_cube(2)
    H2 = Halfspace((0.0, 1.0), 0.0)

    pe = FracParams(1, 0.5, EUCLIDEAN)
    r = j1(H1, Q1, pe, spec)
    out.append(_close("closed_form_1d", 0.5 * r.value, 2 * (math.sqrt(2) - 1), 1e-6))

    ref = math.sqrt(2 * math.pi) * (2 * stats.norm.cdf(0.5) - 1)
    out.append(_close("gaussian_perimeter_2d", local_perimeter(H2, Q2), ref, 1e-10))
    om = UnitBallConstants.up_to(3).omega
    out.append(_close("unit_ball_constants", max(abs(a - b) for a, b in
                                                 zip(om, (1, 2, math.pi, 4 * math.pi / 3))),
                      0.0, 1e-14, relative=False))

    pg = FracParams(1, 0.5)
    a = j_total(H1, Q1, pg, spec)
    b = j_total(complement(H1), Q1, pg, spec)
    tol = a.error_estimate + b.error_estimate
    out.append(Check("complement_symmetry_1d", b.value, a.value, 2 * tol,
                     abs(a.value - b.value) <= 2 * tol))
    v = np.array([0.2])
    c = j1(translate_region(H1, v), translate_domain(Q1, v), pg, spec)
    a1 = j1(H1, Q1, pg, spec)
    tol = a1.error_estimate + c.error_estimate
    out.append(Check("gaussian_translation_changes_energy", c.value, a1.value, 5 * tol,
                     abs(c.value - a1.value) > 5 * tol))

    sc = scaling_identity_check(H1, Q1, 2.0, pe, spec)
    out.append(Check("scaling_identity_1d", sc.defect, 0.0, 2 * sc.tolerance, sc.passed))
    g = localization_grid_max((1.0, 0.0), 0.05)
    out.append(Check("localization_bound", g, 0.2, 0.2, g <= 0.2))

    p2 = FracParams(2, 0.5)
    pv = pv_boundary_integral(np.array([0.4, 0.0]), H2, p2, spec)
    out.append(Check("pv_parity_halfspace", pv.value, 0.0, max(pv.error_estimate, 1e-9),
                     abs(pv.value) <= max(pv.error_estimate, 1e-9)))
    lam = lambda_halfspace(np.array([0.5, 0.3]), 0.3, p2, spec)
    out.append(_close("lambda_equals_twice_b", lam, 2 * b_term(0.5, 0.3, p2, spec), 1e-10))

    rep = dichotomy_scan([-0.25, 0.0, 0.25], p2, spec)
    ok = rep.verdict == ("non-stationary", STATIONARY, "non-stationary") and all(rep.b_sign_matches)
    out.append(Check("halfspace_dichotomy", rep.deviation[1], 0.0, 3 * rep.noise_floor, ok))

    E = Halfspace((1.0,), 0.5)
    X = Constant((1.0,))
    an = first_variation(E, X, pg, spec)
    fd = fd_variation_oracle(E, X, pg, spec, (0.08, 0.04, 0.02), FullSpace(), analytic_d1=an)
    out.append(_close("first_variation_vs_flow_1d", an, fd.fd_d1, 1e-3))

    m1 = double_integral_pair(H1, inside(Q1), inside(Q1), pe, spec, method="monte_carlo")
    m2 = double_integral_pair(H1, inside(Q1), inside(Q1), pe, spec.replace(seed=spec.seed + 1),
                              method="monte_carlo")
    se = math.hypot(m1.error_estimate, m2.error_estimate)
    out.append(Check("monte_carlo_two_seeds", m1.value, m2.value, 3 * se,
                     abs(m1.value - m2.value) <= 3 * se))
    return out
