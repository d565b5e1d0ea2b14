"""Euler-Lagrange reduction for halfspaces, the multiplier constancy test and the dichotomy scan.

For ``H = {x_n < a}`` and ``x`` on the boundary plane the multiplier is

    lambda(x) = 2 int_{z_n > 0} exp(-|z|^2/4) |z|^{-n-s} sinh(<z, x>/2) dz,

which equals ``-exp(|x|^2/2)`` times the weighted principal value of
``chi_{E^c} - chi_E`` at ``x``. Splitting ``sinh(<z', x'>/2 + z_n a/2)`` gives
``lambda / 2 = A + B`` with an A-term odd in ``z'`` and

    B(rho, a) = int_{z_n > 0} exp(-|z|^2/4) |z|^{-n-s} cosh(<z', x'>/2) sinh(z_n a/2) dz.

All integrals here are taken in polar coordinates about ``z = 0``; the
integrands vanish linearly there, so the radial factor behaves like
``r**(-s)`` and is handled by a graded Gauss-Jacobi rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .geometry import FullSpace, Region, boundary_quadrature
from .kernels import FracParams, sphere_area
from .parallel import ordered_map
from .quad.integrate import QuadSpec
from .quad.pv import pv_boundary_integral
from .quad.rules import composite, pairwise_sum, singular_rule

STATIONARY = "stationary"
NON_STATIONARY = "non-stationary"
INCONCLUSIVE = "inconclusive"

TAIL = 14.0  # exp(-TAIL^2/4) is far below double precision
ANGULAR_PANELS = 8
DEFAULT_PROBES = (0.0, 0.75, 1.5)


def _check(params: FracParams):
    if not params.gaussian:
        raise ValueError("the halfspace reduction needs the Gaussian weight")
    if params.regularization is not None:
        raise ValueError("the halfspace reduction uses the unregularized kernel")


def _radial(s, order, levels, rmax):
    r, w = singular_rule(0.0, 1.0, -s, order, levels, "left")
    m = max(1, int(math.ceil(rmax - 1.0)))
    r2, w2 = composite(np.linspace(1.0, rmax, m + 1), order)
    r, w = np.concatenate([r, r2]), np.concatenate([w, w2])
    return r, w * np.exp(-0.25 * r * r) * r ** (-1.0 - s)


def _angles(lo, hi, order, panels=ANGULAR_PANELS):
    return composite(np.linspace(lo, hi, panels + 1), order)


def _upper_half_integral(h, n, s, order, levels, reach):
    """``int_{z_n > 0} exp(-|z|^2/4) |z|^{-n-s} h(z) dz`` with ``h(z) = O(|z|)`` at 0.

    ``h`` receives an array of points of shape ``(..., n)``.
    """
    r, wr = _radial(s, order, levels, reach + TAIL)
    if n == 1:
        return float(pairwise_sum(wr * h(r[:, None])))
    if n == 2:
        ph, wp = _angles(0.0, math.pi, order)
        th = np.column_stack([np.cos(ph), np.sin(ph)])
        z = r[:, None, None] * th[None, :, :]
        return float(pairwise_sum(np.outer(wr, wp) * h(z)))
    if n == 3:
        ps, wps = _angles(0.0, 0.5 * math.pi, order, ANGULAR_PANELS // 2)
        ph, wph = _angles(0.0, 2 * math.pi, order, 2 * ANGULAR_PANELS)
        P, F = np.meshgrid(ps, ph, indexing="ij")
        th = np.stack([np.sin(P) * np.cos(F), np.sin(P) * np.sin(F), np.cos(P)], axis=-1)
        wa = np.outer(wps * np.sin(ps), wph)
        z = r[:, None, None, None] * th[None]
        return float(pairwise_sum(wr[:, None, None] * wa[None] * h(z)))
    raise ValueError("n must be 1, 2 or 3")


def _plane_point(x, a, n):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != n:
        raise ValueError("x has the wrong dimension")
    if abs(x[-1] - a) > 1e-12:
        raise ValueError("x is not on the boundary plane {x_n = a}")
    return x


def _lambda(x, n, s, order, levels):
    def h(z):
        return 2.0 * np.sinh(0.5 * (z @ x))
    return _upper_half_integral(h, n, s, order, levels, float(np.linalg.norm(x)))


def lambda_halfspace(x, a: float, params: FracParams, spec: QuadSpec = QuadSpec()) -> float:
    """Multiplier ``2 int_{z_n>0} exp(-|z|^2/4)|z|^{-n-s} sinh(<z, x>/2) dz`` at ``x``."""
    _check(params)
    x = _plane_point(x, a, params.n)
    return _lambda(x, params.n, params.s, spec.gl_order, spec.grading_levels)


def _sphere_average_cosh(u, d):
    """Average of ``cosh(u <theta, e>)`` over the unit sphere of R^d."""
    u = np.abs(np.asarray(u, dtype=float))
    if d == 1:
        return np.cosh(u)
    nu = 0.5 * d - 1.0
    small = u < 1e-8
    us = np.where(small, 1.0, u)
    val = math.gamma(nu + 1.0) * (2.0 / us) ** nu * special.ive(nu, us) * np.exp(us)
    return np.where(small, 1.0, val)


def _b_term(rho, a, n, s, order, levels):
    if n == 1:
        return _upper_half_integral(lambda z: np.sinh(0.5 * a * z[..., 0]), 1, s, order, levels,
                                    abs(a))
    d = n - 1
    area = sphere_area(d)
    # (r', z_n) = R (cos t, sin t); the z' sphere contributes area * r'^{d-1} times the average
    r, wr = _radial(s, order, levels, math.hypot(rho, a) + TAIL)
    t, wt = _angles(0.0, 0.5 * math.pi, order)
    R, T = np.meshgrid(r, t, indexing="ij")
    rp, zn = R * np.cos(T), R * np.sin(T)
    # |z|^{-n-s} R^{d-1} cos^{d-1} R dR dt = R^{-1-s} cos^{d-1} t dR dt (R^{-1-s} is in wr)
    f = area * np.cos(T) ** (d - 1) * _sphere_average_cosh(0.5 * rho * rp, d) \
        * np.sinh(0.5 * a * zn)
    return float(pairwise_sum(np.outer(wr, wt) * f))


def b_term(rho: float, a: float, params: FracParams, spec: QuadSpec = QuadSpec()) -> float:
    """``B(|x'|, a)`` by the reduction to a two-dimensional ``(r', z_n)`` integral."""
    _check(params)
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if params.n == 1 and rho != 0:
        raise ValueError("in one dimension rho must be 0")
    if a == 0.0:
        return 0.0
    return _b_term(float(rho), float(a), params.n, params.s, spec.gl_order, spec.grading_levels)


def a_term(x, a: float, params: FracParams, spec: QuadSpec = QuadSpec()) -> float:
    """Direct integral of ``K sinh(<z', x'>/2) cosh(z_n a/2)`` over ``z_n > 0``."""
    _check(params)
    x = _plane_point(x, a, params.n)
    xp = x.copy()
    xp[-1] = 0.0

    def h(z):
        return np.sinh(0.5 * (z @ xp)) * np.cosh(0.5 * a * z[..., -1])
    return _upper_half_integral(h, params.n, params.s, spec.gl_order, spec.grading_levels,
                                float(np.linalg.norm(x)))


def d_term(x, a: float, params: FracParams, spec: QuadSpec = QuadSpec()) -> float:
    """Direct integral of ``K sinh(<z'', x''>/2) cosh(z_{n-1} x_{n-1}/2) z_{n-1} sinh(z_n a/2)``.

    Needs ``n = 3`` (for ``n = 2`` the ``z''`` block is empty and the integrand is 0).
    """
    _check(params)
    n = params.n
    x = _plane_point(x, a, n)
    if n < 3:
        return 0.0

    def h(z):
        return (np.sinh(0.5 * (z[..., : n - 2] @ x[: n - 2])) * np.cosh(0.5 * z[..., n - 2] * x[n - 2])
                * z[..., n - 2] * np.sinh(0.5 * a * z[..., -1]))
    return _upper_half_integral(h, n, params.s, spec.gl_order, spec.grading_levels,
                                float(np.linalg.norm(x)))


def doubled(spec: QuadSpec) -> QuadSpec:
    """The same spec at doubled order and grading depth, used for noise floors."""
    return spec.replace(gl_order=2 * spec.gl_order, grading_levels=2 * spec.grading_levels)


# ---------------------------------------------------------------- residual statistics


@dataclass(frozen=True)
class ProbeValue:
    point: tuple[float, ...]
    lam: float
    error: float


def _probe_points(E: Region, probes: int):
    rule = boundary_quadrature(E, FullSpace(), 16, panels=8)
    pts = rule.points[np.linalg.norm(rule.points, axis=1) <= 2.0]
    if pts.shape[0] < probes:
        pts = rule.points
    if pts.shape[0] < probes:
        raise ValueError("not enough boundary nodes for the requested probes")
    idx = np.round(np.linspace(0, pts.shape[0] - 1, probes)).astype(int)
    return pts[idx]


def el_residual_stats(E: Region, params: FracParams, spec: QuadSpec = QuadSpec(),
                      probes: int = 5, points=None):
    """Multiplier ``lambda(x) = -exp(|x|^2/2) PV(x)`` at boundary probes.

    Returns ``(mean, max |lambda - mean|, [ProbeValue, ...])``. Probes are
    boundary nodes with ``|x| <= 2`` unless ``points`` is given.
    """
    _check(params)
    if points is None:
        if probes < 3:
            raise ValueError("at least three probes are needed")
        pts = _probe_points(E, probes)
    else:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
    res = ordered_map(lambda p: pv_boundary_integral(p, E, params, spec), list(pts))
    scale = np.exp(0.5 * np.sum(pts * pts, axis=1))
    lam = np.array([-f * r.value for f, r in zip(scale, res)])
    err = np.array([f * r.error_estimate for f, r in zip(scale, res)])
    mean = float(np.mean(lam))
    dev = float(np.max(np.abs(lam - mean)))
    vals = [ProbeValue(tuple(map(float, p)), float(v), float(e)) for p, v, e in zip(pts, lam, err)]
    return mean, dev, vals


# ---------------------------------------------------------------- dichotomy scan


@dataclass(frozen=True)
class DichotomyReport:
    a_values: tuple[float, ...]
    deviation: tuple[float, ...]
    lambda_at_origin_probe: tuple[float, ...]
    noise_floor: float
    verdict: tuple[str, ...]
    probes: tuple[float, ...] = DEFAULT_PROBES
    lambdas: tuple[tuple[float, ...], ...] = ()
    b_values: tuple[float, ...] = ()
    b_sign_matches: tuple[bool, ...] = ()

    def to_dict(self) -> dict:
        return {
            "a_values": list(self.a_values),
            "deviation": list(self.deviation),
            "lambda_at_origin_probe": list(self.lambda_at_origin_probe),
            "noise_floor": self.noise_floor,
            "verdict": list(self.verdict),
            "probes": list(self.probes),
            "lambdas": [list(r) for r in self.lambdas],
            "b_values": list(self.b_values),
            "b_sign_matches": list(self.b_sign_matches),
        }


def classify(deviation: float, floor: float) -> str:
    if deviation < 3.0 * floor:
        return STATIONARY
    if deviation > 10.0 * floor:
        return NON_STATIONARY
    return INCONCLUSIVE


def probe_point(rho: float, a: float, n: int) -> np.ndarray:
    x = np.zeros(n)
    if n > 1:
        x[0] = rho
    x[-1] = a
    return x


def dichotomy_scan(a_list: Sequence[float], params: FracParams, spec: QuadSpec = QuadSpec(),
                   probes: Sequence[float] = DEFAULT_PROBES,
                   floor_min: Optional[float] = None) -> DichotomyReport:
    """Multiplier deviation across boundary probes ``x' = rho e_1`` for each offset ``a``.

    The noise floor is the largest change of any probe value when the
    quadrature is rerun at doubled depth, bounded below by ``floor_min``
    (default ``spec.abs_tol``).
    """
    _check(params)
    n, s = params.n, params.s
    a_vals = [float(a) for a in a_list]
    rhos = [float(r) for r in probes] if n > 1 else [0.0]
    fine = doubled(spec)
    tasks = [(a, r) for a in a_vals for r in rhos]

    def one(task):
        a, r = task
        x = probe_point(r, a, n)
        return (_lambda(x, n, s, spec.gl_order, spec.grading_levels),
                _lambda(x, n, s, fine.gl_order, fine.grading_levels))

    out = ordered_map(one, tasks)
    floor = max(max(abs(c - f) for c, f in out), spec.abs_tol if floor_min is None else floor_min)
    lam = np.array([c for c, _ in out]).reshape(len(a_vals), len(rhos))
    dev = [float(np.max(np.abs(row - row[0]))) for row in lam]
    b_vals = [b_term(0.0, a, params, spec) for a in a_vals]
    signs = [bool(np.sign(2.0 * b) == np.sign(a)) for a, b in zip(a_vals, b_vals)]
    return DichotomyReport(tuple(a_vals), tuple(dev), tuple(float(v) for v in lam[:, 0]),
                           float(floor), tuple(classify(d, floor) for d in dev), tuple(rhos),
                           tuple(tuple(map(float, row)) for row in lam), tuple(b_vals),
                           tuple(signs))
