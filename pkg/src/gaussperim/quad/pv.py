"""Principal-value integrals of the indicator difference at a boundary point.

``PV int (chi_{E^c} - chi_E)(y) w(x, y) |x - y|^{-n-s} dy`` is evaluated with
exclusion balls ``B_eps(x)`` for each ``eps`` in ``QuadSpec.pv_radii`` and
extrapolated to ``eps = 0`` with the model ``c0 + sum_k c_k eps^{k - s}``,
``k = 1, 2, 3``. Directions come in antipodal pairs so the leading
cancellation near ``x`` happens inside each pair.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..geometry import Complement, FullSpace, Region, _canonical_primitive, complement, signed_distance
from ..kernels import FracParams, kernel_mode
from .angular import MAX_ARC, PlaneGeometry, arc_rule
from .integrate import IntegralResult, QuadSpec
from .rules import richardson_fit

ON_BOUNDARY_TOL = 1e-10


def outward_normal(E: Region, x) -> np.ndarray:
    """Outward unit normal of a halfspace, ball or complement at ``x``."""
    kind, prim = _canonical_primitive(E)
    x = np.asarray(x, dtype=float)
    if kind == "half":
        return np.asarray(prim.omega, dtype=float)
    u = x - np.asarray(prim.center, dtype=float)
    u = u / np.linalg.norm(u)
    return u if kind == "ball_in" else -u


def _plane_regions(E):
    f = E
    while isinstance(f, Complement):
        f = f.region
    return [f]


def _directions_2d(x, E, eps, order, spec):
    geom = PlaneGeometry(_plane_regions(E))
    ang, lev = geom.breakpoints(x[None, :], eps, True, spec.angular_levels)
    rows, phi, w = arc_rule(np.mod(ang, math.pi), lev, order, 2 * spec.angular_levels,
                            period=math.pi)
    th = np.column_stack([np.cos(phi), np.sin(phi)])
    return th, w


def _polar_breaks(E, x, eps):
    """Polar angles (from the normal, folded into [0, pi/2]) where rays change behavior."""
    kind, prim = _canonical_primitive(E)
    out = []
    if kind != "half" and eps < 2 * prim.radius:
        out.append(0.5 * math.pi - math.asin(eps / (2 * prim.radius)))
    return out


def _directions_3d(x, E, eps, order, spec):
    nu = outward_normal(E, x)
    q, _ = np.linalg.qr(np.column_stack([nu, np.eye(3)]))
    e1, e2 = q[:, 1], q[:, 2]
    breaks = _polar_breaks(E, x, eps)
    ang = np.array([[0.0] + breaks]) * 4.0  # period pi/2 mapped onto 2 pi
    lev = np.array([[2 * spec.angular_levels] + [0] * len(breaks)])
    _, t, wt = arc_rule(ang, lev, order, 2 * spec.angular_levels)
    psi, wpsi = t / 4.0, wt / 4.0
    m = 4 * order
    phi = 2 * math.pi * (np.arange(m) + 0.5) / m
    P, F = np.meshgrid(psi, phi, indexing="ij")
    W = np.outer(wpsi * np.sin(psi), np.full(m, 2 * math.pi / m))
    th = (np.cos(P)[..., None] * nu + np.sin(P)[..., None]
          * (np.cos(F)[..., None] * e1 + np.sin(F)[..., None] * e2))
    return th.reshape(-1, 3), W.ravel()


def _pv_at(x, E, params, spec, eps, order, weight):
    from .pairs import ray_sums

    n = params.n
    if n == 1:
        th, w = np.array([[1.0]]), np.array([1.0])
    elif n == 2:
        th, w = _directions_2d(x, E, eps, order, spec)
    else:
        th, w = _directions_3d(x, E, eps, order, spec)
    dirs = np.concatenate([th, -th])
    wts = np.concatenate([w, w])
    rows = np.zeros(dirs.shape[0], dtype=np.int64)
    kmode, delta = kernel_mode(params)
    val = ray_sums(x[None, :], rows, dirs, wts, [complement(E)], weight, params.s, n, 0,
                   kmode, delta, order, eps=eps, sign_all=-1.0)
    return float(val[0])


def pv_boundary_integral(x, E: Region, params: FracParams, spec: QuadSpec = QuadSpec(),
                         weight=None) -> IntegralResult:
    """PV of the indicator difference against the weighted kernel at ``x`` on the boundary.

    The error estimate combines the extrapolation misfit, the change of the
    extrapolated value when the highest power is dropped, and the quadrature
    self-convergence at the smallest radius. ``converged`` is False when the
    estimate exceeds ``sqrt(rel_tol) * max(1, |value|)``.
    """
    from .pairs import weight_for

    x = np.asarray(x, dtype=float).ravel()
    if x.size != params.n or E.dim != params.n:
        raise ValueError("dimension mismatch between x, E and params")
    if abs(float(signed_distance(E, x[None, :])[0])) > ON_BOUNDARY_TOL:
        raise ValueError("x is not on the boundary of E")
    wgt = weight_for(params, weight)
    radii = np.asarray(spec.pv_radii)
    p = spec.gl_order
    vals = np.array([_pv_at(x, E, params, spec, e, p, wgt) for e in radii])
    s = params.s
    powers = [k - s for k in (1, 2, 3)][: max(1, len(radii) - 2)]
    c_full, res = richardson_fit(radii, vals, powers)
    if len(powers) > 1 and len(radii) > len(powers):
        c_red, _ = richardson_fit(radii[1:], vals[1:], powers[:-1])
    else:
        c_red = vals[-1]
    coarse = _pv_at(x, E, params, spec, radii[-1], max(p - 2, 2), wgt)
    err = abs(c_full - c_red) + res + abs(coarse - vals[-1])
    ok = err <= math.sqrt(spec.rel_tol) * max(1.0, abs(c_full))
    return IntegralResult(float(c_full), float(err), int(len(radii) + 1), "deterministic", None, ok)
