"""First and second variations of the Gaussian nonlocal energy and their FD oracle."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .fields import (Constant, CoordinateMonomial, NormalField, One, Scaling, ScalarFamily,
                     VectorFieldSpec, evaluate_field, normal_extension, project)
from .geometry import (Ball, Complement, FullSpace, Halfspace, Region, _canonical_primitive,
                       boundary_quadrature, complement, gaussian_volume, scale_region,
                       translate_region)
from .kernels import FracParams, frac_kernel, kernel_mode
from .parallel import ordered_map
from .quad.integrate import QuadSpec
from .quad.pairs import weight_for, ray_sums
from .quad.pv import _directions_2d, _directions_3d, pv_boundary_integral
from .quad.rules import composite, pairwise_sum, singular_rule

SQUARED = "squared"
ABS = "abs"
PROOF = "proof"
PRINTED = "printed"


def _boundary(E: Region, domain, spec: QuadSpec, panels: int):
    rule = boundary_quadrature(E, domain, spec.gl_order, panels=panels)
    return rule


def nonlocal_curvature(x, E: Region, params: FracParams, spec: QuadSpec = QuadSpec()) -> float:
    """``PV int (chi_{E^c} - chi_E)(y) gamma(x, y) |x - y|^{-n-s} dy`` at ``x`` on the boundary."""
    return pv_boundary_integral(x, E, params, spec).value


def curvature_profile(E: Region, params: FracParams, spec: QuadSpec = QuadSpec(),
                      domain=FullSpace(), panels: int = 8):
    """Boundary rule of ``E`` and the nonlocal curvature at each node, with error estimates."""
    rule = _boundary(E, domain, spec, panels)
    res = ordered_map(lambda p: pv_boundary_integral(p, E, params, spec), list(rule.points))
    return rule, np.array([r.value for r in res]), np.array([r.error_estimate for r in res])


def first_variation(E: Region, X: VectorFieldSpec, params: FracParams,
                    spec: QuadSpec = QuadSpec(), domain=FullSpace(), panels: int = 8) -> float:
    """``int_{boundary E} H*(x) <X(x), nu(x)> dH^{n-1}``."""
    rule = _boundary(E, domain, spec, panels)
    if len(rule) == 0:
        return 0.0
    radius = getattr(domain, "truncation_radius", 8.0)
    xn = np.einsum("ij,ij->i", evaluate_field(X, rule.points, E, radius), rule.normals)
    active = np.flatnonzero(xn != 0.0)
    H = np.zeros(len(rule))
    vals = ordered_map(lambda i: nonlocal_curvature(rule.points[i], E, params, spec), active)
    H[active] = vals
    return pairwise_sum(H * xn * rule.weights)


def gaussian_volume_variation(E: Region, X: VectorFieldSpec, domain=FullSpace(),
                              resolution: int = 16, panels: int = 8) -> float:
    """``int_{boundary E} <X, nu> exp(-|x|^2/2) dH^{n-1}``."""
    rule = boundary_quadrature(E, domain, resolution, panels=panels)
    if len(rule) == 0:
        return 0.0
    radius = getattr(domain, "truncation_radius", 8.0)
    xn = np.einsum("ij,ij->i", evaluate_field(X, rule.points, E, radius), rule.normals)
    g = np.exp(-0.5 * np.sum(rule.points ** 2, axis=1))
    return pairwise_sum(xn * g * rule.weights)


def volume_preserving_check(E: Region, phi: ScalarFamily, domain=FullSpace(),
                            resolution: int = 16, panels: int = 8, h: float = 1e-5):
    """(``int phi exp(-|x|^2/2)``, max over nodes of ``|d phi/d nu + phi (H - <x, nu>)|``).

    The normal derivative is taken from the normal extension by central differences.
    """
    rule = boundary_quadrature(E, domain, resolution, panels=panels)
    if len(rule) == 0:
        return 0.0, 0.0
    p, nu = rule.points, rule.normals
    g = np.exp(-0.5 * np.sum(p ** 2, axis=1))
    integral = pairwise_sum(phi.value(p) * g * rule.weights)
    dphi = (normal_extension(phi, E, p + h * nu) - normal_extension(phi, E, p - h * nu)) / (2 * h)
    resid = dphi + phi.value(p) * (rule.curvature - np.einsum("ij,ij->i", p, nu))
    return float(integral), float(np.max(np.abs(resid)))


# ---------------------------------------------------------------- second variation


def _radial_rule(rmax: float, beta: float, order: int, levels: int):
    """Nodes on (0, rmax] graded toward 0 for ``r**beta`` behavior, unit panels beyond 1."""
    first = min(1.0, rmax)
    r, w = singular_rule(0.0, first, beta, order, levels, "left")
    if rmax > first:
        m = int(math.ceil(rmax - first))
        r2, w2 = composite(np.linspace(first, rmax, m + 1), order)
        r, w = np.concatenate([r, r2]), np.concatenate([w, w2])
    return r, w


def _pair_term(x, nu_x, phi_x, ys, nus, w_y, phi, params: FracParams, alpha: float, q: float):
    d = ys - x
    g = np.exp(-0.25 * alpha * (x @ x + np.sum(ys * ys, axis=1)))
    dphi = (phi_x - phi.value(ys)) ** 2
    dn = np.linalg.norm(nus - nu_x, axis=1) ** q
    return np.sum(w_y * g * frac_kernel(d, params) * (dphi - phi_x ** 2 * dn))


def _inner_boundary(E: Region, x, nu, n, order, levels, beta, reach):
    """Nodes on the boundary around ``x`` (excluding ``x``), normals and surface weights."""
    kind, prim = _canonical_primitive(E)
    sign = 1.0 if kind != "ball_out" else -1.0
    if kind == "half":
        if n == 1:
            return np.empty((0, 1)), np.empty((0, 1)), np.empty(0)
        r, w = _radial_rule(reach, beta, order, levels)
        if n == 2:
            tau = np.array([-nu[1], nu[0]])
            ys = np.concatenate([x + r[:, None] * tau, x - r[:, None] * tau])
            ww = np.concatenate([w, w])
        else:
            qm, _ = np.linalg.qr(np.column_stack([nu, np.eye(3)]))
            e1, e2 = qm[:, 1], qm[:, 2]
            m = 4 * order
            ph = 2 * math.pi * (np.arange(m) + 0.5) / m
            dirs = np.cos(ph)[:, None] * e1 + np.sin(ph)[:, None] * e2
            ys = (x[None, None, :] + r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
            ww = np.outer(w * r, np.full(m, 2 * math.pi / m)).ravel()
        return ys, np.tile(nu, (ys.shape[0], 1)), ww
    c = np.asarray(prim.center, dtype=float)
    R = prim.radius
    u = (x - c) / R
    if n == 1:
        ys = np.array([c - R * u])
        return ys, sign * (ys - c) / R, np.ones(1)
    psi, w = singular_rule(0.0, math.pi, beta, order, levels, "left")
    if n == 2:
        t = np.array([-u[1], u[0]])
        pts = []
        for sg in (1.0, -1.0):
            pts.append(c + R * (np.cos(psi)[:, None] * u + sg * np.sin(psi)[:, None] * t))
        ys = np.concatenate(pts)
        ww = np.concatenate([R * w, R * w])
    else:
        qm, _ = np.linalg.qr(np.column_stack([u, np.eye(3)]))
        e1, e2 = qm[:, 1], qm[:, 2]
        m = 4 * order
        ph = 2 * math.pi * (np.arange(m) + 0.5) / m
        dirs = np.cos(ph)[:, None] * e1 + np.sin(ph)[:, None] * e2
        ys = (c + R * (np.cos(psi)[:, None, None] * u
                       + np.sin(psi)[:, None, None] * dirs[None, :, :])).reshape(-1, 3)
        ww = np.outer(R * R * np.sin(psi) * w, np.full(m, 2 * math.pi / m)).ravel()
    return ys, sign * (ys - c) / R, ww


def boundary_pair_term(E: Region, phi: ScalarFamily, params: FracParams,
                       spec: QuadSpec = QuadSpec(), nu_mode: str = SQUARED,
                       domain=FullSpace(), panels: int = 8) -> float:
    """``int int gamma K (|phi(x) - phi(y)|^2 - phi(x)^2 |nu(x) - nu(y)|^q)`` over boundary pairs.

    ``q = 2`` for ``nu_mode="squared"``, ``q = 1`` for ``"abs"``. With ``abs``
    on a curved boundary the integrand behaves like ``|x - y|^{1-n-s}`` on the
    diagonal and the integral diverges to ``-inf`` (returned with a warning).
    """
    if nu_mode not in (SQUARED, ABS):
        raise ValueError("nu_mode must be 'squared' or 'abs'")
    n = params.n
    kind, _ = _canonical_primitive(E)
    q = 2.0 if nu_mode == SQUARED else 1.0
    if q == 1.0 and kind != "half" and n > 1:
        rule = boundary_quadrature(E, domain, 8)
        if np.any(phi.value(rule.points) != 0):
            warnings.warn("|nu(x) - nu(y)| term is not integrable on a curved boundary",
                          RuntimeWarning, stacklevel=2)
            return -math.inf
    rule = _boundary(E, domain, spec, panels)
    if len(rule) == 0:
        return 0.0
    alpha = weight_for(params).alpha
    reach = 2.0 * getattr(domain, "truncation_radius", 8.0)
    # |phi(x) - phi(y)|^2 ~ r^2 so the inner integrand behaves like r^{-s} (tangent-plane
    # measure included); beta is relative to the 1D variable used by each rule
    beta = -params.s if n <= 2 else 1.0 - params.s - 1.0

    def one(i):
        x, nu = rule.points[i], rule.normals[i]
        px = float(phi.value(x[None, :])[0])
        ys, nus, wy = _inner_boundary(E, x, nu, n, spec.gl_order, spec.grading_levels, beta,
                                      reach)
        if ys.shape[0] == 0:
            return 0.0
        return _pair_term(x, nu, px, ys, nus, wy, phi, params, alpha, q)

    vals = np.array(ordered_map(one, range(len(rule))))
    return pairwise_sum(vals * rule.weights)


def mixed_term(E: Region, phi: ScalarFamily, params: FracParams, spec: QuadSpec = QuadSpec(),
               form: str = PROOF, domain=FullSpace(), panels: int = 8) -> float:
    """``int phi(x)^2 int S(y) <y - x, nu(x)>/2 gamma K dy dH_x``.

    ``S = chi_{E^c} - chi_E`` for ``form="proof"``, ``S = 1`` for ``"printed"``.
    """
    if form not in (PROOF, PRINTED):
        raise ValueError("form must be 'proof' or 'printed'")
    n, s = params.n, params.s
    rule = _boundary(E, domain, spec, panels)
    if len(rule) == 0:
        return 0.0
    wgt = weight_for(params)
    kmode, delta = kernel_mode(params)
    order = spec.gl_order
    phi2 = phi.value(rule.points) ** 2

    def one(i):
        if phi2[i] == 0.0:
            return 0.0
        x, nu = rule.points[i], rule.normals[i]
        if n == 1:
            th, w = np.array([[1.0]]), np.array([1.0])
        elif n == 2:
            th, w = _directions_2d(x, E, None, order, spec)
        else:
            th, w = _directions_3d(x, E, 0.0, order, spec)
        dirs = np.concatenate([th, -th])
        wd = np.concatenate([w, w]) * 0.5 * (dirs @ nu)
        rows = np.zeros(dirs.shape[0], dtype=np.int64)
        X = x[None, :]
        if form == PROOF:
            v = ray_sums(X, rows, dirs, wd, [complement(E)], wgt, s, n, 1, kmode, delta, order,
                         sign_all=-1.0)
        else:
            v = (ray_sums(X, rows, dirs, wd, [complement(E)], wgt, s, n, 1, kmode, delta, order)
                 + ray_sums(X, rows, dirs, wd, [E], wgt, s, n, 1, kmode, delta, order))
        return float(v[0])

    vals = np.array(ordered_map(one, range(len(rule))))
    return pairwise_sum(phi2 * vals * rule.weights)


def second_variation(E: Region, phi: ScalarFamily, params: FracParams,
                     spec: QuadSpec = QuadSpec(), nu_mode: str = SQUARED, mixed: str = PROOF,
                     domain=FullSpace(), panels: int = 8, check: bool = True,
                     tol: float = 1e-6) -> float:
    """Second variation along ``X = phi nu`` for a volume-preserving ``phi``.

    Equals the boundary pair term minus the mixed term. With ``check`` the
    volume-preservation residuals must be below ``tol`` (relative to the
    Gaussian perimeter for the integral condition).
    """
    if check:
        integral, pointwise = volume_preserving_check(E, phi, domain)
        scale = gaussian_volume_variation(E, NormalField(One()), domain)
        if abs(integral) > tol * max(abs(scale), 1.0) or pointwise > tol:
            raise ValueError(f"phi is not volume preserving (residuals {integral:.2e}, "
                             f"{pointwise:.2e})")
    t1 = boundary_pair_term(E, phi, params, spec, nu_mode, domain, panels)
    if not math.isfinite(t1):
        return t1
    return t1 - mixed_term(E, phi, params, spec, mixed, domain, panels)


# ---------------------------------------------------------------- finite-difference oracle


@dataclass(frozen=True)
class VariationReport:
    analytic_d1: Optional[float]
    fd_d1: float
    analytic_d2: Optional[float]
    fd_d2: float
    t_values: tuple[float, ...]
    fd_d1_steps: tuple[float, ...]
    fd_d2_steps: tuple[float, ...]
    observed_order_d1: Optional[float]
    observed_order_d2: Optional[float]
    relative_gap_d1: Optional[float] = None
    relative_gap_d2: Optional[float] = None
    energies: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "analytic_d1": self.analytic_d1, "fd_d1": self.fd_d1,
            "analytic_d2": self.analytic_d2, "fd_d2": self.fd_d2,
            "t_values": list(self.t_values),
            "fd_d1_steps": list(self.fd_d1_steps), "fd_d2_steps": list(self.fd_d2_steps),
            "observed_order_d1": self.observed_order_d1,
            "observed_order_d2": self.observed_order_d2,
            "relative_gap_d1": self.relative_gap_d1, "relative_gap_d2": self.relative_gap_d2,
            "energies": {str(k): v for k, v in self.energies.items()},
        }


def affine_part(E: Region, X: VectorFieldSpec):
    """``(A, b)`` with ``X(y) = A y + b`` (taper ignored), or None when X is not affine."""
    n = E.dim
    if isinstance(X, Constant):
        return np.zeros((n, n)), np.asarray(X.v, dtype=float)
    if isinstance(X, Scaling):
        return np.eye(n), np.zeros(n)
    if isinstance(X, NormalField):
        kind, prim = _canonical_primitive(E)
        if kind != "half":
            return None
        w = np.asarray(prim.omega, dtype=float)
        a = prim.a
        phi = X.phi
        if isinstance(phi, CoordinateMonomial) and phi.degree == 0:
            phi = One()
        if isinstance(phi, One):
            # 1 + a (<y, w> - a)
            g, h = a * w, 1.0 - a * a
        elif isinstance(phi, CoordinateMonomial) and phi.degree == 1 and a == 0.0:
            # y_k - <y, w> w_k
            g = np.eye(n)[phi.axis] - w[phi.axis] * w
            h = 0.0
        else:
            return None
        return np.outer(w, g), h * w
    return None


def flow_region(E: Region, X: VectorFieldSpec, t: float) -> Region:
    """Exact image of ``E`` under the flow of an affine field (taper ignored)."""
    ab = affine_part(E, X)
    if ab is None:
        raise ValueError("the flowed set leaves the region family; no exact region-level flow")
    A, b = ab
    n = E.dim
    if isinstance(X, Constant):
        return translate_region(E, t * b)
    if isinstance(X, Scaling):
        return scale_region(E, math.exp(t))
    M = np.zeros((n + 1, n + 1))
    M[:n, :n], M[:n, n] = A, b
    F = linalg.expm(t * M)
    P, c = F[:n, :n], F[:n, n]
    Pinv = np.linalg.inv(P)
    flip = isinstance(E, Complement)
    kind, prim = _canonical_primitive(E)
    w = np.asarray(prim.omega, dtype=float)
    # y in E_t  iff  <w, P^{-1}(y - c)> < a
    v = Pinv.T @ w
    nv = np.linalg.norm(v)
    out = Halfspace(tuple(v / nv), (prim.a + v @ c) / nv)
    return complement(out) if flip else out


def _richardson(t, D, order=2.0):
    t1, t2 = t[-2], t[-1]
    q = (t1 / t2) ** order
    return (q * D[-1] - D[-2]) / (q - 1.0)


def _observed_order(t, D):
    if len(D) < 3:
        return None
    d1, d2 = abs(D[-3] - D[-2]), abs(D[-2] - D[-1])
    if d1 == 0 or d2 == 0:
        return None
    return math.log(d1 / d2) / math.log(t[-2] / t[-1])


def fd_variation_oracle(E: Region, X: VectorFieldSpec, params: FracParams,
                        spec: QuadSpec = QuadSpec(), t_list: Sequence[float] = (1e-2, 5e-3),
                        domain=FullSpace(), analytic_d1: Optional[float] = None,
                        analytic_d2: Optional[float] = None, gap_scale_d2: Optional[float] = None,
                        energy=None) -> VariationReport:
    """Central first and second differences of the energy along exact region flows.

    ``energy(region)`` defaults to the total energy on ``domain``. Steps must
    decrease; the last two are combined by Richardson extrapolation. The
    second-variation gap is relative to ``max(|fd|, gap_scale_d2)`` when given.
    """
    from .functionals import j_total

    ts = [float(t) for t in t_list]
    if len(ts) < 2 or any(t <= 0 for t in ts):
        raise ValueError("t_list needs at least two positive steps")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("steps must decrease")
    if energy is None:
        energy = lambda R: j_total(R, domain, params, spec).value
    vals = {0.0: energy(E)}
    for t in ts:
        for sg in (1.0, -1.0):
            vals[sg * t] = energy(flow_region(E, X, sg * t))
    D1 = [(vals[t] - vals[-t]) / (2 * t) for t in ts]
    D2 = [(vals[t] - 2 * vals[0.0] + vals[-t]) / (t * t) for t in ts]
    fd1, fd2 = _richardson(ts, D1), _richardson(ts, D2)
    gap1 = gap2 = None
    if analytic_d1 is not None:
        gap1 = abs(analytic_d1 - fd1) / max(abs(fd1), 1e-300)
    if analytic_d2 is not None:
        den = max(abs(fd2), gap_scale_d2 or 0.0, 1e-300)
        gap2 = abs(analytic_d2 - fd2) / den
    return VariationReport(analytic_d1, fd1, analytic_d2, fd2, tuple(ts), tuple(D1), tuple(D2),
                           _observed_order(ts, D1), _observed_order(ts, D2), gap1, gap2, vals)
