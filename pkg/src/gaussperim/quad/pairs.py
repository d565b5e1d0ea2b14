"""Singular double integrals across an interface.

``int_{S} int_{T} w(x, y) K(x - y) dy dx`` with ``S`` on one side of
``boundary(E)`` and ``T`` on the other. The inner integral is done along
rays from ``x`` with exact ray/region intervals and a closed-form or graded
radial rule; the outer integral uses depth/level-set coordinates so the
``dist(x, boundary E)**(-s)`` growth of the inner integral is integrated by a
Gauss-Jacobi closing cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import backend
from ..geometry import (Ball, Box, Complement, Polytope, DomainBall, DomainBox, FullSpace, Region, complement,
                        domain_region, ray_intervals, tube_rule)
from ..kernels import FracParams, kernel_mode
from ..parallel import ordered_map
from .angular import PlaneGeometry, arc_rule
from .integrate import IntegralResult, QuadSpec
from .rules import pairwise_sum

CHUNK = 200_000


@dataclass(frozen=True)
class Weight:
    """Pair weight ``exp(-alpha (|x - m|^2 + |y - m|^2) / 4)``; ``alpha = 0`` is Euclidean."""

    alpha: float = 1.0
    shift: tuple[float, ...] = ()

    def m(self, n: int) -> np.ndarray:
        return np.asarray(self.shift, dtype=float) if self.shift else np.zeros(n)


def weight_for(params: FracParams, weight: Optional[Weight] = None) -> Weight:
    if weight is not None:
        return weight
    return Weight(1.0) if params.gaussian else Weight(0.0)


def localized_weight(x0, r: float) -> Weight:
    """Weight of ``gamma(x0 + r x, x0 + r y)`` in the rescaled variables."""
    x0 = np.asarray(x0, dtype=float)
    return Weight(r * r, tuple(-x0 / r))


@dataclass(frozen=True)
class Side:
    """One variable's restriction: the domain itself or its complement."""

    domain: object
    outside: bool = False


def inside(domain) -> Side:
    return Side(domain, False)


def outside(domain) -> Side:
    return Side(domain, True)


def _side_factors(side: Side, n: int):
    if isinstance(side.domain, FullSpace):
        return None if side.outside else []
    reg = domain_region(side.domain, n)
    return [complement(reg)] if side.outside else [reg]


def _cut_radius(domain, weight: Weight, n: int) -> float:
    if weight.alpha <= 0:
        raise ValueError("an unbounded outer set needs a Gaussian weight")
    m = weight.m(n)
    return math.sqrt(2.0) * domain.truncation_radius / math.sqrt(weight.alpha) + float(np.linalg.norm(m))


def ray_sums(x, rows, dirs, dir_w, factors, weight: Weight, s: float, n: int, p: int,
             kmode: int, delta: float, order: int, eps=None, sign_all: float | None = None):
    """Per-point sums ``sum_theta w_theta int_{r in T} r^{n-1+p} K(r) weight dr``.

    With ``sign_all`` set, the result is ``2 * (sum over T) + sign_all * (sum over all r)``,
    used for indicator differences. ``eps`` (scalar or per-ray) excludes ``r < eps``.
    """
    N = x.shape[0]
    out = np.zeros(N)
    M = rows.size
    if M == 0:
        return out
    m = weight.m(n)
    starts = list(range(0, M, CHUNK))

    def work(a):
        b = min(a + CHUNK, M)
        r = rows[a:b]
        th = dirs[a:b]
        xr = x[r]
        lo, hi = ray_intervals(factors, xr, th)
        if eps is not None:
            e = eps if np.isscalar(eps) else eps[a:b]
            lo = np.maximum(lo, e)
        xm = xr - m
        c0 = 2.0 * np.einsum("ij,ij->i", xm, xm)
        bb = np.einsum("ij,ij->i", xm, th)
        K = lo.shape[0]
        vals = backend.radial_integrate(lo.ravel(), hi.ravel(), np.tile(c0, K), np.tile(bb, K),
                                        weight.alpha, s, n, p, kmode, delta, order)
        v = vals.reshape(K, -1).sum(axis=0)
        if sign_all is not None:
            lo_all = np.zeros(b - a) if eps is None else np.broadcast_to(e, (b - a,))
            tot = backend.radial_integrate(lo_all, np.full(b - a, np.inf), c0, bb, weight.alpha,
                                           s, n, p, kmode, delta, order)
            v = 2.0 * v + sign_all * tot
        return np.bincount(r, weights=v * dir_w[a:b], minlength=N)

    for part in ordered_map(work, starts):
        out += part
    return out


def _plane_regions(factors):
    regs = []
    for f in factors:
        while isinstance(f, Complement):
            f = f.region
        regs.append(f)
    return regs


def directions(x, factors, n: int, order: int, spec: QuadSpec, alpha: float = 0.0, eps=None):
    """Direction nodes (rows, dirs, weights) around each point."""
    N = x.shape[0]
    if n == 1:
        rows = np.repeat(np.arange(N), 2)
        dirs = np.tile(np.array([[1.0], [-1.0]]), (N, 1))
        return rows, dirs, np.ones(2 * N)
    if n == 2:
        geom = PlaneGeometry(_plane_regions(factors))
        decaying = alpha > 0 or any(isinstance(f, (Box, Ball, Polytope)) for f in factors)
        ang, lev = geom.breakpoints(x, eps, decaying, spec.angular_levels)
        rows, phi, w = arc_rule(ang, lev, order, 2 * spec.angular_levels)
        return rows, np.column_stack([np.cos(phi), np.sin(phi)]), w
    raise ValueError("deterministic direction rules are planar; use Monte Carlo for n = 3")


def _orient(E: Region, A: Side, B: Side):
    """(outer region, outer domain, target factors) with a bounded outer set."""
    n = E.dim
    fa, fb = _side_factors(A, n), _side_factors(B, n)
    if fa is None or fb is None:
        return None
    if not A.outside:
        return E, A.domain, [complement(E)] + fb
    if not B.outside:
        return complement(E), B.domain, [E] + fa
    raise ValueError("both sides outside the domain: the pair integral is unbounded")


def _outer_truncation(outer, dom, weight: Weight, n: int):
    if not isinstance(dom, FullSpace):
        return None
    if weight.alpha <= 0 and isinstance(outer, Ball):
        # a bounded outer set needs no cut
        return max(dom.truncation_radius, float(np.linalg.norm(outer.center)) + outer.radius + 1.0)
    return _cut_radius(dom, weight, n)


def _outer_value(outer, dom, target, params: FracParams, spec: QuadSpec, weight: Weight,
                 order: int, p: int = 0) -> tuple[float, int]:
    n = params.n
    kmode, delta = kernel_mode(params)
    trunc = _outer_truncation(outer, dom, weight, n)
    # F(x) ~ dist^{-s} near the interface when the target touches it
    beta = -params.s if kmode != 2 else 0.0
    tube = tube_rule(outer, dom, order, spec.grading_levels, beta, tangential_grade=24,
                     truncation=trunc)
    if tube.weights.size == 0:
        return 0.0, 0
    x = tube.points
    rows, dirs, w = directions(x, target, n, order, spec, weight.alpha)
    F = ray_sums(x, rows, dirs, w, target, weight, params.s, n, p, kmode, delta, order)
    return pairwise_sum(tube.weights * F), int(rows.size)


def double_integral_pair(E: Region, A: Side, B: Side, params: FracParams,
                         spec: QuadSpec = QuadSpec(), weight: Optional[Weight] = None,
                         method: Optional[str] = None) -> IntegralResult:
    """``int_{E ∩ A} int_{E^c ∩ B} w(x, y) K(x - y) dy dx``.

    ``A`` and ``B`` are ``Side`` restrictions (a domain or its complement).
    Planar and one-dimensional problems are deterministic; n = 3 uses
    stratified Monte Carlo unless ``method`` says otherwise.
    """
    if E.dim != params.n:
        raise ValueError("region dimension differs from params.n")
    wgt = weight_for(params, weight)
    plan = _orient(E, A, B)
    if plan is None:
        return IntegralResult(0.0, 0.0, 0)
    outer, dom, target = plan
    if method is None:
        method = "monte_carlo" if params.n == 3 else "deterministic"
    if method == "monte_carlo":
        from .montecarlo import mc_pair
        return mc_pair(outer, dom, target, params, spec, wgt)
    p = spec.gl_order
    v_hi, c1 = _outer_value(outer, dom, target, params, spec, wgt, p)
    v_lo, c2 = _outer_value(outer, dom, target, params, spec, wgt, max(p - 2, 2))
    err = abs(v_hi - v_lo) + 4 * np.finfo(float).eps * abs(v_hi)
    if isinstance(dom, FullSpace) and wgt.alpha > 0:
        err += _tail(params, dom, wgt)
    return IntegralResult(v_hi, float(err), c1 + c2, "deterministic")


def _tail(params: FracParams, dom: FullSpace, weight: Weight) -> float:
    """Bound for outer points beyond the cut radius.

    For such x the inner integral is at most |S^{n-1}| dist^{-s}/s, integrated
    against the remaining Gaussian factor; dist >= 1 except on a unit slab.
    """
    from .integrate import gaussian_tail_bound
    n, s = params.n, params.s
    R = math.sqrt(2.0) * dom.truncation_radius
    area = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    far = gaussian_tail_bound(n, R, 0.0, area / s, 0.25)
    slab = gaussian_tail_bound(max(n - 1, 1), R - 1.0, 0.0, area / (s * (1 - s)) * 2.0, 0.25)
    return float(far + slab)
