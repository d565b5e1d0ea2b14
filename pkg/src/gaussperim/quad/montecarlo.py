"""Stratified Monte Carlo for pair integrals across an interface.

The outer point is drawn in depth/level-set coordinates: depth ``d`` below
the interface with density proportional to ``d**(-s)`` (the growth of the
inner integral), a uniform point on the level set inside a bounding ball of
the domain (rejected if outside the domain), and a uniform direction. The
radial part of the inner integral is exact. Strata are depth quantiles with
two samples each, so the variance is estimated from within-stratum pairs.
Random streams are keyed by ``(seed, block index)``.
"""
from __future__ import annotations

import math

import numpy as np

from ..geometry import (DomainBall, FullSpace, _canonical_primitive, _depth_range,
                        _domain_for_rules, _inside_all)
from ..kernels import FracParams, kernel_mode, sphere_area
from ..parallel import ordered_map
from .integrate import IntegralResult, QuadSpec
from .rules import pairwise_sum

BLOCK = 4096


def _bounding_ball(dom, n):
    if isinstance(dom, DomainBall) or not hasattr(dom, "lo"):
        return np.asarray(dom.center, dtype=float), float(dom.radius)
    lo, hi = np.asarray(dom.lo), np.asarray(dom.hi)
    return 0.5 * (lo + hi), 0.5 * float(np.linalg.norm(hi - lo))


def _unit_vectors(rng, size, n):
    if n == 1:
        return np.where(rng.random((size, 1)) < 0.5, -1.0, 1.0)
    v = rng.standard_normal((size, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _in_ball(rng, size, k):
    """Uniform points in the unit ball of R^k (k >= 1)."""
    if k == 0:
        return np.zeros((size, 0))
    u = _unit_vectors(rng, size, k)
    return u * rng.random((size, 1)) ** (1.0 / k)


def _plane_basis(w):
    n = w.size
    q, _ = np.linalg.qr(np.column_stack([w, np.eye(n)]))
    return q[:, 1:n]


def _sample_level(kind, prim, dom, n, d, rng):
    """Points on the level set at depth ``d`` and the area they represent."""
    size = d.size
    c0, R0 = _bounding_ball(dom, n)
    if kind == "half":
        w = np.asarray(prim.omega, dtype=float)
        off = (prim.a - d) - c0 @ w
        rho = np.sqrt(np.maximum(R0 * R0 - off * off, 0.0))
        base = c0[None, :] + (off[:, None]) * w[None, :]
        if n == 1:
            return base, np.ones(size)
        B = _plane_basis(w)
        t = _in_ball(rng, size, n - 1) * rho[:, None]
        area = (math.pi ** ((n - 1) / 2) / math.gamma((n - 1) / 2 + 1)) * rho ** (n - 1)
        return base + t @ B.T, area
    c = np.asarray(prim.center, dtype=float)
    rad = prim.radius - d if kind == "ball_in" else prim.radius + d
    pts = c[None, :] + rad[:, None] * _unit_vectors(rng, size, n)
    return pts, sphere_area(n) * rad ** (n - 1)


def mc_pair(outer, dom, target, params: FracParams, spec: QuadSpec, weight) -> IntegralResult:
    """Monte Carlo estimate of the outer/target pair integral with a standard error."""
    from .pairs import _outer_truncation, _tail, ray_sums

    n, s = params.n, params.s
    kmode, delta = kernel_mode(params)
    trunc = _outer_truncation(outer, dom, weight, n)
    kind, prim = _canonical_primitive(outer)
    rule_dom = _domain_for_rules(dom, n, trunc)
    d_lo, d_hi, _ = _depth_range(kind, prim, rule_dom, n)
    if kind == "ball_in":
        d_hi = min(d_hi, prim.radius)
    seed = spec.seed
    if not d_hi > d_lo:
        return IntegralResult(0.0, 0.0, 0, "monte_carlo", seed)
    strata = max(1, spec.mc_budget // 2)
    # depth density proportional to d^{-s} on [0, d_hi] when the outer set touches the interface
    expo = 1.0 - s if d_lo == 0.0 else 1.0
    span = d_hi ** expo - d_lo ** expo if d_lo == 0.0 else d_hi - d_lo
    area_s = sphere_area(n)

    def block(b):
        k0, k1 = b * BLOCK, min((b + 1) * BLOCK, strata)
        m = k1 - k0
        rng = np.random.default_rng([seed, b])
        u = (np.arange(k0, k1)[:, None] + rng.random((m, 2))) / strata
        u = u.ravel()
        if d_lo == 0.0:
            d = (u * span) ** (1.0 / expo)
            dens = expo * d ** (expo - 1.0) / span
        else:
            d = d_lo + u * span
            dens = np.full(d.size, 1.0 / span)
        x, area = _sample_level(kind, prim, rule_dom, n, d, rng)
        keep = _inside_all(x, rule_dom, []) & (d > 0)
        th = _unit_vectors(rng, d.size, n)
        val = np.zeros(d.size)
        if np.any(keep):
            idx = np.flatnonzero(keep)
            rows = np.arange(idx.size)
            F = ray_sums(x[idx], rows, th[idx], np.full(idx.size, area_s), target, weight,
                         s, n, 0, kmode, delta, spec.gl_order)
            val[idx] = F * area[idx] / dens[idx]
        pair = val.reshape(m, 2)
        mean = pair.mean(axis=1)
        var = 0.25 * (pair[:, 0] - pair[:, 1]) ** 2
        return mean, var

    parts = ordered_map(block, range((strata + BLOCK - 1) // BLOCK))
    means = np.concatenate([p[0] for p in parts])
    var = np.concatenate([p[1] for p in parts])
    value = pairwise_sum(means) / strata
    stderr = math.sqrt(pairwise_sum(var)) / strata
    if isinstance(dom, FullSpace) and weight.alpha > 0:
        stderr += _tail(params, dom, weight)
    return IntegralResult(float(value), float(stderr), 2 * strata, "monte_carlo", seed)
