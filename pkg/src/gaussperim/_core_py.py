"""Pure numpy implementation of the radial kernel integrals.

Mirrors ``_core.pyx`` panel for panel; selected automatically when the
compiled extension is unavailable.
"""
from __future__ import annotations

import math

import numpy as np

from .quad.rules import gauss_legendre

LOG_PANEL = math.log(4.0)   # max log-width of a geometric panel
LIN_PANEL = 2.0             # max width (in Gaussian units) of a linear panel
CAP_EXPONENT = 46.0         # weight below exp(-46) is dropped
HEAD = 1e-10                # closed-form head cell for integrable r**(p-1-s) at 0

KERNEL_PLAIN, KERNEL_CUTOFF, KERNEL_ADDITIVE = 0, 1, 2


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)


def eta(r, delta):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    out = np.where(r <= delta, 1.0, out)
    lo_band = (r > delta) & (r < 2 * delta)
    out = np.where(lo_band, 1.0 - smoothstep((r - delta) / delta), out)
    hi_band = (r > 2 / delta) & (r < 4 / delta)
    out = np.where(hi_band, smoothstep((r - 2 / delta) / (2 / delta)), out)
    out = np.where(r >= 4 / delta, 1.0, out)
    return out


def _integrand(r, c0, b, alpha, s, n, p, kmode, delta):
    if kmode == KERNEL_PLAIN:
        k = r ** (p - 1.0 - s)
    elif kmode == KERNEL_CUTOFF:
        k = (1.0 - eta(r, delta)) * r ** (p - 1.0 - s)
    else:
        k = r ** (n - 1.0 + p) / (r ** (n + s) + delta)
    if alpha != 0.0:
        k = k * np.exp(-0.25 * alpha * (c0 + 2.0 * r * b + r * r))
    return k


def _additive_tail(r, n, s, delta):
    return r ** (-s) / s - delta * r ** (-n - 2.0 * s) / (n + 2.0 * s)


def radial_integrate(lo, hi, c0, b, alpha, s, n, p, kmode, delta, order):
    """``int_lo^hi r**(n-1+p) K(r) exp(-alpha (c0 + 2 r b + r^2) / 4) dr`` per ray."""
    lo = np.ascontiguousarray(lo, dtype=float).ravel()
    hi = np.ascontiguousarray(hi, dtype=float).ravel()
    c0 = np.broadcast_to(np.asarray(c0, dtype=float), lo.shape).ravel()
    b = np.broadcast_to(np.asarray(b, dtype=float), lo.shape).ravel()
    R = lo.size
    out = np.zeros(R)
    if R == 0:
        return out
    valid = hi > lo

    if alpha == 0.0 and kmode == KERNEL_PLAIN:
        e = p - s
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            hv = np.where(np.isinf(hi), 0.0 if e < 0 else np.inf, hi ** e)
            lv = lo ** e
            val = (hv - lv) / e
        return np.where(valid, val, 0.0)

    lo_e = lo.copy()
    hi_e = hi.copy()
    if alpha != 0.0:
        disc = b * b - c0 + 4.0 * CAP_EXPONENT / alpha
        root = np.sqrt(np.maximum(disc, 0.0))
        hi_e = np.where(disc > 0, np.minimum(hi_e, -b + root), -np.inf)
        lo_e = np.where(disc > 0, np.maximum(lo_e, -b - root), lo_e)
    if kmode == KERNEL_CUTOFF:
        hi_e = np.minimum(hi_e, 4.0 / delta)
        lo_e = np.maximum(lo_e, delta)

    tail = np.zeros(R)
    if alpha == 0.0 and kmode == KERNEL_ADDITIVE:
        if p != 0:
            raise ValueError("additive Euclidean kernel with p != 0 diverges at infinity")
        rc = 64.0 * max(1.0, delta ** (1.0 / (n + s)))
        far = hi_e > rc
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hi = np.where(np.isinf(hi_e), 0.0, _additive_tail(np.where(far, hi_e, rc), n, s, delta))
        tail = np.where(far & valid, _additive_tail(rc, n, s, delta) - t_hi, 0.0)
        hi_e = np.where(far, rc, hi_e)

    valid &= hi_e > lo_e
    head = np.zeros(R)
    zero_lo = valid & (lo_e <= 0.0)
    if np.any(zero_lo):
        if p == 0 and kmode == KERNEL_PLAIN:
            raise ValueError("r**(-1-s) is not integrable at r = 0")
        h0 = np.minimum(HEAD, hi_e)
        g0 = np.exp(-0.25 * alpha * c0)
        if kmode == KERNEL_PLAIN:
            hv = g0 * h0 ** (p - s) / (p - s)
        elif kmode == KERNEL_ADDITIVE:
            hv = g0 * h0 ** (n + p) / (delta * (n + p))
        else:
            hv = np.zeros(R)
        head = np.where(zero_lo, hv, 0.0)
        lo_e = np.where(zero_lo, h0, lo_e)
        valid &= hi_e > lo_e

    idx = np.nonzero(valid)[0]
    if idx.size == 0:
        return out + head + tail
    L, H = lo_e[idx], hi_e[idx]
    cands = [1.0]
    if kmode == KERNEL_CUTOFF:
        cands += [2.0 * delta, 2.0 / delta]
    pts = np.column_stack([L] + [np.clip(np.full_like(L, c), L, H) for c in cands] + [H])
    pts.sort(axis=1)
    u = pts[:, :-1].ravel()
    v = pts[:, 1:].ravel()
    ray = np.repeat(idx, pts.shape[1] - 1)
    seg_ok = v > u
    u, v, ray = u[seg_ok], v[seg_ok], ray[seg_ok]
    geometric = (v <= 1.0) | (alpha == 0.0)
    with np.errstate(divide="ignore"):
        m_geo = np.ceil(np.log(v / u) / LOG_PANEL)
    m_lin = np.ceil((v - u) * math.sqrt(alpha) / LIN_PANEL) if alpha > 0 else m_geo
    m = np.maximum(np.where(geometric, m_geo, m_lin), 1).astype(np.int64)

    seg = np.repeat(np.arange(u.size), m)
    first = np.cumsum(m) - m
    k = np.arange(seg.size) - np.repeat(first, m)
    us, vs, ms, geo = u[seg], v[seg], m[seg], geometric[seg]
    x, w = gauss_legendre(order)
    with np.errstate(divide="ignore", invalid="ignore"):
        la, lb = np.log(us), np.log(vs)
    dl = (lb - la) / ms
    ga = la + k * dl
    dlin = (vs - us) / ms
    aa = us + k * dlin
    half_geo = 0.5 * dl
    half_lin = 0.5 * dlin
    tg = ga[:, None] + half_geo[:, None] * (x[None, :] + 1.0)
    rl = aa[:, None] + half_lin[:, None] * (x[None, :] + 1.0)
    r = np.where(geo[:, None], np.exp(np.where(geo[:, None], tg, 0.0)), rl)
    jac = np.where(geo[:, None], r * half_geo[:, None], half_lin[:, None])
    rr = ray[seg]
    f = _integrand(r, c0[rr][:, None], b[rr][:, None], alpha, s, n, p, kmode, delta)
    panel = (f * jac * w[None, :]).sum(axis=1)
    acc = np.bincount(rr, weights=panel, minlength=R)
    return acc + head + tail
