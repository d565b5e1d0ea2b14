"""Direction rules around a point for ray-based integration.

In the plane, the integrand over directions is piecewise smooth with
breakpoints we can list exactly: directions toward vertices (kinks),
directions parallel to unbounded lines and tangent to circles (square-root
or power-type endpoint behavior), and the direction of closest approach to
a circle (a peak of width ~ sqrt(depth)). Arcs between breakpoints get
Gauss-Legendre panels graded toward the non-smooth ends.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..geometry import Ball, Box, Complement, Halfspace, Polytope, boundary_curves
from .rules import composite, gauss_legendre, graded_edges

MAX_ARC = math.pi / 4


class PlaneGeometry:
    """Breakpoint data for a set of target regions in R^2."""

    def __init__(self, regions):
        segs, lines, circles = [], [], []
        for reg in regions:
            s, l, c = boundary_curves(reg)
            segs += s
            lines += l
            circles += c
        self.lines = lines
        self.circles = circles
        pts = []
        for p, q in segs:
            pts += [p, q]
        pieces = [("seg", s) for s in segs] + [("line", l) for l in lines] + [("circ", c) for c in circles]
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                pts += _intersect(pieces[i], pieces[j])
        pts = [p for p in pts if np.all(np.isfinite(p)) and np.linalg.norm(p) < 1e6]
        self.vertices = np.array(pts).reshape(-1, 2) if pts else np.empty((0, 2))
        if len(self.vertices):
            self.vertices = np.unique(np.round(self.vertices, 14), axis=0)

    def breakpoints(self, x: np.ndarray, eps: float | None = None, decaying: bool = False,
                    max_levels: int = 10):
        """Angles in [0, 2 pi) and grading depths, shape (N, K).

        NaN marks an absent breakpoint; depth 0 marks a kink. Directions
        parallel to a line need grading down to the distance from the line
        when rays are cut off far away (Gaussian weight or bounded target),
        and all the way otherwise (the integrand behaves like |angle|^s there). Tangent directions
        to circles have square-root behavior; the closest-approach direction
        has a peak of width sqrt(dist / R).
        """
        N = x.shape[0]
        angs, lev = [], []
        if len(self.vertices):
            d = self.vertices[None, :, :] - x[:, None, :]
            a = np.arctan2(d[..., 1], d[..., 0])
            a = np.where(np.hypot(d[..., 0], d[..., 1]) > 0, a, np.nan)
            angs.append(a)
            lev.append(np.zeros(a.shape, dtype=np.int64))
        for w, a0 in self.lines:
            base = math.atan2(w[0], -w[1])
            angs.append(np.tile([base, base + math.pi], (N, 1)))
            if decaying:
                dist = np.abs(x @ w - a0)
                lv = _levels_for(MAX_ARC / np.maximum(dist, 1e-300), max_levels, 2)
            else:
                lv = np.full(N, max_levels)
            lev.append(np.column_stack([lv, lv]))
        for c, R in self.circles:
            d = c[None, :] - x
            D = np.hypot(d[:, 0], d[:, 1])
            base = np.arctan2(d[:, 1], d[:, 0])
            outside = D > R
            with np.errstate(invalid="ignore", divide="ignore"):
                half = np.arcsin(np.clip(R / D, 0.0, 1.0))
            t1 = np.where(outside, base + half, np.nan)
            t2 = np.where(outside, base - half, np.nan)
            pk = np.where(D > 0, np.where(outside, base, base + math.pi), np.nan)
            angs.append(np.column_stack([t1, t2, pk]))
            dist = np.abs(D - R)
            lv_pk = _levels_for(MAX_ARC / np.sqrt(np.maximum(dist, 1e-300) / R), 2 * max_levels, 1)
            lev.append(np.column_stack([np.full(N, max_levels), np.full(N, max_levels), lv_pk]))
            if eps is not None:
                angs.append(_circle_circle_angles(x, eps, c, R))
                lev.append(np.zeros((N, 2), dtype=np.int64))
        if eps is not None:
            for w, a0 in self.lines:
                angs.append(_line_circle_angles(x, eps, w, a0))
                lev.append(np.zeros((N, 2), dtype=np.int64))
        if not angs:
            return np.zeros((N, 1)), np.zeros((N, 1), dtype=np.int64)
        return (np.mod(np.concatenate(angs, axis=1), 2 * math.pi),
                np.concatenate(lev, axis=1).astype(np.int64))


def _levels_for(ratio, cap, extra):
    with np.errstate(divide="ignore", invalid="ignore"):
        lv = np.ceil(np.log2(np.maximum(ratio, 1.0))) + extra
    return np.clip(np.nan_to_num(lv, nan=cap), 0, cap).astype(np.int64)


def _intersect(a, b):
    ka, A = a
    kb, B = b
    if ka == "circ" and kb != "circ":
        return _intersect(b, a)
    if ka == "circ":
        return _circ_circ(A, B)
    la = _as_line(ka, A)
    if kb == "circ":
        pts = _line_circ(la, B)
    else:
        pts = _line_line(la, _as_line(kb, B))
    out = []
    for p in pts:
        if ka == "seg" and not _on_segment(p, A):
            continue
        if kb == "seg" and not _on_segment(p, B):
            continue
        out.append(p)
    return out


def _as_line(kind, data):
    if kind == "line":
        return np.asarray(data[0], dtype=float), float(data[1])
    p, q = data
    t = q - p
    w = np.array([-t[1], t[0]]) / np.linalg.norm(t)
    return w, float(w @ p)


def _on_segment(p, seg):
    a, b = seg
    t = b - a
    u = (p - a) @ t / (t @ t)
    return -1e-12 <= u <= 1 + 1e-12


def _line_line(l1, l2):
    A = np.array([l1[0], l2[0]])
    det = np.linalg.det(A)
    if abs(det) < 1e-14:
        return []
    return [np.linalg.solve(A, np.array([l1[1], l2[1]]))]


def _line_circ(l, c):
    w, a = l
    ctr, R = c
    h = a - w @ ctr
    if abs(h) > R:
        return []
    t = np.array([-w[1], w[0]])
    m = ctr + h * w
    k = math.sqrt(max(R * R - h * h, 0.0))
    return [m + k * t, m - k * t]


def _circ_circ(c1, c2):
    p, r = c1
    q, s = c2
    d = np.linalg.norm(q - p)
    if d == 0 or d > r + s or d < abs(r - s):
        return []
    a = (r * r - s * s + d * d) / (2 * d)
    h = math.sqrt(max(r * r - a * a, 0.0))
    u = (q - p) / d
    m = p + a * u
    v = np.array([-u[1], u[0]])
    return [m + h * v, m - h * v]


def _line_circle_angles(x, eps, w, a):
    h = a - x @ w  # signed distance along w
    base = math.atan2(w[1], w[0])
    with np.errstate(invalid="ignore"):
        d = np.arccos(np.where(np.abs(h) <= eps, h / eps, np.nan))
    return np.column_stack([base + d, base - d])


def _circle_circle_angles(x, eps, c, R):
    d = c[None, :] - x
    D = np.hypot(d[:, 0], d[:, 1])
    base = np.arctan2(d[:, 1], d[:, 0])
    with np.errstate(invalid="ignore", divide="ignore"):
        cosv = (eps * eps + D * D - R * R) / (2 * eps * D)
        ok = (D > 0) & (np.abs(cosv) <= 1)
        half = np.arccos(np.where(ok, cosv, np.nan))
    return np.column_stack([base + half, base - half])


@lru_cache(maxsize=2048)
def _template(left: int, right: int, nsplit: int, order: int):
    """Unit-interval rule: ``nsplit`` panels, graded ``left``/``right`` levels at the ends."""
    edges = np.linspace(0.0, 1.0, nsplit + 1)
    pieces = []
    for i in range(nsplit):
        a, b = edges[i], edges[i + 1]
        lv_l = left if i == 0 else 0
        lv_r = right if i == nsplit - 1 else 0
        if lv_l and lv_r:
            e = np.concatenate([graded_edges(a, 0.5 * (a + b), lv_l, "left"),
                                graded_edges(0.5 * (a + b), b, lv_r, "right")[1:]])
        elif lv_l:
            e = graded_edges(a, b, lv_l, "left")
        elif lv_r:
            e = graded_edges(a, b, lv_r, "right")
        else:
            e = np.array([a, b])
        pieces.append(e if not pieces else e[1:])
    t, w = composite(np.concatenate(pieces), order)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _end_levels(base, own, other, cap):
    """Grading depth at one arc end: the breakpoint's own depth, or more when
    a much shorter neighbouring arc puts another non-smooth direction close by."""
    with np.errstate(divide="ignore"):
        near = np.ceil(np.log2(np.minimum(own, MAX_ARC) / other))
    near = np.where(np.isfinite(near), np.clip(near, 0, cap), 0)
    return np.maximum(base, near).astype(np.int64)


def arc_rule(angles: np.ndarray, levels: np.ndarray, order: int, cap: int,
             period: float = 2 * math.pi):
    """Direction nodes for each row from its breakpoints and grading depths.

    Returns ``(row, phi, weight)`` flat arrays; weights sum to ``period`` per row.
    """
    N = angles.shape[0]
    a = np.where(np.isnan(angles), np.inf, np.mod(angles, period))
    idx = np.argsort(a, axis=1, kind="stable")
    a = np.take_along_axis(a, idx, axis=1)
    k = np.take_along_axis(levels, idx, axis=1)
    count = np.isfinite(a).sum(axis=1)
    # rows without any breakpoint get a single artificial kink at 0
    empty = count == 0
    a[empty, 0] = 0.0
    k[empty, 0] = 0
    count = np.maximum(count, 1)
    last_idx = count - 1
    first = a[:, :1]
    lastv = a[np.arange(N), last_idx][:, None]
    a = np.where(np.isfinite(a), a, lastv)
    col = np.arange(a.shape[1])[None, :]
    is_last = col == last_idx[:, None]
    nxt = np.concatenate([a[:, 1:], first + period], axis=1)
    kn = np.concatenate([k[:, 1:], k[:, :1]], axis=1)
    nxt = np.where(is_last, first + period, nxt)
    kn = np.where(is_last, k[:, :1], kn)
    length = nxt - a
    keep = (length > 1e-14) & (col <= last_idx[:, None])
    rows = np.broadcast_to(np.arange(N)[:, None], a.shape)[keep]
    start, length = a[keep], length[keep]
    kl, kr = k[keep], kn[keep]
    nsplit = np.maximum(1, np.ceil(length / MAX_ARC - 1e-12)).astype(np.int64)
    # neighbouring arc lengths within the same row (cyclic)
    cnt = np.bincount(rows, minlength=N)
    first_ix = np.cumsum(cnt) - cnt
    ar = np.arange(rows.size)
    pos = ar - first_ix[rows]
    prev = np.where(pos == 0, first_ix[rows] + cnt[rows] - 1, ar - 1)
    nxt_ix = np.where(pos == cnt[rows] - 1, first_ix[rows], ar + 1)
    lv_l = _end_levels(kl, length, length[prev], cap)
    lv_r = _end_levels(kr, length, length[nxt_ix], cap)
    key = (lv_l * 64 + lv_r) * 100000 + nsplit
    out_r, out_p, out_w = [], [], []
    for kv in np.unique(key):
        sel = key == kv
        ns = int(kv % 100000)
        kk = int(kv // 100000)
        t, w = _template(kk // 64, kk % 64, ns, order)
        out_r.append(np.repeat(rows[sel], t.size))
        out_p.append((start[sel][:, None] + length[sel][:, None] * t[None, :]).ravel())
        out_w.append((length[sel][:, None] * w[None, :]).ravel())
    r = np.concatenate(out_r)
    p = np.concatenate(out_p)
    w = np.concatenate(out_w)
    order_ix = np.lexsort((p, r))
    return r[order_ix], p[order_ix], w[order_ix]


def sphere_rule(order: int, n_phi: int | None = None):
    """Gauss in cos(polar), uniform azimuth on S^2: (directions, weights)."""
    z, wz = gauss_legendre(order)
    m = n_phi or 2 * order
    phi = 2 * math.pi * (np.arange(m) + 0.5) / m
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S = np.sqrt(1 - Z ** 2)
    u = np.stack([S * np.cos(P), S * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(m, 2 * math.pi / m)).ravel()
    return u, w
