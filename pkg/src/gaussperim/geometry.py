"""Regions, exact predicates, boundary quadrature and Gaussian volumes.

Regions are open sets: points on the boundary are outside (indicator 0).
Normals always point out of the region; a complement flips them and the
sign of the mean curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np
from scipy import optimize, special

from .quad.rules import composite, gauss_legendre, graded_edges, singular_rule

UNIT_TOL = 1e-12


def _vec(v) -> tuple[float, ...]:
    t = tuple(float(c) for c in np.atleast_1d(np.asarray(v, dtype=float)))
    if not t or len(t) > 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {len(t)}")
    if not all(math.isfinite(c) for c in t):
        raise ValueError("coordinates must be finite")
    return t


@dataclass(frozen=True)
class Halfspace:
    """``{x : <x, omega> < a}`` with a unit normal ``omega``."""

    omega: tuple[float, ...]
    a: float

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec(self.omega))
        object.__setattr__(self, "a", float(self.a))
        if abs(math.sqrt(sum(c * c for c in self.omega)) - 1.0) > UNIT_TOL:
            raise ValueError("halfspace normal must have unit length")

    @classmethod
    def from_normal(cls, v, a: float = 0.0) -> "Halfspace":
        v = np.asarray(v, dtype=float)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("zero normal")
        u = v / nrm
        u = u / np.linalg.norm(u)
        return cls(tuple(u), a)

    @property
    def dim(self) -> int:
        return len(self.omega)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo))
        object.__setattr__(self, "hi", _vec(self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("box corners differ in dimension")
        if not all(l < h for l, h in zip(self.lo, self.hi)):
            raise ValueError("box requires lo < hi componentwise")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def as_polytope(self) -> "Polytope":
        hs = []
        for i in range(self.dim):
            e = [0.0] * self.dim
            e[i] = 1.0
            hs.append(Halfspace(tuple(e), self.hi[i]))
            e = [0.0] * self.dim
            e[i] = -1.0
            hs.append(Halfspace(tuple(e), -self.lo[i]))
        return Polytope(tuple(hs))


@dataclass(frozen=True)
class Polytope:
    """Intersection of finitely many halfspaces with nonempty interior."""

    halfspaces: tuple[Halfspace, ...]

    def __post_init__(self):
        hs = tuple(self.halfspaces)
        if not hs:
            raise ValueError("polytope needs at least one halfspace")
        if len({h.dim for h in hs}) != 1:
            raise ValueError("polytope halfspaces differ in dimension")
        object.__setattr__(self, "halfspaces", hs)
        if not _has_interior(hs):
            raise ValueError("polytope has empty interior")

    @property
    def dim(self) -> int:
        return self.halfspaces[0].dim


@dataclass(frozen=True)
class Complement:
    region: "Region"

    @property
    def dim(self) -> int:
        return self.region.dim


Region = Union[Halfspace, Ball, Box, Polytope, Complement]


def complement(region: Region) -> Region:
    """Complement, with ``complement(complement(R)) == R``."""
    if isinstance(region, Complement):
        return region.region
    return Complement(region)


def _has_interior(hs) -> bool:
    # maximize a common slack t: <x, w_i> + t <= a_i, t <= 1
    n = hs[0].dim
    A = np.array([list(h.omega) + [1.0] for h in hs])
    b = np.array([h.a for h in hs])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = optimize.linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    return res.status == 0 and -res.fun > 1e-12


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class DomainBox:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        box = Box(self.lo, self.hi)
        object.__setattr__(self, "lo", box.lo)
        object.__setattr__(self, "hi", box.hi)

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class DomainBall:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        ball = Ball(self.center, self.radius)
        object.__setattr__(self, "center", ball.center)
        object.__setattr__(self, "radius", ball.radius)

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class FullSpace:
    """All of R^n; integrals are truncated to ``|x| <= truncation_radius``."""

    truncation_radius: float = 8.0

    def __post_init__(self):
        object.__setattr__(self, "truncation_radius", float(self.truncation_radius))
        if not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")


DomainSpec = Union[DomainBox, DomainBall, FullSpace]


def unit_cube(n: int) -> DomainBox:
    """The window ``(-1/2, 1/2)^n``."""
    return DomainBox((-0.5,) * n, (0.5,) * n)


def domain_region(domain: DomainSpec, n: int, radius: float | None = None) -> Region:
    """The domain as a bounded region; FullSpace becomes a centered ball."""
    if isinstance(domain, DomainBox):
        return Box(domain.lo, domain.hi)
    if isinstance(domain, DomainBall):
        return Ball(domain.center, domain.radius)
    r = domain.truncation_radius if radius is None else radius
    return Ball((0.0,) * n, r)


def region_dim(region: Region) -> int:
    return region.dim


# ---------------------------------------------------------------- predicates


def _points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != n:
        raise ValueError(f"dimension mismatch: point has {x.shape[-1]} coords, region has {n}")
    return x


def signed_distance(region: Region, x) -> np.ndarray:
    """Negative inside. Exact for halfspaces, balls and boxes; for general
    polytopes it is the max over faces (exact sign, distance a lower bound)."""
    n = region.dim
    x = _points(x, n)
    if isinstance(region, Halfspace):
        return x @ np.asarray(region.omega) - region.a
    if isinstance(region, Ball):
        return np.linalg.norm(x - np.asarray(region.center), axis=-1) - region.radius
    if isinstance(region, Box):
        lo, hi = np.asarray(region.lo), np.asarray(region.hi)
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        q = np.abs(x - c) - h
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside
    if isinstance(region, Polytope):
        return np.max(np.stack([signed_distance(h, x) for h in region.halfspaces]), axis=0)
    if isinstance(region, Complement):
        return -signed_distance(region.region, x)
    raise TypeError(f"unknown region {region!r}")


def indicator(region: Region, x) -> np.ndarray:
    """1 on the open region, 0 elsewhere (boundary included)."""
    n = region.dim
    x = _points(x, n)
    if isinstance(region, Complement):
        inner = region.region
        on = np.abs(signed_distance(inner, x)) == 0.0
        return np.where(on, 0, 1 - indicator(inner, x)).astype(np.int8)
    return (signed_distance(region, x) < 0.0).astype(np.int8)


def on_boundary(region: Region, x, tol: float = 1e-10) -> np.ndarray:
    return np.abs(signed_distance(region, x)) <= tol


# ---------------------------------------------------------------- rays


def _convex_interval(region: Region, x: np.ndarray, th: np.ndarray):
    """Parameter interval [lo, hi] of ``r >= 0`` with ``x + r th`` in a convex region."""
    N = x.shape[0]
    if isinstance(region, Halfspace):
        w = np.asarray(region.omega)
        g = region.a - x @ w
        c = th @ w
        with np.errstate(divide="ignore", invalid="ignore"):
            t = g / c
        lo = np.where(c < 0, np.maximum(t, 0.0), 0.0)
        hi = np.where(c > 0, t, np.inf)
        flat = c == 0
        lo = np.where(flat, 0.0, lo)
        hi = np.where(flat, np.where(g > 0, np.inf, 0.0), hi)
        return lo, hi
    if isinstance(region, Ball):
        d = x - np.asarray(region.center)
        B = np.einsum("ij,ij->i", th, d)
        C = np.einsum("ij,ij->i", d, d) - region.radius ** 2
        disc = B * B - C
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.maximum(-B - root, 0.0)
        hi = np.where(disc > 0, -B + root, 0.0)
        return lo, hi
    if isinstance(region, Box):
        lo_b, hi_b = np.asarray(region.lo), np.asarray(region.hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo_b[None, :] - x) / th
            t2 = (hi_b[None, :] - x) / th
        tmin = np.minimum(t1, t2)
        tmax = np.maximum(t1, t2)
        flat = th == 0
        inside = (x > lo_b) & (x < hi_b)
        tmin = np.where(flat, np.where(inside, -np.inf, np.inf), tmin)
        tmax = np.where(flat, np.where(inside, np.inf, -np.inf), tmax)
        return np.maximum(tmin.max(axis=1), 0.0), tmax.min(axis=1)
    if isinstance(region, Polytope):
        lo = np.zeros(N)
        hi = np.full(N, np.inf)
        for h in region.halfspaces:
            l2, h2 = _convex_interval(h, x, th)
            lo = np.maximum(lo, l2)
            hi = np.minimum(hi, h2)
        return lo, hi
    raise TypeError(f"not a convex region: {region!r}")


def ray_intervals(factors, x, th):
    """Intervals of ``r >= 0`` where ``x + r th`` lies in an intersection of sets.

    ``factors`` is a sequence of regions (complements allowed, each wrapping a
    convex region). Returns ``(lo, hi)`` of shape ``(K, N)``; empty intervals
    have ``lo >= hi``. The intervals for one ray are pairwise disjoint.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    th = np.atleast_2d(np.asarray(th, dtype=float))
    N = max(x.shape[0], th.shape[0])
    x = np.broadcast_to(x, (N, x.shape[1]))
    th = np.broadcast_to(th, (N, th.shape[1]))
    los = [np.zeros(N)]
    his = [np.full(N, np.inf)]
    for reg in factors:
        flip = False
        while isinstance(reg, Complement):
            reg = reg.region
            flip = not flip
        lo, hi = _convex_interval(reg, x, th)
        if flip:
            empty = ~(hi > lo)
            parts = [(np.zeros(N), np.where(empty, np.inf, lo)),
                     (np.where(empty, np.inf, hi), np.full(N, np.inf))]
        else:
            parts = [(lo, hi)]
        new_lo, new_hi = [], []
        for a_lo, a_hi in zip(los, his):
            for b_lo, b_hi in parts:
                new_lo.append(np.maximum(a_lo, b_lo))
                new_hi.append(np.minimum(a_hi, b_hi))
        keep = [i for i in range(len(new_lo)) if np.any(new_hi[i] > new_lo[i])]
        if not keep:
            keep = [0]
        los = [new_lo[i] for i in keep]
        his = [new_hi[i] for i in keep]
    return np.stack(los), np.stack(his)


# ---------------------------------------------------------------- curves (n = 2)


def boundary_curves(region: Region) -> tuple[list, list, list]:
    """Planar boundary pieces: (segments, lines, circles).

    Segments are ``(p, q)`` endpoint pairs, lines ``(omega, a)`` and circles
    ``(center, radius)``. Used to place angular breakpoints.
    """
    while isinstance(region, Complement):
        region = region.region
    if isinstance(region, Halfspace):
        return [], [(np.asarray(region.omega), region.a)], []
    if isinstance(region, Ball):
        return [], [], [(np.asarray(region.center), region.radius)]
    if isinstance(region, Box):
        lo, hi = region.lo, region.hi
        c = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
             np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
        return [(c[i], c[(i + 1) % 4]) for i in range(4)], [], []
    if isinstance(region, Polytope):
        return [], [(np.asarray(h.omega), h.a) for h in region.halfspaces], []
    raise TypeError(region)


# ---------------------------------------------------------------- boundary rules


@dataclass(frozen=True)
class BoundarySample:
    point: np.ndarray
    normal: np.ndarray
    weight: float
    curvature: float


@dataclass(frozen=True)
class BoundaryRule:
    """Quadrature on a boundary piece: points, outward normals, weights, mean curvature."""

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    curvature: np.ndarray
    dim: int = 0

    def __post_init__(self):
        for name in ("points", "normals", "weights", "curvature"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.points.ndim == 1:
            object.__setattr__(self, "points", self.points.reshape(-1, max(self.dim, 1)))
        if self.normals.ndim == 1:
            object.__setattr__(self, "normals", self.normals.reshape(-1, max(self.dim, 1)))
        object.__setattr__(self, "dim", self.points.shape[1])

    def __len__(self) -> int:
        return self.weights.size

    def __iter__(self) -> Iterator[BoundarySample]:
        for i in range(len(self)):
            yield BoundarySample(self.points[i], self.normals[i], float(self.weights[i]),
                                 float(self.curvature[i]))

    def total(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def empty(cls, n: int) -> "BoundaryRule":
        return cls(np.empty((0, n)), np.empty((0, n)), np.empty(0), np.empty(0), n)

    @classmethod
    def concat(cls, rules, n: int) -> "BoundaryRule":
        rules = [r for r in rules if len(r)]
        if not rules:
            return cls.empty(n)
        return cls(np.concatenate([r.points for r in rules]),
                   np.concatenate([r.normals for r in rules]),
                   np.concatenate([r.weights for r in rules]),
                   np.concatenate([r.curvature for r in rules]), n)


def _perp2(w):
    return np.array([-w[1], w[0]])


def _plane_basis(w):
    w = np.asarray(w, dtype=float)
    k = int(np.argmin(np.abs(w)))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = e - (e @ w) * w
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(w, t1)
    return t1, t2


def _linear_constraints(domain_reg, extra):
    """Halfspace list for a box domain plus any extra halfspaces."""
    hs = list(extra)
    if isinstance(domain_reg, Box):
        hs += list(domain_reg.as_polytope().halfspaces)
    return hs


def _clip_line_param(p0, t, halfspaces, ball):
    """Interval of ``xi`` with ``p0 + xi t`` inside all halfspaces and the ball."""
    lo, hi = -np.inf, np.inf
    for h in halfspaces:
        w = np.asarray(h.omega)
        c = t @ w
        g = h.a - p0 @ w
        if abs(c) < 1e-300:
            if g <= 0:
                return None
            continue
        if c > 0:
            hi = min(hi, g / c)
        else:
            lo = max(lo, g / c)
    if ball is not None:
        d = p0 - np.asarray(ball.center)
        B = t @ d
        C = d @ d - ball.radius ** 2
        disc = B * B - C
        if disc <= 0:
            return None
        r = math.sqrt(disc)
        lo, hi = max(lo, -B - r), min(hi, -B + r)
    if not hi > lo:
        return None
    return lo, hi


def _segment_nodes(lo, hi, order, panels, grade, grade_lo, grade_hi, max_width=None):
    m = max(1, int(panels))
    if max_width is not None:
        m = max(m, int(math.ceil((hi - lo) / max_width - 1e-12)))
    edges = np.linspace(lo, hi, m + 1)
    if grade > 0 and (grade_lo or grade_hi):
        pieces = []
        for i in range(m):
            a, b = edges[i], edges[i + 1]
            toward = None
            if i == 0 and grade_lo and i == m - 1 and grade_hi:
                toward = "both"
            elif i == 0 and grade_lo:
                toward = "left"
            elif i == m - 1 and grade_hi:
                toward = "right"
            e = graded_edges(a, b, grade, toward) if toward else np.array([a, b])
            pieces.append(e if not pieces else e[1:])
        edges = np.concatenate(pieces)
    return composite(edges, order)


def _flat_piece(w, a, domain_reg, extra, order, panels, grade, max_width=None):
    """Rule on ``{<x, w> = a}`` clipped to the domain and extra halfspaces."""
    n = w.size
    ball = domain_reg if isinstance(domain_reg, Ball) else None
    hard = not getattr(domain_reg, "_soft", False)
    hs = _linear_constraints(domain_reg, extra)
    p0 = a * w
    if n == 1:
        x = p0.reshape(1, 1)
        ok = True
        for h in hs:
            ok &= float(x[0] @ np.asarray(h.omega)) < h.a
        if ball is not None:
            ok &= abs(x[0, 0] - ball.center[0]) < ball.radius
        if not ok:
            return np.empty((0, 1)), np.empty(0)
        return x, np.ones(1)
    if n == 2:
        t = _perp2(w)
        iv = _clip_line_param(p0, t, hs, ball)
        if iv is None:
            return np.empty((0, 2)), np.empty(0)
        xi, wt = _segment_nodes(iv[0], iv[1], order, panels, grade if hard else 0,
                                True, True, max_width)
        return p0[None, :] + xi[:, None] * t[None, :], wt
    t1, t2 = _plane_basis(w)
    if ball is not None and not hs:
        c = np.asarray(ball.center)
        q = c - (c @ w - a) * w
        h2 = ball.radius ** 2 - np.sum((q - c) ** 2)
        if h2 <= 0:
            return np.empty((0, 3)), np.empty(0)
        return _disk_rule(q, t1, t2, math.sqrt(h2), order, panels)
    L = 1e3 if ball is None else ball.radius * 2 + np.linalg.norm(ball.center) + abs(a)
    poly = np.array([[-L, -L], [L, -L], [L, L], [-L, L]], dtype=float)
    for h in hs:
        hw = np.asarray(h.omega)
        poly = _clip_polygon(poly, np.array([t1 @ hw, t2 @ hw]), h.a - p0 @ hw)
        if poly.shape[0] < 3:
            return np.empty((0, 3)), np.empty(0)
    uv, wt = _polygon_rule(poly, order)
    pts = p0[None, :] + uv[:, :1] * t1[None, :] + uv[:, 1:] * t2[None, :]
    if ball is not None:
        keep = np.linalg.norm(pts - np.asarray(ball.center), axis=1) < ball.radius
        pts, wt = pts[keep], wt[keep]
    return pts, wt


def _clip_polygon(poly, w, a):
    """Sutherland-Hodgman clip of a convex polygon to ``<u, w> <= a``."""
    out = []
    m = poly.shape[0]
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp, fq = p @ w - a, q @ w - a
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + (q - p) * (fp / (fp - fq)))
    return np.array(out) if out else np.empty((0, 2))


def _polygon_rule(poly, order):
    """Collapsed Gauss-Legendre on a fan triangulation."""
    x, w = gauss_legendre(order)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU = np.outer(wu, wu)
    pts, wts = [], []
    A = poly[0]
    for i in range(1, poly.shape[0] - 1):
        B, C = poly[i], poly[i + 1]
        area2 = abs((B - A)[0] * (C - A)[1] - (B - A)[1] * (C - A)[0])
        P = A[None, None, :] + U[..., None] * ((B - A)[None, None, :]
                                              + V[..., None] * (C - B)[None, None, :])
        pts.append(P.reshape(-1, 2))
        wts.append((WU * U * area2).ravel())
    if not pts:
        return np.empty((0, 2)), np.empty(0)
    return np.concatenate(pts), np.concatenate(wts)


def _disk_rule(q, t1, t2, rad, order, panels):
    r, wr = composite(np.linspace(0.0, rad, max(1, panels) + 1), order)
    m = 2 * order * max(1, panels)
    phi = 2 * np.pi * np.arange(m) / m
    R, P = np.meshgrid(r, phi, indexing="ij")
    W = np.outer(wr * r, np.full(m, 2 * np.pi / m))
    pts = (q[None, :] + (R * np.cos(P)).reshape(-1, 1) * t1[None, :]
           + (R * np.sin(P)).reshape(-1, 1) * t2[None, :])
    return pts, W.ravel()


def _circle_cut_angles(c, rad, domain_reg, extra):
    angs = []
    cands = []
    if isinstance(domain_reg, Box):
        for h in domain_reg.as_polytope().halfspaces:
            cands.append(h)
    cands += list(extra)
    for h in cands:
        w = np.asarray(h.omega)
        # <c + rad (cos, sin), w> = a
        g = (h.a - c @ w) / rad
        if abs(g) < 1.0:
            base = math.atan2(w[1], w[0])
            d = math.acos(g)
            angs += [base + d, base - d]
    if isinstance(domain_reg, Ball):
        c2 = np.asarray(domain_reg.center)
        D = np.linalg.norm(c2 - c)
        R2 = domain_reg.radius
        if D > 0 and abs(rad - R2) < D < rad + R2:
            base = math.atan2(*(c2 - c)[::-1])
            cosv = (rad ** 2 + D ** 2 - R2 ** 2) / (2 * rad * D)
            d = math.acos(max(-1.0, min(1.0, cosv)))
            angs += [base + d, base - d]
    return sorted(a % (2 * np.pi) for a in angs)


def _inside_all(pts, domain_reg, extra):
    ok = np.ones(pts.shape[0], dtype=bool)
    if domain_reg is not None:
        ok &= signed_distance(domain_reg, pts) < 0
    for h in extra:
        ok &= signed_distance(h, pts) < 0
    return ok


def _circle_piece(c, rad, domain_reg, extra, order, panels, grade, full_nodes=None):
    """Rule on the circle ``|x - c| = rad`` inside the domain (n = 2)."""
    angs = _circle_cut_angles(c, rad, domain_reg, extra)
    hard = not getattr(domain_reg, "_soft", False)
    if not angs:
        mid = c + rad * np.array([1.0, 0.0])
        if not _inside_all(mid[None, :], domain_reg, extra)[0]:
            return np.empty((0, 2)), np.empty(0), np.empty((0, 2))
        m = full_nodes or 2 * order * max(1, panels)
        phi = 2 * np.pi * np.arange(m) / m
        u = np.column_stack([np.cos(phi), np.sin(phi)])
        return c + rad * u, np.full(m, 2 * np.pi * rad / m), u
    angs = angs + [angs[0] + 2 * np.pi]
    all_phi, all_w = [], []
    for a0, a1 in zip(angs[:-1], angs[1:]):
        if a1 - a0 < 1e-15:
            continue
        mid = 0.5 * (a0 + a1)
        pm = c + rad * np.array([math.cos(mid), math.sin(mid)])
        if not _inside_all(pm[None, :], domain_reg, extra)[0]:
            continue
        phi, wphi = _segment_nodes(a0, a1, order, panels, grade if hard else 0, True, True,
                                   max_width=np.pi / 4)
        all_phi.append(phi)
        all_w.append(wphi * rad)
    if not all_phi:
        return np.empty((0, 2)), np.empty(0), np.empty((0, 2))
    phi = np.concatenate(all_phi)
    u = np.column_stack([np.cos(phi), np.sin(phi)])
    return c + rad * u, np.concatenate(all_w), u


def _sphere_piece(c, rad, domain_reg, order, panels):
    """Equal-area rule (Gauss in z, uniform azimuth) on a 2-sphere; nodes
    outside the domain are dropped."""
    z, wz = composite(np.linspace(-1.0, 1.0, max(1, panels) + 1), order)
    m = 2 * order * max(1, panels)
    phi = 2 * np.pi * (np.arange(m) + 0.5) / m
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S = np.sqrt(1 - Z ** 2)
    u = np.stack([S * np.cos(P), S * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(m, 2 * np.pi / m)).ravel() * rad ** 2
    pts = c + rad * u
    keep = _inside_all(pts, domain_reg, [])
    return pts[keep], w[keep], u[keep]


def _soft_ball(center, radius):
    b = Ball(center, radius)
    object.__setattr__(b, "_soft", True)
    return b


def _domain_for_rules(domain: DomainSpec, n: int, radius=None):
    reg = domain_region(domain, n, radius)
    if isinstance(domain, FullSpace):
        object.__setattr__(reg, "_soft", True)
    return reg


def _primitive_rule(prim, domain_reg, extra, order, panels, grade, flip, full_nodes=None):
    n = prim.dim
    sign = -1.0 if flip else 1.0
    if isinstance(prim, Halfspace):
        w = np.asarray(prim.omega)
        pts, wt = _flat_piece(w, prim.a, domain_reg, extra, order, panels, grade)
        nrm = np.tile(sign * w, (len(wt), 1))
        return BoundaryRule(pts, nrm, wt, np.zeros(len(wt)), n)
    if isinstance(prim, Ball):
        c = np.asarray(prim.center)
        H = sign * (n - 1) / prim.radius
        if n == 1:
            pts = np.array([[c[0] - prim.radius], [c[0] + prim.radius]])
            u = np.array([[-1.0], [1.0]])
            keep = _inside_all(pts, domain_reg, extra)
            return BoundaryRule(pts[keep], sign * u[keep], np.ones(keep.sum()),
                                np.full(keep.sum(), H), n)
        if n == 2:
            pts, wt, u = _circle_piece(c, prim.radius, domain_reg, extra, order, panels, grade,
                                       full_nodes)
        else:
            pts, wt, u = _sphere_piece(c, prim.radius, domain_reg, order, panels)
        return BoundaryRule(pts, sign * u, wt, np.full(len(wt), H), n)
    raise TypeError(prim)


def boundary_quadrature(region: Region, domain: DomainSpec, resolution: int,
                        panels: int = 1, grade: int = 0) -> BoundaryRule:
    """Quadrature on ``boundary(region) ∩ domain``.

    Flat faces get Gauss-Legendre with ``resolution`` nodes per panel; a full
    circle gets ``resolution * panels`` equispaced nodes (exact for
    trigonometric polynomials), a sphere a Gauss-in-z, uniform-azimuth rule.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    n = region.dim
    dom = _domain_for_rules(domain, n)
    flip = False
    reg = region
    while isinstance(reg, Complement):
        reg = reg.region
        flip = not flip
    if isinstance(reg, Box):
        reg = reg.as_polytope()
    if isinstance(reg, (Halfspace, Ball)):
        full = resolution * max(1, panels) if isinstance(reg, Ball) else None
        return _primitive_rule(reg, dom, [], resolution, panels, grade, flip, full)
    if isinstance(reg, Polytope):
        rules = []
        hs = reg.halfspaces
        for i, h in enumerate(hs):
            others = [g for j, g in enumerate(hs) if j != i]
            rules.append(_primitive_rule(h, dom, others, resolution, panels, grade, flip))
        return BoundaryRule.concat(rules, n)
    raise TypeError(f"unsupported region for boundary quadrature: {region!r}")


# ---------------------------------------------------------------- tube (coarea) rules


@dataclass(frozen=True)
class TubeRule:
    """Volume rule for ``A ∩ domain`` organised by depth below ``boundary(A)``."""

    points: np.ndarray
    weights: np.ndarray
    depth: np.ndarray


def _canonical_primitive(region: Region):
    """Return (kind, data) with kind in {'half', 'ball_in', 'ball_out'}."""
    flip = False
    reg = region
    while isinstance(reg, Complement):
        reg = reg.region
        flip = not flip
    if isinstance(reg, Halfspace):
        if flip:
            return "half", Halfspace(tuple(-c for c in reg.omega), -reg.a)
        return "half", reg
    if isinstance(reg, Ball):
        return ("ball_out" if flip else "ball_in"), reg
    raise TypeError(f"tube rules need a halfspace or ball (or complement), got {region!r}")


def _domain_extent(dom, n):
    """Corner list (box) or (center, radius) (ball)."""
    if isinstance(dom, Box):
        lo, hi = np.asarray(dom.lo), np.asarray(dom.hi)
        grids = np.array(np.meshgrid(*[[lo[i], hi[i]] for i in range(n)], indexing="ij"))
        return grids.reshape(n, -1).T, None
    return None, (np.asarray(dom.center), dom.radius)


def _depth_range(kind, prim, dom, n):
    corners, ball = _domain_extent(dom, n)
    breaks = []
    if kind == "half":
        w = np.asarray(prim.omega)
        if corners is not None:
            dep = prim.a - corners @ w
            breaks = list(dep)
            lo, hi = dep.min(), dep.max()
        else:
            c, R = ball
            lo, hi = prim.a - c @ w - R, prim.a - c @ w + R
        return max(lo, 0.0), hi, breaks
    c = np.asarray(prim.center)
    if corners is not None:
        lo_b, hi_b = np.asarray(dom.lo), np.asarray(dom.hi)
        rmax = np.max(np.linalg.norm(corners - c, axis=1))
        rmin = np.linalg.norm(np.maximum(np.maximum(lo_b - c, c - hi_b), 0.0))
        radii = list(np.linalg.norm(corners - c, axis=1))
        radii += list(np.abs(lo_b - c)) + list(np.abs(hi_b - c))
    else:
        c2, R2 = ball
        D = np.linalg.norm(c2 - c)
        rmax, rmin = D + R2, max(D - R2, 0.0)
        radii = [abs(D - R2), D + R2]
    R = prim.radius
    if kind == "ball_in":
        lo, hi = max(R - rmax, 0.0), min(R - rmin, R)
        breaks = [R - r for r in radii]
    else:
        lo, hi = max(rmin - R, 0.0), rmax - R
        breaks = [r - R for r in radii]
    return lo, hi, breaks


# panel width for integrands carrying a unit-scale Gaussian factor
GAUSS_PANEL = 2.0


def tube_rule(region: Region, domain: DomainSpec, order: int, levels: int, beta: float,
              tangential_grade: int = 0, truncation: float | None = None) -> TubeRule:
    """Quadrature for ``region ∩ domain`` in depth/level-set coordinates.

    Depth ``d`` is the distance below the boundary of ``region``. Near
    ``d = 0`` the integrand may behave like ``d**beta``; the depth rule
    grades toward 0 and closes with Gauss-Jacobi. Level sets are planes or
    spheres clipped exactly against the domain.
    """
    kind, prim = _canonical_primitive(region)
    n = prim.dim
    dom = _domain_for_rules(domain, n, truncation)
    d_lo, d_hi, breaks = _depth_range(kind, prim, dom, n)
    if kind == "ball_in":
        d_hi = min(d_hi, prim.radius)
    if not d_hi > d_lo:
        return TubeRule(np.empty((0, n)), np.empty(0), np.empty(0))
    scale = d_hi - d_lo
    cuts = sorted({b for b in breaks if d_lo + 1e-12 * scale < b < d_hi - 1e-12 * scale})
    edges = [d_lo] + cuts + [d_hi]
    dd, wd = [], []
    gauss_scale = isinstance(domain, FullSpace)
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if i == 0 and d_lo == 0.0:
            first = min(b, 1.0) if gauss_scale else b
            x, w = singular_rule(a, first, beta, order, levels, "left")
            dd.append(x)
            wd.append(w)
            if first < b:
                x, w = _segment_nodes(first, b, order, 1, 0, False, False, max_width=GAUSS_PANEL)
                dd.append(x)
                wd.append(w)
            continue
        mw = GAUSS_PANEL if gauss_scale else None
        x, w = _segment_nodes(a, b, order, 1, 3, True, True, max_width=mw)
        dd.append(x)
        wd.append(w)
    dd = np.concatenate(dd)
    wd = np.concatenate(wd)

    pts_all, w_all, d_all = [], [], []
    c = np.asarray(prim.center) if kind != "half" else None
    for d, w in zip(dd, wd):
        grade = 0
        if tangential_grade and d > 0:
            grade = int(min(tangential_grade, max(0, math.ceil(math.log2(max(scale / d, 1.0))))))
        if kind == "half":
            wv = np.asarray(prim.omega)
            mw = GAUSS_PANEL if gauss_scale else None
            pts, wt = _flat_piece(wv, prim.a - d, dom, [], order, 1, grade, max_width=mw)
        else:
            rad = prim.radius - d if kind == "ball_in" else prim.radius + d
            if rad <= 0:
                continue
            if n == 1:
                pts = np.array([[c[0] - rad], [c[0] + rad]])
                keep = _inside_all(pts, dom, [])
                pts, wt = pts[keep], np.ones(keep.sum())
            elif n == 2:
                panels = max(1, int(math.ceil(rad / GAUSS_PANEL))) if gauss_scale else 1
                pts, wt, _ = _circle_piece(c, rad, dom, [], order, panels, grade)
            else:
                pts, wt, _ = _sphere_piece(c, rad, dom, order, 1)
        if len(wt):
            pts_all.append(pts)
            w_all.append(wt * w)
            d_all.append(np.full(len(wt), d))
    if not pts_all:
        return TubeRule(np.empty((0, n)), np.empty(0), np.empty(0))
    return TubeRule(np.concatenate(pts_all), np.concatenate(w_all), np.concatenate(d_all))


# ---------------------------------------------------------------- Gaussian volumes


def halfspace_gaussian_measure(a: float) -> float:
    """Standard Gaussian measure of ``{<x, omega> < a}``: the normal CDF at ``a``."""
    return float(special.ndtr(a))


def gaussian_volume(region: Region, domain: DomainSpec, spec=None):
    """``int_{region ∩ domain} exp(-|x|^2 / 2) dx`` (unnormalized).

    Halfspaces, balls and their complements use depth/level-set coordinates
    with exact clipping; other regions go through adaptive cell quadrature.
    Returns an ``IntegralResult``.
    """
    from .quad.integrate import IntegralResult, QuadSpec, integrate_region, gaussian_tail_bound

    spec = spec or QuadSpec()
    n = region.dim
    f = lambda x: np.exp(-0.5 * np.sum(x * x, axis=-1))
    try:
        _canonical_primitive(region)
    except TypeError:
        return integrate_region(f, domain, spec, region=region, n=n)
    results = []
    for order in (spec.gl_order, spec.gl_order + 4):
        rule = tube_rule(region, domain, order, 0, 0.0)
        results.append(float(np.sum(f(rule.points) * rule.weights)) if len(rule.weights) else 0.0)
    tail = 0.0
    if isinstance(domain, FullSpace):
        tail = gaussian_tail_bound(n, domain.truncation_radius, rate=0.5)
    err = abs(results[1] - results[0]) + tail
    return IntegralResult(results[1], err, len(results), "deterministic")


# ---------------------------------------------------------------- boundary flow


def _tangent_frame(nu: np.ndarray) -> np.ndarray:
    """Orthonormal tangent vectors, shape (N, n-1, n)."""
    N, n = nu.shape
    if n == 1:
        return np.zeros((N, 0, 1))
    if n == 2:
        return np.stack([-nu[:, 1], nu[:, 0]], axis=1)[:, None, :]
    T = np.empty((N, 2, 3))
    for i in range(N):
        T[i] = np.array(_plane_basis(nu[i]))
    return T


def _normal_from_frame(T: np.ndarray, ref: np.ndarray) -> np.ndarray:
    N, k, n = T.shape
    if n == 1:
        return ref.copy()
    if n == 2:
        nu = np.stack([T[:, 0, 1], -T[:, 0, 0]], axis=1)
    else:
        nu = np.cross(T[:, 0], T[:, 1])
    nu /= np.linalg.norm(nu, axis=1, keepdims=True)
    sign = np.sign(np.einsum("ij,ij->i", nu, ref))
    return nu * np.where(sign == 0, 1.0, sign)[:, None]


def _frame_area(T: np.ndarray) -> np.ndarray:
    if T.shape[1] == 0:
        return np.ones(T.shape[0])
    G = np.einsum("nai,nbi->nab", T, T)
    return np.sqrt(np.linalg.det(G))


def flow_boundary(samples: BoundaryRule, field, t: float, steps: int = 16,
                  region: Region | None = None, radius: float = 8.0) -> BoundaryRule:
    """Advance boundary samples along ``dx/dt = X(x)`` for time ``t``.

    Points and a tangent frame (``dT/dt = DX T``) are integrated with classical
    RK4. Normals come from the transported frame, weights from its area
    ratio. Translation keeps the mean curvature, scaling divides it by
    ``e^t``; other flows carry it unchanged (it is not recomputed).
    """
    from .fields import Constant, Scaling, evaluate_field, field_jacobian

    if steps < 1:
        raise ValueError("steps must be >= 1")
    if len(samples) == 0 or t == 0.0:
        return samples
    n = samples.dim
    x = np.array(samples.points)
    T = _tangent_frame(np.array(samples.normals))
    h = t / steps

    def rhs(x, T):
        X = evaluate_field(field, x, region, radius)
        if T.shape[1] == 0:
            return X, T
        J = field_jacobian(field, x, region, radius)
        return X, np.einsum("nij,nkj->nki", J, T)

    for _ in range(steps):
        k1x, k1T = rhs(x, T)
        k2x, k2T = rhs(x + 0.5 * h * k1x, T + 0.5 * h * k1T)
        k3x, k3T = rhs(x + 0.5 * h * k2x, T + 0.5 * h * k2T)
        k4x, k4T = rhs(x + h * k3x, T + h * k3T)
        x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        T = T + h / 6.0 * (k1T + 2 * k2T + 2 * k3T + k4T)
    if not np.all(np.isfinite(x)):
        raise ValueError("flow produced non-finite points")
    nu = _normal_from_frame(T, np.array(samples.normals))
    w = np.array(samples.weights) * _frame_area(T)
    H = np.array(samples.curvature)
    if isinstance(field, Scaling):
        H = H * math.exp(-t)
    elif not isinstance(field, Constant):
        H = H.copy()
    return BoundaryRule(x, nu, w, H, n)


# ---------------------------------------------------------------- config serialization


def region_to_dict(region: Region) -> dict:
    if isinstance(region, Halfspace):
        return {"type": "halfspace", "omega": list(region.omega), "a": region.a}
    if isinstance(region, Ball):
        return {"type": "ball", "center": list(region.center), "radius": region.radius}
    if isinstance(region, Box):
        return {"type": "box", "lo": list(region.lo), "hi": list(region.hi)}
    if isinstance(region, Polytope):
        return {"type": "polytope", "halfspaces": [region_to_dict(h) for h in region.halfspaces]}
    if isinstance(region, Complement):
        return {"type": "complement", "region": region_to_dict(region.region)}
    raise TypeError(f"unknown region {region!r}")


def region_from_dict(d: dict) -> Region:
    kind = str(d.get("type", "")).lower()
    if kind == "halfspace":
        return Halfspace(tuple(d["omega"]), float(d["a"]))
    if kind == "ball":
        return Ball(tuple(d["center"]), float(d["radius"]))
    if kind == "box":
        return Box(tuple(d["lo"]), tuple(d["hi"]))
    if kind == "polytope":
        return Polytope(tuple(region_from_dict(h) for h in d["halfspaces"]))
    if kind == "complement":
        return complement(region_from_dict(d["region"]))
    raise ValueError(f"unknown region type {kind!r}")


def domain_to_dict(domain: DomainSpec) -> dict:
    if isinstance(domain, DomainBox):
        return {"type": "box", "lo": list(domain.lo), "hi": list(domain.hi)}
    if isinstance(domain, DomainBall):
        return {"type": "ball", "center": list(domain.center), "radius": domain.radius}
    if isinstance(domain, FullSpace):
        return {"type": "fullspace", "truncation_radius": domain.truncation_radius}
    raise TypeError(f"unknown domain {domain!r}")


def domain_from_dict(d: dict) -> DomainSpec:
    kind = str(d.get("type", "")).lower()
    if kind == "box":
        return DomainBox(tuple(d["lo"]), tuple(d["hi"]))
    if kind == "cube":
        return unit_cube(int(d["dim"]))
    if kind == "ball":
        return DomainBall(tuple(d["center"]), float(d["radius"]))
    if kind == "fullspace":
        return FullSpace(float(d.get("truncation_radius", 8.0)))
    raise ValueError(f"unknown domain type {kind!r}")


# ---------------------------------------------------------------- rigid motions and dilations


def scale_region(region: Region, lam: float) -> Region:
    """``lam * region`` for ``lam > 0``."""
    if not lam > 0:
        raise ValueError("scale factor must be positive")
    if isinstance(region, Halfspace):
        return Halfspace(region.omega, lam * region.a)
    if isinstance(region, Ball):
        return Ball(tuple(lam * c for c in region.center), lam * region.radius)
    if isinstance(region, Box):
        return Box(tuple(lam * c for c in region.lo), tuple(lam * c for c in region.hi))
    if isinstance(region, Polytope):
        return Polytope(tuple(scale_region(h, lam) for h in region.halfspaces))
    if isinstance(region, Complement):
        return Complement(scale_region(region.region, lam))
    raise TypeError(f"unknown region {region!r}")


def translate_region(region: Region, v) -> Region:
    """``region + v``."""
    v = np.asarray(v, dtype=float)
    if isinstance(region, Halfspace):
        return Halfspace(region.omega, region.a + float(np.dot(region.omega, v)))
    if isinstance(region, Ball):
        return Ball(tuple(np.asarray(region.center) + v), region.radius)
    if isinstance(region, Box):
        return Box(tuple(np.asarray(region.lo) + v), tuple(np.asarray(region.hi) + v))
    if isinstance(region, Polytope):
        return Polytope(tuple(translate_region(h, v) for h in region.halfspaces))
    if isinstance(region, Complement):
        return Complement(translate_region(region.region, v))
    raise TypeError(f"unknown region {region!r}")


def rotate_region(region: Region, R) -> Region:
    """``R region`` for an orthogonal matrix ``R``; boxes become polytopes."""
    R = np.asarray(R, dtype=float)
    if isinstance(region, Halfspace):
        return Halfspace(tuple(R @ np.asarray(region.omega)), region.a)
    if isinstance(region, Ball):
        return Ball(tuple(R @ np.asarray(region.center)), region.radius)
    if isinstance(region, Box):
        return rotate_region(region.as_polytope(), R)
    if isinstance(region, Polytope):
        return Polytope(tuple(rotate_region(h, R) for h in region.halfspaces))
    if isinstance(region, Complement):
        return Complement(rotate_region(region.region, R))
    raise TypeError(f"unknown region {region!r}")


def scale_domain(domain: DomainSpec, lam: float) -> DomainSpec:
    if isinstance(domain, DomainBox):
        return DomainBox(tuple(lam * c for c in domain.lo), tuple(lam * c for c in domain.hi))
    if isinstance(domain, DomainBall):
        return DomainBall(tuple(lam * c for c in domain.center), lam * domain.radius)
    return domain


def translate_domain(domain: DomainSpec, v) -> DomainSpec:
    v = np.asarray(v, dtype=float)
    if isinstance(domain, DomainBox):
        return DomainBox(tuple(np.asarray(domain.lo) + v), tuple(np.asarray(domain.hi) + v))
    if isinstance(domain, DomainBall):
        return DomainBall(tuple(np.asarray(domain.center) + v), domain.radius)
    raise ValueError("FullSpace is translation invariant only in the Euclidean sense")


def rotate_domain(domain: DomainSpec, R) -> DomainSpec:
    """Rotated domain; boxes only under signed coordinate permutations."""
    R = np.asarray(R, dtype=float)
    if isinstance(domain, FullSpace):
        return domain
    if isinstance(domain, DomainBall):
        return DomainBall(tuple(R @ np.asarray(domain.center)), domain.radius)
    if not np.allclose(np.abs(R), np.round(np.abs(R)), atol=1e-12):
        raise ValueError("a rotated box is not a box; use a ball or full-space domain")
    a, b = R @ np.asarray(domain.lo), R @ np.asarray(domain.hi)
    return DomainBox(tuple(np.minimum(a, b)), tuple(np.maximum(a, b)))


def rotation_matrix(n: int, angle: float, axes: tuple[int, int] = (0, 1)) -> np.ndarray:
    """Rotation by ``angle`` in the plane of two coordinate axes."""
    R = np.eye(n)
    if n < 2:
        return R
    i, j = axes
    c, s = math.cos(angle), math.sin(angle)
    R[i, i], R[i, j], R[j, i], R[j, j] = c, -s, s, c
    return R
