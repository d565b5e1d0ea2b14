"""Vector fields for variations and flows, and the scalar families behind normal fields.

A ``NormalField(phi)`` is ``phi nu`` on the boundary of a halfspace or ball
(or complement), extended off the boundary along normals by
``phi(x + t nu) = phi(x) (1 - t (H - <x, nu>))``. Every field is multiplied by a
C^2 taper equal to 1 on ``|x| <= R - 1`` and 0 beyond ``R``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _core_py
from .geometry import Region, _canonical_primitive

DEFAULT_TAPER_RADIUS = 8.0


@dataclass(frozen=True)
class One:
    """The constant function 1."""

    def value(self, x):
        return np.ones(np.asarray(x).shape[0])

    def gradient(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CoordinateMonomial:
    """``x[axis] ** degree`` with degree 0, 1 or 2."""

    axis: int
    degree: int = 1

    def __post_init__(self):
        if self.axis < 0:
            raise ValueError("axis must be non-negative")
        if self.degree not in (0, 1, 2):
            raise ValueError("degree must be 0, 1 or 2")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return x[:, self.axis] ** self.degree

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        if self.degree:
            g[:, self.axis] = self.degree * x[:, self.axis] ** (self.degree - 1)
        return g


@dataclass(frozen=True)
class CosineMode:
    """``cos(frequency * x[axis])``."""

    axis: int
    frequency: float = 1.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.cos(self.frequency * x[:, self.axis])

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[:, self.axis] = -self.frequency * np.sin(self.frequency * x[:, self.axis])
        return g


ScalarFamily = Union[One, CoordinateMonomial, CosineMode]


@dataclass(frozen=True)
class Constant:
    """Translation field ``X = v``."""

    v: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(c) for c in np.atleast_1d(self.v))
        if not all(math.isfinite(c) for c in v):
            raise ValueError("field vector must be finite")
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class Scaling:
    """Dilation field ``X = x``."""


@dataclass(frozen=True)
class NormalField:
    """``X = phi nu`` on the boundary, extended along normals."""

    phi: ScalarFamily


VectorFieldSpec = Union[Constant, Scaling, NormalField]


def taper(x, radius: float = DEFAULT_TAPER_RADIUS) -> np.ndarray:
    """C^2 cutoff: 1 for ``|x| <= radius - 1``, 0 for ``|x| >= radius``."""
    r = np.linalg.norm(np.atleast_2d(np.asarray(x, dtype=float)), axis=1)
    return 1.0 - _core_py.smoothstep(r - (radius - 1.0))


def project(region: Region, x):
    """Closest boundary point, outward normal there, mean curvature and signed offset.

    ``x = p + t nu`` with ``t > 0`` outside the region.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    kind, prim = _canonical_primitive(region)
    if kind == "half":
        w = np.asarray(prim.omega, dtype=float)
        t = x @ w - prim.a
        p = x - t[:, None] * w[None, :]
        return p, np.tile(w, (x.shape[0], 1)), np.zeros(x.shape[0]), t
    c = np.asarray(prim.center, dtype=float)
    d = x - c
    rho = np.linalg.norm(d, axis=1)
    if np.any(rho == 0):
        raise ValueError("normal projection undefined at the ball center")
    u = d / rho[:, None]
    p = c + prim.radius * u
    n = x.shape[1]
    H = (n - 1) / prim.radius
    if kind == "ball_in":
        return p, u, np.full(x.shape[0], H), rho - prim.radius
    return p, -u, np.full(x.shape[0], -H), prim.radius - rho


def normal_extension(phi: ScalarFamily, region: Region, x) -> np.ndarray:
    """``phi(p) (1 - t (H - <p, nu>))`` at ``x = p + t nu``."""
    p, nu, H, t = project(region, x)
    return phi.value(p) * (1.0 - t * (H - np.einsum("ij,ij->i", p, nu)))


def evaluate_field(field: VectorFieldSpec, x, region: Optional[Region] = None,
                   radius: float = DEFAULT_TAPER_RADIUS) -> np.ndarray:
    """Field values at ``x`` (shape ``(N, n)``), taper included."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if isinstance(field, Constant):
        v = np.asarray(field.v, dtype=float)
        if v.size != x.shape[1]:
            raise ValueError("field dimension differs from the points")
        X = np.tile(v, (x.shape[0], 1))
    elif isinstance(field, Scaling):
        X = x.copy()
    elif isinstance(field, NormalField):
        if region is None:
            raise ValueError("a normal field needs the region it is normal to")
        _, nu, _, _ = project(region, x)
        X = normal_extension(field.phi, region, x)[:, None] * nu
    else:
        raise TypeError(f"unknown field {field!r}")
    X = X * taper(x, radius)[:, None]
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite field value")
    return X


def field_jacobian(field: VectorFieldSpec, x, region: Optional[Region] = None,
                   radius: float = DEFAULT_TAPER_RADIUS, h: float = 1e-6) -> np.ndarray:
    """``DX`` at ``x`` by central differences, shape ``(N, n, n)`` with ``J[:, i, j] = dX_i/dx_j``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N, n = x.shape
    J = np.empty((N, n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, :, j] = (evaluate_field(field, x + e, region, radius)
                      - evaluate_field(field, x - e, region, radius)) / (2 * h)
    return J


def normal_trace(field: VectorFieldSpec, points, normals, region: Optional[Region] = None,
                 radius: float = DEFAULT_TAPER_RADIUS) -> np.ndarray:
    """``<X, nu>`` at boundary samples."""
    X = evaluate_field(field, points, region, radius)
    return np.einsum("ij,ij->i", X, np.atleast_2d(normals))


def field_to_dict(field: VectorFieldSpec) -> dict:
    if isinstance(field, Constant):
        return {"type": "constant", "v": list(field.v)}
    if isinstance(field, Scaling):
        return {"type": "scaling"}
    phi = field.phi
    if isinstance(phi, One):
        d = {"family": "one"}
    elif isinstance(phi, CoordinateMonomial):
        d = {"family": "monomial", "axis": phi.axis, "degree": phi.degree}
    else:
        d = {"family": "cosine", "axis": phi.axis, "frequency": phi.frequency}
    return {"type": "normal", **d}


def scalar_from_dict(d: dict) -> ScalarFamily:
    fam = d.get("family", "one")
    if fam == "one":
        return One()
    if fam == "monomial":
        return CoordinateMonomial(int(d["axis"]), int(d.get("degree", 1)))
    if fam == "cosine":
        return CosineMode(int(d["axis"]), float(d.get("frequency", 1.0)))
    raise ValueError(f"unknown scalar family {fam!r}")


def field_from_dict(d: dict) -> VectorFieldSpec:
    kind = d.get("type")
    if kind == "constant":
        return Constant(tuple(d["v"]))
    if kind == "scaling":
        return Scaling()
    if kind == "normal":
        return NormalField(scalar_from_dict(d))
    raise ValueError(f"unknown field type {kind!r}")
