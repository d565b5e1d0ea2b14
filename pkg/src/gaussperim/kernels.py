"""Gaussian pair weight, fractional kernel and its two regularizations."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _core_py

GAUSSIAN = "gaussian"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class Cutoff:
    """Kernel ``(1 - eta_delta(|z|)) |z|^{-n-s}`` with a smooth window ``eta_delta``."""

    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("cutoff delta must lie in (0, 1)")


@dataclass(frozen=True)
class Additive:
    """Kernel ``1 / (|z|^{n+s} + delta)``."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("additive delta must be positive")


Regularization = Optional[object]


@dataclass(frozen=True)
class FracParams:
    n: int
    s: float
    weight_mode: str = GAUSSIAN
    regularization: Regularization = None

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError("n must be 1, 2 or 3")
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie strictly inside (0, 1)")
        mode = str(self.weight_mode).lower()
        if mode not in (GAUSSIAN, EUCLIDEAN):
            raise ValueError(f"unknown weight mode {self.weight_mode!r}")
        object.__setattr__(self, "weight_mode", mode)
        if self.regularization is not None and not isinstance(self.regularization, (Cutoff, Additive)):
            raise TypeError("regularization must be None, Cutoff or Additive")

    @property
    def gaussian(self) -> bool:
        return self.weight_mode == GAUSSIAN

    def with_s(self, s: float) -> "FracParams":
        return FracParams(self.n, s, self.weight_mode, self.regularization)

    def with_regularization(self, reg) -> "FracParams":
        return FracParams(self.n, self.s, self.weight_mode, reg)


def gamma_weight(x, y, weight_mode: str = GAUSSIAN):
    """``exp(-(|x|^2 + |y|^2) / 4)``; identically 1 in Euclidean mode."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if weight_mode == EUCLIDEAN:
        return np.ones(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]))[()]
    return np.exp(-0.25 * (np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)))


def smoothstep(u):
    """Quintic ``6u^5 - 15u^4 + 10u^3`` clamped to [0, 1]; C^2 at both ends."""
    return _core_py.smoothstep(np.asarray(u, dtype=float))


def eta(r, delta: float):
    """Window equal to 1 on ``[0, delta]`` and ``[4/delta, inf)``, 0 on ``[2 delta, 2/delta]``.

    The two transition bands are quintic smoothsteps, so ``|eta'| <= 1.875/delta``.
    """
    return _core_py.eta(r, delta)


def eta_derivative_bound(delta: float) -> float:
    """Sup of ``|eta'|``: 15/8 divided by the width of the lower band."""
    return 1.875 / delta


def frac_kernel(z, params: FracParams):
    """Fractional kernel at offset ``z`` (last axis = coordinates)."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z.reshape(1)
    r = np.linalg.norm(z, axis=-1)
    n, s = params.n, params.s
    reg = params.regularization
    if isinstance(reg, Additive):
        return 1.0 / (r ** (n + s) + reg.delta)
    if np.any(r == 0):
        if reg is None:
            raise ValueError("unregularized kernel is singular at z = 0")
        out = np.zeros_like(r)
        nz = r > 0
        out[nz] = (1.0 - eta(r[nz], reg.delta)) * r[nz] ** (-n - s)
        return out[()]
    k = r ** (-n - s)
    if isinstance(reg, Cutoff):
        k = (1.0 - eta(r, reg.delta)) * k
    return k[()] if isinstance(k, np.ndarray) else k


def sphere_area(n: int) -> float:
    """``H^{n-1}(S^{n-1})``; equals 2 for n = 1."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def unit_ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k (1 for k = 0)."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def kernel_mode(params: FracParams) -> tuple[int, float]:
    """Radial-engine kernel code and delta."""
    reg = params.regularization
    if reg is None:
        return _core_py.KERNEL_PLAIN, 0.0
    if isinstance(reg, Cutoff):
        return _core_py.KERNEL_CUTOFF, reg.delta
    return _core_py.KERNEL_ADDITIVE, reg.delta
