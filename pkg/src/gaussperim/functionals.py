"""Nonlocal energies, the Gaussian perimeter and the s -> 1 sweep."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import (Ball, Box, Complement, DomainBox, FullSpace, Halfspace, Polytope, Region,
                       boundary_quadrature, scale_domain, scale_region, translate_region)
from .kernels import EUCLIDEAN, GAUSSIAN, FracParams, unit_ball_volume
from .parallel import ordered_map
from .quad.integrate import IntegralResult, QuadSpec
from .quad.pairs import double_integral_pair, inside, localized_weight, outside


@dataclass(frozen=True)
class UnitBallConstants:
    """``omega[k]`` is the volume of the unit ball in R^k, ``omega[0] = 1``."""

    omega: tuple[float, ...]

    @classmethod
    def up_to(cls, n: int) -> "UnitBallConstants":
        return cls(tuple(unit_ball_volume(k) for k in range(n + 1)))


def j1(E: Region, domain, params: FracParams, spec: QuadSpec = QuadSpec(),
       method: Optional[str] = None) -> IntegralResult:
    """Interaction of ``E ∩ Ω`` with ``E^c ∩ Ω``."""
    return double_integral_pair(E, inside(domain), inside(domain), params, spec, method=method)


def j2(E: Region, domain, params: FracParams, spec: QuadSpec = QuadSpec(),
       method: Optional[str] = None) -> IntegralResult:
    """Cross terms ``(E ∩ Ω) x (E^c \\ Ω)`` and ``(E \\ Ω) x (E^c ∩ Ω)``; zero on full space."""
    if isinstance(domain, FullSpace):
        return IntegralResult(0.0, 0.0, 0)
    a = double_integral_pair(E, inside(domain), outside(domain), params, spec, method=method)
    b = double_integral_pair(E, outside(domain), inside(domain), params, spec, method=method)
    return a + b


def j_total(E: Region, domain, params: FracParams, spec: QuadSpec = QuadSpec(),
            method: Optional[str] = None) -> IntegralResult:
    """``J1 + J2``."""
    return j1(E, domain, params, spec, method) + j2(E, domain, params, spec, method)


def _perimeter_sum(E, domain, weight_mode, resolution, panels):
    rule = boundary_quadrature(E, domain, resolution, panels=panels)
    if len(rule) == 0:
        return 0.0
    if weight_mode == EUCLIDEAN:
        return float(np.sum(rule.weights))
    g = np.exp(-0.5 * np.sum(rule.points ** 2, axis=1))
    return float(np.sum(rule.weights * g))


def local_perimeter(E: Region, domain, weight_mode: str = GAUSSIAN, resolution: int = 16,
                    tol: float = 1e-12) -> float:
    """``int_{boundary(E) ∩ Ω} exp(-|x|^2/2) dH^{n-1}``, or the plain area in Euclidean mode.

    Panels are doubled until two successive sums agree to ``tol`` (relative).
    """
    reg = E
    while isinstance(reg, Complement):
        reg = reg.region
    if not isinstance(reg, (Halfspace, Ball, Polytope, Box)):
        raise TypeError(f"unsupported region {E!r}")
    prev = _perimeter_sum(E, domain, weight_mode, resolution, 1)
    panels = 2
    while panels <= 256:
        cur = _perimeter_sum(E, domain, weight_mode, resolution, panels)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
        panels *= 2
    return prev


# ---------------------------------------------------------------- s -> 1 sweep


@dataclass(frozen=True)
class SweepReport:
    s_values: tuple[float, ...]
    scaled_energies: tuple[float, ...]
    errors: tuple[float, ...]
    extrapolated_limit: float
    target: float
    relative_gap: float
    fit_residual: float = 0.0
    fit_slope: float = 0.0
    ill_conditioned: bool = False
    energy: str = "total"

    def to_dict(self) -> dict:
        return {
            "s_values": list(self.s_values),
            "scaled_energies": list(self.scaled_energies),
            "errors": list(self.errors),
            "extrapolated_limit": self.extrapolated_limit,
            "target": self.target,
            "relative_gap": self.relative_gap,
            "fit_residual": self.fit_residual,
            "fit_slope": self.fit_slope,
            "ill_conditioned": self.ill_conditioned,
            "energy": self.energy,
        }


def extrapolate_to_one(s_values, scaled, top: int = 3):
    """Least-squares line in ``1 - s`` through the ``top`` largest s; returns (limit, slope, rms, cond)."""
    s = np.asarray(s_values, dtype=float)
    v = np.asarray(scaled, dtype=float)
    idx = np.argsort(s)[-top:]
    h = 1.0 - s[idx]
    A = np.column_stack([np.ones_like(h), h])
    coef, *_ = np.linalg.lstsq(A, v[idx], rcond=None)
    res = v[idx] - A @ coef
    rms = float(np.sqrt(np.mean(res ** 2)))
    return float(coef[0]), float(coef[1]), rms, float(np.linalg.cond(A))


def gamma_sweep(E: Region, domain, s_list: Sequence[float], params: FracParams,
                spec: QuadSpec = QuadSpec(), energy: str = "total",
                method: Optional[str] = None) -> SweepReport:
    """``(1 - s) J_s`` over ``s_list``, extrapolated to ``s = 1`` and compared with
    ``omega_{n-1}`` times the perimeter in ``params.weight_mode``.

    ``energy`` is ``"total"`` (J1 + J2) or ``"j1"``.
    """
    s_vals = [float(s) for s in s_list]
    if len(s_vals) < 3:
        raise ValueError("the sweep needs at least three values of s")
    if any(b <= a for a, b in zip(s_vals, s_vals[1:])):
        raise ValueError("s values must be strictly increasing")
    if not all(0.0 < s < 1.0 for s in s_vals):
        raise ValueError("s values must lie in (0, 1)")
    if energy not in ("total", "j1"):
        raise ValueError("energy must be 'total' or 'j1'")
    fn = j_total if energy == "total" else j1

    def one(s):
        return fn(E, domain, params.with_s(s), spec, method)

    results = ordered_map(one, s_vals)
    scaled = [(1 - s) * r.value for s, r in zip(s_vals, results)]
    errs = [(1 - s) * r.error_estimate for s, r in zip(s_vals, results)]
    limit, slope, rms, cond = extrapolate_to_one(s_vals, scaled)
    ill = cond > 1e6
    if ill:
        warnings.warn("gamma_sweep: extrapolation is ill-conditioned", RuntimeWarning, stacklevel=2)
    target = unit_ball_volume(params.n - 1) * local_perimeter(E, domain, params.weight_mode)
    gap = abs(limit - target) / abs(target) if target != 0 else math.inf
    return SweepReport(tuple(s_vals), tuple(scaled), tuple(errs), limit, target, gap, rms, slope,
                       ill, energy)


# ---------------------------------------------------------------- identity checks


@dataclass(frozen=True)
class IdentityCheck:
    """Relative defect of an identity and the combined quadrature tolerance it is judged by."""

    defect: float
    tolerance: float
    lhs: float
    rhs: float
    grid_max: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.defect < 2.0 * self.tolerance


def scaling_identity_check(E: Region, domain, lam: float, params: FracParams,
                           spec: QuadSpec = QuadSpec()) -> IdentityCheck:
    """``J1(lam E, lam Ω) = lam^{n-s} J1(E, Ω)`` in Euclidean mode."""
    if params.gaussian:
        raise ValueError("the scaling identity holds only for the Euclidean weight")
    n, s = params.n, params.s
    base = j1(E, domain, params, spec)
    if lam == 1.0:
        return IdentityCheck(0.0, base.error_estimate / max(abs(base.value), 1e-300),
                             base.value, base.value)
    big = j1(scale_region(E, lam), scale_domain(domain, lam), params, spec)
    f = lam ** (n - s)
    rhs = f * base.value
    defect = abs(big.value - rhs) / abs(rhs)
    tol = (big.error_estimate + f * base.error_estimate) / abs(rhs)
    return IdentityCheck(defect, tol, big.value, rhs)


def gamma_localized(x, y, x0, r):
    """``gamma(x0 + r x, x0 + r y)``."""
    x0 = np.asarray(x0, dtype=float)
    X = x0 + r * np.asarray(x, dtype=float)
    Y = x0 + r * np.asarray(y, dtype=float)
    return np.exp(-0.25 * (np.sum(X * X, axis=-1) + np.sum(Y * Y, axis=-1)))


def localization_grid_max(x0, r: float, points: int = 9) -> float:
    """Max over a grid of ``Q x Q`` of ``|gamma_{x0,r}(x, y) - exp(-|x0|^2/2)|``."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    t = np.linspace(-0.5, 0.5, points)
    g = np.array(np.meshgrid(*([t] * n), indexing="ij")).reshape(n, -1).T
    X = np.repeat(g, g.shape[0], axis=0)
    Y = np.tile(g, (g.shape[0], 1))
    return float(np.max(np.abs(gamma_localized(X, Y, x0, r) - math.exp(-0.5 * x0 @ x0))))


def localization_identity_check(E: Region, x0, r: float, params: FracParams,
                                spec: QuadSpec = QuadSpec()) -> IdentityCheck:
    """``J1(E, C_r(x0)) = r^{n-s} J1^{gamma_{x0,r}}((E - x0)/r, Q)`` plus the kernel-bound grid max."""
    x0 = np.asarray(x0, dtype=float)
    n, s = params.n, params.s
    if x0.size != n:
        raise ValueError("x0 has the wrong dimension")
    cube = DomainBox(tuple(x0 - 0.5 * r), tuple(x0 + 0.5 * r))
    lhs = j1(E, cube, params, spec)
    Q = DomainBox((-0.5,) * n, (0.5,) * n)
    local = scale_region(translate_region(E, -x0), 1.0 / r)
    wgt = localized_weight(x0, r) if params.gaussian else None
    right = double_integral_pair(local, inside(Q), inside(Q), params, spec, weight=wgt)
    f = r ** (n - s)
    rhs = f * right.value
    defect = abs(lhs.value - rhs) / abs(rhs) if rhs != 0 else abs(lhs.value)
    tol = (lhs.error_estimate + f * right.error_estimate) / max(abs(rhs), 1e-300)
    return IdentityCheck(defect, tol, lhs.value, rhs, localization_grid_max(x0, r))


# ---------------------------------------------------------------- regularization limit


@dataclass(frozen=True)
class RegularizationReport:
    """Cutoff energies as delta decreases and their extrapolation to delta = 0."""

    deltas: tuple[float, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]
    monotone: bool
    extrapolated: float
    extrapolation_error: float
    reference: float
    reference_error: float

    @property
    def gap(self) -> float:
        return abs(self.extrapolated - self.reference)

    @property
    def converged(self) -> bool:
        return self.gap <= self.extrapolation_error + self.reference_error

    def to_dict(self) -> dict:
        return {"deltas": list(self.deltas), "values": list(self.values),
                "errors": list(self.errors), "monotone": self.monotone,
                "extrapolated": self.extrapolated,
                "extrapolation_error": self.extrapolation_error, "reference": self.reference,
                "reference_error": self.reference_error, "converged": self.converged}


def regularization_limit(E: Region, domain, params: FracParams,
                         deltas: Sequence[float] = (0.2, 0.1, 0.05, 0.025),
                         spec: QuadSpec = QuadSpec(), energy: str = "j1") -> RegularizationReport:
    """J1 (or J) with the cutoff kernel over decreasing ``deltas``, compared with the plain kernel.

    The cutoff removes pairs closer than about ``delta``, so the energy
    deficit behaves like ``c_1 delta^{1-s} + c_2 delta^{2-s} + ...``. The
    sequence is extrapolated with as many of these powers as the data allow;
    the extrapolation error is the change when the highest power is dropped
    plus the propagated quadrature errors.
    """
    from .kernels import Cutoff
    from .quad.rules import richardson_fit

    d = [float(v) for v in deltas]
    if len(d) < 3 or any(b >= a for a, b in zip(d, d[1:])):
        raise ValueError("need at least three strictly decreasing deltas")
    fn = j_total if energy == "total" else j1
    res = ordered_map(lambda v: fn(E, domain, params.with_regularization(Cutoff(v)), spec), d)
    vals = np.array([r.value for r in res])
    errs = np.array([r.error_estimate for r in res])
    s = params.s
    k = len(d) - 1
    powers = [j - s for j in range(1, k + 1)]
    full, _ = richardson_fit(np.array(d), vals, powers)
    red, _ = richardson_fit(np.array(d[1:]), vals[1:], powers[:-1])
    # propagated quadrature error: the extrapolation weights sum to 1 but alternate
    amp = sum(abs(w) for w in _extrapolation_weights(d, powers))
    ext_err = abs(full - red) + amp * float(np.max(errs))
    ref = fn(E, domain, params.with_regularization(None), spec)
    mono = bool(np.all(np.diff(vals) > 0))
    return RegularizationReport(tuple(d), tuple(map(float, vals)), tuple(map(float, errs)), mono,
                                float(full), float(ext_err), ref.value, ref.error_estimate)


def _extrapolation_weights(h, powers):
    A = np.column_stack([np.ones(len(h))] + [np.asarray(h) ** p for p in powers])
    return np.linalg.solve(A, np.eye(len(h)))[0] if A.shape[0] == A.shape[1] else \
        np.linalg.pinv(A)[0]
