import math

import numpy as np
import pytest

from gaussperim.geometry import Ball, DomainBox, FullSpace, Halfspace, unit_cube
from gaussperim.kernels import EUCLIDEAN, FracParams
from gaussperim.quad.integrate import QuadSpec, gaussian_tail_bound, integrate_region, IntegralResult
from gaussperim.quad.pairs import double_integral_pair, inside
from gaussperim.quad.pv import pv_boundary_integral
from gaussperim.quad.rules import gauss_legendre, richardson_fit

SPEC = QuadSpec()


def closed_form_1d(s):
    # int_0^{1/2} int_0^{1/2} (u + v)^{-1-s} du dv
    return (2 * 0.5 ** (1 - s) - 1) / (s * (1 - s))


def test_gauss_legendre_exactness():
    x, w = gauss_legendre(5)
    assert np.sum(w) == pytest.approx(2.0)
    assert np.sum(w * x ** 8) == pytest.approx(2 / 9, rel=1e-14)


def test_richardson_fit_recovers_limit():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    v = 3.0 + 2.0 * h ** 0.5 - h ** 1.5
    c, res = richardson_fit(h, v, [0.5, 1.5])
    assert c == pytest.approx(3.0, abs=1e-12)


def test_integrate_gaussian_full_space():
    r = integrate_region(lambda x: np.exp(-0.5 * x[:, 0] ** 2), FullSpace(), n=1)
    assert r.value == pytest.approx(math.sqrt(2 * math.pi), abs=1e-8)


def test_integrate_constant_on_cube():
    r = integrate_region(lambda x: np.ones(len(x)), unit_cube(2))
    assert r.value == pytest.approx(1.0, abs=1e-13)


def test_integrate_singular_point():
    # int_{-1}^{1} |x|^{-1/2} dx = 4
    r = integrate_region(lambda x: np.abs(x[:, 0]) ** -0.5, DomainBox((-1.0,), (1.0,)),
                         singular_points=[(0.0,)])
    assert r.value == pytest.approx(4.0, rel=1e-4)


def test_integrate_with_region_and_tail_bound():
    r = integrate_region(lambda x: np.exp(-0.5 * np.sum(x * x, axis=1)), FullSpace(),
                         region=Halfspace((1.0, 0.0), 0.0))
    assert r.value == pytest.approx(math.pi, rel=1e-8)
    assert gaussian_tail_bound(2, 10.0, rate=0.5) < 1e-20


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_closed_form_1d(s):
    r = double_integral_pair(Halfspace((1.0,), 0.0), inside(unit_cube(1)), inside(unit_cube(1)),
                             FracParams(1, s, EUCLIDEAN), SPEC)
    assert r.value == pytest.approx(closed_form_1d(s), rel=1e-8)
    assert r.error_estimate < 1e-6 * r.value


def test_closed_form_value_at_half():
    assert 0.5 * closed_form_1d(0.5) == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-15)


def test_pv_vanishes_on_centered_halfspace():
    r = pv_boundary_integral(np.array([0.7, 0.0]), Halfspace((0.0, 1.0), 0.0), FracParams(2, 0.5))
    assert abs(r.value) <= max(r.error_estimate, 1e-9)


def test_pv_sign_for_shifted_halfspace():
    # E = {x_2 < a} with a > 0 misses more Gaussian mass than it has, so the PV is negative
    a = 0.3
    r = pv_boundary_integral(np.array([0.0, a]), Halfspace((0.0, 1.0), a), FracParams(2, 0.5))
    assert r.value < -10 * r.error_estimate


def test_pv_rejects_off_boundary_point():
    with pytest.raises(ValueError):
        pv_boundary_integral(np.array([0.0, 0.5]), Halfspace((0.0, 1.0), 0.0), FracParams(2, 0.5))


def test_monte_carlo_two_seeds_agree():
    p = FracParams(2, 0.5, EUCLIDEAN)
    E, Q = Ball((0.0, 0.0), 0.3), unit_cube(2)
    spec = SPEC.replace(mc_budget=20000)
    a = double_integral_pair(E, inside(Q), inside(Q), p, spec, method="monte_carlo")
    b = double_integral_pair(E, inside(Q), inside(Q), p, spec.replace(seed=spec.seed + 1),
                             method="monte_carlo")
    det = double_integral_pair(E, inside(Q), inside(Q), p, SPEC)
    assert a.method == "monte_carlo" and a.seed == spec.seed
    assert abs(a.value - b.value) <= 3 * math.hypot(a.error_estimate, b.error_estimate)
    assert abs(a.value - det.value) <= 4 * a.error_estimate


def test_deterministic_repeatable():
    p = FracParams(2, 0.5)
    E = Halfspace((0.6, 0.8), 0.1)
    a = double_integral_pair(E, inside(unit_cube(2)), inside(unit_cube(2)), p, SPEC)
    b = double_integral_pair(E, inside(unit_cube(2)), inside(unit_cube(2)), p, SPEC)
    assert a.value == b.value


def test_quadspec_validation():
    for bad in [dict(gl_order=1), dict(rel_tol=0.0), dict(mc_budget=0), dict(seed=-1),
                dict(pv_radii=(0.1,)), dict(pv_radii=(0.1, 0.2)), dict(pv_radii=(1e-3, 1e-7))]:
        with pytest.raises(ValueError):
            QuadSpec(**bad)


def test_integral_result_rules():
    with pytest.raises(ValueError):
        IntegralResult(1.0, -1.0, 1)
    with pytest.raises(ValueError):
        IntegralResult(1.0, 0.1, 1, "monte_carlo")
    s = IntegralResult(1.0, 0.3, 1, "monte_carlo", 1) + IntegralResult(2.0, 0.4, 2, "monte_carlo", 2)
    assert s.error_estimate == pytest.approx(0.5)
