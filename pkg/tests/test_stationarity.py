import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from gaussperim.geometry import Ball, Halfspace
from gaussperim.kernels import EUCLIDEAN, Cutoff, FracParams
from gaussperim.quad.integrate import QuadSpec
from gaussperim.quad.pv import pv_boundary_integral
from gaussperim.stationarity import (INCONCLUSIVE, NON_STATIONARY, STATIONARY, a_term, b_term,
                                     classify, d_term, dichotomy_scan, el_residual_stats,
                                     lambda_halfspace, probe_point)

SPEC = QuadSpec()
P2 = FracParams(2, 0.5)


def lambda_1d_oracle(a, s):
    f = lambda z: 2 * math.exp(-z * z / 4) * z ** (-1 - s) * math.sinh(z * a / 2)
    return integrate.quad(f, 0, 1, epsabs=1e-13, epsrel=1e-12)[0] + \
        integrate.quad(f, 1, 60, epsabs=1e-13, epsrel=1e-12)[0]


@pytest.mark.parametrize("a", [0.25, -0.5, 1.0])
def test_lambda_1d_against_scipy(a):
    lam = lambda_halfspace(np.array([a]), a, FracParams(1, 0.5), SPEC)
    assert lam == pytest.approx(lambda_1d_oracle(a, 0.5), rel=1e-9)


def test_lambda_zero_on_centered_halfspace():
    for rho in (0.0, 0.7, 1.5):
        assert abs(lambda_halfspace(probe_point(rho, 0.0, 2), 0.0, P2, SPEC)) < 1e-14


@given(st.floats(0.05, 1.0))
def test_lambda_sign_follows_offset(a):
    assert lambda_halfspace(probe_point(0.0, a, 2), a, P2, SPEC) > 0
    assert lambda_halfspace(probe_point(0.0, -a, 2), -a, P2, SPEC) < 0


def test_lambda_matches_principal_value():
    a = 0.3
    x = probe_point(0.5, a, 2)
    pv = pv_boundary_integral(x, Halfspace((0.0, 1.0), a), P2, SPEC)
    lam = lambda_halfspace(x, a, P2, SPEC)
    assert lam == pytest.approx(-math.exp(0.5 * x @ x) * pv.value, rel=1e-5)


@pytest.mark.parametrize("rho", [0.0, 0.5, 1.0])
def test_lambda_is_twice_b_term(rho):
    a = 0.3
    lam = lambda_halfspace(probe_point(rho, a, 2), a, P2, SPEC)
    assert lam == pytest.approx(2 * b_term(rho, a, P2, SPEC), rel=1e-12)


@pytest.mark.parametrize("rho", [0.5, 1.5])
def test_parity_terms_vanish(rho):
    a = 0.4
    assert abs(a_term(probe_point(rho, a, 2), a, P2, SPEC)) < 1e-12
    p3 = FracParams(3, 0.5)
    x = np.array([0.3, rho, a])
    assert abs(a_term(x, a, p3, SPEC)) < 1e-12
    assert abs(d_term(x, a, p3, SPEC)) < 1e-12
    assert d_term(probe_point(rho, a, 2), a, P2, SPEC) == 0.0


def test_lambda_symmetric_in_tangential_point():
    a = 0.25
    p = FracParams(3, 0.5)
    u = lambda_halfspace(np.array([0.6, 0.8, a]), a, p, SPEC)
    v = lambda_halfspace(np.array([-1.0, 0.0, a]), a, p, SPEC)
    assert u == pytest.approx(v, rel=1e-9)


def test_requires_unregularized_gaussian():
    with pytest.raises(ValueError):
        lambda_halfspace(probe_point(0.0, 0.0, 2), 0.0, FracParams(2, 0.5, EUCLIDEAN))
    with pytest.raises(ValueError):
        lambda_halfspace(probe_point(0.0, 0.0, 2), 0.0, FracParams(2, 0.5, regularization=Cutoff(0.1)))
    with pytest.raises(ValueError):
        lambda_halfspace(probe_point(0.0, 0.1, 2), 0.0, P2)


def test_el_residual_on_halfspaces():
    _, dev, _ = el_residual_stats(Halfspace((0.0, 1.0), 0.0), P2, SPEC, probes=3)
    assert dev < 1e-6
    a = 0.3
    _, dev, vals = el_residual_stats(Halfspace((0.0, 1.0), a), P2, SPEC, probes=3)
    for v in vals:
        ref = lambda_halfspace(np.array(v.point), a, P2, SPEC)
        assert v.lam == pytest.approx(ref, rel=1e-5)
    assert dev > 0.01


def test_el_residual_centered_ball_is_constant():
    _, dev, _ = el_residual_stats(Ball((0.0, 0.0), 0.8), P2, SPEC, probes=3)
    assert dev < 1e-8


def test_el_residual_off_center_ball_varies():
    _, dev, vals = el_residual_stats(Ball((0.4, 0.0), 0.8), P2, SPEC, probes=3)
    assert dev > 100 * max(v.error for v in vals)


def test_classify_bands():
    assert classify(1e-12, 1e-10) == STATIONARY
    assert classify(2e-9, 1e-10) == NON_STATIONARY
    assert classify(5e-10, 1e-10) == INCONCLUSIVE


def test_dichotomy_scan():
    rep = dichotomy_scan([-0.5, 0.0, 0.5], P2, SPEC)
    assert rep.verdict == (NON_STATIONARY, STATIONARY, NON_STATIONARY)
    assert all(rep.b_sign_matches)
    assert rep.b_values[1] == 0.0
    assert rep.to_dict()["verdict"][1] == STATIONARY
