import math

import numpy as np
import pytest
from scipy import stats

from gaussperim.functionals import (UnitBallConstants, extrapolate_to_one, gamma_sweep, j1, j2,
                                    j_total, local_perimeter, localization_grid_max,
                                    localization_identity_check, regularization_limit,
                                    scaling_identity_check)
from gaussperim.geometry import Ball, FullSpace, Halfspace, unit_cube
from gaussperim.kernels import EUCLIDEAN, FracParams
from gaussperim.quad.integrate import QuadSpec

SPEC = QuadSpec()
H1, Q1 = Halfspace((1.0,), 0.0), unit_cube(1)


def test_local_perimeter_segment():
    ref = math.sqrt(2 * math.pi) * (2 * stats.norm.cdf(0.5) - 1)
    assert local_perimeter(Halfspace((0.0, 1.0), 0.0), unit_cube(2)) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(0.9598504379197684, rel=1e-14)


def test_local_perimeter_circle():
    val = local_perimeter(Ball((0.0, 0.0), 1.0), FullSpace())
    assert val == pytest.approx(2 * math.pi * math.exp(-0.5), rel=1e-12)
    assert local_perimeter(Ball((0.0, 0.0), 1.0), FullSpace(), EUCLIDEAN) == pytest.approx(2 * math.pi)


def test_unit_ball_constants():
    om = UnitBallConstants.up_to(3).omega
    assert om == pytest.approx((1.0, 2.0, math.pi, 4 * math.pi / 3), abs=1e-14)


def test_j2_zero_on_full_space_and_positive_in_window():
    p = FracParams(1, 0.5)
    assert j2(H1, FullSpace(), p).value == 0.0
    r = j2(H1, Q1, p, SPEC)
    assert r.value > 0
    assert j_total(H1, Q1, p, SPEC).value == pytest.approx(j1(H1, Q1, p, SPEC).value + r.value)


def test_j2_euclidean_halfline():
    # J2 = 2 int_0^{1/2} int_{1/2}^inf (u + v)^{-1-s} dv du = 2 (1 - (1/2)^{1-s}) / (s (1 - s))
    s = 0.5
    r = j2(H1, Q1, FracParams(1, s, EUCLIDEAN), SPEC)
    assert r.value == pytest.approx(2 * (1 - 0.5 ** (1 - s)) / (s * (1 - s)), rel=1e-8)


def test_energy_increases_as_s_decreases_near_one():
    p = FracParams(1, 0.5, EUCLIDEAN)
    vals = [j1(H1, Q1, p.with_s(s), SPEC).value for s in (0.3, 0.5, 0.7)]
    assert vals[0] < vals[1] < vals[2]


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_scaling_identity_1d(lam):
    chk = scaling_identity_check(Halfspace((1.0,), 0.1), Q1, lam, FracParams(1, 0.5, EUCLIDEAN), SPEC)
    assert chk.passed


def test_scaling_identity_requires_euclidean():
    with pytest.raises(ValueError):
        scaling_identity_check(H1, Q1, 2.0, FracParams(1, 0.5), SPEC)


@pytest.mark.parametrize("r", [0.025, 0.05, 0.1])
def test_localization_grid_bound(r):
    for x0 in [(0.0, 0.0), (1.0, 0.0), (0.6, -0.8), (0.5, 0.5)]:
        assert localization_grid_max(x0, r) <= 4 * r


def test_localization_identity_1d():
    chk = localization_identity_check(Halfspace((1.0,), 0.3), (0.3,), 0.1, FracParams(1, 0.5), SPEC)
    assert chk.passed
    assert chk.grid_max <= 0.4


def test_extrapolate_to_one_exact_line():
    s = [0.5, 0.7, 0.8, 0.9, 0.95]
    lim, slope, rms, _ = extrapolate_to_one(s, [2.0 + 3.0 * (1 - v) for v in s])
    assert lim == pytest.approx(2.0) and slope == pytest.approx(3.0) and rms < 1e-12


def test_gamma_sweep_1d_euclidean():
    rep = gamma_sweep(H1, Q1, [0.5, 0.7, 0.8, 0.9, 0.95], FracParams(1, 0.5, EUCLIDEAN), SPEC,
                      energy="j1")
    assert rep.target == 1.0
    assert rep.scaled_energies[1] == pytest.approx((2 ** 0.7 - 1) / 0.7, rel=1e-7)
    assert rep.relative_gap < 0.01


def test_regularization_limit_1d():
    rep = regularization_limit(H1, Q1, FracParams(1, 0.5), spec=SPEC)
    assert rep.monotone and rep.converged
    with pytest.raises(ValueError):
        regularization_limit(H1, Q1, FracParams(1, 0.5), deltas=(0.1, 0.2, 0.05))
