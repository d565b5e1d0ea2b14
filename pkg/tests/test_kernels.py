import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussperim.kernels import (EUCLIDEAN, Additive, Cutoff, FracParams, eta, eta_derivative_bound,
                                frac_kernel, gamma_weight, smoothstep, sphere_area,
                                unit_ball_volume)


def test_gamma_weight_examples():
    assert gamma_weight([0.0, 0.0], [0.0, 0.0]) == 1.0
    assert gamma_weight([1.0, 0.0], [0.0, 1.0]) == pytest.approx(math.exp(-0.5))
    assert gamma_weight([3.0], [2.0], EUCLIDEAN) == 1.0


def test_frac_kernel_examples():
    p = FracParams(2, 0.5)
    assert frac_kernel([1.0, 0.0], p) == pytest.approx(1.0)
    assert frac_kernel([0.0, 2.0], p) == pytest.approx(2.0 ** -2.5)
    with pytest.raises(ValueError):
        frac_kernel([0.0, 0.0], p)
    assert frac_kernel([0.0], FracParams(1, 0.5, regularization=Cutoff(0.1))) == 0.0
    assert frac_kernel([0.0], FracParams(1, 0.5, regularization=Additive(0.5))) == 2.0


@given(st.floats(0.01, 0.5), st.floats(1e-3, 50.0))
def test_regularized_kernels_below_plain(delta, r):
    plain = FracParams(1, 0.6)
    k = frac_kernel([r], plain)
    assert frac_kernel([r], plain.with_regularization(Cutoff(delta))) <= k
    assert frac_kernel([r], plain.with_regularization(Additive(delta))) <= k


@given(st.floats(1e-3, 20.0))
def test_cutoff_kernel_increases_as_delta_shrinks(r):
    p = FracParams(2, 0.5)
    vals = [frac_kernel([r, 0.0], p.with_regularization(Cutoff(d))) for d in (0.4, 0.2, 0.1, 0.05)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_eta_plateaus_and_derivative_bound():
    d = 0.1
    assert eta(np.array([0.0, 0.05, 0.1]), d).tolist() == [1.0, 1.0, 1.0]
    assert eta(np.array([0.2, 5.0, 20.0]), d).tolist() == [0.0, 0.0, 0.0]
    assert eta(np.array([40.0, 100.0]), d).tolist() == [1.0, 1.0]
    r = np.linspace(0.0, 0.3, 30001)
    slope = np.max(np.abs(np.diff(eta(r, d)) / np.diff(r)))
    assert slope <= eta_derivative_bound(d) * (1 + 1e-6)
    assert slope >= 0.99 * eta_derivative_bound(d)


def test_smoothstep_endpoints():
    assert smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])).tolist() == [0.0, 0.0, 0.5, 1.0, 1.0]


def test_params_validation():
    for bad in [dict(n=4, s=0.5), dict(n=2, s=1.0), dict(n=2, s=0.0), dict(n=2, s=0.5, weight_mode="x")]:
        with pytest.raises(ValueError):
            FracParams(**bad)
    with pytest.raises(TypeError):
        FracParams(2, 0.5, regularization=0.1)
    with pytest.raises(ValueError):
        Cutoff(1.5)
    with pytest.raises(ValueError):
        Additive(0.0)
    assert FracParams(2, 0.5, "Euclidean").weight_mode == EUCLIDEAN


def test_constants():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_ball_volume(0) == 1.0
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
