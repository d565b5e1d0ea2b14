import math

import numpy as np
import pytest

from gaussperim.fields import Constant, CoordinateMonomial, CosineMode, NormalField, One, Scaling
from gaussperim.geometry import Ball, FullSpace, Halfspace, complement, indicator
from gaussperim.kernels import FracParams
from gaussperim.quad.integrate import QuadSpec
from gaussperim.variations import (affine_part, boundary_pair_term, fd_variation_oracle,
                                   first_variation, flow_region, gaussian_volume_variation,
                                   mixed_term, second_variation, volume_preserving_check)

SPEC = QuadSpec()
P1 = FracParams(1, 0.5)


def test_first_variation_vanishes_on_centered_halfspace():
    assert abs(first_variation(Halfspace((1.0,), 0.0), Constant((1.0,)), P1, SPEC)) < 1e-12


def test_first_variation_depends_only_on_normal_trace():
    E = Halfspace((0.0, 1.0), 0.4)
    p = FracParams(2, 0.5)
    a = first_variation(E, Constant((0.0, 1.0)), p, SPEC, panels=2)
    b = first_variation(E, Constant((0.7, 1.0)), p, SPEC, panels=2)
    assert a == pytest.approx(b, rel=1e-12)
    assert first_variation(E, Constant((1.0, 0.0)), p, SPEC, panels=2) == 0.0


def test_first_variation_matches_flow_1d():
    E, X = Halfspace((1.0,), 0.5), Constant((1.0,))
    an = first_variation(E, X, P1, SPEC)
    rep = fd_variation_oracle(E, X, P1, SPEC, (0.08, 0.04, 0.02), analytic_d1=an)
    assert rep.relative_gap_d1 < 1e-3
    assert rep.observed_order_d1 > 1.9


def test_gaussian_volume_variation_1d():
    assert gaussian_volume_variation(Halfspace((1.0,), 0.0), Constant((1.0,))) == 1.0
    a = 0.7
    assert gaussian_volume_variation(Halfspace((1.0,), a), Constant((1.0,))) == \
        pytest.approx(math.exp(-a * a / 2))


def test_gaussian_volume_variation_matches_measure_derivative():
    from gaussperim.geometry import halfspace_gaussian_measure
    a, h = 0.3, 1e-5
    fd = 2 * math.pi * (halfspace_gaussian_measure(a + h) - halfspace_gaussian_measure(a - h)) / (2 * h)
    an = gaussian_volume_variation(Halfspace((0.0, 1.0), a), Constant((0.0, 1.0)))
    assert an == pytest.approx(fd, rel=1e-8)


def test_volume_preserving_examples():
    H = Halfspace((0.0, 1.0), 0.0)
    integral, resid = volume_preserving_check(H, CoordinateMonomial(0, 1))
    assert abs(integral) < 1e-12 and resid < 1e-8
    integral, _ = volume_preserving_check(H, One())
    assert integral == pytest.approx(math.sqrt(2 * math.pi), rel=1e-8)
    _, resid = volume_preserving_check(H, CosineMode(0, 1.0))
    assert resid < 1e-8


def test_second_variation_rejects_non_preserving_phi():
    with pytest.raises(ValueError):
        second_variation(Halfspace((0.0, 1.0), 0.0), One(), FracParams(2, 0.5), SPEC)


def test_second_variation_of_vanishing_trace_is_zero():
    # phi = x_2 vanishes on the boundary {x_2 = 0}
    H = Halfspace((0.0, 1.0), 0.0)
    val = second_variation(H, CoordinateMonomial(1, 1), FracParams(2, 0.5), SPEC, check=False,
                           panels=2)
    assert val == 0.0


def test_nu_modes_agree_on_halfspace():
    H = Halfspace((0.0, 1.0), 0.0)
    p = FracParams(2, 0.5)
    phi = CoordinateMonomial(0, 1)
    a = boundary_pair_term(H, phi, p, SPEC, "squared", panels=2)
    b = boundary_pair_term(H, phi, p, SPEC, "abs", panels=2)
    assert a == b and a > 0


def test_abs_mode_diverges_on_circle():
    with pytest.warns(RuntimeWarning):
        val = boundary_pair_term(Ball((0.0, 0.0), 1.0), CosineMode(0, 1.0), FracParams(2, 0.5),
                                 SPEC, "abs")
    assert val == -math.inf
    with pytest.raises(ValueError):
        boundary_pair_term(Ball((0.0, 0.0), 1.0), One(), FracParams(2, 0.5), SPEC, "cubed")


def test_printed_mixed_term_vanishes_on_centered_halfspace():
    H = Halfspace((0.0, 1.0), 0.0)
    p = FracParams(2, 0.5)
    phi = CoordinateMonomial(0, 1)
    printed = mixed_term(H, phi, p, SPEC, "printed", panels=2)
    proof = mixed_term(H, phi, p, SPEC, "proof", panels=2)
    assert abs(printed) < 1e-8 * proof


def test_affine_part_and_flow_region():
    H = Halfspace((0.0, 1.0), 0.5)
    A, b = affine_part(H, Constant((0.0, 2.0)))
    assert np.all(A == 0) and b.tolist() == [0.0, 2.0]
    assert flow_region(H, Constant((0.0, 2.0)), 0.1) == Halfspace((0.0, 1.0), 0.7)
    assert flow_region(H, Scaling(), math.log(2.0)).a == pytest.approx(1.0)
    assert affine_part(Ball((0.0, 0.0), 1.0), NormalField(One())) is None
    with pytest.raises(ValueError):
        flow_region(Ball((0.0, 0.0), 1.0), NormalField(One()), 0.1)


def test_normal_flow_moves_halfspace_with_unit_speed_at_origin():
    # X = (1 + a (<y, w> - a)) w: the boundary moves with speed 1 + a(a_t - a)
    a, t = 0.4, 0.05
    E = Halfspace((0.0, 1.0), a)
    out = flow_region(E, NormalField(One()), t)
    # d a_t / dt = 1 + a (a_t - a), a_0 = a
    assert out.a == pytest.approx(a + (math.exp(a * t) - 1) / a, rel=1e-12)


def test_shear_flow_preserves_gaussian_measure():
    E = Halfspace((0.0, 1.0), 0.0)
    out = flow_region(E, NormalField(CoordinateMonomial(0, 1)), 0.3)
    assert out.a == pytest.approx(0.0, abs=1e-15)
    pts = np.array([[1.0, 0.25]])
    assert indicator(out, pts)[0] == 1


def test_complement_flow():
    E = complement(Halfspace((0.0, 1.0), 0.2))
    out = flow_region(E, Constant((0.0, 1.0)), 0.1)
    assert isinstance(out, type(E)) and out.region.omega == (0.0, 1.0)
    assert out.region.a == pytest.approx(0.3, abs=1e-15)


def test_fd_oracle_step_validation():
    with pytest.raises(ValueError):
        fd_variation_oracle(Halfspace((1.0,), 0.0), Constant((1.0,)), P1, SPEC, (0.01, 0.02))
    with pytest.raises(ValueError):
        fd_variation_oracle(Halfspace((1.0,), 0.0), Constant((1.0,)), P1, SPEC, (0.01,))


def test_regularized_pair_term_increases_to_plain_value():
    from gaussperim.kernels import Cutoff
    H, phi, p = Halfspace((0.0, 1.0), 0.0), CoordinateMonomial(0, 1), FracParams(2, 0.5)
    vals = [boundary_pair_term(H, phi, p.with_regularization(Cutoff(d)), SPEC, panels=2)
            for d in (0.2, 0.05, 0.0125)]
    plain = boundary_pair_term(H, phi, p, SPEC, panels=2)
    assert vals[0] < vals[1] < vals[2] < plain
