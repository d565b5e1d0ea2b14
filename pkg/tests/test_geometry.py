import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussperim.fields import Constant, CoordinateMonomial, NormalField, Scaling
from gaussperim.geometry import (Ball, Box, Complement, DomainBall, FullSpace, Halfspace, Polytope,
                                 boundary_quadrature, complement, domain_from_dict,
                                 domain_to_dict, flow_boundary, gaussian_volume,
                                 halfspace_gaussian_measure, indicator, region_from_dict,
                                 region_to_dict, rotate_region, rotation_matrix, scale_region,
                                 translate_region, unit_cube)

coord = st.floats(-3, 3, allow_nan=False)


def test_indicator_examples():
    H = Halfspace((0.0, 1.0), 0.0)
    assert indicator(H, np.array([[0.0, -1.0]]))[0] == 1
    assert indicator(H, np.array([[0.0, 0.0]]))[0] == 0
    assert indicator(Ball((0.0, 0.0), 1.0), np.array([[0.3, 0.4]]))[0] == 1


def test_indicator_dimension_mismatch():
    with pytest.raises(ValueError):
        indicator(Halfspace((0.0, 1.0), 0.0), np.zeros((1, 3)))


@given(st.lists(coord, min_size=2, max_size=2), coord)
def test_complement_indicator(x, a):
    H = Halfspace((0.6, 0.8), a)
    p = np.array([x])
    if abs(p[0] @ np.array([0.6, 0.8]) - a) < 1e-9:
        return
    assert indicator(complement(H), p)[0] == 1 - indicator(H, p)[0]


def test_double_complement_normalizes():
    B = Ball((0.0,), 1.0)
    assert complement(complement(B)) == B
    assert isinstance(complement(B), Complement)


def test_invalid_regions():
    with pytest.raises(ValueError):
        Halfspace((1.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        Ball((0.0,), -1.0)
    with pytest.raises(ValueError):
        Box((0.0, 1.0), (1.0, 0.5))
    with pytest.raises(ValueError):
        Polytope((Halfspace((1.0,), 0.0), Halfspace((-1.0,), -1.0)))


def test_boundary_quadrature_segment():
    rule = boundary_quadrature(Halfspace((0.0, 1.0), 0.0), unit_cube(2), 16)
    assert len(rule) == 16
    assert rule.total() == pytest.approx(1.0, abs=1e-12)
    assert np.all(rule.curvature == 0.0)
    assert np.allclose(np.linalg.norm(rule.normals, axis=1), 1.0, atol=1e-12)


def test_boundary_quadrature_circle_and_point():
    rule = boundary_quadrature(Ball((0.0, 0.0), 1.0), FullSpace(), 16)
    assert rule.total() == pytest.approx(2 * math.pi, abs=1e-10)
    assert np.allclose(rule.curvature, 1.0)
    pt = boundary_quadrature(Halfspace((1.0,), 0.3), FullSpace(6.0), 4)
    assert len(pt) == 1 and pt.points[0, 0] == pytest.approx(0.3) and pt.weights[0] == 1.0


def test_boundary_quadrature_sphere_and_complement():
    rule = boundary_quadrature(Ball((0.0, 0.0, 0.0), 0.5), FullSpace(), 8)
    assert rule.total() == pytest.approx(math.pi, rel=1e-10)
    assert np.allclose(rule.curvature, 4.0)
    out = boundary_quadrature(complement(Ball((0.0, 0.0), 1.0)), FullSpace(), 8)
    assert np.allclose(np.einsum("ij,ij->i", out.normals, out.points), -1.0)


def test_boundary_quadrature_empty_intersection():
    rule = boundary_quadrature(Halfspace((1.0, 0.0), 3.0), unit_cube(2), 8)
    assert len(rule) == 0


def test_boundary_weight_convergence_on_disk_window():
    # chord of the unit disk window cut by {x_2 < 0.3}
    exact = 2 * math.sqrt(1 - 0.09)
    rule = boundary_quadrature(Halfspace((0.0, 1.0), 0.3), DomainBall((0.0, 0.0), 1.0), 4)
    assert rule.total() == pytest.approx(exact, rel=1e-12)


def test_gaussian_volume_examples():
    r = gaussian_volume(Halfspace((1.0,), 0.0), FullSpace())
    assert r.value == pytest.approx(math.sqrt(2 * math.pi) / 2, abs=1e-10)
    r = gaussian_volume(Box((-6.0,), (6.0,)), FullSpace())
    assert r.value == pytest.approx(math.sqrt(2 * math.pi), abs=1e-7)
    r = gaussian_volume(Ball((0.0, 0.0), 1.0), FullSpace())
    assert r.value == pytest.approx(2 * math.pi * (1 - math.exp(-0.5)), rel=1e-10)


@pytest.mark.parametrize("region", [Halfspace((0.6, 0.8), 0.4), Ball((0.2, -0.1), 0.7)])
def test_gaussian_volume_complement_sum(region):
    a = gaussian_volume(region, FullSpace())
    b = gaussian_volume(complement(region), FullSpace())
    assert abs(a.value + b.value - 2 * math.pi) <= 2 * (a.error_estimate + b.error_estimate) + 1e-12


def test_halfspace_gaussian_measure():
    assert halfspace_gaussian_measure(0.0) == 0.5
    assert halfspace_gaussian_measure(40.0) == 1.0
    assert halfspace_gaussian_measure(1.0) == pytest.approx(0.8413447460685429, abs=1e-12)


@given(st.floats(-8, 8, allow_nan=False))
def test_halfspace_measure_symmetry(a):
    assert abs(halfspace_gaussian_measure(a) + halfspace_gaussian_measure(-a) - 1.0) <= 1e-14


def test_flow_translation_and_identity():
    H = Halfspace((0.0, 1.0), 0.0)
    rule = boundary_quadrature(H, unit_cube(2), 8)
    moved = flow_boundary(rule, Constant((0.0, 1.0)), 0.1)
    assert np.allclose(moved.points[:, 1], 0.1, atol=1e-13)
    assert np.allclose(moved.weights, rule.weights)
    assert flow_boundary(rule, Constant((0.0, 1.0)), 0.0) is rule


def test_flow_scaling_exact():
    rule = boundary_quadrature(Ball((0.0, 0.0), 1.0), FullSpace(), 16)
    moved = flow_boundary(rule, Scaling(), 0.2, steps=32)
    assert np.allclose(moved.points, math.exp(0.2) * rule.points, atol=1e-10)
    assert moved.total() == pytest.approx(2 * math.pi * math.exp(0.2), rel=1e-10)


def test_flow_normal_field_round_trip_improves_with_steps():
    E = Ball((0.0, 0.0), 1.0)
    rule = boundary_quadrature(E, FullSpace(), 8)
    X = NormalField(CoordinateMonomial(0, 1))
    errs = []
    for steps in (1, 4):
        fwd = flow_boundary(rule, X, 0.05, steps, region=E)
        back = flow_boundary(fwd, X, -0.05, steps, region=E)
        errs.append(np.max(np.abs(back.points - rule.points)))
    assert errs[1] <= errs[0] + 1e-15
    assert errs[1] < 1e-4


@pytest.mark.parametrize("region", [
    Halfspace((0.0, 1.0), 0.25), Ball((0.1, 0.2), 0.5), Box((0.0, 0.0), (1.0, 2.0)),
    complement(Ball((0.0,), 1.0)), Polytope((Halfspace((1.0, 0.0), 1.0), Halfspace((0.0, 1.0), 1.0))),
])
def test_region_round_trip(region):
    assert region_from_dict(region_to_dict(region)) == region


@pytest.mark.parametrize("domain", [unit_cube(2), DomainBall((0.0, 1.0), 2.0), FullSpace(6.0)])
def test_domain_round_trip(domain):
    assert domain_from_dict(domain_to_dict(domain)) == domain


def test_unknown_region_type():
    with pytest.raises(ValueError):
        region_from_dict({"type": "torus"})


def test_transforms():
    H = Halfspace((0.0, 1.0), 0.5)
    assert scale_region(H, 2.0).a == 1.0
    assert translate_region(H, (3.0, 1.0)).a == pytest.approx(1.5)
    R = rotation_matrix(2, math.pi / 2)
    Hr = rotate_region(H, R)
    assert np.allclose(Hr.omega, (-1.0, 0.0), atol=1e-15)
    assert isinstance(rotate_region(Box((0.0, 0.0), (1.0, 1.0)), R), Polytope)
