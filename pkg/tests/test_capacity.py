import math

import numpy as np
import pytest

from pspec.capacity import (
    ball_capacity_exact,
    capacity_radius,
    covering_multiplicity_bound,
    is_negligible,
    isocapacity_lower_bound,
    lieb_radius,
    lieb_sigma,
    p_capacity,
    sphere_area,
    unit_ball_volume,
)
from pspec.errors import (
    ConformalCase,
    DomainError,
    ExponentOutOfRange,
    InvalidExponent,
    InvalidSpec,
)
from pspec.geometry import GridDomain, ShapeSpec, rasterize_ball, rasterize_shape

J01_SQ = 5.783185962946785


def test_sphere_area_and_volume():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_ball_capacity_exact_values():
    assert ball_capacity_exact(1.0, 3, 2.0) == pytest.approx(4 * math.pi)
    assert ball_capacity_exact(1.0, 2, 1.5) == pytest.approx(2 * math.pi)
    # scaling r^(n-p)
    assert ball_capacity_exact(2.0, 3, 2.0) == pytest.approx(8 * math.pi)


def test_ball_capacity_exact_errors():
    with pytest.raises(ConformalCase):
        ball_capacity_exact(1.0, 2, 2.0)
    with pytest.raises(InvalidExponent):
        ball_capacity_exact(1.0, 3, 1.0)
    with pytest.raises(InvalidSpec):
        ball_capacity_exact(0.0, 3, 2.0)


def test_isocapacity_equality_on_balls():
    for n, p, r in ((3, 2.0, 1.0), (3, 1.5, 0.7), (2, 1.5, 1.3)):
        vol = unit_ball_volume(n) * r**n
        assert isocapacity_lower_bound(vol, n, p) == pytest.approx(
            ball_capacity_exact(r, n, p), rel=1e-12
        )
    with pytest.raises(ExponentOutOfRange):
        isocapacity_lower_bound(1.0, 2, 2.0)


def test_lieb_sigma_oracle():
    assert lieb_sigma(2, 2.0, 0.5, J01_SQ) == pytest.approx(0.31583911512412555)
    # shrinking alpha strengthens the constant
    assert lieb_sigma(2, 2.0, 0.25, J01_SQ) > lieb_sigma(2, 2.0, 0.5, J01_SQ)
    with pytest.raises(InvalidSpec):
        lieb_sigma(2, 2.0, 1.0, J01_SQ)


def test_covering_multiplicity():
    assert covering_multiplicity_bound(2) == pytest.approx(
        2 * math.log(2) + 2 * math.log(math.log(2)) + 10
    )
    assert covering_multiplicity_bound(3) > covering_multiplicity_bound(2)
    with pytest.raises(DomainError):
        covering_multiplicity_bound(1)


def test_is_negligible_gamma_validation():
    assert is_negligible(0.0, 1.0, 2, 1.5, 0.5)
    with pytest.raises(InvalidSpec):
        is_negligible(1.0, 1.0, 2, 1.5, 1.0)


def test_grid_capacity_2d_oracle(ball2d_cap):
    exact = 2 * math.pi
    assert abs(ball2d_cap.value - exact) / exact < 0.05
    assert ball2d_cap.p == 1.5
    assert ball2d_cap.n == 2


def test_grid_capacity_3d_oracle(ball3d_cap):
    exact = 4 * math.pi
    assert abs(ball3d_cap.value - exact) / exact < 0.05
    assert ball3d_cap.n == 3


def test_capacity_monotone_in_radius():
    small = p_capacity(rasterize_ball(0.5, 1 / 32, 2), 1.5)
    big = p_capacity(rasterize_ball(1.0, 2 / 32, 2), 1.5)
    assert big.value > small.value


def test_box_truncation_decays():
    # enlarging the box can only lower the trapped-wall overestimate
    d = rasterize_ball(1.0, 1 / 16, 2)
    c8 = p_capacity(d, 1.5, box_factor=8.0)
    c16 = p_capacity(d, 1.5, box_factor=16.0)
    assert c16.value <= c8.value * 1.005


def test_capacity_p_above_n():
    # p > n: no far-field correction branch; value still positive and finite
    res = p_capacity(rasterize_ball(1.0, 1 / 16, 2), 3.0)
    assert res.value > 0
    assert math.isfinite(res.value)


def test_empty_domain_rejected_at_construction():
    mask = np.zeros((12, 12), dtype=bool)
    with pytest.raises(InvalidSpec):
        GridDomain(mask, 0.1, (0.0, 0.0))


def test_capacity_exponent_validation():
    d = rasterize_ball(0.5, 1 / 16, 2)
    with pytest.raises(InvalidExponent):
        p_capacity(d, 1.0)
    with pytest.raises(InvalidSpec):
        p_capacity(d, 1.5, box_factor=2.0)


def test_capacity_radius_disk():
    d = rasterize_shape(ShapeSpec.disk(1.0), 1 / 32)
    rc = capacity_radius(d, 0.5, 1.5)
    assert rc.radius >= 1 - 2 / 32
    assert rc.kind == "capacity_gamma"
    assert rc.parameter == 0.5


def test_capacity_radius_monotone_in_gamma():
    d = rasterize_shape(ShapeSpec.square(1.0), 1 / 32)
    loose = capacity_radius(d, 0.7, 1.5)
    tight = capacity_radius(d, 0.3, 1.5)
    assert loose.radius >= tight.radius - 1e-12


def test_capacity_radius_exponent_gate():
    d = rasterize_shape(ShapeSpec.disk(1.0), 1 / 32)
    with pytest.raises(ExponentOutOfRange):
        capacity_radius(d, 0.5, 2.0)
    with pytest.raises(InvalidSpec):
        capacity_radius(d, 1.5, 1.5)


def test_lieb_radius_disk_half_measure():
    # alpha = 1/2 on the unit disk admits radius sqrt(2): the escaping half
    # of the concentric sqrt(2)-ball is exactly half its measure
    d = rasterize_shape(ShapeSpec.disk(1.0), 1 / 64)
    rl = lieb_radius(d, 0.5)
    assert abs(rl.radius - math.sqrt(2)) / math.sqrt(2) < 0.03
    assert rl.kind == "lieb_alpha"


def test_lieb_radius_monotone_in_alpha():
    d = rasterize_shape(ShapeSpec.square(1.0), 1 / 32)
    r_small = lieb_radius(d, 0.1)
    r_big = lieb_radius(d, 0.6)
    assert r_big.radius >= r_small.radius
    # alpha -> 0 forces the ball inside: bounded by the inradius plus slack
    assert r_small.radius <= 0.5 + 3 / 32


def test_lieb_radius_alpha_validation():
    d = rasterize_shape(ShapeSpec.disk(1.0), 1 / 32)
    with pytest.raises(InvalidSpec):
        lieb_radius(d, 0.0)
    with pytest.raises(InvalidSpec):
        lieb_radius(d, 1.0)


def test_radius_results_serializable():
    d = rasterize_shape(ShapeSpec.disk(1.0), 1 / 32)
    obj = lieb_radius(d, 0.5).to_json()
    assert set(obj) == {"radius", "center", "kind", "parameter"}
