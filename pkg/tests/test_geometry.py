import math

import numpy as np
import pytest

from pspec.errors import FeatureTooThin, InvalidSpec
from pspec.geometry import (
    GridDomain,
    ShapeSpec,
    geometry_summary,
    rasterize_ball,
    rasterize_shape,
    scale_spec,
    shape_label,
    spec_area,
)

H = 1 / 128


@pytest.fixture(scope="module")
def disk_summary():
    return geometry_summary(rasterize_shape(ShapeSpec.disk(1.0), H))


@pytest.fixture(scope="module")
def square_summary():
    return geometry_summary(rasterize_shape(ShapeSpec.square(1.0), H))


def test_disk_area_perimeter_inradius(disk_summary):
    s = disk_summary
    assert abs(s.area - math.pi) / math.pi < 0.01
    assert abs(s.perimeter - 2 * math.pi) / (2 * math.pi) < 0.03
    assert abs(s.inradius - 1.0) < 1.5 * H
    assert abs(s.circumradius - 1.0) < 1.5 * H
    assert s.connectivity == 1
    assert s.convex


def test_square_metrics(square_summary):
    s = square_summary
    assert abs(s.area - 1.0) < 0.01
    assert abs(s.perimeter - 4.0) < 0.12
    assert abs(s.inradius - 0.5) < 1.5 * H
    assert s.connectivity == 1
    assert s.convex


def test_square_reduced_inradius(square_summary):
    # rho = 1/2, |Omega| = 1: rho_tilde = rho / (1 + pi rho^2 / area) = 0.280050...
    expected = 0.5 / (1 + math.pi * 0.25)
    assert abs(square_summary.reduced_inradius - expected) < 2e-3


@pytest.mark.parametrize(
    "spec,k,convex",
    [
        (ShapeSpec.annulus(0.5, 1.0), 2, False),
        (ShapeSpec.ell_shape(1.0, 0.5), 1, False),
        (ShapeSpec.disk_with_holes(1.0, [(0.35, 0.0, 0.18)]), 2, False),
        (ShapeSpec.disk_with_holes(1.0, [(-0.4, -0.25, 0.15), (0.3, 0.3, 0.2)]), 3, False),
        (ShapeSpec.spiky_disk(0.6, 8, 0.12), 1, False),
        (ShapeSpec.rectangle(2.0, 1.0), 1, True),
    ],
)
def test_connectivity_and_convexity(spec, k, convex):
    s = geometry_summary(rasterize_shape(spec, 1 / 64))
    assert s.connectivity == k
    assert s.convex == convex


@pytest.mark.parametrize(
    "spec",
    [
        ShapeSpec.disk(1.0),
        ShapeSpec.square(1.0),
        ShapeSpec.annulus(0.5, 1.0),
        ShapeSpec.ell_shape(1.0, 0.5),
        ShapeSpec.spiky_disk(0.6, 8, 0.12),
    ],
)
def test_summary_invariants(spec):
    s = geometry_summary(rasterize_shape(spec, 1 / 64))
    assert s.inradius / 2 < s.reduced_inradius < s.inradius
    assert s.inradius <= s.circumradius
    assert math.pi * s.inradius**2 <= s.area * 1.01
    assert s.area <= math.pi * s.circumradius**2 * 1.01


def test_annulus_area():
    s = geometry_summary(rasterize_shape(ShapeSpec.annulus(0.5, 1.0), H))
    exact = math.pi * (1 - 0.25)
    assert abs(s.area - exact) / exact < 0.01


def test_rasterization_deterministic():
    a = rasterize_shape(ShapeSpec.ell_shape(1.0, 0.5), 1 / 64)
    b = rasterize_shape(ShapeSpec.ell_shape(1.0, 0.5), 1 / 64)
    assert np.array_equal(a.mask, b.mask)
    assert a.origin == b.origin


def test_scale_spec_dilates_metrics():
    base = geometry_summary(rasterize_shape(ShapeSpec.disk(0.5), 1 / 64))
    doubled = geometry_summary(rasterize_shape(scale_spec(ShapeSpec.disk(0.5), 2.0), 1 / 64))
    assert abs(doubled.inradius - 2 * base.inradius) < 3 / 64
    assert abs(doubled.area - 4 * base.area) / (4 * base.area) < 0.02


def test_spec_area_exact_values():
    assert spec_area(ShapeSpec.disk(1.0)) == pytest.approx(math.pi)
    assert spec_area(ShapeSpec.square(2.0)) == pytest.approx(4.0)
    assert spec_area(ShapeSpec.rectangle(2.0, 1.0)) == pytest.approx(2.0)
    assert spec_area(ShapeSpec.annulus(0.5, 1.0)) == pytest.approx(math.pi * 0.75)
    assert spec_area(ShapeSpec.ell_shape(1.0, 0.5)) == pytest.approx(0.75)
    tri = ShapeSpec.polygon([(0, 0), (1, 0), (0, 1)])
    assert spec_area(tri) == pytest.approx(0.5)
    holed = ShapeSpec.disk_with_holes(1.0, [(0.35, 0.0, 0.18)])
    assert spec_area(holed) == pytest.approx(math.pi * (1 - 0.18**2))
    assert spec_area(ShapeSpec.spiky_disk(0.6, 8, 0.12)) is None


def test_spec_area_matches_raster():
    spec = ShapeSpec.disk_with_holes(1.0, [(-0.4, -0.25, 0.15), (0.3, 0.3, 0.2)])
    s = geometry_summary(rasterize_shape(spec, H))
    assert abs(s.area - spec_area(spec)) / spec_area(spec) < 0.01


def test_shape_label_stable():
    spec = ShapeSpec.annulus(0.5, 1.0)
    assert shape_label(spec) == "annulus(r_in=0.5,r_out=1)"
    assert shape_label(spec) == shape_label(ShapeSpec.from_json(spec.to_json()))


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        ShapeSpec.annulus(1.0, 0.5)
    with pytest.raises(InvalidSpec):
        ShapeSpec.disk(-1.0)
    with pytest.raises(InvalidSpec):
        ShapeSpec.polygon([(0, 0), (1, 1), (1, 0), (0, 1)])  # bowtie
    with pytest.raises(InvalidSpec):
        ShapeSpec.disk_with_holes(1.0, [(0.9, 0.0, 0.3)])  # hole pokes out


def test_feature_too_thin():
    with pytest.raises(FeatureTooThin):
        rasterize_shape(ShapeSpec.disk(0.02), 1 / 64)
    with pytest.raises(FeatureTooThin):
        rasterize_ball(0.01, 0.01)


def test_grid_domain_margin_required():
    mask = np.ones((8, 8), dtype=bool)
    with pytest.raises(InvalidSpec):
        GridDomain(mask, 0.1, (0.0, 0.0))


def test_ball_3d_volume():
    d = rasterize_ball(1.0, 1 / 24, 3)
    vol = d.mask.sum() * d.h**3
    exact = 4 * math.pi / 3
    assert abs(vol - exact) / exact < 0.02
