import pytest

from pspec.capacity import p_capacity
from pspec.geometry import rasterize_ball


@pytest.fixture(scope="session")
def ball2d_cap():
    """Grid capacity of the unit disk at p = 1.5 (exact value 2*pi)."""
    d = rasterize_ball(1.0, 2 / 64, 2)
    return p_capacity(d, 1.5, box_factor=8.0)


@pytest.fixture(scope="session")
def ball3d_cap():
    """Grid capacity of the unit 3-ball at p = 2 (exact value 4*pi)."""
    d = rasterize_ball(1.0, 2 / 24, 3)
    return p_capacity(d, 2.0, box_factor=8.0)
