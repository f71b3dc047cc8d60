"""Nodal-set measurements: vanishing balls, glued sign-changing eigenfields,
zero-contour length, and the lambda^(1/p) scaling of the nodal length.

True second eigenfunctions are not computed for p != 2 (no reliable
variational algorithm); instead, on reflection-symmetric domains the first
eigenfunction of one half is extended by odd reflection.  The result is a
genuine sign-changing eigenfield whose nodal set is the symmetry axis, which
pins the nodal length exactly and makes the scaling family's slope -1/p
analytic rather than asymptotic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .eigensolver import ScalarField, SolveOptions, solve_first_eigen
from .errors import InvalidSpec, NoInteriorBall, NoSignChange, NotSymmetric
from .geometry import GridDomain, ShapeSpec, contour_length, rasterize_shape, scale_spec

__all__ = [
    "NodalMeasurement",
    "vanishing_ball_radius",
    "check_vanishing",
    "glued_antisymmetric_eigenpair",
    "nodal_length",
    "nodal_scaling_check",
    "zero_contours",
    "contours_to_csv",
]

_ZERO_TOL = 1e-9  # |u| below this fraction of max|u| counts as a zero cell


@dataclass
class NodalMeasurement:
    """Zero-set length of one sign-changing field."""

    length: float
    lam: float
    p: float
    contour_segments: int

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "lambda": self.lam,
            "p": self.p,
            "contour_segments": self.contour_segments,
        }


def vanishing_ball_radius(lam: float, p: float, lambda_ball1: float, safety: float) -> float:
    """Radius R = (C/lambda)^(1/p) with C = safety x lambda_1p(B_1)."""
    if lam <= 0:
        raise InvalidSpec("lambda must be positive")
    if safety <= 1:
        raise InvalidSpec("safety must exceed 1 so that C > lambda_1p(B_1)")
    return (safety * lambda_ball1 / lam) ** (1 / p)


def _zero_and_sign_change_cells(mask: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Cells that are zero (relative tolerance) or meet an opposite sign."""
    scale = float(np.max(np.abs(vals[mask]))) if mask.any() else 0.0
    tol = _ZERO_TOL * scale
    z = mask & (np.abs(vals) <= tol)
    for ax in range(mask.ndim):
        here = [slice(None)] * mask.ndim
        there = [slice(None)] * mask.ndim
        here[ax] = slice(0, -1)
        there[ax] = slice(1, None)
        here, there = tuple(here), tuple(there)
        flips = (
            mask[here]
            & mask[there]
            & (vals[here] * vals[there] < 0)
        )
        z[here] |= flips
        z[there] |= flips
    return z


def check_vanishing(d: GridDomain, u: ScalarField, R: float) -> bool:
    """Whether every grid-centered ball B_R inside the domain meets the zero set.

    A ball "meets the zero set" when it contains a cell of negligible value or
    a sign change across a cell edge; admissible centers are all cells whose
    ball stays inside the domain, enumerated at stride h.
    """
    h = d.h
    if R <= 2 * h:
        raise InvalidSpec("R must exceed 2h to be resolvable on the grid")
    inner = ndimage.distance_transform_edt(d.mask) * h - h / 2
    admissible = d.mask & (inner >= R)
    if not admissible.any():
        raise NoInteriorBall(f"no ball of radius {R:g} fits inside the domain")
    z = _zero_and_sign_change_cells(d.mask, u.values)
    if not z.any():
        return False
    dist_to_zero = ndimage.distance_transform_edt(~z) * h
    return bool(np.all(dist_to_zero[admissible] <= R))


def glued_antisymmetric_eigenpair(
    spec: ShapeSpec, p: float, h: float, opts: SolveOptions | None = None
):
    """First eigenpair of one reflection half, extended oddly across the axis.

    The half-problem takes Dirichlet data on the symmetry axis; the odd
    extension is then a weak eigenfield of the whole domain whose nodal set is
    exactly the axis section.  Returns (lambda, glued ScalarField).

    Cells whose centers fall within one spacing of the axis are clamped to
    zero (the discrete Dirichlet trace of the axis).  That places the cut wall
    of the half-problem exactly on the axis, so every difference term of the
    glued field matches a half-problem term one-to-one and the glued Rayleigh
    quotient reproduces the half-domain eigenvalue identically.
    """
    d = rasterize_shape(spec, h)
    m = d.mask
    if not np.array_equal(m, m[::-1, :]):
        raise NotSymmetric("domain is not mirror-symmetric across the first axis")
    xs = d.axis_coords(0)
    cx = (xs[0] + xs[-1]) / 2
    half = m & (xs >= cx + h * (1 - 1e-9))[:, None]
    if not half.any():
        raise NotSymmetric("no cells on the positive side of the symmetry axis")
    res = solve_first_eigen(GridDomain(half, h, d.origin), p, opts)
    v = np.where(half, res.field.values, 0.0)
    glued = v - v[::-1, :]
    return res.lam, ScalarField(glued, h)


def nodal_length(d: GridDomain, u: ScalarField, p: float = 2.0, lam: float | None = None) -> NodalMeasurement:
    """Marching-squares length of the zero contour of u inside the domain.

    The contour is taken at a tiny positive level (1e-9 of the field maximum)
    so exact zeros do not degenerate the interpolation.
    """
    vals = np.where(d.mask, u.values, 0.0)
    scale = float(np.max(np.abs(vals)))
    tol = _ZERO_TOL * scale
    if not ((vals > tol) & d.mask).any() or not ((vals < -tol) & d.mask).any():
        raise NoSignChange("field does not change sign inside the domain")
    length, count = contour_length(vals, tol, d.h, mask=d.mask)
    if lam is None:
        from .eigensolver import rayleigh_quotient

        lam = rayleigh_quotient(d, u, p)
    return NodalMeasurement(length=length, lam=lam, p=p, contour_segments=count)


def nodal_scaling_check(
    spec: ShapeSpec, p: float, scales, h: float = 1 / 64, opts: SolveOptions | None = None
) -> float:
    """Slope of log(nodal length) against log(lambda) over the dilation family.

    Each scaled copy is solved at proportional resolution h*t, so the discrete
    family inherits the exact continuum scaling lambda ~ t^-p, length ~ t and
    the fitted slope is -1/p up to rounding.
    """
    scales = [float(t) for t in scales]
    if len(scales) < 3:
        raise InvalidSpec("at least 3 scales are required for a slope fit")
    logs_lam = []
    logs_len = []
    for t in scales:
        sc = scale_spec(spec, t)
        lam, field = glued_antisymmetric_eigenpair(sc, p, h * t, opts)
        meas = nodal_length(rasterize_shape(sc, h * t), field, p, lam)
        logs_lam.append(np.log(lam))
        logs_len.append(np.log(meas.length))
    slope = np.polyfit(logs_lam, logs_len, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# contour export


def zero_contours(d: GridDomain, u: ScalarField) -> list:
    """Zero-level polylines of u in physical coordinates."""
    from skimage import measure

    vals = np.where(d.mask, u.values, 0.0)
    tol = _ZERO_TOL * float(np.max(np.abs(vals)))
    polys = []
    for poly in measure.find_contours(vals, tol, mask=d.mask):
        phys = np.empty_like(poly)
        phys[:, 0] = d.origin[0] + poly[:, 0] * d.h
        phys[:, 1] = d.origin[1] + poly[:, 1] * d.h
        polys.append(phys)
    return polys


def contours_to_csv(d: GridDomain, u: ScalarField) -> str:
    lines = ["x,y,segment_id"]
    for seg_id, poly in enumerate(zero_contours(d, u)):
        for x, y in poly:
            lines.append(f"{x:.12g},{y:.12g},{seg_id}")
    return "\n".join(lines) + "\n"
