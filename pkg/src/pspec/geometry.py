"""Rasterized domains, the shape catalog, and purely geometric quantities.

Domains are boolean occupancy grids: a cell is part of the open set iff its
center lies inside the ideal shape.  All boundary-sensitive quantities carry
half-cell corrections so that they converge under grid refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull
from skimage import measure

from .errors import DimensionUnsupported, FeatureTooThin, InvalidSpec

__all__ = [
    "GridDomain",
    "ShapeSpec",
    "GeometrySummary",
    "rasterize_shape",
    "rasterize_ball",
    "geometry_summary",
    "ball_deficiency",
    "schwarz_symmetrize",
    "shape_label",
    "scale_spec",
    "spec_area",
    "mask_perimeter",
    "mask_connectivity",
    "contour_length",
]

_MARGIN = 2  # false cells padded on every side of a rasterized shape


@dataclass
class GridDomain:
    """Bounded open set as a boolean occupancy grid.

    mask[i, j(, k)] is True iff the center of cell (i, j(, k)) lies in the set;
    the center of cell index ``ix`` along axis ``ax`` sits at
    ``origin[ax] + ix * h``.
    """

    mask: np.ndarray
    h: float
    origin: tuple

    def __post_init__(self):
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)
        self.origin = tuple(float(c) for c in self.origin)
        if self.h <= 0:
            raise InvalidSpec("grid spacing must be positive")
        if self.mask.ndim not in (2, 3):
            raise InvalidSpec("only 2D and 3D grids are supported")
        if len(self.origin) != self.mask.ndim:
            raise InvalidSpec("origin length must match grid dimension")
        if not self.mask.any():
            raise InvalidSpec("domain has no interior cells")
        for ax in range(self.mask.ndim):
            for edge in (0, -1):
                sl = [slice(None)] * self.mask.ndim
                sl[ax] = edge
                if self.mask[tuple(sl)].any():
                    raise InvalidSpec("mask must keep a one-cell false margin")

    @property
    def dim(self) -> int:
        return self.mask.ndim

    def axis_coords(self, ax: int) -> np.ndarray:
        """Physical coordinates of cell centers along one axis."""
        return self.origin[ax] + self.h * np.arange(self.mask.shape[ax])

    def cell_count(self) -> int:
        return int(np.count_nonzero(self.mask))


_VARIANT_PARAMS = {
    "disk": ("r",),
    "square": ("a",),
    "rectangle": ("a", "b"),
    "annulus": ("r_in", "r_out"),
    "ell_shape": ("a", "notch"),
    "polygon": ("vertices",),
    "spiky_disk": ("r", "n_spikes", "spike_width"),
    "disk_with_holes": ("r", "holes"),
}


@dataclass
class ShapeSpec:
    """Parametric description of a catalog shape, serializable to JSON."""

    variant: str
    params: dict

    def __post_init__(self):
        if self.variant not in _VARIANT_PARAMS:
            raise InvalidSpec(f"unknown shape variant {self.variant!r}")
        expected = set(_VARIANT_PARAMS[self.variant])
        got = set(self.params)
        if got != expected:
            raise InvalidSpec(
                f"{self.variant} expects parameters {sorted(expected)}, got {sorted(got)}"
            )
        v, q = self.variant, self.params
        if v == "disk" and q["r"] <= 0:
            raise InvalidSpec("disk radius must be positive")
        if v == "square" and q["a"] <= 0:
            raise InvalidSpec("square side must be positive")
        if v == "rectangle" and (q["a"] <= 0 or q["b"] <= 0):
            raise InvalidSpec("rectangle sides must be positive")
        if v == "annulus":
            if not 0 < q["r_in"] < q["r_out"]:
                raise InvalidSpec("annulus requires 0 < r_in < r_out")
        if v == "ell_shape":
            if q["a"] <= 0 or not 0 < q["notch"] < q["a"]:
                raise InvalidSpec("ell_shape requires 0 < notch < a")
        if v == "polygon":
            verts = [(float(x), float(y)) for x, y in q["vertices"]]
            if len(verts) < 3:
                raise InvalidSpec("polygon needs at least 3 vertices")
            if not _polygon_is_simple(verts):
                raise InvalidSpec("polygon must be simple (non-self-intersecting)")
            self.params = {"vertices": verts}
        if v == "spiky_disk":
            if q["r"] <= 0 or q["spike_width"] <= 0 or int(q["n_spikes"]) < 1:
                raise InvalidSpec("spiky_disk parameters must be positive")
            self.params = dict(q, n_spikes=int(q["n_spikes"]))
        if v == "disk_with_holes":
            holes = [(float(cx), float(cy), float(hr)) for cx, cy, hr in q["holes"]]
            if q["r"] <= 0 or any(hr <= 0 for _, _, hr in holes):
                raise InvalidSpec("disk and hole radii must be positive")
            for cx, cy, hr in holes:
                if math.hypot(cx, cy) + hr >= q["r"]:
                    raise InvalidSpec("every hole must lie strictly inside the disk")
            self.params = {"r": q["r"], "holes": holes}

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def disk(cls, r: float) -> "ShapeSpec":
        return cls("disk", {"r": float(r)})

    @classmethod
    def square(cls, a: float) -> "ShapeSpec":
        return cls("square", {"a": float(a)})

    @classmethod
    def rectangle(cls, a: float, b: float) -> "ShapeSpec":
        return cls("rectangle", {"a": float(a), "b": float(b)})

    @classmethod
    def annulus(cls, r_in: float, r_out: float) -> "ShapeSpec":
        return cls("annulus", {"r_in": float(r_in), "r_out": float(r_out)})

    @classmethod
    def ell_shape(cls, a: float, notch: float) -> "ShapeSpec":
        return cls("ell_shape", {"a": float(a), "notch": float(notch)})

    @classmethod
    def polygon(cls, vertices) -> "ShapeSpec":
        return cls("polygon", {"vertices": [tuple(v) for v in vertices]})

    @classmethod
    def spiky_disk(cls, r: float, n_spikes: int, spike_width: float) -> "ShapeSpec":
        return cls(
            "spiky_disk",
            {"r": float(r), "n_spikes": int(n_spikes), "spike_width": float(spike_width)},
        )

    @classmethod
    def disk_with_holes(cls, r: float, holes) -> "ShapeSpec":
        return cls("disk_with_holes", {"r": float(r), "holes": [tuple(hh) for hh in holes]})

    # -- JSON ----------------------------------------------------------------------
    def to_json(self) -> dict:
        out = {"variant": self.variant}
        for key in _VARIANT_PARAMS[self.variant]:
            val = self.params[key]
            if key == "vertices":
                val = [[float(x), float(y)] for x, y in val]
            elif key == "holes":
                val = [[float(cx), float(cy), float(hr)] for cx, cy, hr in val]
            out[key] = val
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ShapeSpec":
        if "variant" not in obj:
            raise InvalidSpec("shape object lacks a 'variant' key")
        variant = obj["variant"]
        if variant not in _VARIANT_PARAMS:
            raise InvalidSpec(f"unknown shape variant {variant!r}")
        params = {}
        for key in _VARIANT_PARAMS[variant]:
            if key not in obj:
                raise InvalidSpec(f"{variant} shape object lacks parameter {key!r}")
            params[key] = obj[key]
        return cls(variant, params)


@dataclass
class GeometrySummary:
    """All scalar geometric quantities entering the bounds."""

    area: float
    perimeter: float
    inradius: float
    reduced_inradius: float
    circumradius: float
    connectivity: int
    convex: bool

    def to_json(self) -> dict:
        return {
            "area": self.area,
            "perimeter": self.perimeter,
            "inradius": self.inradius,
            "reduced_inradius": self.reduced_inradius,
            "circumradius": self.circumradius,
            "connectivity": self.connectivity,
            "convex": self.convex,
        }


def shape_label(spec: ShapeSpec) -> str:
    """Stable human-readable identifier used for caching and report rows."""
    parts = []
    for key in _VARIANT_PARAMS[spec.variant]:
        val = spec.params[key]
        if key == "vertices":
            parts.append(f"n={len(val)}")
        elif key == "holes":
            parts.append(f"holes={len(val)}")
        else:
            parts.append(f"{key}={val:g}" if isinstance(val, float) else f"{key}={val}")
    return f"{spec.variant}({','.join(parts)})"


def scale_spec(spec: ShapeSpec, t: float) -> ShapeSpec:
    """Dilate a shape specification by factor t > 0 about the origin."""
    if t <= 0:
        raise InvalidSpec("scale factor must be positive")
    v, q = spec.variant, spec.params
    if v == "polygon":
        return ShapeSpec.polygon([(t * x, t * y) for x, y in q["vertices"]])
    if v == "disk_with_holes":
        return ShapeSpec.disk_with_holes(
            t * q["r"], [(t * cx, t * cy, t * hr) for cx, cy, hr in q["holes"]]
        )
    if v == "spiky_disk":
        return ShapeSpec.spiky_disk(t * q["r"], q["n_spikes"], t * q["spike_width"])
    return ShapeSpec(v, {k: t * val for k, val in q.items()})


def spec_area(spec: ShapeSpec) -> float | None:
    """Exact measure of the ideal shape, or None when no closed form exists.

    Hole disks are assumed disjoint (checked at construction for containment).
    The spiky disk's spike/circle overlap lenses have no simple closed form.
    """
    v, q = spec.variant, spec.params
    if v == "disk":
        return math.pi * q["r"] ** 2
    if v == "square":
        return q["a"] ** 2
    if v == "rectangle":
        return q["a"] * q["b"]
    if v == "annulus":
        return math.pi * (q["r_out"] ** 2 - q["r_in"] ** 2)
    if v == "ell_shape":
        return q["a"] ** 2 - q["notch"] ** 2
    if v == "polygon":
        verts = q["vertices"]
        s = 0.0
        for (x1, y1), (x2, y2) in zip(verts, verts[1:] + verts[:1]):
            s += x1 * y2 - x2 * y1
        return abs(s) / 2
    if v == "disk_with_holes":
        return math.pi * (q["r"] ** 2 - sum(hr**2 for _, _, hr in q["holes"]))
    return None


# ---------------------------------------------------------------------------
# rasterization


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or touching intersection of open segments p1p2 and p3p4."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    for d, a, b, c in ((d1, p3, p4, p1), (d2, p3, p4, p2), (d3, p1, p2, p3), (d4, p1, p2, p4)):
        if d == 0 and on_seg(a, b, c):
            return True
    return False


def _polygon_is_simple(verts) -> bool:
    m = len(verts)
    for i in range(m):
        a1, a2 = verts[i], verts[(i + 1) % m]
        for j in range(i + 1, m):
            if j == i or (j + 1) % m == i or (i + 1) % m == j:
                continue  # shared endpoints are fine
            b1, b2 = verts[j], verts[(j + 1) % m]
            if _segments_intersect(a1, a2, b1, b2):
                return False
    return True


def _points_in_polygon(X, Y, verts):
    """Even-odd crossing test, vectorized over the coordinate arrays."""
    inside = np.zeros(X.shape, dtype=bool)
    m = len(verts)
    for i in range(m):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % m]
        crosses = (y1 > Y) != (y2 > Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = x1 + (Y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (X < xs)
    return inside


def _shape_geometry(spec: ShapeSpec):
    """Bounding box and point-inclusion predicate of the ideal shape."""
    v, q = spec.variant, spec.params
    if v == "disk":
        r = q["r"]
        return (-r, r, -r, r), lambda X, Y: X * X + Y * Y <= r * r
    if v == "square":
        a2 = q["a"] / 2
        return (-a2, a2, -a2, a2), lambda X, Y: (np.abs(X) <= a2) & (np.abs(Y) <= a2)
    if v == "rectangle":
        a2, b2 = q["a"] / 2, q["b"] / 2
        return (-a2, a2, -b2, b2), lambda X, Y: (np.abs(X) <= a2) & (np.abs(Y) <= b2)
    if v == "annulus":
        ri, ro = q["r_in"], q["r_out"]

        def inside(X, Y):
            rho2 = X * X + Y * Y
            return (rho2 <= ro * ro) & (rho2 > ri * ri)

        return (-ro, ro, -ro, ro), inside
    if v == "ell_shape":
        a2, notch = q["a"] / 2, q["notch"]

        def inside(X, Y):
            in_square = (np.abs(X) <= a2) & (np.abs(Y) <= a2)
            in_notch = (X > a2 - notch) & (Y > a2 - notch)
            return in_square & ~in_notch

        return (-a2, a2, -a2, a2), inside
    if v == "polygon":
        verts = q["vertices"]
        xs = [p[0] for p in verts]
        ys = [p[1] for p in verts]
        return (
            (min(xs), max(xs), min(ys), max(ys)),
            lambda X, Y: _points_in_polygon(X, Y, verts),
        )
    if v == "spiky_disk":
        r, n_spikes, w = q["r"], q["n_spikes"], q["spike_width"]
        tip = 1.5 * r  # spikes reach 50% beyond the base circle
        reach = tip + w / 2

        def inside(X, Y):
            out = X * X + Y * Y <= r * r
            for j in range(n_spikes):
                theta = 2 * math.pi * j / n_spikes
                ux, uy = math.cos(theta), math.sin(theta)
                t = np.clip(X * ux + Y * uy, 0.0, tip)
                d2 = (X - t * ux) ** 2 + (Y - t * uy) ** 2
                out |= (d2 <= (w / 2) ** 2) & (X * ux + Y * uy >= 0)
            return out

        return (-reach, reach, -reach, reach), inside
    if v == "disk_with_holes":
        r, holes = q["r"], q["holes"]

        def inside(X, Y):
            out = X * X + Y * Y <= r * r
            for cx, cy, hr in holes:
                out &= (X - cx) ** 2 + (Y - cy) ** 2 > hr * hr
            return out

        return (-r, r, -r, r), inside
    raise InvalidSpec(f"unknown shape variant {v!r}")


def _check_feature_scale(spec: ShapeSpec, h: float):
    v, q = spec.variant, spec.params
    thin = []
    if v == "disk":
        thin.append(("diameter", 2 * q["r"]))
    elif v == "square":
        thin.append(("side", q["a"]))
    elif v == "rectangle":
        thin.append(("shorter side", min(q["a"], q["b"])))
    elif v == "annulus":
        thin.append(("annulus width", q["r_out"] - q["r_in"]))
        thin.append(("hole diameter", 2 * q["r_in"]))
    elif v == "ell_shape":
        thin.append(("remaining arm", q["a"] - q["notch"]))
        thin.append(("notch", q["notch"]))
    elif v == "spiky_disk":
        thin.append(("spike width", q["spike_width"]))
    elif v == "disk_with_holes":
        for cx, cy, hr in q["holes"]:
            thin.append(("hole diameter", 2 * hr))
            thin.append(("rim width", q["r"] - (math.hypot(cx, cy) + hr)))
    for name, width in thin:
        if width < 3 * h:
            raise FeatureTooThin(
                f"{shape_label(spec)}: {name} = {width:g} spans fewer than 3 cells at h = {h:g}"
            )


def rasterize_shape(spec: ShapeSpec, h: float) -> GridDomain:
    """Rasterize a shape by the cell-center inclusion rule.

    The cell lattice is centered on the shape's bounding box, so symmetric
    shapes produce mirror-symmetric masks, and a two-cell false margin is
    padded around the occupied region.
    """
    if h <= 0:
        raise InvalidSpec("spacing must be positive")
    _check_feature_scale(spec, h)
    (xmin, xmax, ymin, ymax), inside = _shape_geometry(spec)
    coords = []
    for lo, hi in ((xmin, xmax), (ymin, ymax)):
        n = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
        c = (lo + hi) / 2
        offs = (np.arange(n + 2 * _MARGIN) - (n + 2 * _MARGIN - 1) / 2) * h
        coords.append(c + offs)
    X, Y = np.meshgrid(coords[0], coords[1], indexing="ij")
    mask = inside(X, Y)
    if not mask.any():
        raise FeatureTooThin(f"{shape_label(spec)}: no cell center falls inside at h = {h:g}")
    return GridDomain(mask, h, (coords[0][0], coords[1][0]))


def rasterize_ball(r: float, h: float, dim: int = 2) -> GridDomain:
    """Rasterize a centered ball in 2 or 3 dimensions."""
    if dim not in (2, 3):
        raise DimensionUnsupported("balls are rasterized in 2 or 3 dimensions only")
    if r <= 0:
        raise InvalidSpec("ball radius must be positive")
    if 2 * r < 3 * h:
        raise FeatureTooThin(f"ball diameter {2 * r:g} spans fewer than 3 cells at h = {h:g}")
    n = max(1, int(math.ceil(2 * r / h - 1e-9)))
    offs = (np.arange(n + 2 * _MARGIN) - (n + 2 * _MARGIN - 1) / 2) * h
    grids = np.meshgrid(*([offs] * dim), indexing="ij")
    rho2 = sum(g * g for g in grids)
    return GridDomain(rho2 <= r * r, h, (offs[0],) * dim)


# ---------------------------------------------------------------------------
# contour length and derived quantities


def contour_length(field: np.ndarray, level: float, h: float, mask: np.ndarray | None = None):
    """Total length of the iso-contours of a 2D field, and their count."""
    total = 0.0
    count = 0
    for poly in measure.find_contours(field, level, mask=mask):
        if len(poly) < 2:
            continue
        seg = np.diff(poly, axis=0)
        total += float(np.sum(np.hypot(seg[:, 0], seg[:, 1])))
        count += 1
    return total * h, count


def _node_average(mask: np.ndarray) -> np.ndarray:
    """Cell indicator averaged onto the corner-node grid (zero-padded outside)."""
    f = np.pad(mask.astype(np.float64), 1)
    return 0.25 * (f[:-1, :-1] + f[1:, :-1] + f[:-1, 1:] + f[1:, 1:])


def mask_perimeter(mask: np.ndarray, h: float) -> float:
    """Boundary length of a cell mask via the half-level contour of its
    node-averaged indicator.

    Averaging onto nodes before contouring removes most of the stair-step
    overestimate of contouring the raw binary image.
    """
    if mask.ndim != 2:
        raise DimensionUnsupported("perimeter is computed for 2D masks only")
    if not mask.any():
        return 0.0
    length, _ = contour_length(_node_average(mask), 0.5, h)
    return length


_CROSS = ndimage.generate_binary_structure(2, 1)


def mask_connectivity(mask: np.ndarray) -> int:
    """Connectivity k = 1 + number of holes = number of complement components.

    The complement is labeled with 4-connectivity; the false margin guarantees
    the unbounded background is a single component, so any further components
    are holes.
    """
    if mask.ndim != 2:
        raise DimensionUnsupported("connectivity is computed for 2D masks only")
    _, n = ndimage.label(~mask, structure=_CROSS)
    return int(n)


def _min_enclosing_circle(points: np.ndarray):
    """Exact smallest enclosing circle (Welzl's algorithm on hull vertices)."""

    def circle_two(a, b):
        c = (a + b) / 2
        return c, float(np.linalg.norm(a - c))

    def circle_three(a, b, c):
        ax, ay = a
        bx, by = b
        cx, cy = c
        d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-300:
            return None
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
        center = np.array([ux, uy])
        return center, float(np.linalg.norm(a - center))

    def contains(circ, p, tol=1e-9):
        c, r = circ
        return np.linalg.norm(p - c) <= r * (1 + tol) + 1e-12

    rng = np.random.default_rng(12345)  # fixed seed: deterministic output
    pts = points[rng.permutation(len(points))]
    c = (pts[0].copy(), 0.0)
    for i in range(1, len(pts)):
        if contains(c, pts[i]):
            continue
        c = (pts[i].copy(), 0.0)
        for j in range(i):
            if contains(c, pts[j]):
                continue
            c = circle_two(pts[i], pts[j])
            for k in range(j):
                if contains(c, pts[k]):
                    continue
                cc = circle_three(pts[i], pts[j], pts[k])
                if cc is not None:
                    c = cc
    return c


def _true_cell_points(d: GridDomain) -> np.ndarray:
    idx = np.argwhere(d.mask)
    return np.asarray(d.origin) + idx * d.h


def _hull_points(points: np.ndarray) -> np.ndarray:
    if len(points) <= 4:
        return points
    try:
        hull = ConvexHull(points)
    except Exception:  # degenerate (collinear) point sets
        return points
    return points[hull.vertices]


def _is_convex(d: GridDomain) -> bool:
    """Mask equals the rasterization of its own convex hull up to one cell layer."""
    pts = _true_cell_points(d)
    hull = _hull_points(pts)
    if len(hull) < 3:
        return True
    X, Y = np.meshgrid(d.axis_coords(0), d.axis_coords(1), indexing="ij")
    # shrink the hull slightly so aliasing along straight edges is forgiven
    centroid = hull.mean(axis=0)
    shrunk = centroid + (hull - centroid) * (1 - 1e-12)
    hull_mask = _points_in_polygon(X, Y, [tuple(v) for v in shrunk])
    dilated = ndimage.binary_dilation(d.mask, structure=np.ones((3, 3), bool))
    return bool(np.all(~hull_mask | dilated))


def geometry_summary(d: GridDomain) -> GeometrySummary:
    """Compute every geometric quantity appearing in the bounds (2D grids)."""
    if d.dim != 2:
        raise DimensionUnsupported("geometry summaries are defined for 2D grids")
    h = d.h
    area = d.cell_count() * h * h
    perimeter = mask_perimeter(d.mask, h)
    edt = ndimage.distance_transform_edt(d.mask)
    inradius = max(float(edt.max()) * h - h / 2, h / 2)
    reduced = inradius / (1 + math.pi * inradius**2 / area)
    pts = _true_cell_points(d)
    _, r_mec = _min_enclosing_circle(_hull_points(pts))
    circumradius = r_mec + h / 2
    return GeometrySummary(
        area=area,
        perimeter=perimeter,
        inradius=inradius,
        reduced_inradius=reduced,
        circumradius=circumradius,
        connectivity=mask_connectivity(d.mask),
        convex=_is_convex(d),
    )


def ball_deficiency(d: GridDomain, center, r: float) -> float:
    """Measure of B_r(center) \\ domain, by cell counting on the grid lattice.

    The lattice extends virtually beyond the stored array; cells outside the
    array are outside the domain and count fully toward the deficiency.
    """
    if r <= 0:
        raise InvalidSpec("ball radius must be positive")
    h = d.h
    center = tuple(float(c) for c in center)
    n_ball = 0
    n_covered = 0
    ranges = []
    for ax in range(d.dim):
        lo = int(math.floor((center[ax] - r - d.origin[ax]) / h)) - 1
        hi = int(math.ceil((center[ax] + r - d.origin[ax]) / h)) + 1
        ranges.append(np.arange(lo, hi + 1))
    grids = np.meshgrid(*[d.origin[ax] + ranges[ax] * h for ax in range(d.dim)], indexing="ij")
    in_ball = sum((g - c) ** 2 for g, c in zip(grids, center)) <= r * r
    n_ball = int(in_ball.sum())
    # cells of the window that exist in the stored array
    index_grids = np.meshgrid(*ranges, indexing="ij")
    valid = np.ones(in_ball.shape, dtype=bool)
    for ax in range(d.dim):
        valid &= (index_grids[ax] >= 0) & (index_grids[ax] < d.mask.shape[ax])
    if valid.any():
        flat = np.zeros(in_ball.shape, dtype=bool)
        sel = tuple(ig[valid] for ig in index_grids)
        flat[valid] = d.mask[sel]
        n_covered = int(np.count_nonzero(flat & in_ball))
    return (n_ball - n_covered) * h**d.dim


def schwarz_symmetrize(d: GridDomain) -> GridDomain:
    """The centered disk of the same area, rasterized at the same spacing."""
    if d.dim != 2:
        raise DimensionUnsupported("symmetrization is implemented for 2D grids")
    area = d.cell_count() * d.h * d.h
    return rasterize_shape(ShapeSpec.disk(math.sqrt(area / math.pi)), d.h)
