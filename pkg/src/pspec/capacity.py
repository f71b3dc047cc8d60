"""Variational p-capacity, explicit ball capacities, and interior radius searches.

Whole-space capacities are approximated by clamped minimization on a bounded
box (side = box_factor x set diameter, zero boundary data).  The box truncation
overestimates the whole-space value, and the overestimate decays as box_factor
grows; for p < n the known power-law far field of the capacitary potential is
used to deflate the box value toward the whole-space one while staying above
it (the effective Dirichlet radius used is the box circumradius, which is
never exceeded by the true one).

Radius searches (interior capacity radius, Lieb radius) enumerate centers on a
stride-2h subgrid and bisect radii to half-cell resolution; ball coverage
counts come from one FFT convolution per probed radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla
from scipy.signal import fftconvolve

from .errors import (
    ConformalCase,
    DomainError,
    EmptySet,
    ExponentOutOfRange,
    InvalidExponent,
    InvalidSpec,
    NonConvergence,
)
from .eigensolver import _divergence, _gradients, grad_norm_sq, laplacian_matrix
from .geometry import GridDomain

__all__ = [
    "CapacityResult",
    "RadiusSearchResult",
    "p_capacity",
    "ball_capacity_exact",
    "isocapacity_lower_bound",
    "is_negligible",
    "capacity_radius",
    "lieb_radius",
    "lieb_sigma",
    "covering_multiplicity_bound",
]


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass
class CapacityResult:
    """Converged capacity estimate with its computational-box provenance."""

    value: float
    p: float
    n: int
    box_factor: float
    iterations: int
    residual: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "n": self.n,
            "box_factor": self.box_factor,
            "iterations": self.iterations,
            "residual": self.residual,
        }


@dataclass
class RadiusSearchResult:
    """Largest verified radius of a center/radius search."""

    radius: float
    center: tuple
    kind: str  # "capacity_gamma" or "lieb_alpha"
    parameter: float

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "center": list(self.center),
            "kind": self.kind,
            "parameter": self.parameter,
        }


# ---------------------------------------------------------------------------
# closed-form quantities


def ball_capacity_exact(r: float, n: int, p: float) -> float:
    """cap_p of the closed ball of radius r in R^n."""
    if p <= 1:
        raise InvalidExponent("ball capacity formula requires p > 1")
    if p == n:
        raise ConformalCase("the explicit ball formula is invalid at p = n")
    if r <= 0:
        raise InvalidSpec("ball radius must be positive")
    return r ** (n - p) * sphere_area(n) * (abs(n - p) / (p - 1)) ** (p - 1)


def isocapacity_lower_bound(volume: float, n: int, p: float) -> float:
    """Sharp lower bound on cap_p(F) in terms of |F|; equality for balls."""
    if not 1 < p < n:
        raise ExponentOutOfRange(f"isocapacity bound requires 1 < p < n, got p = {p}, n = {n}")
    if volume < 0:
        raise InvalidSpec("volume must be nonnegative")
    return (
        sphere_area(n) ** (p / n)
        * n ** ((n - p) / n)
        * ((n - p) / (p - 1)) ** (p - 1)
        * volume ** ((n - p) / n)
    )


def is_negligible(F_cap: float, r: float, n: int, p: float, gamma: float) -> bool:
    """Whether a capacity is at most gamma times the ball capacity at radius r."""
    if not 0 < gamma < 1:
        raise InvalidSpec("gamma must lie in (0, 1)")
    return F_cap <= gamma * ball_capacity_exact(r, n, p)


def lieb_sigma(n: int, p: float, alpha: float, lambda_ball1: float) -> float:
    """Dimensionless constant of the almost-inscribed-ball lower bound.

    Evaluated at the unit ball: sigma = lambda_1p(B_1) |B_1|^(-p/n)
    (alpha^(-1/n) - 1)^p, which makes the bound scale-invariant.
    """
    if not 0 < alpha < 1:
        raise InvalidSpec("alpha must lie in (0, 1)")
    return lambda_ball1 * unit_ball_volume(n) ** (-p / n) * (alpha ** (-1 / n) - 1) ** p


def covering_multiplicity_bound(n: int) -> float:
    """Upper bound n ln n + n ln ln n + 5n on the ball-covering multiplicity."""
    if n < 2:
        raise DomainError("covering bound is defined for n >= 2")
    return n * math.log(n) + n * math.log(math.log(n)) + 5 * n


# ---------------------------------------------------------------------------
# clamped box minimization


def _box_embed(F: GridDomain, box_factor: float):
    """Plant the compact set in a cube of side box_factor x diam(F)."""
    cells = np.argwhere(F.mask)
    if cells.shape[0] == 0:
        raise EmptySet("capacity of an empty set is requested")
    h = F.h
    lo = cells.min(axis=0)
    hi = cells.max(axis=0)
    span = hi - lo + 1
    pts = cells * h
    if len(pts) > 2000:
        # pairwise distances only over the index-bbox boundary cells
        on_edge = np.any((cells == lo) | (cells == hi), axis=1)
        pts = pts[on_edge]
    d2 = np.max(
        np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    ) if len(pts) > 1 else 0.0
    diam = math.sqrt(float(d2)) + h  # physical extent includes the cell width
    nb = int(math.ceil(box_factor * diam / h))
    nb = max(nb, int(span.max()) + 4)
    shape = (nb,) * F.dim
    mask = np.zeros(shape, dtype=bool)
    offset = [(nb - int(span[ax])) // 2 for ax in range(F.dim)]
    mask[tuple((cells - lo + offset).T)] = True
    return mask, diam, nb


def _border_mask(shape) -> np.ndarray:
    border = np.zeros(shape, dtype=bool)
    for ax in range(len(shape)):
        sl = [slice(None)] * len(shape)
        for edge in (0, -1):
            sl[ax] = edge
            border[tuple(sl)] = True
    return border


def _radial_init(mask_f, border, h, n, p, r_inner, r_outer):
    """Radial p-harmonic profile between the set scale and the box wall."""
    center = (np.array(mask_f.shape) - 1) / 2
    grids = np.meshgrid(*[np.arange(s) for s in mask_f.shape], indexing="ij")
    rho = np.sqrt(sum((g - c) ** 2 for g, c in zip(grids, center))) * h
    rho = np.maximum(rho, r_inner * 0.5)
    kappa = (n - p) / (p - 1)
    if abs(kappa) > 1e-12:
        prof = (rho**-kappa - r_outer**-kappa) / (r_inner**-kappa - r_outer**-kappa)
    else:
        prof = np.log(r_outer / rho) / np.log(r_outer / r_inner)
    u = np.clip(prof, 0.0, 1.0)
    u[mask_f] = 1.0
    u[border] = 0.0
    return u


def _apply_laplace(v: np.ndarray) -> np.ndarray:
    """Unscaled (2*ndim)-point graph Laplacian on the full box array."""
    out = 2.0 * v.ndim * v
    for ax in range(v.ndim):
        pre = (slice(None),) * ax
        out[pre + (slice(1, None),)] -= v[pre + (slice(0, -1),)]
        out[pre + (slice(0, -1),)] -= v[pre + (slice(1, None),)]
    return out


def _cg_laplace(free: np.ndarray, b_full: np.ndarray, tol: float, max_iter: int):
    """Conjugate gradients for the Dirichlet Laplacian on the free cells."""
    x = np.zeros_like(b_full)
    r = b_full.copy()
    r[~free] = 0.0
    pvec = r.copy()
    rs = float(np.sum(r * r))
    rs0 = rs
    it = 0
    while rs > tol * tol * rs0 and it < max_iter:
        ap = _apply_laplace(pvec)
        ap[~free] = 0.0
        alpha = rs / float(np.sum(pvec[free] * ap[free]))
        x += alpha * pvec
        r -= alpha * ap
        rs_new = float(np.sum(r * r))
        pvec = r + (rs_new / rs) * pvec
        pvec[~free] = 0.0
        rs = rs_new
        it += 1
    return x, it, math.sqrt(rs / rs0) if rs0 > 0 else 0.0


_DIRECT_LIMIT = {2: 1_200_000, 3: 80_000}


def p_capacity(
    F: GridDomain,
    p: float,
    n: int | None = None,
    box_factor: float = 8.0,
    tol: float = 1e-7,
    max_iter: int = 20_000,
) -> CapacityResult:
    """Capacity of the compact true-cell set of F, minimized on a bounded box.

    The trial potential is clamped to 1 on the set and 0 on the box boundary.
    For p < n the returned value deflates the raw box energy by the far-field
    factor (1 - (r*/R_box)^kappa)^(p-1) with r* the equivalent ball radius of
    the raw value, which compensates the finite Dirichlet wall.
    """
    if n is None:
        n = F.dim
    if n != F.dim:
        raise InvalidSpec(f"dimension mismatch: grid is {F.dim}D, n = {n}")
    if p <= 1:
        raise InvalidExponent("p-capacity requires p > 1")
    if box_factor < 4:
        raise InvalidSpec("box_factor must be at least 4")
    h = F.h
    mask_f, diam, nb = _box_embed(F, box_factor)
    border = _border_mask(mask_f.shape)
    free = ~mask_f & ~border
    hn = h**n
    u = _radial_init(mask_f, border, h, n, p, max(diam / 2, h), nb * h / 2)

    free_count = int(np.count_nonzero(free))
    direct = free_count <= _DIRECT_LIMIT[n]
    lu = None
    if direct:
        lu = spla.splu(laplacian_matrix(free, h))

    def precond_solve(g_full):
        if direct:
            out = np.zeros_like(g_full)
            out[free] = lu.solve(g_full[free])  # matrix carries 1/h^2 already
            return out
        out, _, _ = _cg_laplace(free, g_full, tol=1e-2, max_iter=60)
        return out * (h * h)

    iterations = 0
    residual = 0.0
    # p = 2 step with tau = 1 solves the linear problem exactly, so take the
    # one linear solve directly and continue the exponent ladder from there.
    b = -_apply_laplace(u)
    b[~free] = 0.0
    if direct:
        x = np.zeros_like(u)
        x[free] = lu.solve(b[free] / (h * h))
        iterations += 1
    else:
        x, cg_it, residual = _cg_laplace(free, b, tol=1e-6, max_iter=3000)
        iterations += cg_it
    u = u + x
    u[mask_f] = 1.0
    u[~free & ~mask_f] = 0.0

    if p != 2.0:
        eps = 1e-8 * (diam / h) if p < 2 else 0.0
        rungs = []
        cur = 2.0
        sgn = 1.0 if p > 2 else -1.0
        while abs(cur - p) > 1e-12:
            cur = min(cur + 0.25, p) if sgn > 0 else max(cur - 0.25, p)
            rungs.append(cur)
        for rung in rungs:
            is_final = abs(rung - p) < 1e-12
            rtol = tol if is_final else max(1e-5, tol)
            e = eps if rung < 2 else 0.0
            s = grad_norm_sq(u, h)
            e_reg = float(np.sum((s + e * e) ** (rung / 2))) * hn
            energy = float(np.sum(s ** (rung / 2))) * hn
            while iterations < max_iter:
                grads = _gradients(u, h)
                s = grad_norm_sq(u, h) + e * e
                m = s ** ((rung - 2) / 2)
                g = -rung * _divergence([m * gg for gg in grads], h) * hn
                g[~free] = 0.0
                direction = precond_solve(g) / (rung * hn)
                tau, ok = 1.0, False
                for _ in range(40):
                    v = u - tau * direction
                    v[mask_f] = 1.0
                    v[~free & ~mask_f] = 0.0
                    sv = grad_norm_sq(v, h)
                    ev_reg = float(np.sum((sv + e * e) ** (rung / 2))) * hn
                    if ev_reg < e_reg:
                        ok = True
                        break
                    tau *= 0.5
                iterations += 1
                if not ok:
                    residual = 0.0
                    break
                ev = float(np.sum(sv ** (rung / 2))) * hn
                residual = abs(ev - energy) / max(ev, 1e-300)
                u, e_reg, energy = v, ev_reg, ev
                if residual < rtol:
                    break
            else:
                raise NonConvergence(f"capacity iteration budget {max_iter} exhausted")

    raw = float(np.sum(grad_norm_sq(u, h) ** (p / 2))) * hn
    value = raw
    if p < n and raw > 0:
        kappa = (n - p) / (p - 1)
        r_star = (raw / (sphere_area(n) * kappa ** (p - 1))) ** (1 / (n - p))
        r_box = nb * h / 2 * math.sqrt(n)  # box circumradius: never below the true wall
        if r_star < r_box:
            value = raw * (1 - (r_star / r_box) ** kappa) ** (p - 1)
    return CapacityResult(
        value=value, p=p, n=n, box_factor=box_factor, iterations=iterations, residual=residual
    )


# ---------------------------------------------------------------------------
# radius searches


def _ball_kernel(r: float, h: float, dim: int) -> np.ndarray:
    m = int(math.floor(r / h + 1e-9))
    offs = np.arange(-m, m + 1)
    grids = np.meshgrid(*([offs] * dim), indexing="ij")
    return sum((g * h) ** 2 for g in grids) <= r * r


def _coverage_counts(mask_float: np.ndarray, r: float, h: float) -> np.ndarray:
    """Count of domain cells inside the ball of radius r centered at each cell."""
    kernel = _ball_kernel(r, h, mask_float.ndim).astype(np.float64)
    cov = fftconvolve(mask_float, kernel, mode="same")
    return np.maximum(np.rint(cov), 0.0)


def _stride2_first_true(ok: np.ndarray):
    """Lexicographically first stride-2 index where ok holds, or None."""
    sub = ok[tuple(slice(None, None, 2) for _ in range(ok.ndim))]
    flat = np.flatnonzero(sub.ravel())
    if flat.size == 0:
        return None
    idx = np.unravel_index(int(flat[0]), sub.shape)
    return tuple(2 * i for i in idx)


def _cell_coords(d: GridDomain, index) -> tuple:
    return tuple(float(d.origin[ax] + index[ax] * d.h) for ax in range(d.dim))


def lieb_radius(d: GridDomain, alpha: float) -> RadiusSearchResult:
    """Largest r such that some ball B_r sticks out of the domain by at most
    the fraction alpha of its own measure."""
    if not 0 < alpha < 1:
        raise InvalidSpec("alpha must lie in (0, 1)")
    h = d.h
    n = d.dim
    mask_float = d.mask.astype(np.float64)
    volume = d.cell_count() * h**n
    vol1 = unit_ball_volume(n)
    r_hi = (volume / (vol1 * (1 - alpha))) ** (1 / n) + h
    best_center = None

    def feasible(r):
        counts = _coverage_counts(mask_float, r, h)
        need = (1 - alpha) * vol1 * r**n / h**n
        return _stride2_first_true(counts >= need - 1e-9)

    lo, hi = 0.0, r_hi
    while hi - lo > 0.5 * h:
        mid = (lo + hi) / 2
        hit = feasible(mid)
        if hit is not None:
            lo, best_center = mid, hit
        else:
            hi = mid
    if best_center is None:
        best_center = tuple(int(i) for i in np.argwhere(d.mask)[0])
        lo = 0.0
    return RadiusSearchResult(
        radius=lo, center=_cell_coords(d, best_center), kind="lieb_alpha", parameter=alpha
    )


def _ball_minus_domain(d: GridDomain, center_idx, r: float) -> np.ndarray | None:
    """Occupancy window of the compact set (closed ball minus domain).

    Cells of the virtual lattice beyond the stored array lie outside the
    domain and belong to the set.  Returns None when the set is empty.
    """
    h = d.h
    m = int(math.floor(r / h + 1e-9))
    windows = []
    for ax in range(d.dim):
        windows.append(np.arange(center_idx[ax] - m, center_idx[ax] + m + 1))
    grids = np.meshgrid(*windows, indexing="ij")
    in_ball = sum(((g - c) * h) ** 2 for g, c in zip(grids, center_idx)) <= r * r
    inside_domain = np.zeros(in_ball.shape, dtype=bool)
    valid = np.ones(in_ball.shape, dtype=bool)
    for ax in range(d.dim):
        valid &= (grids[ax] >= 0) & (grids[ax] < d.mask.shape[ax])
    if valid.any():
        sel = tuple(g[valid] for g in grids)
        inside_domain[valid] = d.mask[sel]
    f_mask = in_ball & ~inside_domain
    return f_mask if f_mask.any() else None


def _block_or(mask: np.ndarray, k: int) -> np.ndarray:
    """Coarsen by factor k, marking a coarse cell true if any fine cell is.

    Thin features thicken to a full coarse cell, so the coarsened set contains
    (a dilate of) the original and its capacity can only grow.
    """
    if k == 1:
        return mask
    pad = [(0, (-s) % k) for s in mask.shape]
    m = np.pad(mask, pad)
    for ax in range(m.ndim):
        s = m.shape
        m = m.reshape(s[:ax] + (s[ax] // k, k) + s[ax + 1 :]).any(axis=ax + 1)
    return m


_SOLVE_CELLS_ACROSS = 40  # cap on sliver resolution submitted to the solver


def _sliver_capacity(f_window: np.ndarray, h: float, p: float, n: int, box_factor: float) -> float:
    k = max(1, int(math.ceil(max(f_window.shape) / _SOLVE_CELLS_ACROSS)))
    coarse = np.pad(_block_or(f_window, k), 1)
    dom = GridDomain(coarse, h * k, (0.0,) * n)
    return p_capacity(dom, p, n, box_factor=box_factor).value


def capacity_radius(
    d: GridDomain,
    gamma: float,
    p: float,
    n: int | None = None,
    box_factor: float = 8.0,
    max_probes: int = 10,
) -> RadiusSearchResult:
    """Largest r such that some ball B_r meets the domain's complement only in
    a (p, gamma)-negligible set.

    Centers run over the stride-2h subgrid, most-covered first with
    lexicographic tie-break; radii are bisected to half-cell resolution.  A
    center/radius pair is only submitted to the capacity solver if it passes
    the measure prescreen |B_r \\ domain| <= 1.05 alpha |B_r| with
    alpha = gamma^(n/(n-p)), which the isocapacity inequality makes a
    necessary condition for negligibility (the 1.05 covers raster error).
    """
    if n is None:
        n = d.dim
    if n != d.dim:
        raise InvalidSpec(f"dimension mismatch: grid is {d.dim}D, n = {n}")
    if not 0 < gamma < 1:
        raise InvalidSpec("gamma must lie in (0, 1)")
    if not 1 < p < n:
        raise ExponentOutOfRange(f"capacity radius search requires 1 < p < n, got p = {p}")
    h = d.h
    mask_float = d.mask.astype(np.float64)
    volume = d.cell_count() * h**n
    vol1 = unit_ball_volume(n)
    alpha_pre = gamma ** (n / (n - p))
    screen = min(1.05 * alpha_pre, 0.999)
    r_hi = (volume / (vol1 * (1 - screen))) ** (1 / n) + h
    best_center = None

    def verified(r):
        counts = _coverage_counts(mask_float, r, h)
        kernel_cells = float(_ball_kernel(r, h, n).sum())
        need = (1 - screen) * vol1 * r**n / h**n
        stride = tuple(slice(None, None, 2) for _ in range(n))
        sub_counts = counts[stride]
        flat = np.flatnonzero((sub_counts >= need - 1e-9).ravel())
        if flat.size == 0:
            return None
        # probe the most-covered centers first; ties break lexicographically
        deficits = kernel_cells - sub_counts.ravel()[flat]
        flat = flat[np.argsort(deficits, kind="stable")]
        for pos in flat[:max_probes]:
            idx = np.unravel_index(int(pos), sub_counts.shape)
            center_idx = tuple(2 * i for i in idx)
            f = _ball_minus_domain(d, center_idx, r)
            if f is None:
                return center_idx  # empty set: zero capacity
            cap = _sliver_capacity(f, h, p, n, box_factor)
            if is_negligible(cap, r, n, p, gamma):
                return center_idx
        return None

    lo, hi = 0.0, r_hi
    while hi - lo > 0.5 * h:
        mid = (lo + hi) / 2
        hit = verified(mid)
        if hit is not None:
            lo, best_center = mid, hit
        else:
            hi = mid
    if best_center is None:
        best_center = tuple(int(i) for i in np.argwhere(d.mask)[0])
        lo = 0.0
    return RadiusSearchResult(
        radius=lo, center=_cell_coords(d, best_center), kind="capacity_gamma", parameter=gamma
    )
