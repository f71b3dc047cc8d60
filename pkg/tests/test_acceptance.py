"""End-to-end acceptance gate.

Each test checks one shipping criterion and prints a single
``ACCEPTANCE-k PASS/FAIL`` line with the measured numbers, so the whole gate
can be audited from plain pytest output (run with ``-rA`` to see the lines).
"""

import json
import math
import time

import pytest

from pspec.bounds import BoundId, run_suite
from pspec.capacity import isocapacity_lower_bound, lieb_radius, p_capacity
from pspec.cheeger import cheeger_constant
from pspec.eigensolver import solve_first_eigen
from pspec.geometry import (
    ShapeSpec,
    geometry_summary,
    rasterize_ball,
    rasterize_shape,
    scale_spec,
    shape_label,
)
from pspec.nodal import (
    check_vanishing,
    glued_antisymmetric_eigenpair,
    nodal_scaling_check,
    vanishing_ball_radius,
)
from pspec.runner import STANDARD_CATALOG, main

DISK_P2 = 5.783185962946785  # square of the first zero of Bessel J0
SQUARE_P2 = 2 * math.pi**2
DISK_SECOND = 14.681970642124  # square of the first zero of Bessel J1
PS = [1.5, 2.0, 3.0]


def _verdict(k: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE-{k} {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def suite():
    t0 = time.perf_counter()
    rows = run_suite(list(STANDARD_CATALOG), PS, {"h": 1 / 64})
    return rows, time.perf_counter() - t0


def test_criterion_01_reference_eigenvalues():
    checks = []
    for spec, exact, name in (
        (ShapeSpec.disk(1.0), DISK_P2, "disk"),
        (ShapeSpec.square(1.0), SQUARE_P2, "square"),
    ):
        t0 = time.perf_counter()
        lam = solve_first_eigen(rasterize_shape(spec, 1 / 256), 2.0).lam
        dt = time.perf_counter() - t0
        checks.append((name, lam, abs(lam - exact) / exact, dt))
    ok = all(rel < 0.01 and dt < 60 for _, _, rel, dt in checks)
    detail = "; ".join(
        f"{n}: lambda = {lam:.4f}, rel err {rel:.3%}, {dt:.1f}s"
        for n, lam, rel, dt in checks
    )
    assert _verdict(1, ok, detail), detail


def test_criterion_02_scaling_covariance():
    # each dilate is solved at matched relative resolution (h scales with t),
    # isolating the p-homogeneity of the solve from the raster bias that
    # criterion 1 already pins
    worst = 0.0
    for spec in (ShapeSpec.disk(1.0), ShapeSpec.square(1.0)):
        for p in PS:
            base = solve_first_eigen(rasterize_shape(spec, 1 / 64), p).lam
            for t in (0.5, 2.0):
                scaled = rasterize_shape(scale_spec(spec, t), t / 64)
                lam_t = solve_first_eigen(scaled, p).lam
                worst = max(worst, abs(lam_t * t**p - base) / base)
    ok = worst <= 0.02
    detail = (
        f"max |lambda(tK) t^p - lambda(K)| / lambda(K) = {worst:.3e} "
        f"over disk+square, p in {PS}, t in (0.5, 2) at h = t/64"
    )
    assert _verdict(2, ok, detail), detail


def test_criterion_03_full_suite_holds(suite):
    rows, elapsed = suite
    violations = [r for r in rows if not r.skipped and r.satisfied is False]
    skips = sum(1 for r in rows if r.skipped)
    ok = not violations and elapsed < 1800
    detail = (
        f"{len(rows)} reports, {len(violations)} violations, {skips} skips, "
        f"{elapsed:.0f}s (budget 1800s)"
    )
    assert _verdict(3, ok, detail), detail


def test_criterion_04_cheeger_windows():
    disk_h = cheeger_constant(rasterize_shape(ShapeSpec.disk(1.0), 1 / 128)).h
    square_h = cheeger_constant(rasterize_shape(ShapeSpec.square(1.0), 1 / 128)).h
    ok = 2.0 <= disk_h <= 2.10 and 3.77 <= square_h <= 4.05
    detail = f"disk {disk_h:.4f} in [2.00, 2.10]; square {square_h:.4f} in [3.77, 4.05]"
    assert _verdict(4, ok, detail), detail


def test_criterion_05_capacity_oracles(ball2d_cap, ball3d_cap):
    rel2 = abs(ball2d_cap.value - 2 * math.pi) / (2 * math.pi)
    rel3 = abs(ball3d_cap.value - 4 * math.pi) / (4 * math.pi)
    worst_q, worst_label = math.inf, ""
    for spec in STANDARD_CATALOG:
        d = rasterize_shape(spec, 1 / 32)
        cap = p_capacity(d, 1.5, box_factor=4.0).value
        iso = isocapacity_lower_bound(geometry_summary(d).area, 2, 1.5)
        if cap / iso < worst_q:
            worst_q, worst_label = cap / iso, shape_label(spec)
    ok = rel2 < 0.05 and rel3 < 0.05 and worst_q >= 0.95
    detail = (
        f"ball caps rel err {rel2:.3%} (2D vs 2pi) / {rel3:.3%} (3D vs 4pi); "
        f"min capacity/isocapacity ratio {worst_q:.3f} at {worst_label}"
    )
    assert _verdict(5, ok, detail), detail


def test_criterion_06_lieb_radius(suite):
    rows, _ = suite
    wanted = {"disk(r=1)", "square(a=1)", "annulus(r_in=0.5,r_out=1)"}
    sel = [
        r
        for r in rows
        if r.id is BoundId.LIEB_VS_CAPACITY_RADIUS
        and r.p == 1.5
        and r.domain_label in wanted
    ]
    rl = lieb_radius(rasterize_shape(ShapeSpec.disk(1.0), 1 / 64), 0.5).radius
    rel = abs(rl - math.sqrt(2)) / math.sqrt(2)
    ok = len(sel) == 3 and all(r.satisfied for r in sel) and rel < 0.03
    detail = (
        f"{sum(bool(r.satisfied) for r in sel)}/{len(sel)} lieb-vs-capacity rows hold "
        f"at p = 1.5; disk half-measure radius {rl:.4f} vs sqrt(2), rel err {rel:.3%}"
    )
    assert _verdict(6, ok, detail), detail


def test_criterion_07_scale_free_ratio_bounded(suite):
    rows, _ = suite
    agg = [
        r
        for r in rows
        if r.id is BoundId.MAZYA_SHUBIN_RATIO
        and r.domain_label == "catalog"
        and r.p == 1.5
    ]
    ok = len(agg) == 1 and agg[0].satisfied is True and agg[0].lhs <= 100
    spread = agg[0].lhs if agg else float("nan")
    detail = f"catalog spread of lambda * r_cap^p at p = 1.5 is {spread:.2f} (limit 100)"
    assert _verdict(7, ok, detail), detail


def test_criterion_08_nodal_scaling():
    s2 = nodal_scaling_check(ShapeSpec.square(1.0), 2.0, [0.5, 1.0, 2.0], h=1 / 64)
    s3 = nodal_scaling_check(ShapeSpec.square(1.0), 3.0, [0.5, 1.0, 2.0], h=1 / 64)
    lam, _ = glued_antisymmetric_eigenpair(ShapeSpec.disk(1.0), 2.0, 1 / 256)
    rel = abs(lam - DISK_SECOND) / DISK_SECOND
    ok = abs(s2 + 1 / 2) <= 0.03 and abs(s3 + 1 / 3) <= 0.03 and rel < 0.02
    detail = (
        f"slopes {s2:.6f} (target -1/2), {s3:.6f} (target -1/3); "
        f"glued disk lambda = {lam:.4f}, rel err {rel:.3%} vs the antisymmetric mode"
    )
    assert _verdict(8, ok, detail), detail


def test_criterion_09_vanishing_balls():
    hits = []
    for spec, p in (
        (ShapeSpec.square(1.0), 2.0),
        (ShapeSpec.square(1.0), 3.0),
        (ShapeSpec.disk(1.0), 2.0),
    ):
        h = 1 / 128
        lam, u = glued_antisymmetric_eigenpair(spec, p, h)
        lamb = solve_first_eigen(rasterize_ball(1.0, h), p).lam
        r = vanishing_ball_radius(lam, p, lamb, 1.05)
        hits.append(check_vanishing(rasterize_shape(spec, h), u, r))
    d = rasterize_shape(ShapeSpec.square(1.0), 1 / 64)
    ground = solve_first_eigen(d, 2.0)
    control = check_vanishing(d, ground.field, 0.3)
    ok = all(hits) and control is False
    detail = (
        f"{sum(hits)}/3 sign-changing fields vanish in every admissible ball; "
        f"one-signed control reports {control}"
    )
    assert _verdict(9, ok, detail), detail


def test_criterion_10_deterministic_reports(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "catalog": [
                    ShapeSpec.disk(1.0).to_json(),
                    ShapeSpec.square(1.0).to_json(),
                ],
                "ps": [2.0],
                "h": 0.03125,
            }
        ),
        encoding="utf-8",
    )
    codes, outputs = [], []
    for sub in ("a", "b"):
        out = tmp_path / sub
        codes.append(main(["verify", "--config", str(config), "--output-dir", str(out)]))
        outputs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    ok = codes == [0, 0] and outputs[0] == outputs[1] and len(outputs[0]) >= 4
    detail = (
        f"exit codes {codes}; two runs byte-identical across "
        f"{sorted(outputs[0])}"
    )
    assert _verdict(10, ok, detail), detail
