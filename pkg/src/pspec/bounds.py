"""Inequality engine: evaluate each spectral-geometric bound on a domain.

Every implemented inequality is a theorem, so on a sound solver every
non-skipped report comes back satisfied; a false report indicates a solver or
geometry bug, not a counterexample.  Domains that fail a bound's hypothesis
are skipped with a recorded reason rather than silently omitted.

Two of the entries (MAZYA_SHUBIN_RATIO, HIGH_P_INRADIUS) assert the existence
of non-constructive constants, so they cannot be checked on a single domain.
They are verified as family-level boundedness properties: per-domain reports
carry the scale-invariant statistic (marked ``property_level: family``) and
`run_suite` appends one aggregate report per exponent comparing the family's
spread against its tolerance.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .capacity import capacity_radius, lieb_radius, lieb_sigma
from .cheeger import cheeger_constant, cheeger_lambda_bound
from .eigensolver import SolveOptions, eigen_limit_case, rescale_lambda, solve_first_eigen
from .errors import InvalidConfig, MissingParam, PreconditionViolated, PSpecError
from .geometry import (
    GridDomain,
    ShapeSpec,
    geometry_summary,
    rasterize_ball,
    rasterize_shape,
    shape_label,
    spec_area,
)

__all__ = [
    "BoundId",
    "BoundReport",
    "evaluate_bound",
    "run_suite",
    "reports_to_json",
    "reports_to_csv",
]


class BoundId(Enum):
    DOMAIN_MONOTONICITY_UPPER = "DOMAIN_MONOTONICITY_UPPER"
    FABER_KRAHN = "FABER_KRAHN"
    CHEEGER_LOWER = "CHEEGER_LOWER"
    OSSERMAN_CROKE_SIMPLE = "OSSERMAN_CROKE_SIMPLE"
    OSSERMAN_CROKE_K = "OSSERMAN_CROKE_K"
    MAKAI_P1 = "MAKAI_P1"
    LIEB_LOWER = "LIEB_LOWER"
    CONVEX_LOWER = "CONVEX_LOWER"
    INFTY_IDENTITY = "INFTY_IDENTITY"
    MAZYA_SHUBIN_RATIO = "MAZYA_SHUBIN_RATIO"
    LIEB_VS_CAPACITY_RADIUS = "LIEB_VS_CAPACITY_RADIUS"
    HIGH_P_INRADIUS = "HIGH_P_INRADIUS"


# family-statistic ids: no single inequality exists per domain
_FAMILY_IDS = (BoundId.MAZYA_SHUBIN_RATIO, BoundId.HIGH_P_INRADIUS)

_MAZYA_SPREAD_LIMIT = 100.0  # allowed max/min spread of lambda * r^p
_HIGH_P_FLOOR_FRACTION = 1e-3  # catalog min of lambda * rho^p vs the disk's


@dataclass
class BoundReport:
    """One evaluated (or skipped) inequality instance.

    satisfied is None for skipped rows and for per-domain rows of family-level
    ids, where no single inequality exists.  A row whose inputs carry an
    "error" entry reports a solver failure and is marked unsatisfied.
    """

    id: BoundId
    p: float
    domain_label: str
    lhs: float | None
    rhs: float | None
    satisfied: bool | None
    slack: float | None
    inputs: dict = field(default_factory=dict)
    skipped: bool = False
    skip_reason: str | None = None
    property_level: str = "single"

    def to_json(self) -> dict:
        return {
            "id": self.id.value,
            "p": self.p,
            "domain": self.domain_label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "slack": self.slack,
            "inputs": self.inputs,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "property_level": self.property_level,
        }


def _inp(value, source: str) -> dict:
    return {"value": value, "source": source}


def _slack(lhs: float, rhs: float) -> float:
    den = max(abs(lhs), abs(rhs))
    return (lhs - rhs) / den if den > 0 else 0.0


def _row(bid, p, label, lhs, rhs, direction, inputs, level="single") -> BoundReport:
    if direction == ">=":
        sat = lhs >= rhs
    elif direction == "<=":
        sat = lhs <= rhs
    else:  # equality up to roundoff
        sat = abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs), 1e-300)
    return BoundReport(
        id=bid,
        p=p,
        domain_label=label,
        lhs=lhs,
        rhs=rhs,
        satisfied=bool(sat),
        slack=_slack(lhs, rhs),
        inputs=inputs,
        property_level=level,
    )


def _stat_row(bid, p, label, stat, inputs) -> BoundReport:
    return BoundReport(
        id=bid,
        p=p,
        domain_label=label,
        lhs=stat,
        rhs=None,
        satisfied=None,
        slack=None,
        inputs=inputs,
        property_level="family",
    )


def evaluate_bound(id: BoundId, d: GridDomain, p: float, params: dict | None = None) -> BoundReport:
    """Compute both sides of one inequality on one domain.

    params may carry required constants (alpha for LIEB_LOWER, gamma for the
    capacity-radius ids) and optional precomputed quantities (lam, lam_ball1,
    summary, cheeger, lieb_r, cap_r, area_true, opts, domain_label) so a suite
    can share expensive solves; anything absent is computed here.
    """
    bid = BoundId[id] if isinstance(id, str) else id
    pr = dict(params or {})
    label = pr.get("domain_label") or "grid" + "x".join(str(s) for s in d.mask.shape)
    n = d.dim
    opts = pr.get("opts") or SolveOptions()
    summary = pr.get("summary")
    if summary is None:
        summary = geometry_summary(d)
    rho = summary.inradius
    rho_red = summary.reduced_inradius
    k = summary.connectivity

    def lam_of() -> float:
        if "lam" not in pr:
            pr["lam"] = solve_first_eigen(d, p, opts).lam
        return pr["lam"]

    def lam_ball1() -> float:
        if "lam_ball1" not in pr:
            pr["lam_ball1"] = solve_first_eigen(rasterize_ball(1.0, d.h, n), p, opts).lam
        return pr["lam_ball1"]

    def cheeger_est():
        if "cheeger" not in pr:
            pr["cheeger"] = cheeger_constant(d)
        return pr["cheeger"]

    if bid is BoundId.DOMAIN_MONOTONICITY_UPPER:
        lam, lamb = lam_of(), lam_ball1()
        rhs = (lamb / lam) ** (1 / p)
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "lambda_ball1": _inp(lamb, "eigensolver"),
            "inradius": _inp(rho, "geometry"),
        }
        return _row(bid, p, label, rho, rhs, "<=", inputs)

    if bid is BoundId.FABER_KRAHN:
        lam, lamb = lam_of(), lam_ball1()
        area = pr.get("area_true")
        area_src = "geometry:exact" if area is not None else "geometry"
        if area is None:
            area = summary.area
        r_star = math.sqrt(area / math.pi)
        rhs = rescale_lambda(lamb, p, r_star)
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "lambda_ball1": _inp(lamb, "eigensolver"),
            "area": _inp(area, area_src),
            "equivalent_radius": _inp(r_star, "bounds"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.CHEEGER_LOWER:
        lam = lam_of()
        est = cheeger_est()
        rhs = cheeger_lambda_bound(est.h, p)
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "cheeger_constant": _inp(est.h, "cheeger"),
            "best_level": _inp(est.best_level, "cheeger"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.OSSERMAN_CROKE_SIMPLE:
        if k != 1:
            raise PreconditionViolated(bid.value, f"connectivity = {k}, requires 1")
        lam = lam_of()
        rhs = (1 / (p * rho_red)) ** p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "reduced_inradius": _inp(rho_red, "geometry"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.OSSERMAN_CROKE_K:
        if k < 2:
            raise PreconditionViolated(bid.value, f"connectivity = {k}, requires >= 2")
        lam = lam_of()
        rhs = (2 / k) ** (p / 2) / (p * rho) ** p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "inradius": _inp(rho, "geometry"),
            "k": _inp(k, "geometry"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.MAKAI_P1:
        if k != 1:
            raise PreconditionViolated(bid.value, f"connectivity = {k}, requires 1")
        est = cheeger_est()
        lam11 = est.h  # lambda_{1,1} is the Cheeger constant; independent of p
        rhs = 1 / rho_red
        inputs = {
            "lambda_11": _inp(lam11, "cheeger"),
            "reduced_inradius": _inp(rho_red, "geometry"),
        }
        return _row(bid, p, label, lam11, rhs, ">=", inputs)

    if bid is BoundId.LIEB_LOWER:
        if "alpha" not in pr:
            raise MissingParam("LIEB_LOWER requires 'alpha' in params")
        alpha = float(pr["alpha"])
        lam, lamb = lam_of(), lam_ball1()
        rl = pr.get("lieb_r")
        if rl is None:
            rl = lieb_radius(d, alpha)
        sigma = lieb_sigma(n, p, alpha, lamb)
        rhs = sigma / rl.radius**p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "alpha": _inp(alpha, "bounds"),
            "sigma": _inp(sigma, "capacity"),
            "lieb_radius": _inp(rl.radius, "capacity"),
            "lambda_ball1": _inp(lamb, "eigensolver"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.CONVEX_LOWER:
        if not summary.convex:
            raise PreconditionViolated(bid.value, "domain is not convex")
        lam = lam_of()
        rhs = (1 / (p * rho)) ** p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "inradius": _inp(rho, "geometry"),
        }
        return _row(bid, p, label, lam, rhs, ">=", inputs)

    if bid is BoundId.INFTY_IDENTITY:
        lhs = eigen_limit_case(d, "p_infinity")
        rhs = 1 / rho
        inputs = {
            "lambda_infinity": _inp(lhs, "eigensolver"),
            "inradius": _inp(rho, "geometry"),
            "note": _inp("identity independent of p", "bounds"),
        }
        return _row(bid, p, label, lhs, rhs, "==", inputs)

    if bid is BoundId.MAZYA_SHUBIN_RATIO:
        if not 1 < p < n:
            raise PreconditionViolated(bid.value, f"requires 1 < p < n, got p = {p}")
        if "gamma" not in pr:
            raise MissingParam("MAZYA_SHUBIN_RATIO requires 'gamma' in params")
        gamma = float(pr["gamma"])
        lam = lam_of()
        rc = pr.get("cap_r")
        if rc is None:
            rc = capacity_radius(d, gamma, p)
        stat = lam * rc.radius**p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "capacity_radius": _inp(rc.radius, "capacity"),
            "gamma": _inp(gamma, "bounds"),
            "statistic": _inp(stat, "bounds"),
        }
        return _stat_row(bid, p, label, stat, inputs)

    if bid is BoundId.LIEB_VS_CAPACITY_RADIUS:
        if not 1 < p < n:
            raise PreconditionViolated(bid.value, f"requires 1 < p < n, got p = {p}")
        if "gamma" not in pr:
            raise MissingParam("LIEB_VS_CAPACITY_RADIUS requires 'gamma' in params")
        gamma = float(pr["gamma"])
        alpha = gamma ** (n / (n - p))
        rl = pr.get("lieb_r")
        if rl is None:
            rl = lieb_radius(d, alpha)
        rc = pr.get("cap_r")
        if rc is None:
            rc = capacity_radius(d, gamma, p)
        # both radii are bisected to half-cell resolution; allow 2h of raster
        rhs = rc.radius - 2 * d.h
        inputs = {
            "lieb_radius": _inp(rl.radius, "capacity"),
            "capacity_radius": _inp(rc.radius, "capacity"),
            "alpha": _inp(alpha, "bounds"),
            "gamma": _inp(gamma, "bounds"),
            "raster_allowance": _inp(2 * d.h, "bounds"),
        }
        return _row(bid, p, label, rl.radius, rhs, ">=", inputs)

    if bid is BoundId.HIGH_P_INRADIUS:
        if p <= n:
            raise PreconditionViolated(bid.value, f"requires p > n, got p = {p}")
        lam = lam_of()
        stat = lam * rho**p
        inputs = {
            "lambda": _inp(lam, "eigensolver"),
            "inradius": _inp(rho, "geometry"),
            "statistic": _inp(stat, "bounds"),
        }
        if "running_min" in pr:
            inputs["running_min"] = _inp(min(pr["running_min"], stat), "bounds")
        return _stat_row(bid, p, label, stat, inputs)

    raise InvalidConfig(f"unknown bound id {id!r}")


# ---------------------------------------------------------------------------
# suite runner


def _skip_row(bid, p, label, reason) -> BoundReport:
    return BoundReport(
        id=bid,
        p=p,
        domain_label=label,
        lhs=None,
        rhs=None,
        satisfied=None,
        slack=None,
        inputs={"skip_reason": _inp(reason, "bounds")},
        skipped=True,
        skip_reason=reason,
    )


def _error_row(bid, p, label, err) -> BoundReport:
    return BoundReport(
        id=bid,
        p=p,
        domain_label=label,
        lhs=None,
        rhs=None,
        satisfied=False,
        slack=None,
        inputs={"error": _inp(f"{type(err).__name__}: {err}", "bounds")},
    )


def _coerce_ids(raw) -> list:
    if raw is None:
        return list(BoundId)
    out = []
    for item in raw:
        out.append(BoundId[item] if isinstance(item, str) else BoundId(item))
    return out


def _run_jobs(jobs: dict, threads: int) -> dict:
    """Evaluate keyed thunks, optionally in a thread pool.

    Results are stored by key, so assembly order never depends on completion
    order; a job's exception is stored in its slot and surfaces as an error
    report for every bound that needs the quantity.
    """

    def guarded(fn):
        try:
            return ("ok", fn())
        except Exception as e:  # noqa: BLE001 - suite must never abort
            return ("err", e)

    results = {}
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {key: pool.submit(guarded, fn) for key, fn in jobs.items()}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for key, fn in jobs.items():
            results[key] = guarded(fn)
    return results


def run_suite(catalog: list, ps: list, config: dict | None = None) -> list:
    """Evaluate every requested bound on every (shape, p) pair.

    Returns per-instance reports in deterministic order (catalog order x ps
    order x BoundId order), followed by one aggregate report per family-level
    id and exponent.  Individual failures become error reports; the suite
    itself always runs to completion.
    """
    cfg = dict(config or {})
    if not catalog:
        raise InvalidConfig("catalog must be nonempty")
    if not ps:
        raise InvalidConfig("ps must be nonempty")
    h = float(cfg.get("h", 1 / 64))
    alpha = float(cfg.get("alpha", 0.5))
    gamma = float(cfg.get("gamma", 0.5))
    ids = _coerce_ids(cfg.get("ids"))
    threads = int(cfg.get("threads") or os.environ.get("PSPEC_THREADS") or 1)
    opts = cfg.get("opts") or SolveOptions()
    collect = cfg.get("collect")  # optional dict, filled with (label, p) -> EigenResult

    doms = []
    raster_errs: dict = {}
    for idx, spec in enumerate(catalog):
        label = shape_label(spec)
        try:
            doms.append((label, spec, rasterize_shape(spec, h)))
        except PSpecError as err:
            doms.append((label, spec, None))
            raster_errs[idx] = err
    n = 2

    need_lam = any(b is not BoundId.INFTY_IDENTITY and b is not BoundId.MAKAI_P1 for b in ids)
    need_cheeger = BoundId.CHEEGER_LOWER in ids or BoundId.MAKAI_P1 in ids
    need_capr = BoundId.MAZYA_SHUBIN_RATIO in ids or BoundId.LIEB_VS_CAPACITY_RADIUS in ids

    jobs: dict = {}
    for i, (_, _, d) in enumerate(doms):
        if d is None:
            continue
        jobs[("summary", i)] = lambda d=d: geometry_summary(d)
    if need_lam:
        for p in ps:
            jobs[("ball", p)] = lambda p=p: solve_first_eigen(
                rasterize_ball(1.0, h, n), p, opts
            ).lam
        for i, (label, _, d) in enumerate(doms):
            if d is None:
                continue
            for p in ps:

                def _lam_job(d=d, p=p, label=label):
                    res = solve_first_eigen(d, p, opts)
                    if collect is not None:
                        collect[(label, p)] = res
                    return res.lam

                jobs[("lam", i, p)] = _lam_job
    for i, (_, _, d) in enumerate(doms):
        if d is None:
            continue
        if need_cheeger:
            jobs[("cheeger", i)] = lambda d=d: cheeger_constant(d)
        if BoundId.LIEB_LOWER in ids:
            jobs[("liebr", i, round(alpha, 12))] = lambda d=d: lieb_radius(d, alpha)
        for p in ps:
            if not 1 < p < n:
                continue
            if need_capr:
                jobs[("capr", i, p)] = lambda d=d, p=p: capacity_radius(d, gamma, p)
            if BoundId.LIEB_VS_CAPACITY_RADIUS in ids:
                a_p = round(gamma ** (n / (n - p)), 12)
                if ("liebr", i, a_p) not in jobs:
                    jobs[("liebr", i, a_p)] = lambda d=d, a=a_p: lieb_radius(d, a)
    results = _run_jobs(jobs, threads)

    def got(key):
        status, val = results.get(key, ("err", KeyError(key)))
        return val if status == "ok" else None, (val if status == "err" else None)

    reports = []
    family_stats = {bid: {} for bid in _FAMILY_IDS}  # bid -> p -> [(label, stat)]
    running_min = {}
    for i, (label, spec, d) in enumerate(doms):
        if d is None:
            for p in ps:
                for bid in ids:
                    reports.append(_error_row(bid, p, label, raster_errs[i]))
            continue
        summary, summary_err = got(("summary", i))
        area_true = spec_area(spec)
        for p in ps:
            lam, lam_err = got(("lam", i, p)) if need_lam else (None, None)
            lamb, ball_err = got(("ball", p)) if need_lam else (None, None)
            for bid in ids:
                if summary_err is not None:
                    reports.append(_error_row(bid, p, label, summary_err))
                    continue
                params = {
                    "domain_label": label,
                    "summary": summary,
                    "opts": opts,
                    "alpha": alpha,
                    "gamma": gamma,
                }
                if area_true is not None:
                    params["area_true"] = area_true
                if lam is not None:
                    params["lam"] = lam
                if lamb is not None:
                    params["lam_ball1"] = lamb
                err = None
                if bid not in (BoundId.INFTY_IDENTITY, BoundId.MAKAI_P1) and need_lam:
                    err = lam_err or ball_err
                if bid in (BoundId.CHEEGER_LOWER, BoundId.MAKAI_P1):
                    est, che_err = got(("cheeger", i))
                    err = err or che_err
                    if est is not None:
                        params["cheeger"] = est
                if bid is BoundId.LIEB_LOWER:
                    rl, rl_err = got(("liebr", i, round(alpha, 12)))
                    err = err or rl_err
                    if rl is not None:
                        params["lieb_r"] = rl
                if bid in (BoundId.MAZYA_SHUBIN_RATIO, BoundId.LIEB_VS_CAPACITY_RADIUS):
                    if 1 < p < n:
                        rc, rc_err = got(("capr", i, p))
                        err = err or rc_err
                        if rc is not None:
                            params["cap_r"] = rc
                        if bid is BoundId.LIEB_VS_CAPACITY_RADIUS:
                            a_p = round(gamma ** (n / (n - p)), 12)
                            rl, rl_err = got(("liebr", i, a_p))
                            err = err or rl_err
                            if rl is not None:
                                params["lieb_r"] = rl
                if bid is BoundId.HIGH_P_INRADIUS and (bid, p) in running_min:
                    params["running_min"] = running_min[(bid, p)]
                if err is not None:
                    reports.append(_error_row(bid, p, label, err))
                    continue
                try:
                    rep = evaluate_bound(bid, d, p, params)
                except PreconditionViolated as e:
                    rep = _skip_row(bid, p, label, e.reason)
                except PSpecError as e:
                    rep = _error_row(bid, p, label, e)
                reports.append(rep)
                if bid in _FAMILY_IDS and not rep.skipped and rep.lhs is not None:
                    family_stats[bid].setdefault(p, []).append((label, rep.lhs))
                    if bid is BoundId.HIGH_P_INRADIUS:
                        prev = running_min.get((bid, p), math.inf)
                        running_min[(bid, p)] = min(prev, rep.lhs)

    for bid in _FAMILY_IDS:
        for p in ps:
            stats = family_stats[bid].get(p)
            if not stats:
                continue
            values = {label: s for label, s in stats}
            inputs = {lab: _inp(s, "bounds") for lab, s in stats}
            if bid is BoundId.MAZYA_SHUBIN_RATIO:
                ratio = max(values.values()) / min(values.values())
                reports.append(
                    _row(bid, p, "catalog", ratio, _MAZYA_SPREAD_LIMIT, "<=", inputs, "family")
                )
            else:
                floor = _HIGH_P_FLOOR_FRACTION * max(
                    (s for lab, s in stats if lab.startswith("disk(")), default=0.0
                )
                reports.append(
                    _row(bid, p, "catalog", min(values.values()), floor, ">=", inputs, "family")
                )
    return reports


# ---------------------------------------------------------------------------
# serialization


def reports_to_json(reports: list) -> list:
    return [r.to_json() for r in reports]


_CSV_HEADER = "id,domain,p,lhs,rhs,satisfied,slack,skipped,skip_reason"


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    s = str(x)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def reports_to_csv(reports: list) -> str:
    lines = [_CSV_HEADER]
    for r in reports:
        lines.append(
            ",".join(
                _csv_cell(v)
                for v in (
                    r.id.value,
                    r.domain_label,
                    r.p,
                    r.lhs,
                    r.rhs,
                    r.satisfied,
                    r.slack,
                    r.skipped,
                    r.skip_reason,
                )
            )
        )
    return "\n".join(lines) + "\n"
