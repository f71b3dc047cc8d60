"""Command-line interface: shape catalog, run configuration, report emission.

All evaluation is delegated to the library modules; this module only parses
configuration, orders the work, and writes reports.  Report files are written
by a single writer after evaluation finishes, with floats rendered at 12
significant digits, so repeated runs of one configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import numbers
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .bounds import BoundId, reports_to_csv, run_suite
from .capacity import capacity_radius, lieb_radius
from .errors import ConfigParse, InvalidConfig, IoError, PSpecError
from .eigensolver import solve_first_eigen
from .geometry import ShapeSpec, geometry_summary, rasterize_shape, shape_label
from .nodal import glued_antisymmetric_eigenpair, nodal_length, nodal_scaling_check

__all__ = [
    "STANDARD_CATALOG",
    "RunConfig",
    "load_config",
    "run",
    "describe_catalog",
    "dumps_stable",
    "main",
]

# Built-in test domains: simply connected (convex and not), 2- and 3-connected,
# and a near-degenerate star whose thin spikes stress the inradius-based bounds.
STANDARD_CATALOG: tuple = (
    ShapeSpec.disk(1.0),
    ShapeSpec.square(1.0),
    ShapeSpec.rectangle(2.0, 1.0),
    ShapeSpec.annulus(0.5, 1.0),
    ShapeSpec.ell_shape(1.0, 0.5),
    ShapeSpec.disk_with_holes(1.0, [(0.35, 0.0, 0.18)]),
    ShapeSpec.disk_with_holes(1.0, [(-0.4, -0.25, 0.15), (0.3, 0.3, 0.2)]),
    ShapeSpec.spiky_disk(0.6, 8, 0.12),
)

_FORMATS = ("json", "csv")
_DEFAULT_PS = (1.5, 2.0, 3.0)


@dataclass
class RunConfig:
    """Everything one `verify` run needs; parsed from a JSON file or built in code."""

    catalog: list
    ps: list
    h: float = 1 / 64
    bounds: object = "all"  # "all" or list of BoundId
    gamma: float = 0.5
    alpha: float = 0.5
    output_dir: str = "."
    formats: tuple = _FORMATS

    def __post_init__(self):
        if not self.catalog:
            raise InvalidConfig("catalog must be nonempty")
        if not self.ps:
            raise InvalidConfig("ps must be nonempty")
        self.ps = [float(p) for p in self.ps]
        self.h = float(self.h)
        if self.h <= 0:
            raise InvalidConfig("h must be positive")
        for name in ("gamma", "alpha"):
            v = float(getattr(self, name))
            setattr(self, name, v)
            if not 0 < v < 1:
                raise InvalidConfig(f"{name} must lie in (0, 1)")
        self.formats = tuple(self.formats)
        for f in self.formats:
            if f not in _FORMATS:
                raise InvalidConfig(f"unknown report format: {f}")


def _parse_bounds(raw) -> object:
    if raw == "all" or raw is None:
        return "all"
    if not isinstance(raw, (list, tuple)):
        raise ConfigParse("bounds must be \"all\" or a list of bound ids")
    valid = {b.value: b for b in BoundId}
    out = []
    for item in raw:
        if item not in valid:
            raise ConfigParse(f"unknown bound id: {item}")
        out.append(valid[item])
    return out


def _config_from_obj(obj: dict) -> RunConfig:
    if not isinstance(obj, dict):
        raise ConfigParse("config root must be a JSON object")
    known = {"catalog", "ps", "h", "bounds", "gamma", "alpha", "output_dir", "formats"}
    for key in obj:
        if key not in known:
            raise ConfigParse(f"unknown config key: {key}")
    raw_catalog = obj.get("catalog", "standard")
    if raw_catalog == "standard":
        catalog = list(STANDARD_CATALOG)
    else:
        if not isinstance(raw_catalog, list):
            raise ConfigParse("catalog must be \"standard\" or a list of shape objects")
        try:
            catalog = [ShapeSpec.from_json(s) for s in raw_catalog]
        except PSpecError as err:
            raise ConfigParse(f"bad shape in catalog: {err}") from err
    ps = obj.get("ps", list(_DEFAULT_PS))
    if not isinstance(ps, list) or not ps:
        raise ConfigParse("ps must be nonempty")
    try:
        return RunConfig(
            catalog=catalog,
            ps=ps,
            h=obj.get("h", 1 / 64),
            bounds=_parse_bounds(obj.get("bounds")),
            gamma=obj.get("gamma", 0.5),
            alpha=obj.get("alpha", 0.5),
            output_dir=obj.get("output_dir", "."),
            formats=obj.get("formats", list(_FORMATS)),
        )
    except (InvalidConfig, TypeError, ValueError) as err:
        raise ConfigParse(str(err)) from err


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as err:
        raise ConfigParse(f"cannot read config file: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigParse(f"config is not valid JSON: {err}") from err
    return _config_from_obj(obj)


# ---------------------------------------------------------------------------
# deterministic JSON


def _render(o, ind: int) -> str:
    pad = "  " * ind
    if o is None:
        return "null"
    if o is True:
        return "true"
    if o is False:
        return "false"
    if isinstance(o, numbers.Integral):
        return str(int(o))
    if isinstance(o, numbers.Real):
        x = float(o)
        return f"{x:.12g}" if math.isfinite(x) else "null"
    if isinstance(o, str):
        return json.dumps(o)
    if isinstance(o, dict):
        if not o:
            return "{}"
        inner = ",\n".join(
            f"{'  ' * (ind + 1)}{json.dumps(str(k))}: {_render(v, ind + 1)}" for k, v in o.items()
        )
        return "{\n" + inner + f"\n{pad}}}"
    if isinstance(o, (list, tuple)):
        if not o:
            return "[]"
        inner = ",\n".join(f"{'  ' * (ind + 1)}{_render(v, ind + 1)}" for v in o)
        return "[\n" + inner + f"\n{pad}]"
    raise IoError(f"cannot serialize {type(o).__name__}")


def dumps_stable(obj) -> str:
    """JSON with insertion-ordered keys and 12-significant-digit floats."""
    return _render(obj, 0) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        raise IoError(f"cannot write {path}: {err}") from err


def _slug(label: str) -> str:
    return re.sub(r"[^a-z0-9.]+", "_", label.lower()).strip("_")


# ---------------------------------------------------------------------------
# the verify run


def _nodal_study(p: float, h: float) -> dict:
    spec = ShapeSpec.square(1.0)
    scales = (0.5, 1.0, 2.0)
    slope = nodal_scaling_check(spec, p, scales, h=h)
    lam, fld = glued_antisymmetric_eigenpair(spec, p, h)
    meas = nodal_length(rasterize_shape(spec, h), fld, p, lam)
    return {
        "p": p,
        "shape": shape_label(spec),
        "scales": list(scales),
        "slope": slope,
        "slope_expected": -1 / p,
        "lambda_glued": lam,
        "nodal_length": meas.length,
        "contour_segments": meas.contour_segments,
    }


def run(cfg: RunConfig) -> int:
    """Execute the full verification suite and write reports.

    Returns 0 exactly when every non-skipped bound held and no solver error
    occurred.  Whatever was computed is flushed even on failure, with the
    report marked partial.
    """
    outdir = Path(cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise IoError(f"cannot create output directory: {err}") from err

    ids = None if cfg.bounds == "all" else list(cfg.bounds)
    collect: dict = {}
    rows: list = []
    partial = False
    note = None
    try:
        rows = run_suite(
            cfg.catalog,
            cfg.ps,
            {
                "h": cfg.h,
                "alpha": cfg.alpha,
                "gamma": cfg.gamma,
                "ids": ids,
                "collect": collect,
            },
        )
    except PSpecError as err:
        partial = True
        note = f"{type(err).__name__}: {err}"

    nodal_block = []
    nodal_errors = 0
    for p in cfg.ps:
        try:
            nodal_block.append(_nodal_study(p, cfg.h))
        except PSpecError as err:
            nodal_errors += 1
            nodal_block.append({"p": p, "error": f"{type(err).__name__}: {err}"})

    violations = [r for r in rows if not r.skipped and r.satisfied is False]
    skips = sum(1 for r in rows if r.skipped)
    status = 0 if not violations and not nodal_errors and not partial else 1

    report = {
        "partial": partial,
        "config": {
            "h": cfg.h,
            "ps": list(cfg.ps),
            "gamma": cfg.gamma,
            "alpha": cfg.alpha,
            "bounds": "all" if ids is None else [b.value for b in ids],
            "catalog": [shape_label(s) for s in cfg.catalog],
        },
        "bounds": [r.to_json() for r in rows],
        "nodal": nodal_block,
        "summary": {
            "rows": len(rows),
            "violations": len(violations),
            "skips": skips,
            "exit": status,
        },
    }
    if note:
        report["note"] = note

    if "json" in cfg.formats:
        _write(outdir / "report.json", dumps_stable(report))
    if "csv" in cfg.formats:
        _write(outdir / "report.csv", reports_to_csv(rows))
    for spec in cfg.catalog:
        label = shape_label(spec)
        for p in cfg.ps:
            res = collect.get((label, p))
            if res is None:
                continue
            payload = {"shape": label, **res.to_json()}
            _write(outdir / f"eigen_{_slug(label)}_{p:g}.json", dumps_stable(payload))
    return status


def describe_catalog(h: float = 1 / 128) -> str:
    """One line per built-in shape: connectivity, convexity, basic metrics."""
    lines = []
    for spec in STANDARD_CATALOG:
        s = geometry_summary(rasterize_shape(spec, h))
        lines.append(
            f"{spec.variant}: connectivity {s.connectivity}, "
            f"convex {'yes' if s.convex else 'no'}, "
            f"area {s.area:.4g}, inradius {s.inradius:.4g}  [{shape_label(spec)}]"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CLI


def _find_shape(name: str) -> ShapeSpec:
    by_label = [s for s in STANDARD_CATALOG if shape_label(s) == name]
    if by_label:
        return by_label[0]
    by_variant = [s for s in STANDARD_CATALOG if s.variant == name]
    if len(by_variant) == 1:
        return by_variant[0]
    if len(by_variant) > 1:
        labels = ", ".join(shape_label(s) for s in by_variant)
        raise ConfigParse(f"ambiguous shape {name!r}; use a full label: {labels}")
    labels = ", ".join(shape_label(s) for s in STANDARD_CATALOG)
    raise ConfigParse(f"unknown shape {name!r}; catalog: {labels}")


def _parse_scales(raw: str) -> list:
    try:
        scales = [float(s) for s in raw.split(",") if s.strip()]
    except ValueError as err:
        raise ConfigParse(f"bad scales {raw!r}: {err}") from err
    if len(scales) < 3:
        raise ConfigParse("scales must list at least 3 values")
    return scales


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pspec",
        description="Principal frequency of the p-Laplacian with bound verification.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run the bound suite and write reports")
    v.add_argument("--config", help="JSON configuration file")
    v.add_argument("--output-dir", help="where to write reports")
    v.add_argument("--shape", help="restrict the catalog to one built-in shape")
    v.add_argument("--p", type=float, help="restrict to a single exponent")
    v.add_argument("--h", type=float, help="grid spacing override")

    e = sub.add_parser("eigen", help="solve one principal frequency")
    e.add_argument("--shape", required=True)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--h", type=float, default=1 / 64)

    c = sub.add_parser("capacity", help="capacity and measure radii of one shape")
    c.add_argument("--shape", required=True)
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--h", type=float, default=1 / 64)

    nd = sub.add_parser("nodal", help="glued-pair nodal study of one shape")
    nd.add_argument("--shape", default="square")
    nd.add_argument("--p", type=float, required=True)
    nd.add_argument("--scales", default="0.5,1,2")
    nd.add_argument("--h", type=float, default=1 / 64)

    sub.add_parser("catalog", help="list the built-in shapes")
    return ap


def _cmd_verify(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig(catalog=list(STANDARD_CATALOG), ps=list(_DEFAULT_PS))
    if args.shape:
        cfg.catalog = [_find_shape(args.shape)]
    if args.p:
        cfg.ps = [args.p]
    if args.h:
        cfg.h = args.h
    if args.output_dir:
        cfg.output_dir = args.output_dir
    return run(cfg)


def _cmd_eigen(args) -> int:
    spec = _find_shape(args.shape)
    res = solve_first_eigen(rasterize_shape(spec, args.h), args.p)
    sys.stdout.write(dumps_stable({"shape": shape_label(spec), **res.to_json()}))
    return 0


def _cmd_capacity(args) -> int:
    spec = _find_shape(args.shape)
    d = rasterize_shape(spec, args.h)
    n = d.dim
    rc = capacity_radius(d, args.gamma, args.p)
    alpha = args.gamma ** (n / (n - args.p))
    lb = lieb_radius(d, alpha)
    sys.stdout.write(
        dumps_stable(
            {
                "shape": shape_label(spec),
                "h": args.h,
                "p": args.p,
                "gamma": args.gamma,
                "capacity_radius": rc.to_json(),
                "lieb_radius": lb.to_json(),
            }
        )
    )
    return 0


def _cmd_nodal(args) -> int:
    spec = _find_shape(args.shape)
    scales = _parse_scales(args.scales)
    slope = nodal_scaling_check(spec, args.p, scales, h=args.h)
    lam, fld = glued_antisymmetric_eigenpair(spec, args.p, args.h)
    meas = nodal_length(rasterize_shape(spec, args.h), fld, args.p, lam)
    sys.stdout.write(
        dumps_stable(
            {
                "shape": shape_label(spec),
                "p": args.p,
                "h": args.h,
                "scales": scales,
                "slope": slope,
                "slope_expected": -1 / args.p,
                "lambda_glued": lam,
                "nodal_length": meas.length,
            }
        )
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.cmd == "verify":
            return _cmd_verify(args)
        if args.cmd == "eigen":
            return _cmd_eigen(args)
        if args.cmd == "capacity":
            return _cmd_capacity(args)
        if args.cmd == "nodal":
            return _cmd_nodal(args)
        if args.cmd == "catalog":
            print(describe_catalog())
            return 0
    except ConfigParse as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except PSpecError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
