"""Command line front end.

Exit status is 0 on success, 2 when a verification fails and 1 on any
error.  Every report is JSON with floats written to 17 significant digits.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import catalog as cat
from . import geometry as geo
from . import verify as ver
from .capacity import pcap
from .errors import PoincareError
from .grid import Chart
from .report import dumps, envelope
from .solver import density_at, solve_region, write_field_csv

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
DEFAULT_LEVELS = (1 / 16, 1 / 32, 1 / 64)
CURVATURE_LEVELS = (1e-2, 5e-3, 2.5e-3)


class UsageError(Exception):
    pass


@dataclass
class JobConfig:
    """Validated settings of one invocation, echoed into its report."""

    command: str
    regions: dict = field(default_factory=dict)
    chart: str = "identity"
    center: list | None = None
    bbox: list | None = None
    h: float | None = None
    h_list: list | None = None
    samples: int | None = None
    tol: float | None = None
    mode: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def validate(self):
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tolerances must be positive")
        if self.h is not None and not self.h > 0:
            raise UsageError("grid spacing must be positive")
        if self.h_list is not None:
            if not self.h_list or any(not h > 0 for h in self.h_list):
                raise UsageError("grid spacings must be positive")
            if any(not b < a for a, b in zip(self.h_list, self.h_list[1:])):
                raise UsageError("grid spacings must be strictly decreasing")
        if self.samples is not None and self.samples < 1:
            raise UsageError("sample count must be positive")
        return self

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v not in (None, {}, [])}


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip())) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _point(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected a point as x,y, got {text!r}")
    return complex(_number(parts[0]), _number(parts[1]))


def _numbers(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _bbox(text: str | None):
    if text is None:
        return None
    vals = _numbers(text)
    if len(vals) != 4 or not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise UsageError("bbox must be xmin,xmax,ymin,ymax with min < max")
    return tuple(vals)


def _chart(kind: str, center: complex | None) -> Chart:
    if kind == "identity":
        return Chart.identity()
    return Chart.inversion(center if center is not None else 0j)


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_density(args):
    if (args.region is None) == (args.catalog is None):
        raise UsageError("give exactly one of --region and --catalog")
    z = _point(args.point)
    center = _point(args.center) if args.center else None
    if args.catalog is not None:
        cfg = JobConfig("density", extra={"catalog": args.catalog, "params": _numbers(args.params or ""),
                                          "point": _pair(z)}).validate()
        metric = cat.metric_from_tag(args.catalog, cfg.extra["params"])
        return cfg, {"lambda": metric(z), "source": "catalog", "tag": metric.tag}, True
    cfg = JobConfig("density", regions={"region": args.region}, chart=args.chart,
                    center=None if center is None else _pair(center), bbox=args.bbox and list(_bbox(args.bbox)),
                    h=args.h, extra={"point": _pair(z)}, outputs={"dump_field": args.dump_field}).validate()
    region = geo.load_region(args.region)
    fld = solve_region(region, args.h, _chart(args.chart, center), _bbox(args.bbox))
    if args.dump_field:
        write_field_csv(fld, args.dump_field)
    return cfg, {"lambda": density_at(fld, z), "source": "pde", "h": fld.grid.h,
                 "bbox": list(fld.grid.bbox), "newton_iterations": fld.newton_iterations,
                 "residual_norm": fld.residual_norm}, True


def cmd_pcap(args):
    levels = _numbers(args.levels) if args.levels else list(DEFAULT_LEVELS)
    center = _point(args.center) if args.center else None
    cfg = JobConfig("pcap", regions={"compact": args.compact}, chart="inversion",
                    center=None if center is None else _pair(center), h_list=levels,
                    extra={"truncation": args.truncation}).validate()
    rep = pcap(geo.load_compact(args.compact), levels, center=center, truncation=args.truncation)
    return cfg, rep.to_dict(), True


def cmd_verify(args):
    cfg = JobConfig("verify", regions={"region1": args.region1, "region2": args.region2},
                    h=args.h, samples=args.samples, tol=args.tol, mode=args.mode, seed=args.seed,
                    outputs={"dump_field": args.dump_field}).validate()
    if args.dump_field and args.mode == "oracle":
        raise UsageError("--dump-field needs solved fields (mode pde or mixed)")
    r1, r2 = geo.load_region(args.region1), geo.load_region(args.region2)
    rep = ver.verify_theorem1(r1, r2, args.samples, args.tol, args.mode, args.h, args.seed)
    if args.dump_field:
        out = Path(args.dump_field)
        out.mkdir(parents=True, exist_ok=True)
        for name, src in zip(("region1", "region2", "union", "intersection"), rep.sources):
            if src.fld is not None:
                write_field_csv(src.fld, out / f"{name}.csv")
    return cfg, rep.to_dict(), rep.passed


def cmd_boundary_ratio(args):
    if args.counterexample:
        ds = _numbers(args.distances)
        cfg = JobConfig("boundary-ratio", extra={"counterexample": True, "distances": ds}).validate()
        res = ver.counterexample(ds)
        return cfg, {"ratios": res}, True
    if not (args.outer and args.inner and args.xi and args.approach):
        raise UsageError("give --outer, --inner, --xi and --approach, or --counterexample")
    xi = _point(args.xi)
    pts = [_point(p) for p in args.approach.split(";") if p.strip()]
    cfg = JobConfig("boundary-ratio", regions={"outer": args.outer, "inner": args.inner},
                    mode=args.mode, h=args.h,
                    extra={"xi": _pair(xi), "approach": [_pair(p) for p in pts]}).validate()
    ratios = ver.boundary_ratio(geo.load_region(args.outer), geo.load_region(args.inner), xi, pts,
                                args.mode, args.h)
    return cfg, {"ratios": ratios, "distances": [abs(p - xi) for p in pts]}, True


def cmd_curvature_check(args):
    if args.region1 or args.region2:
        if not (args.region1 and args.region2):
            raise UsageError("give both --region1 and --region2")
        cfg = JobConfig("curvature-check", regions={"region1": args.region1, "region2": args.region2},
                        mode=args.mode, h=args.h, samples=args.samples, tol=args.tol,
                        seed=args.seed).validate()
        rep = ver.verify_weak_constant(geo.load_region(args.region1), geo.load_region(args.region2),
                                       args.samples, args.tol, args.mode, args.h, args.seed)
        return cfg, rep.to_dict(), rep.passed
    levels = _numbers(args.levels) if args.levels else list(CURVATURE_LEVELS)
    fixtures = cat.curvature_fixtures()
    if args.catalog:
        fixtures = {args.catalog: cat.metric_from_tag(args.catalog, _numbers(args.params or ""))}
    cfg = JobConfig("curvature-check", h_list=levels, samples=args.samples, seed=args.seed,
                    extra={"catalog": sorted(fixtures), "order_range": [args.min_order, args.max_order]}
                    ).validate()
    results, ok = {}, True
    for name, metric in fixtures.items():
        pts = geo.sample_nodes(metric.region(), 1 / 64, args.samples, args.seed)
        fit = cat.curvature_order(metric, pts, levels)
        fit["passed"] = bool(args.min_order <= fit["order"] <= args.max_order)
        ok &= fit["passed"]
        results[name] = fit
    return cfg, {"passed": ok, "metrics": results}, ok


COMMANDS = {
    "density": cmd_density,
    "pcap": cmd_pcap,
    "verify": cmd_verify,
    "boundary-ratio": cmd_boundary_ratio,
    "curvature-check": cmd_curvature_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poincare", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="also write the JSON report to this file")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", help="hyperbolic density at a point")
    d.add_argument("--region", help="region JSON file (solved on a grid)")
    d.add_argument("--catalog", help="catalog metric tag (closed form)")
    d.add_argument("--params", help="comma-separated catalog parameters")
    d.add_argument("--point", required=True, help="x,y")
    d.add_argument("--h", type=_number, default=1 / 128)
    d.add_argument("--chart", choices=("identity", "inversion"), default="identity")
    d.add_argument("--center", help="inversion centre x,y")
    d.add_argument("--bbox", help="xmin,xmax,ymin,ymax in chart coordinates")
    d.add_argument("--dump-field", help="write the solved field as CSV")

    c = sub.add_parser("pcap", help="Poincaré capacity of a compact set")
    c.add_argument("--compact", required=True, help="compact set JSON file")
    c.add_argument("--levels", help="comma-separated decreasing spacings")
    c.add_argument("--center", help="inversion centre x,y (a point of the set)")
    c.add_argument("--truncation", type=_number, default=4.0)

    v = sub.add_parser("verify", help="four-density ratio on the intersection")
    v.add_argument("--region1", required=True)
    v.add_argument("--region2", required=True)
    v.add_argument("--mode", choices=ver.MODES, default="oracle")
    v.add_argument("--h", type=_number, default=None)
    v.add_argument("--samples", type=int, default=500)
    v.add_argument("--tol", type=_number, default=5e-3)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--dump-field", help="directory for the four CSV fields")

    b = sub.add_parser("boundary-ratio", help="density ratio approaching a boundary point")
    b.add_argument("--outer", help="larger domain JSON file")
    b.add_argument("--inner", help="smaller domain JSON file")
    b.add_argument("--xi", help="boundary point x,y")
    b.add_argument("--approach", help="points x,y separated by ';'")
    b.add_argument("--mode", choices=ver.MODES, default="oracle")
    b.add_argument("--h", type=_number, default=None)
    b.add_argument("--counterexample", action="store_true",
                   help="punctured comparison domains against the unit disk at 1")
    b.add_argument("--distances", default="0.1,0.01,0.001")

    k = sub.add_parser("curvature-check", help="curvature residual orders or the weak constant")
    k.add_argument("--catalog", help="single catalog tag (default: every fixture)")
    k.add_argument("--params")
    k.add_argument("--levels", help="comma-separated spacings")
    k.add_argument("--samples", type=int, default=100)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--min-order", type=float, default=1.8)
    k.add_argument("--max-order", type=float, default=2.2)
    k.add_argument("--region1")
    k.add_argument("--region2")
    k.add_argument("--mode", choices=ver.MODES, default="oracle")
    k.add_argument("--h", type=_number, default=None)
    k.add_argument("--tol", type=_number, default=1e-3)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, result, ok = COMMANDS[args.command](args)
    except (PoincareError, UsageError, OSError) as exc:
        print(f"poincare {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    status = "pass" if ok else "fail"
    text = dumps(envelope(args.command, cfg.to_dict(), result, status=status))
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
