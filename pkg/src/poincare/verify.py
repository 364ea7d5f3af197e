"""Numerical checks of strong submultiplicativity and its companions.

The central quantity is the four-density ratio

    lam_1(z) lam_2(z) / (lam_union(z) lam_intersection(z))

on the intersection of two domains.  Densities come from the closed-form
catalog (``oracle``), from grid solves sharing one box and spacing
(``pde``), or from the catalog where it applies and solves elsewhere
(``mixed``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import catalog as cat
from . import geometry as geo
from .capacity import CapacityReport, pcap
from .errors import DomainError, PreconditionError, UnsupportedOracleError
from .grid import Chart
from .solver import LogDensityField, density_at, solve_region

MODES = ("oracle", "pde", "mixed")
SAMPLE_MARGIN = 4.0
ORACLE_SPACING = 1 / 64
PDE_SPACING = 1 / 256
WEAK_BOUND = 1.0 / math.sqrt(2.0)


def thread_cap() -> int:
    """Worker count from ``POINCARE_THREADS`` (default: all cores)."""
    raw = os.environ.get("POINCARE_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise PreconditionError(f"POINCARE_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise PreconditionError("POINCARE_THREADS must be at least 1")
    return n


def parallel_map(fn, items):
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Density sources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensitySource:
    """A plane density backed by a catalog metric or a solved field."""

    region: geo.Region
    metric: cat.ClosedFormMetric | None = None
    fld: LogDensityField | None = field(default=None, repr=False)

    @property
    def kind(self) -> str:
        return "oracle" if self.metric is not None else "pde"

    def __call__(self, z):
        if self.metric is not None:
            return self.metric(z)
        return density_at(self.fld, z)


def pair_regions(r1: geo.Region, r2: geo.Region) -> list[geo.Region]:
    """``[r1, r2, r1 | r2, r1 & r2]``."""
    return [r1, r2, geo.Union((r1, r2)), geo.Intersection((r1, r2))]


def shared_bbox(regions, h: float):
    """Box covering every region, three cells of margin; all must be bounded."""
    boxes = []
    for reg in regions:
        b = geo.bounds(reg)
        if b is None:
            raise PreconditionError("pde mode needs bounded domains; use oracle or mixed mode")
        boxes.append(b)
    m = 3 * h
    return (min(b[0] for b in boxes) - m, max(b[1] for b in boxes) + m,
            min(b[2] for b in boxes) - m, max(b[3] for b in boxes) + m)


def density_sources(regions, mode: str, h: float | None = None, bbox=None, **solve_kw):
    """One :class:`DensitySource` per region.

    In ``pde`` and ``mixed`` mode every solve uses spacing ``h`` and the box
    ``bbox`` (default: the box of all regions), so the lattices coincide.
    """
    if mode not in MODES:
        raise PreconditionError(f"unknown mode {mode!r}; choose from {MODES}")
    regions = list(regions)
    metrics = []
    for reg in regions:
        try:
            metrics.append(cat.resolve_metric(reg))
        except UnsupportedOracleError:
            if mode == "oracle":
                raise
            metrics.append(None)
    if mode == "pde":
        metrics = [None] * len(regions)
    todo = [k for k, m in enumerate(metrics) if m is None]
    if not todo:
        return [DensitySource(r, m) for r, m in zip(regions, metrics)]
    h = PDE_SPACING if h is None else float(h)
    box = bbox if bbox is not None else shared_bbox([regions[k] for k in todo], h)
    fields = parallel_map(lambda k: solve_region(regions[k], h, Chart.identity(), box, **solve_kw), todo)
    out = [DensitySource(r, m) for r, m in zip(regions, metrics)]
    for k, fld in zip(todo, fields):
        out[k] = DensitySource(regions[k], None, fld)
    return out


def _check_pair(r1: geo.Region, r2: geo.Region):
    if not geo.is_hyperbolic(geo.Union((r1, r2))):
        raise PreconditionError("the union of the two domains is not hyperbolic")


# ---------------------------------------------------------------------------
# Sampling and nestedness
# ---------------------------------------------------------------------------


def _component(region: geo.Region, pts: np.ndarray, z: complex, h: float) -> np.ndarray:
    mask = np.asarray(region.sdf(pts)) > 0
    labels, _ = ndimage.label(mask)
    i = int(round(z.real / h - pts[0, 0].real / h))
    j = int(round(z.imag / h - pts[0, 0].imag / h))
    if not (0 <= i < mask.shape[0] and 0 <= j < mask.shape[1]) or not mask[i, j]:
        raise DomainError(f"point {z!r} does not land on a node of the domain")
    return labels == labels[i, j]


def nested_at(r1: geo.Region, r2: geo.Region, z, h: float) -> bool:
    """Sampled test that the components through ``z`` are nested either way."""
    z = geo.as_point(z)
    pts = geo.lattice(geo.window(geo.Union((r1, r2)), h), h)
    c1 = _component(r1, pts, z, h)
    c2 = _component(r2, pts, z, h)
    return bool(np.all(c1 <= c2) or np.all(c2 <= c1))


# ---------------------------------------------------------------------------
# Strong submultiplicativity
# ---------------------------------------------------------------------------


def _ratio(l1, l2, lu, li):
    return (l1 * l2) / (lu * li)


def submult_ratio(r1: geo.Region, r2: geo.Region, z, mode: str = "oracle",
                  h: float | None = None, bbox=None, sources=None) -> float:
    """``lam_1 lam_2 / (lam_union lam_intersection)`` at ``z``."""
    _check_pair(r1, r2)
    z = geo.as_point(z)
    if not (geo.contains(r1, z) and geo.contains(r2, z)):
        raise DomainError(f"{z!r} is not in the intersection")
    src = sources or density_sources(pair_regions(r1, r2), mode, h, bbox)
    return float(_ratio(*(s(z) for s in src)))


@dataclass(frozen=True)
class Sample:
    point: complex
    lam1: float
    lam2: float
    lam_union: float
    lam_intersection: float
    ratio: float

    def to_dict(self):
        return {"point": [self.point.real, self.point.imag], "lam1": self.lam1, "lam2": self.lam2,
                "lam_union": self.lam_union, "lam_intersection": self.lam_intersection,
                "ratio": self.ratio}


@dataclass(frozen=True)
class VerificationReport:
    samples: list
    min_ratio: float
    equality_detected: bool
    tolerance: float
    mode: str
    passed: bool
    h: float
    seed: int
    nested: bool
    max_deviation: float
    bbox: tuple | None = None
    sources: list = field(default_factory=list, repr=False)

    def ratio_at(self, z) -> float:
        """Ratio at another point of the intersection from the same densities."""
        return float(_ratio(*(s(geo.as_point(z)) for s in self.sources)))

    def check_consistency(self, tol: float = 1e-12) -> bool:
        return all(abs(_ratio(s.lam1, s.lam2, s.lam_union, s.lam_intersection) - s.ratio)
                   <= tol * abs(s.ratio) for s in self.samples)

    def to_dict(self):
        d = {"passed": self.passed, "mode": self.mode, "tolerance": self.tolerance,
             "h": self.h, "seed": self.seed, "sample_count": len(self.samples),
             "min_ratio": self.min_ratio, "max_deviation": self.max_deviation,
             "nested": self.nested, "equality_detected": self.equality_detected}
        if self.bbox is not None:
            d["bbox"] = list(self.bbox)
        d["samples"] = [s.to_dict() for s in self.samples]
        return d


def verify_theorem1(r1: geo.Region, r2: geo.Region, samples: int = 500, tol: float = 5e-3,
                    mode: str = "oracle", h: float | None = None, seed: int = 0,
                    bbox=None, **solve_kw) -> VerificationReport:
    """Four-density ratio at seeded samples of the intersection.

    Passes iff the smallest ratio is at least ``1 - tol``.  Equality is
    reported when every ratio is within ``tol`` of 1 and the components
    through the first sample are nested.
    """
    if tol < 0:
        raise PreconditionError("tolerance must be non-negative")
    _check_pair(r1, r2)
    h = (PDE_SPACING if mode == "pde" else ORACLE_SPACING) if h is None else float(h)
    regs = pair_regions(r1, r2)
    pts = geo.sample_nodes(regs[3], h, samples, seed, SAMPLE_MARGIN)
    box = None
    if mode != "oracle":
        box = bbox if bbox is not None else shared_bbox(regs, h)
    src = density_sources(regs, mode, h, box, **solve_kw)
    vals = [np.asarray(s(pts), dtype=float) for s in src]
    ratios = _ratio(*vals)
    rows = [Sample(complex(p), *(float(v[k]) for v in vals), float(ratios[k]))
            for k, p in enumerate(pts)]
    min_ratio = float(np.min(ratios))
    dev = float(np.max(np.abs(ratios - 1.0)))
    nested = nested_at(r1, r2, pts[0], h)
    return VerificationReport(rows, min_ratio, bool(dev <= tol and nested), float(tol), mode,
                              bool(min_ratio >= 1.0 - tol), h, int(seed), nested, dev,
                              None if box is None else tuple(float(b) for b in box), src)


# ---------------------------------------------------------------------------
# Weak constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakConstantReport:
    points: list
    curvatures: list
    ratios: list
    min_curvature: float
    min_ratio: float
    tolerance: float
    mode: str
    step: float
    h: float
    passed: bool

    def to_dict(self):
        return {"passed": self.passed, "mode": self.mode, "tolerance": self.tolerance,
                "h": self.h, "step": self.step, "curvature_bound": -2.0,
                "ratio_bound": WEAK_BOUND, "min_curvature": self.min_curvature,
                "min_ratio": self.min_ratio,
                "samples": [{"point": [p.real, p.imag], "curvature": c, "ratio": r}
                            for p, c, r in zip(self.points, self.curvatures, self.ratios)]}


def verify_weak_constant(u1: geo.Region, u2: geo.Region, samples: int = 200, tol: float = 1e-3,
                         mode: str = "oracle", h: float | None = None, seed: int = 0,
                         step: float | None = None, bbox=None, **solve_kw) -> WeakConstantReport:
    """Curvature of ``lam_1 lam_2 / lam_union`` and the ``1/sqrt 2`` bound.

    The curvature is the 5-point finite difference with spacing ``step``
    (default ``1e-3`` against closed forms, the grid spacing otherwise).
    Passes iff every curvature is at least ``-2 - tol`` and every
    four-density ratio is at least ``1/sqrt(2)``.
    """
    _check_pair(u1, u2)
    h = (PDE_SPACING if mode == "pde" else ORACLE_SPACING) if h is None else float(h)
    regs = pair_regions(u1, u2)
    pts = geo.sample_nodes(regs[3], h, samples, seed, SAMPLE_MARGIN)
    box = None
    if mode != "oracle":
        box = bbox if bbox is not None else shared_bbox(regs, h)
    src = density_sources(regs, mode, h, box, **solve_kw)
    if step is None:
        step = 1e-3 if all(s.kind == "oracle" for s in src[:3]) else h
    if step > SAMPLE_MARGIN * h / 2:
        raise PreconditionError("finite-difference step reaches too close to the boundary")

    def product(z):
        return src[0](z) * src[1](z) / src[2](z)

    curv = np.asarray(cat.gaussian_curvature(product, pts, step), dtype=float)
    vals = [np.asarray(s(pts), dtype=float) for s in src]
    ratios = _ratio(*vals)
    min_c, min_r = float(np.min(curv)), float(np.min(ratios))
    return WeakConstantReport([complex(p) for p in pts], curv.tolist(), ratios.tolist(), min_c,
                              min_r, float(tol), mode, float(step), h,
                              bool(min_c >= -2.0 - tol and min_r >= WEAK_BOUND))


# ---------------------------------------------------------------------------
# Boundary behaviour
# ---------------------------------------------------------------------------


def boundary_ratio(omega: geo.Region, u: geo.Region, xi, approach, mode: str = "oracle",
                   h: float | None = None, **solve_kw) -> list[float]:
    """``lam_omega / lam_u`` along ``approach``, a list of points of ``u``
    (and so of ``omega``) tending to the boundary point ``xi``."""
    xi = geo.as_point(xi)
    pts = [geo.as_point(p) for p in approach]
    if not pts:
        raise PreconditionError("approach list is empty")
    for p in pts:
        if not geo.contains(u, p):
            raise DomainError(f"approach point {p!r} is not in the smaller domain")
        if not geo.contains(omega, p):
            raise DomainError(f"approach point {p!r} is not in the larger domain")
    if abs(float(u.sdf(np.asarray(xi)))) > 1e-9:
        raise DomainError(f"{xi!r} is not a boundary point of the smaller domain")
    regs = [omega, u]
    box = None
    if mode != "oracle":
        h = PDE_SPACING if h is None else float(h)
        box = shared_bbox(regs, h)
    big, small = density_sources(regs, mode, h, box, **solve_kw)
    return [float(big(p) / small(p)) for p in pts]


def counterexample(distances=(1e-1, 1e-2, 1e-3)) -> dict:
    """Ratios against the unit disk approaching ``1``, for the punctured disk
    of radius 2 about ``1`` and for the plane minus ``{-1, 1}``.

    The second domain contains the first, so its ratios are the smaller;
    both tend to 0 although the unit disk and both larger domains share the
    boundary point 1.
    """
    ds = [float(d) for d in distances]
    if any(not 0 < d < 1 for d in ds):
        raise PreconditionError("approach distances must lie in (0, 1)")
    disk = geo.Disk(0j, 1.0)
    pts = [1.0 - d for d in ds]
    punctured = cat.PuncturedDisk(1 + 0j, 2.0).region()
    plane = geo.PuncturedPlane((-1 + 0j, 1 + 0j))
    return {"distances": ds,
            "punctured_disk": boundary_ratio(punctured, disk, 1.0, pts),
            "twice_punctured_plane": boundary_ratio(plane, disk, 1.0, pts)}


# ---------------------------------------------------------------------------
# Capacity submultiplicativity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CapacitySubmultReport:
    capacities: dict
    lhs: float
    rhs: float
    tolerance: float
    degenerate: bool
    passed: bool

    def to_dict(self):
        return {"passed": self.passed, "tolerance": self.tolerance, "form": "product",
                "degenerate_intersection": self.degenerate, "lhs": self.lhs, "rhs": self.rhs,
                "capacities": {k: v.to_dict() for k, v in self.capacities.items()}}


def verify_capacity_submult(k1, k2, h_list, tol: float = 2e-2, **pcap_kw) -> CapacitySubmultReport:
    """``pcap(K1 | K2) pcap(K1 & K2) <= pcap(K1) pcap(K2) (1 + tol)``.

    Always in product form, so an intersection with at most two points
    contributes 0.
    """
    k1 = k1 if isinstance(k1, geo.CompactSpec) else geo.CompactSpec(k1)
    k2 = k2 if isinstance(k2, geo.CompactSpec) else geo.CompactSpec(k2)
    sets = {"k1": k1, "k2": k2,
            "union": geo.CompactSpec(geo.Union((k1.region, k2.region))),
            "intersection": geo.CompactSpec(geo.Intersection((k1.region, k2.region)))}
    names = list(sets)
    reps = parallel_map(lambda n: pcap(sets[n], h_list, **pcap_kw), names)
    caps: dict[str, CapacityReport] = dict(zip(names, reps))
    lhs = caps["union"].pcap * caps["intersection"].pcap
    rhs = caps["k1"].pcap * caps["k2"].pcap
    degenerate = caps["intersection"].point_count_class != "many"
    return CapacitySubmultReport(caps, float(lhs), float(rhs), float(tol), degenerate,
                                 bool(lhs <= rhs * (1.0 + tol)))


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    points: list
    inner: list
    outer: list
    max_excess: float
    tolerance: float
    mode: str
    h: float
    passed: bool

    def to_dict(self):
        return {"passed": self.passed, "mode": self.mode, "h": self.h, "tolerance": self.tolerance,
                "max_excess": self.max_excess, "sample_count": len(self.points)}


def verify_monotonicity(inner: geo.Region, outer: geo.Region, samples: int = 200,
                        tol: float = 5e-3, mode: str = "oracle", h: float | None = None,
                        seed: int = 0, **solve_kw) -> MonotonicityReport:
    """``lam_outer <= lam_inner + tol`` at samples of the smaller domain."""
    h = (PDE_SPACING if mode == "pde" else ORACLE_SPACING) if h is None else float(h)
    pts = geo.sample_nodes(inner, h, samples, seed, SAMPLE_MARGIN)
    if not all(geo.contains(outer, p) for p in pts):
        raise PreconditionError("sampled points of the smaller domain leave the larger one")
    box = None
    if mode != "oracle":
        box = shared_bbox([inner, outer], h)
    small, big = density_sources([inner, outer], mode, h, box, **solve_kw)
    li = np.asarray(small(pts), dtype=float)
    lo = np.asarray(big(pts), dtype=float)
    excess = float(np.max(lo - li))
    return MonotonicityReport([complex(p) for p in pts], li.tolist(), lo.tolist(), excess,
                              float(tol), mode, h, bool(excess <= tol))
