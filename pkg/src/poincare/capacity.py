"""Poincaré capacity of compact plane sets.

``pcap(K)`` is the hyperbolic density of the complement of ``K`` at infinity
divided by the spherical density there.  In the chart ``w = 1/(z - c)`` with
``c`` in ``K`` the complement becomes a domain containing ``w = 0``; its
density ``mu(0)`` is read at that node and the spherical density in the same
chart is 2, so ``pcap = mu(0)/2``.  This number is also the derivative at
infinity of the normalised universal covering map of the complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import geometry as geo
from .errors import PreconditionError, UnsupportedOracleError
from .grid import Chart, TRUNCATION_FACTOR, default_bbox
from .solver import density_at, observed_order, richardson, solve_region

SPHERE_AT_INFINITY = 2.0


@dataclass(frozen=True)
class CapacityReport:
    pcap: float
    levels: list
    extrapolated: float
    order: float | None
    point_count_class: object
    center: complex | None = None
    bbox: tuple | None = None
    solves: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "pcap": self.pcap,
            "levels": [{"h": h, "value": v} for h, v in self.levels],
            "extrapolated": self.extrapolated,
            "order": self.order,
            "point_count_class": self.point_count_class,
        }
        if self.center is not None:
            d["center"] = [self.center.real, self.center.imag]
        if self.bbox is not None:
            d["bbox"] = list(self.bbox)
        if self.solves:
            d["solves"] = self.solves
        return d


def _as_compact(K) -> geo.CompactSpec:
    if isinstance(K, geo.CompactSpec):
        return K
    if isinstance(K, geo.Region):
        return geo.CompactSpec(K)
    raise PreconditionError(f"not a compact set: {K!r}")


def pcap(K, h_list, *, center=None, bbox=None, truncation: float = TRUNCATION_FACTOR,
         **solve_kw) -> CapacityReport:
    """Poincaré capacity with per-level values and a Richardson estimate.

    Sets with at most two points have capacity 0 and are not solved.
    ``center`` (a point of K) picks the inversion chart; by default the
    deepest interior point of K or one of its feature points.
    """
    K = _as_compact(K)
    cls = K.point_count_class()
    if cls != "many":
        return CapacityReport(0.0, [], 0.0, None, cls)
    hs = [float(h) for h in h_list]
    if not hs:
        raise PreconditionError("at least one grid spacing is required")
    for a, b in zip(hs, hs[1:]):
        if not b < a:
            raise PreconditionError(f"grid spacings must be strictly decreasing, got {hs}")
    c = K.default_center() if center is None else geo.as_point(center)
    if not K.contains(c):
        raise PreconditionError("inversion centre must lie in K")
    chart = Chart.inversion(c)
    domain = K.complement()
    box = bbox if bbox is not None else default_bbox(domain, chart, hs[-1], truncation)
    values, solves = [], []
    for h in hs:
        fld = solve_region(domain, h, chart, box, **solve_kw)
        values.append(density_at(fld, at_infinity=True) / SPHERE_AT_INFINITY)
        solves.append({"h": h, "newton_iterations": fld.newton_iterations,
                       "residual_norm": fld.residual_norm})
    if len(hs) >= 2:
        extrap = richardson(hs, values)
    else:
        extrap = values[-1]
    order = observed_order(hs, values) if len(hs) >= 3 else None
    return CapacityReport(extrap, list(zip(hs, values)), extrap, order, cls, c,
                          tuple(float(b) for b in box), solves)


def covering_derivative(K, h_list, **kw) -> float:
    """Derivative at infinity of the normalised covering map onto the complement of K.

    Realised through its identity with the Poincaré capacity.
    """
    K = _as_compact(K)
    if K.point_count_class() != "many":
        raise PreconditionError("the complement needs at least three boundary points")
    return pcap(K, h_list, **kw).extrapolated


def cap_connected_oracle(shape) -> float:
    """Logarithmic capacity of a closed disk (its radius) or a segment (length / 4)."""
    if isinstance(shape, geo.CompactSpec):
        shape = shape.region
    if isinstance(shape, geo.Disk):
        return float(shape.radius)
    if isinstance(shape, geo.Segment):
        return abs(shape.b - shape.a) / 4.0
    raise UnsupportedOracleError(f"no capacity oracle for {type(shape).__name__}")
