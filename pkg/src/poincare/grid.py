"""Charts on the sphere and origin-aligned lattices with node classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import geometry as geo
from .errors import DomainError, EmptyGridError, PreconditionError

EXTERIOR, INTERIOR, BAND, RING, TRUNCATION = 0, 1, 2, 3, 4
KIND_NAMES = {EXTERIOR: "exterior", INTERIOR: "interior", BAND: "band",
              RING: "ring", TRUNCATION: "truncation"}

RING_FACTOR = 4.0
BAND_FACTOR = 2.0
TRUNCATION_FACTOR = 4.0


@dataclass(frozen=True)
class Chart:
    """Coordinate chart: ``identity`` (w = z) or ``inversion`` (w = 1/(z - center))."""

    kind: str = "identity"
    center: complex = 0j

    def __post_init__(self):
        if self.kind not in ("identity", "inversion"):
            raise PreconditionError(f"unknown chart kind {self.kind!r}")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def inversion(cls, center=0j):
        return cls("inversion", complex(center))

    def to_chart(self, z):
        z = np.asarray(z, dtype=complex)
        return z if self.kind == "identity" else 1.0 / (z - self.center)

    def from_chart(self, w):
        w = np.asarray(w, dtype=complex)
        return w if self.kind == "identity" else self.center + 1.0 / w

    def chart_region(self, region: geo.Region) -> geo.Region:
        if self.kind == "identity":
            return region
        return geo.invert(region, self.center)

    def plane_density(self, mu, w):
        """Convert a chart density ``mu(w)`` into the plane density at ``z``."""
        if self.kind == "identity":
            return mu
        return mu * np.abs(w) ** 2

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "inversion":
            d["center"] = [self.center.real, self.center.imag]
        return d


@dataclass(frozen=True, eq=False)
class Grid:
    """Lattice ``{(i h, j h)}`` restricted to ``i0 <= i < i0 + nx`` (same for j).

    Arrays are indexed ``[i, j]`` with ``i`` along x.
    """

    chart: Chart
    region: geo.Region
    h: float
    i0: int
    j0: int
    nx: int
    ny: int
    kind: np.ndarray
    sd: np.ndarray
    punctures: tuple = ()
    rho: float = 0.0
    infinity_puncture: bool = False
    source: geo.Region | None = field(default=None, repr=False)

    @property
    def x(self):
        return self.h * (self.i0 + np.arange(self.nx))

    @property
    def y(self):
        return self.h * (self.j0 + np.arange(self.ny))

    @cached_property
    def points(self) -> np.ndarray:
        gx, gy = np.meshgrid(self.x, self.y, indexing="ij")
        return gx + 1j * gy

    @property
    def bbox(self):
        x, y = self.x, self.y
        return (float(x[0]), float(x[-1]), float(y[0]), float(y[-1]))

    def sdf(self, region: geo.Region) -> np.ndarray:
        return np.asarray(region.sdf(self.points), dtype=float)

    def nearest_index(self, w):
        """Index of the node nearest to chart point ``w``, or None off the grid."""
        w = complex(w)
        i = int(round(w.real / self.h)) - self.i0
        j = int(round(w.imag / self.h)) - self.j0
        if 0 <= i < self.nx and 0 <= j < self.ny:
            return (i, j)
        return None

    def count(self, kind: int) -> int:
        return int(np.count_nonzero(self.kind == kind))

    def counts(self) -> dict:
        return {KIND_NAMES[k]: self.count(k) for k in KIND_NAMES}

    def describe(self) -> dict:
        return {"chart": self.chart.to_dict(), "h": self.h, "bbox": list(self.bbox),
                "nodes": self.counts(), "ring_radius": self.rho}


def default_bbox(region: geo.Region, chart: Chart, h: float, truncation: float = TRUNCATION_FACTOR):
    """Box in chart coordinates that covers the chart image of ``region``.

    Bounded images get a margin of three cells.  Unbounded images (possible
    only in the inversion chart) are truncated to ``[-W, W]^2`` with ``W``
    a multiple of the largest finite feature modulus.
    """
    creg = chart.chart_region(region)
    box = geo.bounds(creg)
    if box is not None:
        m = 3 * h
        return (box[0] - m, box[1] + m, box[2] - m, box[3] + m)
    if chart.kind == "identity":
        raise PreconditionError("unbounded region: use the inversion chart")
    feats = [abs(p) for p in creg.feature_points() if math.isfinite(abs(p))]
    wmax = truncation * max([1.0] + feats)
    return (-wmax, wmax, -wmax, wmax)


def discretize(region: geo.Region, chart: Chart, bbox=None, h: float = 1 / 64,
               ring_factor: float = RING_FACTOR, truncation: float = TRUNCATION_FACTOR) -> Grid:
    """Classify lattice nodes for a solve of ``region`` in ``chart``.

    ``bbox`` is ``(xmin, xmax, ymin, ymax)`` in chart coordinates.
    """
    if not h > 0:
        raise PreconditionError("grid spacing must be positive")
    if not geo.is_hyperbolic(region):
        raise PreconditionError("region is not hyperbolic")
    creg = chart.chart_region(region)
    if chart.kind == "identity" and geo.bounds(creg) is None:
        raise PreconditionError("unbounded region in the identity chart: use the inversion chart")
    if bbox is None:
        bbox = default_bbox(region, chart, h, truncation)
    xmin, xmax, ymin, ymax = (float(b) for b in bbox)
    i0, i1 = math.ceil(xmin / h - 1e-9), math.floor(xmax / h + 1e-9)
    j0, j1 = math.ceil(ymin / h - 1e-9), math.floor(ymax / h + 1e-9)
    nx, ny = i1 - i0 + 1, j1 - j0 + 1
    if nx < 3 or ny < 3:
        raise EmptyGridError("bounding box holds fewer than 3x3 nodes")

    gx, gy = np.meshgrid(h * (i0 + np.arange(nx)), h * (j0 + np.arange(ny)), indexing="ij")
    pts = gx + 1j * gy
    sd = np.asarray(creg.sdf(pts), dtype=float)
    inside = sd > 0

    rho = ring_factor * h
    punctures = tuple(geo.isolated_boundary_points(creg, h / 8))
    near_p = np.zeros(pts.shape, dtype=bool)
    for q in punctures:
        near_p |= np.abs(pts - q) < rho

    edge = np.zeros(pts.shape, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    if chart.kind == "identity" and np.any(inside & edge):
        raise PreconditionError("bounding box cuts the region; enlarge it")

    interior = inside & (sd > BAND_FACTOR * h) & ~near_p & ~edge
    if not interior.any():
        raise EmptyGridError("no interior nodes at this resolution")
    adj = np.zeros_like(interior)
    adj[1:, :] |= interior[:-1, :]
    adj[:-1, :] |= interior[1:, :]
    adj[:, 1:] |= interior[:, :-1]
    adj[:, :-1] |= interior[:, 1:]
    boundary = adj & ~interior

    kind = np.full(pts.shape, EXTERIOR, dtype=np.int8)
    kind[interior] = INTERIOR
    kind[boundary & near_p] = RING
    kind[boundary & ~near_p & (sd <= BAND_FACTOR * h)] = BAND
    kind[boundary & ~near_p & (sd > BAND_FACTOR * h) & edge] = TRUNCATION
    return Grid(chart=chart, region=creg, h=float(h), i0=i0, j0=j0, nx=nx, ny=ny,
                kind=kind, sd=sd, punctures=punctures, rho=rho,
                infinity_puncture=(chart.kind == "inversion" and creg.open_rank == 2),
                source=region)


def check_point_on_grid(grid: Grid, w) -> tuple[int, int]:
    ij = grid.nearest_index(w)
    if ij is None:
        raise DomainError(f"point {w!r} lies off the grid")
    return ij
