"""Regions of the Riemann sphere as CSG trees over analytic primitives.

Every node carries two readings of the same shape:

* the *open form*, used when the node describes a domain Omega, and
* the *closed form*, used by ``Complement`` (which takes the complement of
  the closure) and by :class:`CompactSpec`.

Points are complex numbers.  All ``sdf`` methods are vectorised over complex
``numpy`` arrays and return a signed distance that is positive on the open
form and non-negative exactly on the closed form.  For single primitives the
magnitude is the exact Euclidean distance to the boundary; boolean nodes use
the usual max/min combination, which bounds the true distance from below.

Behaviour at the point at infinity is tracked symbolically through two ranks:

``open_rank``
    0 = a neighbourhood of infinity misses the open form, 1 = infinity is a
    non-isolated boundary point, 2 = infinity is an isolated boundary point
    (a puncture), 3 = infinity is an interior point.
``closed_rank``
    0 = a neighbourhood of infinity misses the closed form, 1 = infinity is
    an isolated point of it, 2 = a non-isolated point, 3 = interior point.

Complement swaps them as ``open' = 3 - closed`` and ``closed' = 3 - open``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.optimize import linprog

from .errors import (
    DomainError,
    ExhaustedError,
    IndeterminateError,
    NoSamplesError,
    PreconditionError,
    StructuralError,
)

INF = complex(math.inf, 0.0)
"""Marker for the point at infinity inside point sets."""


class Many:
    """Marker for an infinite point set (``repr`` is ``MANY``)."""

    def __repr__(self):
        return "MANY"


MANY = Many()

_TOL = 1e-12


def as_point(p) -> complex:
    """Coerce ``(x, y)``, ``[x, y]`` or a complex number to ``complex``."""
    if isinstance(p, (complex, float, int, np.number)):
        z = complex(p)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"point must be finite, got {p!r}")
    return z


def _dot(p, q):
    """Euclidean dot product of points given as complex numbers."""
    return (p * np.conj(q)).real


def _segment_distance(z, a: complex, b: complex):
    d = b - a
    if d == 0:
        return np.abs(z - a)
    t = np.clip(_dot(z - a, d) / abs(d) ** 2, 0.0, 1.0)
    return np.abs(z - (a + t * d))


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------


class Region:
    """Base class of all CSG nodes."""

    open_rank = 0
    closed_rank = 0

    def sdf(self, z):
        raise NotImplementedError

    def children(self) -> tuple["Region", ...]:
        return ()

    def feature_points(self) -> list[complex]:
        """Finite points that characterise the node (centres, anchors, ...)."""
        return [p for c in self.children() for p in c.feature_points()]

    def point_candidates(self) -> list[complex]:
        """Points that may be isolated boundary points of the open form."""
        return [p for c in self.children() for p in c.point_candidates()]

    def to_dict(self) -> dict:
        raise NotImplementedError

    # convenience
    def contains(self, p) -> bool:
        return contains(self, p)


def _pt(z: complex) -> list[float]:
    return [z.real, z.imag]


@dataclass(frozen=True)
class Disk(Region):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise StructuralError("disk radius must be positive")

    def sdf(self, z):
        return self.radius - np.abs(z - self.center)

    def feature_points(self):
        return [self.center]

    def to_dict(self):
        return {"type": "disk", "center": _pt(self.center), "radius": self.radius}


@dataclass(frozen=True)
class DiskComplement(Region):
    """Exterior of the closed disk; contains infinity."""

    center: complex
    radius: float
    open_rank = 3
    closed_rank = 3

    def __post_init__(self):
        if not self.radius > 0:
            raise StructuralError("disk radius must be positive")

    def sdf(self, z):
        return np.abs(z - self.center) - self.radius

    def feature_points(self):
        return [self.center]

    def to_dict(self):
        return {"type": "diskcomplement", "center": _pt(self.center), "radius": self.radius}


@dataclass(frozen=True)
class HalfPlane(Region):
    """Open half-plane ``{z : <z - anchor, normal> > 0}``."""

    anchor: complex
    normal: complex
    open_rank = 1
    closed_rank = 2

    def __post_init__(self):
        if abs(abs(self.normal) - 1.0) > _TOL:
            raise StructuralError("half-plane normal must have unit length")

    def sdf(self, z):
        return _dot(z - self.anchor, self.normal)

    def feature_points(self):
        return [self.anchor]

    def to_dict(self):
        return {"type": "halfplane", "anchor": _pt(self.anchor), "normal": _pt(self.normal)}


@dataclass(frozen=True)
class PuncturedPlane(Region):
    """The finite plane minus finitely many points (infinity is omitted too)."""

    points: tuple[complex, ...]
    open_rank = 2
    closed_rank = 3

    def __post_init__(self):
        if len(self.points) < 1:
            raise StructuralError("punctured plane needs at least one puncture")
        if len(set(self.points)) != len(self.points):
            raise StructuralError("puncture points must be pairwise distinct")

    def sdf(self, z):
        z = np.asarray(z)
        return np.min([np.abs(z - p) for p in self.points], axis=0)

    def feature_points(self):
        return list(self.points)

    def point_candidates(self):
        return list(self.points)

    def to_dict(self):
        return {"type": "punctures", "points": [_pt(p) for p in self.points]}


@dataclass(frozen=True)
class FullPlane(Region):
    open_rank = 2
    closed_rank = 3

    def sdf(self, z):
        return np.full(np.shape(z), np.inf)

    def to_dict(self):
        return {"type": "fullplane"}


@dataclass(frozen=True)
class Segment(Region):
    """Closed segment; its open form is empty."""

    a: complex
    b: complex

    def sdf(self, z):
        return -_segment_distance(z, self.a, self.b)

    def feature_points(self):
        return [0.5 * (self.a + self.b), self.a, self.b]

    def to_dict(self):
        return {"type": "segment", "a": _pt(self.a), "b": _pt(self.b)}


@dataclass(frozen=True)
class Points(Region):
    """Finite closed point set, optionally including infinity."""

    points: tuple[complex, ...]
    at_infinity: bool = False

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise StructuralError("points must be pairwise distinct")
        if not self.points and not self.at_infinity:
            raise StructuralError("empty point set")

    @property
    def closed_rank(self):
        return 1 if self.at_infinity else 0

    def sdf(self, z):
        z = np.asarray(z)
        if not self.points:
            return np.full(z.shape, -np.inf)
        return -np.min([np.abs(z - p) for p in self.points], axis=0)

    def feature_points(self):
        return list(self.points)

    def point_candidates(self):
        return list(self.points)

    def to_dict(self):
        d = {"type": "points", "points": [_pt(p) for p in self.points]}
        if self.at_infinity:
            d["at_infinity"] = True
        return d


@dataclass(frozen=True)
class Arc(Region):
    """Closed circular arc from angle ``start`` sweeping ``sweep`` radians ccw."""

    center: complex
    radius: float
    start: float
    sweep: float

    def sdf(self, z):
        z = np.asarray(z, dtype=complex)
        rel = z - self.center
        theta = np.mod(np.angle(rel) - self.start, 2 * np.pi)
        on_span = theta <= self.sweep
        radial = np.abs(np.abs(rel) - self.radius)
        p0 = self.center + self.radius * np.exp(1j * self.start)
        p1 = self.center + self.radius * np.exp(1j * (self.start + self.sweep))
        ends = np.minimum(np.abs(z - p0), np.abs(z - p1))
        return -np.where(on_span, radial, ends)

    def endpoints(self):
        return (
            self.center + self.radius * np.exp(1j * self.start),
            self.center + self.radius * np.exp(1j * (self.start + self.sweep)),
        )

    def feature_points(self):
        return list(self.endpoints())

    def to_dict(self):
        return {
            "type": "arc",
            "center": _pt(self.center),
            "radius": self.radius,
            "start": self.start,
            "sweep": self.sweep,
        }


@dataclass(frozen=True)
class Ray(Region):
    """Closed ray ``anchor + t * direction`` for ``t >= 0``, through infinity."""

    anchor: complex
    direction: complex
    closed_rank = 2

    def sdf(self, z):
        z = np.asarray(z, dtype=complex)
        t = np.maximum(_dot(z - self.anchor, self.direction), 0.0)
        return -np.abs(z - (self.anchor + t * self.direction))

    def feature_points(self):
        return [self.anchor]

    def to_dict(self):
        return {"type": "ray", "anchor": _pt(self.anchor), "direction": _pt(self.direction)}


# ---------------------------------------------------------------------------
# Boolean nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Union(Region):
    args: tuple[Region, ...]

    def __post_init__(self):
        if len(self.args) < 1:
            raise StructuralError("union needs at least one argument")

    @property
    def open_rank(self):
        return max(a.open_rank for a in self.args)

    @property
    def closed_rank(self):
        return max(a.closed_rank for a in self.args)

    def sdf(self, z):
        return np.max([a.sdf(z) for a in self.args], axis=0)

    def children(self):
        return self.args

    def to_dict(self):
        return {"type": "union", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Intersection(Region):
    args: tuple[Region, ...]

    def __post_init__(self):
        if len(self.args) < 1:
            raise StructuralError("intersection needs at least one argument")

    def _polygon_bounded(self) -> bool:
        planes = [a for a in self.args if isinstance(a, HalfPlane)]
        return _halfplane_box(planes) is not None

    @property
    def open_rank(self):
        r = min(a.open_rank for a in self.args)
        return 0 if r and self._polygon_bounded() else r

    @property
    def closed_rank(self):
        r = min(a.closed_rank for a in self.args)
        return 0 if r and self._polygon_bounded() else r

    def sdf(self, z):
        return np.min([a.sdf(z) for a in self.args], axis=0)

    def children(self):
        return self.args

    def to_dict(self):
        return {"type": "intersection", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Complement(Region):
    """Sphere minus the closed form of ``arg``."""

    arg: Region

    @property
    def open_rank(self):
        return 3 - self.arg.closed_rank

    @property
    def closed_rank(self):
        return 3 - self.arg.open_rank

    def sdf(self, z):
        return -self.arg.sdf(z)

    def children(self):
        return (self.arg,)

    def to_dict(self):
        return {"type": "complement", "arg": self.arg.to_dict()}


@dataclass(frozen=True)
class Offset(Region):
    """Inner parallel set ``{z : sdf(z) > delta}``; used for exhaustions."""

    arg: Region
    delta: float

    @property
    def open_rank(self):
        return self.arg.open_rank

    @property
    def closed_rank(self):
        return self.arg.closed_rank

    def sdf(self, z):
        return self.arg.sdf(z) - self.delta

    def children(self):
        return (self.arg,)

    def to_dict(self):
        return {"type": "offset", "arg": self.arg.to_dict(), "delta": self.delta}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_KEYS = {
    "disk": {"center", "radius"},
    "halfplane": {"anchor", "normal"},
    "diskcomplement": {"center", "radius"},
    "punctures": {"points"},
    "fullplane": set(),
    "union": {"args"},
    "intersection": {"args"},
    "complement": {"arg"},
    "segment": {"a", "b"},
    "points": {"points"},
}


def parse_region(data: dict) -> Region:
    """Build a region tree from its JSON object form.

    Unknown node types and unknown keys are rejected with
    :class:`StructuralError`.
    """
    if not isinstance(data, dict) or "type" not in data:
        raise StructuralError(f"region node must be an object with a 'type': {data!r}")
    kind = data["type"]
    if kind not in _KEYS:
        raise StructuralError(f"unknown region type {kind!r}")
    extra = set(data) - _KEYS[kind] - {"type"}
    missing = _KEYS[kind] - set(data)
    if extra:
        raise StructuralError(f"unknown keys for {kind}: {sorted(extra)}")
    if missing:
        raise StructuralError(f"missing keys for {kind}: {sorted(missing)}")
    try:
        if kind == "disk":
            return Disk(as_point(data["center"]), float(data["radius"]))
        if kind == "diskcomplement":
            return DiskComplement(as_point(data["center"]), float(data["radius"]))
        if kind == "halfplane":
            return HalfPlane(as_point(data["anchor"]), as_point(data["normal"]))
        if kind == "punctures":
            return PuncturedPlane(tuple(as_point(p) for p in data["points"]))
        if kind == "points":
            return Points(tuple(as_point(p) for p in data["points"]))
        if kind == "fullplane":
            return FullPlane()
        if kind == "segment":
            return Segment(as_point(data["a"]), as_point(data["b"]))
        if kind in ("union", "intersection"):
            args = data["args"]
            if not isinstance(args, list) or not args:
                raise StructuralError(f"{kind} needs a non-empty 'args' list")
            nodes = tuple(parse_region(a) for a in args)
            return Union(nodes) if kind == "union" else Intersection(nodes)
        return Complement(parse_region(data["arg"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, StructuralError):
            raise
        raise StructuralError(f"bad {kind} node: {exc}") from exc


def load_region(path) -> Region:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: invalid JSON ({exc})") from exc
    return parse_region(data)


# ---------------------------------------------------------------------------
# Point queries
# ---------------------------------------------------------------------------


def _check_tree(region):
    if not isinstance(region, Region):
        raise StructuralError(f"not a region node: {region!r}")
    for c in region.children():
        _check_tree(c)


def contains(region: Region, p) -> bool:
    """Open-set membership of a finite point."""
    _check_tree(region)
    return bool(region.sdf(np.asarray(as_point(p))) > 0)


def closed_contains(region: Region, p) -> bool:
    """Membership in the closed form of ``region``."""
    return bool(region.sdf(np.asarray(as_point(p))) >= 0)


def distance_to_boundary(region: Region, p) -> float:
    """Distance from an interior point to the boundary.

    Exact for single primitives, a lower bound for boolean combinations.
    """
    _check_tree(region)
    d = float(region.sdf(np.asarray(as_point(p))))
    if not d > 0:
        raise DomainError(f"point {p!r} is not inside the region")
    return d


def normal_form(region: Region) -> Region:
    """Push complements down to the leaves (De Morgan), folding simple cases."""
    if isinstance(region, Complement):
        arg = region.arg
        if isinstance(arg, Complement):
            return normal_form(arg.arg)
        if isinstance(arg, Union):
            return Intersection(tuple(normal_form(Complement(a)) for a in arg.args))
        if isinstance(arg, Intersection):
            return Union(tuple(normal_form(Complement(a)) for a in arg.args))
        return _complement_simplify(arg)
    if isinstance(region, Union):
        return Union(tuple(normal_form(a) for a in region.args))
    if isinstance(region, Intersection):
        return Intersection(tuple(normal_form(a) for a in region.args))
    if isinstance(region, Offset):
        return Offset(normal_form(region.arg), region.delta)
    return region


def bounds(region: Region):
    """Axis-aligned box ``(xmin, xmax, ymin, ymax)`` of the open form, or None."""
    return _bounds(normal_form(region))


def _bounds(region: Region):
    if isinstance(region, Disk):
        c, r = region.center, region.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)
    if isinstance(region, Offset):
        return _bounds(region.arg)
    if isinstance(region, Union):
        boxes = [_bounds(a) for a in region.args]
        if any(b is None for b in boxes):
            return None
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))
    if isinstance(region, Intersection):
        boxes = [b for b in (_bounds(a) for a in region.args) if b is not None]
        poly = _halfplane_box([a for a in region.args if isinstance(a, HalfPlane)])
        if poly is not None:
            boxes.append(poly)
        if not boxes:
            return None
        return (max(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), min(b[3] for b in boxes))
    return None


def _halfplane_box(planes):
    """Box of the polygon cut out by half-planes, or None if it is unbounded."""
    if len(planes) < 3:
        return None
    # <z - anchor, normal> >= 0  as  -normal . z <= -normal . anchor
    a_ub = np.array([[-p.normal.real, -p.normal.imag] for p in planes])
    b_ub = np.array([-_dot(p.anchor, p.normal) for p in planes])
    box = []
    for cost in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * 2, method="highs")
        if res.status != 0:
            return None
        box.append(res.fun * (1 if sum(cost) > 0 else -1))
    return (box[0], box[1], box[2], box[3])


def _closed_bounds(region: Region):
    """Box of the closed form for compact trees."""
    if isinstance(region, Disk):
        return _bounds(region)
    if isinstance(region, Segment):
        return (min(region.a.real, region.b.real), max(region.a.real, region.b.real),
                min(region.a.imag, region.b.imag), max(region.a.imag, region.b.imag))
    if isinstance(region, Points):
        xs = [p.real for p in region.points]
        ys = [p.imag for p in region.points]
        return (min(xs), max(xs), min(ys), max(ys))
    if isinstance(region, (Union, Intersection)):
        boxes = [_closed_bounds(a) for a in region.args]
        if isinstance(region, Union):
            return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                    min(b[2] for b in boxes), max(b[3] for b in boxes))
        return (max(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), min(b[3] for b in boxes))
    raise StructuralError(f"{type(region).__name__} is not a compact primitive")


# ---------------------------------------------------------------------------
# Symbolic point counting and hyperbolicity
# ---------------------------------------------------------------------------


def _witness_points(region: Region) -> np.ndarray:
    feats = [p for p in region.feature_points() if math.isfinite(abs(p))]
    if not feats:
        feats = [0j]
    extra = [0.5 * (p + q) for p, q in itertools.combinations(feats, 2)]
    pts = np.array(feats + extra, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(pts))))
    lo = -3 * scale
    g = np.linspace(lo, -lo, 65)
    gx, gy = np.meshgrid(g, g)
    far = 1e3 * scale * np.exp(2j * np.pi * np.arange(16) / 16)
    offsets = 1e-3 * scale * np.exp(2j * np.pi * np.arange(8) / 8)
    near = (pts[:, None] + offsets[None, :]).ravel()
    return np.concatenate([pts, near, (gx + 1j * gy).ravel(), far])


def _union_sets(a, b):
    if a is MANY or b is MANY:
        return MANY
    return a | b


def _region_contains_point(region: Region, q: complex) -> bool:
    if q == INF:
        return region.open_rank == 3
    return contains(region, q)


def _closed_contains_point(region: Region, q: complex) -> bool:
    if q == INF:
        return region.closed_rank >= 1
    return closed_contains(region, q)


def complement_points(region: Region):
    """Points of the sphere outside the open form: a frozenset or ``MANY``.

    Raises :class:`IndeterminateError` when the classifier cannot decide.
    """
    if isinstance(region, (Disk, HalfPlane, DiskComplement, Segment, Points, Arc, Ray)):
        return MANY
    if isinstance(region, PuncturedPlane):
        return frozenset(region.points) | {INF}
    if isinstance(region, FullPlane):
        return frozenset({INF})
    if isinstance(region, Offset):
        return MANY
    if isinstance(region, Complement):
        return closed_points(region.arg)
    if isinstance(region, Intersection):
        out = frozenset()
        for a in region.args:
            out = _union_sets(out, complement_points(a))
        return out
    if isinstance(region, Union):
        finite = None
        undecided = []
        for a in region.args:
            try:
                c = complement_points(a)
            except IndeterminateError:
                undecided.append(a)
                continue
            if c is MANY:
                undecided.append(a)
            else:
                finite = c if finite is None else finite & c
        if finite is not None:
            return frozenset(q for q in finite
                             if not any(_region_contains_point(a, q) for a in undecided))
        # every argument has an infinite complement
        if region.open_rank == 0:
            return MANY
        if np.any(region.sdf(_witness_points(region)) < 0):
            return MANY
        raise IndeterminateError("cannot decide the complement of this union")
    raise IndeterminateError(f"no complement rule for {type(region).__name__}")


def _pair_intersection(a: Region, b: Region):
    """Closed-form intersection of two compact primitives with infinite closures."""
    if isinstance(a, Segment) and isinstance(b, Disk):
        a, b = b, a
    if isinstance(a, Disk) and isinstance(b, Disk):
        d = abs(a.center - b.center)
        if d > a.radius + b.radius * (1 + 1e-12) + 1e-15:
            return frozenset()
        if abs(d - (a.radius + b.radius)) <= 1e-12 * (a.radius + b.radius):
            return frozenset({a.center + (b.center - a.center) * a.radius / d})
        return MANY
    if isinstance(a, Disk) and isinstance(b, Segment):
        dvec = b.b - b.a
        f = b.a - a.center
        A = abs(dvec) ** 2
        B = 2 * _dot(f, dvec)
        C = abs(f) ** 2 - a.radius ** 2
        disc = B * B - 4 * A * C
        if disc < 0:
            return frozenset()
        s = math.sqrt(disc)
        t0, t1 = max((-B - s) / (2 * A), 0.0), min((-B + s) / (2 * A), 1.0)
        if t1 < t0:
            return frozenset()
        if t1 - t0 <= 1e-12:
            return frozenset({b.a + t0 * dvec})
        return MANY
    if isinstance(a, Segment) and isinstance(b, Segment):
        da, db = a.b - a.a, b.b - b.a
        cross = (np.conj(da) * db).imag
        w = b.a - a.a
        if abs(cross) <= 1e-12 * abs(da) * abs(db):
            if abs((np.conj(da) * w).imag) > 1e-12 * abs(da) * max(abs(w), 1.0):
                return frozenset()
            t = sorted([_dot(b.a - a.a, da) / abs(da) ** 2, _dot(b.b - a.a, da) / abs(da) ** 2])
            lo, hi = max(t[0], 0.0), min(t[1], 1.0)
            if hi < lo:
                return frozenset()
            if hi - lo <= 1e-12:
                return frozenset({a.a + lo * da})
            return MANY
        t = (np.conj(w) * db).imag / (np.conj(da) * db).imag
        s = (np.conj(w) * da).imag / (np.conj(da) * db).imag
        if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= s <= 1 + 1e-12:
            return frozenset({a.a + t * da})
        return frozenset()
    return None


def closed_points(region: Region):
    """Points of the closed form: a frozenset or ``MANY``."""
    if isinstance(region, (Disk, HalfPlane, DiskComplement, PuncturedPlane, FullPlane,
                           Arc, Ray, Offset)):
        return MANY
    if isinstance(region, Segment):
        return frozenset({region.a}) if region.a == region.b else MANY
    if isinstance(region, Points):
        return frozenset(region.points) | ({INF} if region.at_infinity else frozenset())
    if isinstance(region, Complement):
        return complement_points(region.arg)
    if isinstance(region, Union):
        out = frozenset()
        for a in region.args:
            out = _union_sets(out, closed_points(a))
        return out
    if isinstance(region, Intersection):
        return _closed_intersection(list(region.args))
    raise IndeterminateError(f"no closed-form rule for {type(region).__name__}")


def _closed_intersection(args: list[Region]):
    if len(args) == 1:
        return closed_points(args[0])
    for i, a in enumerate(args):
        pts = closed_points(a)
        if pts is not MANY:
            rest = args[:i] + args[i + 1:]
            return frozenset(q for q in pts if all(_closed_contains_point(r, q) for r in rest))
    # distribute over unions
    for i, a in enumerate(args):
        if isinstance(a, Union):
            rest = args[:i] + args[i + 1:]
            out = frozenset()
            for part in a.args:
                out = _union_sets(out, _closed_intersection([part] + rest))
            return out
    if len(args) == 2:
        pair = _pair_intersection(args[0], args[1])
        if pair is not None:
            return pair
    node = Intersection(tuple(args))
    if np.any(node.sdf(_witness_points(node)) > 0):
        return MANY
    raise IndeterminateError("cannot decide the intersection of these closed sets")


def is_hyperbolic(region: Region) -> bool:
    """True iff the sphere minus ``region`` has at least three points."""
    _check_tree(region)
    c = complement_points(region)
    return c is MANY or len(c) >= 3


def infinity_status(region: Region) -> str:
    """One of ``outside``, ``boundary``, ``puncture``, ``inside``."""
    return ("outside", "boundary", "puncture", "inside")[region.open_rank]


def isolated_boundary_points(region: Region, eps: float) -> list[complex]:
    """Finite punctures of the open form, tested on a circle of radius ``eps``."""
    ring = eps * np.exp(2j * np.pi * np.arange(12) / 12)
    out = []
    for q in dict.fromkeys(region.point_candidates()):
        if contains(region, q):
            continue
        if np.all(region.sdf(q + ring) > 0):
            out.append(q)
    return out


# ---------------------------------------------------------------------------
# Compact sets
# ---------------------------------------------------------------------------

_COMPACT_TYPES = (Disk, Segment, Points, Union, Intersection)


@dataclass(frozen=True)
class CompactSpec:
    """Compact subset of the plane given by the closed form of a region tree.

    Only closed disks, segments, finite point sets and their finite unions and
    intersections are accepted.
    """

    region: Region

    def __post_init__(self):
        def check(node):
            if not isinstance(node, _COMPACT_TYPES) or (
                isinstance(node, Points) and node.at_infinity
            ):
                raise PreconditionError(
                    f"{type(node).__name__} is not allowed in a compact set")
            for c in node.children():
                check(c)

        check(self.region)

    def contains(self, p) -> bool:
        return closed_contains(self.region, p)

    def complement(self) -> Region:
        """The open set sphere-minus-K."""
        return Complement(self.region)

    def points(self):
        return closed_points(self.region)

    def point_count_class(self):
        """``0``, ``1``, ``2`` or ``'many'`` (three or more points)."""
        pts = self.points()
        if pts is MANY or len(pts) >= 3:
            return "many"
        return len(pts)

    def bounds(self):
        return _closed_bounds(self.region)

    def depth(self, p) -> float:
        """Signed distance to the boundary of K, positive in the interior."""
        return float(self.region.sdf(np.asarray(as_point(p))))

    def default_center(self) -> complex:
        """A point of K, preferring the deepest interior point among candidates."""
        feats = self.region.feature_points()
        xmin, xmax, ymin, ymax = self.bounds()
        g = np.linspace(0.0, 1.0, 81)
        gx, gy = np.meshgrid(xmin + (xmax - xmin) * g, ymin + (ymax - ymin) * g)
        cands = np.concatenate([np.array(feats, dtype=complex), (gx + 1j * gy).ravel()])
        depth = self.region.sdf(cands)
        best = int(np.argmax(depth))
        if depth[best] > 0:
            return complex(cands[best])
        on_k = [p for p in feats if self.contains(p)]
        if not on_k:
            raise IndeterminateError("could not locate a point of the compact set")
        return complex(on_k[0])

    def translated(self, shift) -> "CompactSpec":
        return CompactSpec(translate(self.region, as_point(shift)))

    def scaled(self, factor: float) -> "CompactSpec":
        return CompactSpec(scale(self.region, float(factor)))

    def to_dict(self):
        return self.region.to_dict()


def parse_compact(data: dict) -> CompactSpec:
    return CompactSpec(parse_region(data))


def load_compact(path) -> CompactSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{path}: invalid JSON ({exc})") from exc
    return parse_compact(data)


def translate(region: Region, shift: complex) -> Region:
    """Affine image ``z + shift`` of a tree."""
    return affine_image(region, 1.0, shift)


def scale(region: Region, factor: float) -> Region:
    """Affine image ``factor * z`` of a tree (``factor > 0``)."""
    return affine_image(region, factor, 0.0)


def affine_image(region: Region, a: float, b: complex) -> Region:
    """Image under ``z -> a z + b`` for real ``a > 0``."""
    if not a > 0:
        raise PreconditionError("only positive real scalings are supported")
    f = lambda z: a * z + b  # noqa: E731
    if isinstance(region, Disk):
        return Disk(f(region.center), a * region.radius)
    if isinstance(region, DiskComplement):
        return DiskComplement(f(region.center), a * region.radius)
    if isinstance(region, HalfPlane):
        return HalfPlane(f(region.anchor), region.normal)
    if isinstance(region, PuncturedPlane):
        return PuncturedPlane(tuple(f(p) for p in region.points))
    if isinstance(region, Points):
        return Points(tuple(f(p) for p in region.points), region.at_infinity)
    if isinstance(region, Segment):
        return Segment(f(region.a), f(region.b))
    if isinstance(region, FullPlane):
        return region
    if isinstance(region, Union):
        return Union(tuple(affine_image(r, a, b) for r in region.args))
    if isinstance(region, Intersection):
        return Intersection(tuple(affine_image(r, a, b) for r in region.args))
    if isinstance(region, Complement):
        return Complement(affine_image(region.arg, a, b))
    if isinstance(region, Offset):
        return Offset(affine_image(region.arg, a, b), a * region.delta)
    raise StructuralError(f"cannot map {type(region).__name__}")


# ---------------------------------------------------------------------------
# Inversion w = 1 / (z - c)
# ---------------------------------------------------------------------------


def _inv(z: complex, c: complex) -> complex:
    return 1.0 / (z - c)


def _complement_simplify(node: Region) -> Region:
    if isinstance(node, Disk):
        return DiskComplement(node.center, node.radius)
    if isinstance(node, DiskComplement):
        return Disk(node.center, node.radius)
    if isinstance(node, HalfPlane):
        return HalfPlane(node.anchor, -node.normal)
    return Complement(node)


def _disk_image(center: complex, radius: float, c: complex) -> Region:
    b = center - c
    nb = abs(b)
    if abs(nb - radius) <= _TOL * max(radius, 1.0):
        return HalfPlane(np.conj(b) / (2 * nb * nb), np.conj(b) / nb)
    den = nb * nb - radius * radius
    w0 = complex(np.conj(b) / den)
    rho = radius / abs(den)
    return Disk(w0, rho) if den > 0 else DiskComplement(w0, rho)


def _halfplane_image(hp: HalfPlane, c: complex) -> Region:
    s = float(_dot(c - hp.anchor, hp.normal))
    n = hp.normal
    if abs(s) <= _TOL * max(1.0, abs(c), abs(hp.anchor)):
        return HalfPlane(0j, complex(np.conj(n)))
    if s < 0:
        return Disk(complex(np.conj(n)) / (2 * -s), 1.0 / (2 * -s))
    return DiskComplement(complex(-np.conj(n)) / (2 * s), 1.0 / (2 * s))


def _circumcircle(p: complex, q: complex, r: complex):
    ax, ay, bx, by, cx, cy = p.real, p.imag, q.real, q.imag, r.real, r.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(p - center)


def _segment_image(seg: Segment, c: complex) -> Region:
    a, b = seg.a, seg.b
    if a == b:
        return _points_image(Points((a,)), c)
    d = b - a
    cross = (np.conj(d) * (c - a)).imag
    if abs(cross) > 1e-12 * abs(d) * max(1.0, abs(c - a)):
        wa, wb = _inv(a, c), _inv(b, c)
        center, rad = _circumcircle(wa, wb, 0j)
        ta, tb, t0 = (float(np.angle(x - center)) for x in (wa, wb, 0j))
        sweep = (tb - ta) % (2 * np.pi)
        if (t0 - ta) % (2 * np.pi) < sweep:
            # the ccw arc from wa to wb passes through 0; take the other one
            return Arc(center, rad, tb, (2 * np.pi - sweep))
        return Arc(center, rad, ta, sweep)
    t = _dot(c - a, d) / abs(d) ** 2
    if t < -1e-12 or t > 1 + 1e-12:
        return Segment(_inv(a, c), _inv(b, c))
    rays = []
    for end in (a, b):
        if abs(end - c) > 1e-12 * abs(d):
            w = _inv(end, c)
            rays.append(Ray(w, w / abs(w)))
    return rays[0] if len(rays) == 1 else Union(tuple(rays))


def _points_image(pts: Points, c: complex) -> Points:
    finite = tuple(_inv(p, c) for p in pts.points if p != c)
    extra = (0j,) if pts.at_infinity else ()
    return Points(finite + extra, at_infinity=c in pts.points)


def invert(region: Region, c: complex = 0j) -> Region:
    """Exact image of ``region`` under the chart map ``w = 1/(z - c)``."""
    c = complex(c)
    if isinstance(region, Disk):
        return _disk_image(region.center, region.radius, c)
    if isinstance(region, DiskComplement):
        return _complement_simplify(_disk_image(region.center, region.radius, c))
    if isinstance(region, HalfPlane):
        return _halfplane_image(region, c)
    if isinstance(region, PuncturedPlane):
        if c in region.points:
            pts = tuple(_inv(p, c) for p in region.points if p != c)
            return PuncturedPlane(pts + (0j,))
        return Complement(Points(tuple(_inv(p, c) for p in region.points) + (0j,)))
    if isinstance(region, FullPlane):
        return Complement(Points((0j,)))
    if isinstance(region, Points):
        return _points_image(region, c)
    if isinstance(region, Segment):
        return _segment_image(region, c)
    if isinstance(region, Union):
        return Union(tuple(invert(a, c) for a in region.args))
    if isinstance(region, Intersection):
        return Intersection(tuple(invert(a, c) for a in region.args))
    if isinstance(region, Complement):
        return _complement_simplify(invert(region.arg, c))
    raise StructuralError(f"{type(region).__name__} has no inversion image")


# ---------------------------------------------------------------------------
# Grid-level operations
# ---------------------------------------------------------------------------


def interior_mask(region: Region, grid, margin: float | None = None) -> np.ndarray:
    """Nodes at distance > ``margin`` (default 2h) whose 4 neighbours are inside."""
    sd = grid.sdf(region)
    margin = 2 * grid.h if margin is None else margin
    inside = sd > 0
    nb_ok = np.zeros_like(inside)
    nb_ok[1:-1, 1:-1] = (inside[2:, 1:-1] & inside[:-2, 1:-1]
                         & inside[1:-1, 2:] & inside[1:-1, :-2])
    return inside & (sd > margin) & nb_ok


def component_mask(region: Region, grid, p) -> np.ndarray:
    """Interior nodes 4-connected to the node nearest ``p`` (chart point)."""
    mask = interior_mask(region, grid)
    ij = grid.nearest_index(as_point(p))
    if ij is None or not mask[ij]:
        raise DomainError(f"point {p!r} does not map to an interior node")
    labels, _ = ndimage.label(mask)
    return labels == labels[ij]


def erode(region: Region, grid, delta: float) -> np.ndarray:
    """Nodes at distance at least ``delta`` from the boundary."""
    if delta < 2 * grid.h * (1 - 1e-12):
        raise PreconditionError("erosion depth must be at least twice the grid spacing")
    mask = grid.sdf(region) >= delta
    if not mask.any():
        raise ExhaustedError(f"erosion by {delta} leaves no nodes")
    return mask


def sample_directions(n: int) -> Iterable[complex]:
    return (np.exp(2j * np.pi * k / n) for k in range(n))


def points_from(seq: Sequence) -> tuple[complex, ...]:
    return tuple(as_point(p) for p in seq)


def window(region: Region, h: float):
    """Finite box for lattice work: the region's box, else a feature-sized square."""
    box = bounds(region)
    if box is not None:
        return box
    feats = [abs(p) for p in region.feature_points() if math.isfinite(abs(p))]
    w = 4.0 * max([1.0] + feats)
    return (-w, w, -w, w)


def lattice(box, h: float) -> np.ndarray:
    i = np.arange(math.ceil(box[0] / h - 1e-9), math.floor(box[1] / h + 1e-9) + 1)
    j = np.arange(math.ceil(box[2] / h - 1e-9), math.floor(box[3] / h + 1e-9) + 1)
    gx, gy = np.meshgrid(h * i, h * j, indexing="ij")
    return gx + 1j * gy


def sample_nodes(region: Region, h: float, count: int, seed: int = 0,
                 margin: float = 4.0) -> np.ndarray:
    """``count`` lattice nodes of spacing ``h`` at distance >= ``margin * h``
    from the boundary, drawn without replacement with a seeded generator and
    returned in lattice order."""
    if count < 1:
        raise PreconditionError("sample count must be positive")
    pts = lattice(window(region, h), h).ravel()
    cands = pts[np.asarray(region.sdf(pts)) >= margin * h]
    if cands.size == 0:
        raise NoSamplesError(f"no nodes at distance >= {margin}h inside the region at h = {h}")
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(cands.size, size=min(count, cands.size), replace=False))
    return cands[pick]
