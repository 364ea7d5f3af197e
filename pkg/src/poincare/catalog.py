"""Closed-form hyperbolic densities and conformal pullbacks.

All curvature -1 densities are normalised so that ``log(lam)`` solves
``Laplacian(log lam) = lam**2``; in particular the unit disk has density 2 at
the origin.  The spherical metric lives here too, tagged with curvature +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import DomainError, SingularMapError, UnsupportedOracleError

TWO_PI = 2.0 * math.pi
_REL = 1e-12


def _asarray(z):
    return np.asarray(z, dtype=complex)


def _finish(z, values):
    """Return a python float for scalar input, an array otherwise."""
    return float(values) if np.ndim(z) == 0 else values


class ClosedFormMetric:
    """Exact density ``lam(z)`` of a canonical domain."""

    tag = "metric"
    curvature = -1

    def inside(self, z):
        raise NotImplementedError

    def _density(self, z):
        raise NotImplementedError

    def region(self) -> geo.Region:
        raise NotImplementedError

    def density(self, z):
        zz = _asarray(z)
        ok = self.inside(zz)
        if not np.all(ok):
            bad = zz[~ok] if zz.ndim else zz
            raise DomainError(f"{self.tag}: point(s) outside the domain, e.g. {np.ravel(bad)[0]!r}")
        return _finish(z, self._density(zz))

    def __call__(self, z):
        return self.density(z)


@dataclass(frozen=True)
class Sphere(ClosedFormMetric):
    tag = "Sphere"
    curvature = 1

    def inside(self, z):
        return np.isfinite(z)

    def _density(self, z):
        return 2.0 / (1.0 + np.abs(z) ** 2)

    def region(self):
        raise UnsupportedOracleError("the sphere is not a plane region")


@dataclass(frozen=True)
class DiskMetric(ClosedFormMetric):
    center: complex = 0j
    radius: float = 1.0

    @property
    def tag(self):
        return "UnitDisk" if self.center == 0 and self.radius == 1 else "Disk"

    def inside(self, z):
        return np.abs(z - self.center) < self.radius

    def _density(self, z):
        r = self.radius
        return 2.0 * r / (r * r - np.abs(z - self.center) ** 2)

    def region(self):
        return geo.Disk(complex(self.center), float(self.radius))


def UnitDisk() -> DiskMetric:
    return DiskMetric(0j, 1.0)


@dataclass(frozen=True)
class ExteriorDisk(ClosedFormMetric):
    center: complex = 0j
    radius: float = 1.0
    tag = "ExteriorDisk"

    def inside(self, z):
        return np.abs(z - self.center) > self.radius

    def _density(self, z):
        r = self.radius
        return 2.0 * r / (np.abs(z - self.center) ** 2 - r * r)

    def region(self):
        return geo.DiskComplement(complex(self.center), float(self.radius))


@dataclass(frozen=True)
class HalfPlaneMetric(ClosedFormMetric):
    anchor: complex = 0j
    normal: complex = 1j
    tag = "HalfPlane"

    def inside(self, z):
        return geo._dot(z - self.anchor, self.normal) > 0

    def _density(self, z):
        return 1.0 / geo._dot(z - self.anchor, self.normal)

    def region(self):
        return geo.HalfPlane(complex(self.anchor), complex(self.normal))


@dataclass(frozen=True)
class PuncturedDisk(ClosedFormMetric):
    center: complex = 0j
    radius: float = 1.0
    tag = "PuncturedDisk"

    def inside(self, z):
        r = np.abs(z - self.center)
        return (r > 0) & (r < self.radius)

    def _density(self, z):
        r = np.abs(z - self.center)
        return 1.0 / (r * np.log(self.radius / r))

    def region(self):
        c = complex(self.center)
        return geo.Intersection((geo.Disk(c, float(self.radius)), geo.PuncturedPlane((c,))))


@dataclass(frozen=True)
class Annulus(ClosedFormMetric):
    center: complex = 0j
    r_in: float = 0.5
    r_out: float = 1.0
    tag = "Annulus"

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise DomainError("annulus radii must satisfy 0 < r_in < r_out")

    def inside(self, z):
        r = np.abs(z - self.center)
        return (r > self.r_in) & (r < self.r_out)

    def _density(self, z):
        r = np.abs(z - self.center)
        width = math.log(self.r_out / self.r_in)
        return (math.pi / (width * r)) / np.sin(math.pi * np.log(r / self.r_in) / width)

    def region(self):
        c = complex(self.center)
        return geo.Intersection((geo.Disk(c, float(self.r_out)),
                                 geo.DiskComplement(c, float(self.r_in))))


@dataclass(frozen=True)
class Wedge(ClosedFormMetric):
    """Sector ``{vertex + r e^{it}}`` of the given opening around ``bisector``.

    ``bisector`` is an angle in radians; ``opening`` lies in ``(0, 2 pi]``.
    """

    vertex: complex = 0j
    bisector: float = math.pi / 2
    opening: float = math.pi
    tag = "Wedge"

    def __post_init__(self):
        if not 0 < self.opening <= TWO_PI:
            raise DomainError("wedge opening must lie in (0, 2*pi]")

    def _phase(self, z):
        rot = np.exp(-1j * (self.bisector - 0.5 * self.opening))
        return np.mod(np.angle((z - self.vertex) * rot), TWO_PI)

    def inside(self, z):
        phi = self._phase(z)
        return (z != self.vertex) & (phi > 0) & (phi < self.opening)

    def _density(self, z):
        k = math.pi / self.opening
        return k / (np.abs(z - self.vertex) * np.sin(k * self._phase(z)))

    def region(self):
        v, t = complex(self.vertex), self.opening
        lo = self.bisector - 0.5 * t
        hi = self.bisector + 0.5 * t
        inward = lambda a: complex(np.exp(1j * (a + math.pi / 2)))  # noqa: E731
        h_lo = geo.HalfPlane(v, inward(lo))
        h_hi = geo.HalfPlane(v, -inward(hi))
        if abs(t - math.pi) <= _REL:
            return h_lo
        if t < math.pi:
            return geo.Intersection((h_lo, h_hi))
        if abs(t - TWO_PI) <= _REL:
            return geo.Complement(geo.Ray(v, complex(np.exp(1j * lo))))
        return geo.Union((h_lo, h_hi))


def _agm(a, b, steps: int = 60):
    """Complex arithmetic-geometric mean with the right choice of square root."""
    a = np.asarray(a, dtype=complex).copy()
    b = np.asarray(b, dtype=complex).copy()
    for _ in range(steps):
        a1 = 0.5 * (a + b)
        b1 = np.sqrt(a * b)
        flip = np.abs(a1 - b1) > np.abs(a1 + b1)
        b1 = np.where(flip, -b1, b1)
        if np.all(np.abs(a1 - b1) <= 1e-16 * np.abs(a1)):
            return a1
        a, b = a1, b1
    return a


def _ellipk(m):
    """Complete elliptic integral ``K(m)`` (parameter convention) off the real cut."""
    return 0.5 * math.pi / _agm(1.0, np.sqrt(1.0 - np.asarray(m, dtype=complex)))


# z -> g(z) for the six maps permuting {0, 1, infinity}, with |g'(z)|
_ANHARMONIC = (
    (lambda z: z, lambda z: np.ones_like(np.abs(z))),
    (lambda z: 1 - z, lambda z: np.ones_like(np.abs(z))),
    (lambda z: 1 / z, lambda z: 1 / np.abs(z) ** 2),
    (lambda z: 1 / (1 - z), lambda z: 1 / np.abs(1 - z) ** 2),
    (lambda z: z / (z - 1), lambda z: 1 / np.abs(z - 1) ** 2),
    (lambda z: (z - 1) / z, lambda z: 1 / np.abs(z) ** 2),
)


def _density_01(z):
    """Density of the plane minus ``{0, 1}``.

    Each point is first moved by an isometry permuting ``0, 1, infinity``
    into the half lens ``|m| <= 1, |1 - m| <= 1, Re m <= 1/2``; there the
    modular parametrisation gives
    ``pi / (4 |m (1 - m)| Re(K(1 - m) conj K(m)))``.
    """
    z = np.asarray(z, dtype=complex)
    m = np.zeros_like(z)
    jac = np.zeros(z.shape)
    done = np.zeros(z.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for g, dg in _ANHARMONIC:
            w = g(z)
            ok = ~done & (np.abs(w) <= 1 + 1e-12) & (np.abs(1 - w) <= 1 + 1e-12) & (w.real <= 0.5 + 1e-12)
            m = np.where(ok, w, m)
            jac = np.where(ok, dg(z), jac)
            done |= ok
    k, kp = _ellipk(m), _ellipk(1.0 - m)
    lam = math.pi / (4.0 * np.abs(m * (1.0 - m)) * (kp * np.conj(k)).real)
    return lam * jac


@dataclass(frozen=True)
class TwicePuncturedPlane(ClosedFormMetric):
    """The plane minus two points, via the elliptic modular function."""

    a: complex = 0j
    b: complex = 1 + 0j
    tag = "TwicePuncturedPlane"

    def __post_init__(self):
        if self.a == self.b:
            raise DomainError("the two punctures must differ")

    def inside(self, z):
        return (z != self.a) & (z != self.b) & np.isfinite(z)

    def _density(self, z):
        span = complex(self.b) - complex(self.a)
        return _density_01((z - self.a) / span) / abs(span)

    def region(self):
        return geo.PuncturedPlane((complex(self.a), complex(self.b)))


# ---------------------------------------------------------------------------
# Conformal maps
# ---------------------------------------------------------------------------


class ConformalPrimitive:
    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(ConformalPrimitive):
    a: complex = 1.0
    b: complex = 0j

    def __post_init__(self):
        if self.a == 0:
            raise SingularMapError("affine map needs a != 0")

    def __call__(self, z):
        return self.a * _asarray(z) + self.b

    def derivative(self, z):
        return np.full(np.shape(z), complex(self.a))


@dataclass(frozen=True)
class PowerMap(ConformalPrimitive):
    """``z ** alpha`` with the argument taken in ``[0, 2 pi)``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise SingularMapError("power exponent must be positive")

    def __call__(self, z):
        z = _asarray(z)
        t = np.mod(np.angle(z), TWO_PI)
        return np.abs(z) ** self.alpha * np.exp(1j * self.alpha * t)

    def derivative(self, z):
        z = _asarray(z)
        return self.alpha * self(z) / z


@dataclass(frozen=True)
class Moebius(ConformalPrimitive):
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise SingularMapError("Moebius map needs ad - bc != 0")

    def __call__(self, z):
        z = _asarray(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        z = _asarray(z)
        return (self.a * self.d - self.b * self.c) / (self.c * z + self.d) ** 2


@dataclass(frozen=True)
class Joukowski(ConformalPrimitive):
    """``z + 1/z``, conformal on ``|z| > 1``."""

    def __call__(self, z):
        z = _asarray(z)
        return z + 1.0 / z

    def derivative(self, z):
        z = _asarray(z)
        return 1.0 - 1.0 / z ** 2


@dataclass(frozen=True)
class Composition(ConformalPrimitive):
    """Apply ``maps[0]`` first, then ``maps[1]`` and so on."""

    maps: tuple

    def __call__(self, z):
        w = _asarray(z)
        for m in self.maps:
            w = m(w)
        return w

    def derivative(self, z):
        w = _asarray(z)
        out = np.ones(w.shape, dtype=complex)
        for m in self.maps:
            out = out * m.derivative(w)
            w = m(w)
        return out


def pullback(metric: ClosedFormMetric, fmap: ConformalPrimitive, z):
    """``metric(fmap(z)) * |fmap'(z)|``."""
    zz = _asarray(z)
    dz = np.abs(fmap.derivative(zz))
    if np.any(dz == 0):
        raise SingularMapError("map derivative vanishes at the evaluation point")
    return _finish(z, np.asarray(metric.density(fmap(zz))) * dz)


@dataclass(frozen=True)
class PulledBack(ClosedFormMetric):
    """Density of ``fmap^{-1}(domain of base)`` for a conformal ``fmap``.

    ``domain`` is the region in the source plane; it decides membership.
    """

    base: ClosedFormMetric
    fmap: ConformalPrimitive
    domain: geo.Region
    tag = "PulledBack"

    def inside(self, z):
        return self.domain.sdf(z) > 0

    def _density(self, z):
        return np.asarray(self.base._density(self.fmap(z))) * np.abs(self.fmap.derivative(z))

    def region(self):
        return self.domain


def eval_density(metric: ClosedFormMetric, z):
    return metric.density(z)


# ---------------------------------------------------------------------------
# Curvature check
# ---------------------------------------------------------------------------


def curvature_residual(density, z, h: float):
    """``Laplacian_h log(lam)(z) - lam(z)**2`` with the 5-point stencil."""
    zz = _asarray(z)
    try:
        centre = np.asarray(density(zz), dtype=float)
        nb = [np.asarray(density(zz + s), dtype=float) for s in (h, -h, 1j * h, -1j * h)]
    except DomainError as exc:
        raise DomainError(f"stencil of radius {h} leaves the domain") from exc
    if not (np.all(np.isfinite(centre)) and all(np.all(np.isfinite(v)) for v in nb)):
        raise DomainError(f"stencil of radius {h} leaves the domain")
    lap = (sum(np.log(v) for v in nb) - 4.0 * np.log(centre)) / (h * h)
    return _finish(z, lap - centre ** 2)


def gaussian_curvature(density, z, h: float):
    """Finite-difference curvature ``-Laplacian_h log(lam) / lam**2``."""
    zz = _asarray(z)
    centre = np.asarray(density(zz), dtype=float)
    nb = [np.asarray(density(zz + s), dtype=float) for s in (h, -h, 1j * h, -1j * h)]
    lap = (sum(np.log(v) for v in nb) - 4.0 * np.log(centre)) / (h * h)
    return _finish(z, -lap / centre ** 2)


def curvature_order(density, points, hs) -> dict:
    """Fitted order of the sup over ``points`` of ``|curvature_residual|``.

    The order is the least-squares slope of ``log(error)`` against
    ``log(h)`` over the spacings ``hs``.
    """
    hs = [float(h) for h in hs]
    if len(hs) < 2:
        raise DomainError("an order fit needs at least two spacings")
    errs = [float(np.max(np.abs(curvature_residual(density, points, h)))) for h in hs]
    if min(errs) <= 0:
        return {"hs": hs, "errors": errs, "order": float("inf")}
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    return {"hs": hs, "errors": errs, "order": float(slope)}


# every curvature -1 metric of the catalog, with a representative instance
def curvature_fixtures() -> dict:
    return {
        "UnitDisk": UnitDisk(),
        "Disk": DiskMetric(0.5 - 0.25j, 1.5),
        "ExteriorDisk": ExteriorDisk(0j, 1.0),
        "HalfPlane": HalfPlaneMetric(0j, 1j),
        "PuncturedDisk": PuncturedDisk(0j, 1.0),
        "Annulus": Annulus(0j, 0.5, 1.0),
        "Wedge": Wedge(0j, math.pi / 4, 3 * math.pi / 4),
        "TwicePuncturedPlane": TwicePuncturedPlane(0j, 1 + 0j),
    }


# ---------------------------------------------------------------------------
# Resolving CSG regions to catalog metrics
# ---------------------------------------------------------------------------

_GENERALIZED_DISKS = (geo.Disk, geo.DiskComplement, geo.HalfPlane)


def _close(a, b, scale=1.0):
    return abs(a - b) <= 1e-12 * max(1.0, scale)


def _primitive_metric(node):
    if isinstance(node, geo.Disk):
        return DiskMetric(node.center, node.radius)
    if isinstance(node, geo.DiskComplement):
        return ExteriorDisk(node.center, node.radius)
    if isinstance(node, geo.HalfPlane):
        return HalfPlaneMetric(node.anchor, node.normal)
    return None


def region_subset(inner: geo.Region, outer: geo.Region) -> bool | None:
    """Decide ``inner <= outer`` for two generalized disks; None if unknown."""
    if not (isinstance(inner, _GENERALIZED_DISKS) and isinstance(outer, _GENERALIZED_DISKS)):
        return None
    tol = 1e-12
    if isinstance(inner, geo.Disk):
        c, r = inner.center, inner.radius
        if isinstance(outer, geo.Disk):
            return abs(c - outer.center) + r <= outer.radius + tol
        if isinstance(outer, geo.DiskComplement):
            return abs(c - outer.center) >= outer.radius + r - tol
        return geo._dot(c - outer.anchor, outer.normal) >= r - tol
    if isinstance(inner, geo.DiskComplement):
        if isinstance(outer, geo.DiskComplement):
            return abs(inner.center - outer.center) + outer.radius <= inner.radius + tol
        return False
    if isinstance(outer, geo.HalfPlane):
        return (_close(inner.normal, outer.normal)
                and geo._dot(inner.anchor - outer.anchor, outer.normal) >= -tol)
    if isinstance(outer, geo.DiskComplement):
        return geo._dot(outer.center - inner.anchor, inner.normal) <= -outer.radius + tol
    return False


def _boundary_crossings(a, b):
    """Finite crossing points of the boundaries of two generalized disks."""
    circ = lambda n: isinstance(n, (geo.Disk, geo.DiskComplement))  # noqa: E731
    if circ(a) and circ(b):
        c1, r1, c2, r2 = a.center, a.radius, b.center, b.radius
        d = abs(c2 - c1)
        if d == 0 or d >= r1 + r2 or d <= abs(r1 - r2):
            return []
        x = (d * d + r1 * r1 - r2 * r2) / (2 * d)
        y = math.sqrt(max(r1 * r1 - x * x, 0.0))
        e = (c2 - c1) / d
        return [c1 + e * (x + 1j * y), c1 + e * (x - 1j * y)]
    if circ(b):
        a, b = b, a
    if circ(a):
        c, r = a.center, a.radius
        t = b.normal * 1j
        s = geo._dot(c - b.anchor, b.normal)
        if abs(s) >= r:
            return []
        foot = c - s * b.normal
        y = math.sqrt(r * r - s * s)
        return [foot + y * t, foot - y * t]
    return []


def _boundary_point_away(node, avoid):
    """A boundary point of a generalized disk far from the points in ``avoid``."""
    if isinstance(node, geo.HalfPlane):
        scale = max([1.0] + [abs(p - node.anchor) for p in avoid])
        cands = [node.anchor + s * 1j * node.normal for s in (-3 * scale, 3 * scale)]
    else:
        cands = [node.center + node.radius * np.exp(1j * t)
                 for t in np.linspace(0, TWO_PI, 12, endpoint=False)]
    return max(cands, key=lambda q: min(abs(q - p) for p in avoid))


def _interior_point(node):
    if isinstance(node, geo.Disk):
        return node.center
    if isinstance(node, geo.DiskComplement):
        return node.center + 2.0 * node.radius
    return node.anchor + node.normal


def _halfplane_image(node, fmap):
    """Image of a generalized disk whose boundary passes through the poles of fmap."""
    q = complex(fmap(_boundary_point_away(node, [-fmap.b / fmap.a, -fmap.d / fmap.c])))
    m = complex(fmap(_interior_point(node)))
    tangent = q / abs(q)
    normal = 1j * tangent
    if geo._dot(m, normal) < 0:
        normal = -normal
    return geo.HalfPlane(0j, complex(normal))


def _wedge_pair(h1: geo.HalfPlane, h2: geo.HalfPlane, vertex: complex, union: bool):
    n1, n2 = h1.normal, h2.normal
    alpha = math.acos(max(-1.0, min(1.0, geo._dot(n1, n2))))
    bis = float(np.angle(n1 + n2))
    return Wedge(vertex, bis, math.pi + alpha if union else math.pi - alpha)


def _pair_metric(a, b, union: bool):
    sub_ab, sub_ba = region_subset(a, b), region_subset(b, a)
    if sub_ab is None:
        return None
    if sub_ab or sub_ba:
        small, big = (a, b) if sub_ab else (b, a)
        return _primitive_metric(big if union else small)
    if isinstance(a, geo.HalfPlane) and isinstance(b, geo.HalfPlane):
        cross = (np.conj(a.normal) * b.normal).imag
        if abs(cross) <= _REL:
            return None
        # vertex solves <v - a0, n1> = 0 and <v - b0, n2> = 0
        m = np.array([[a.normal.real, a.normal.imag], [b.normal.real, b.normal.imag]])
        rhs = np.array([geo._dot(a.anchor, a.normal), geo._dot(b.anchor, b.normal)])
        vx, vy = np.linalg.solve(m, rhs)
        return _wedge_pair(a, b, complex(vx, vy), union)
    pts = _boundary_crossings(a, b)
    if len(pts) != 2:
        return None
    p, q = pts
    fmap = Moebius(1.0, -p, 1.0, -q)
    w = _wedge_pair(_halfplane_image(a, fmap), _halfplane_image(b, fmap), 0j, union)
    node = geo.Union((a, b)) if union else geo.Intersection((a, b))
    return PulledBack(w, fmap, node)


def resolve_metric(region: geo.Region) -> ClosedFormMetric:
    """Closed-form metric of ``region`` when the catalog covers it.

    Handles generalized disks, their complements, punctured disks, annuli,
    planes with two punctures, and unions or intersections of two
    generalized disks that are nested, bounded by crossing lines, or bounded
    by crossing circles (lunes).
    """
    prim = _primitive_metric(region)
    if prim is not None:
        return prim
    if isinstance(region, geo.Complement):
        arg = region.arg
        if isinstance(arg, geo.Disk):
            return ExteriorDisk(arg.center, arg.radius)
        if isinstance(arg, geo.DiskComplement):
            return DiskMetric(arg.center, arg.radius)
        if isinstance(arg, geo.HalfPlane):
            return HalfPlaneMetric(arg.anchor, -arg.normal)
    if isinstance(region, geo.PuncturedPlane) and len(region.points) == 2:
        return TwicePuncturedPlane(*region.points)
    if isinstance(region, geo.Complement) and isinstance(region.arg, geo.Points):
        pts = region.arg
        if len(pts.points) == 2 and not pts.at_infinity:
            return TwicePuncturedPlane(*pts.points)
    if isinstance(region, (geo.Union, geo.Intersection)) and len(region.args) == 1:
        return resolve_metric(region.args[0])
    if isinstance(region, geo.Intersection) and len(region.args) == 2:
        a, b = region.args
        for x, y in ((a, b), (b, a)):
            if (isinstance(x, geo.Disk) and isinstance(y, geo.PuncturedPlane)
                    and y.points == (x.center,)):
                return PuncturedDisk(x.center, x.radius)
            if (isinstance(x, geo.Disk) and isinstance(y, geo.DiskComplement)
                    and x.center == y.center and y.radius < x.radius):
                return Annulus(x.center, y.radius, x.radius)
    if isinstance(region, (geo.Union, geo.Intersection)) and len(region.args) == 2:
        a, b = region.args
        if isinstance(a, _GENERALIZED_DISKS) and isinstance(b, _GENERALIZED_DISKS):
            m = _pair_metric(a, b, isinstance(region, geo.Union))
            if m is not None:
                return m
    raise UnsupportedOracleError(f"no closed form for {region!r}")


# ---------------------------------------------------------------------------
# Tag-based construction for the command line
# ---------------------------------------------------------------------------

_TAGS = {
    "sphere": (Sphere, 0),
    "unitdisk": (lambda: UnitDisk(), 0),
    "disk": (lambda x, y, r: DiskMetric(complex(x, y), r), 3),
    "exteriordisk": (lambda x, y, r: ExteriorDisk(complex(x, y), r), 3),
    "halfplane": (lambda x, y, nx, ny: HalfPlaneMetric(complex(x, y), complex(nx, ny)), 4),
    "punctureddisk": (lambda x, y, r: PuncturedDisk(complex(x, y), r), 3),
    "annulus": (lambda x, y, a, b: Annulus(complex(x, y), a, b), 4),
    "twicepuncturedplane": (lambda ax, ay, bx, by: TwicePuncturedPlane(complex(ax, ay), complex(bx, by)), 4),
    "wedge": (lambda x, y, b, t: Wedge(complex(x, y), b, t), 4),
}


def metric_from_tag(tag: str, params=()) -> ClosedFormMetric:
    """Build a metric from a case-insensitive tag and positional parameters.

    ``exteriordisk`` with no parameters means the exterior of the unit disk;
    other tags with parameters expect ``x, y`` of the centre first.
    """
    key = tag.lower().replace("_", "").replace("-", "")
    if key not in _TAGS:
        raise UnsupportedOracleError(f"unknown catalog tag {tag!r}; choose from {sorted(_TAGS)}")
    ctor, n = _TAGS[key]
    params = tuple(float(p) for p in params)
    if not params and n:
        defaults = {"disk": (0, 0, 1), "exteriordisk": (0, 0, 1), "punctureddisk": (0, 0, 1),
                    "halfplane": (0, 0, 0, 1), "annulus": (0, 0, 0.5, 1),
                    "wedge": (0, 0, math.pi / 2, math.pi),
                    "twicepuncturedplane": (0, 0, 1, 0)}
        params = defaults[key]
    if len(params) != n:
        raise DomainError(f"{tag} takes {n} parameters, got {len(params)}")
    return ctor(*params)
