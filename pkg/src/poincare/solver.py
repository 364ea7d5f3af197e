"""Finite-difference solver for the curvature equation ``Laplacian u = exp(2u)``.

``u = log(lam)`` is computed on the interior nodes of a :class:`Grid`.  The
non-interior neighbours carry blow-up data from local models of the density:

* band nodes (within ``2h`` of a smooth boundary): the half-plane model
  ``lam ~ 1/d``;
* ring nodes (within ``4h`` of an isolated boundary point): the punctured
  disk model ``lam ~ 1/(r log(1/r))``;
* truncation nodes (edge of an inversion-chart box): the puncture model at
  infinity when infinity is isolated in the complement, else ``1/d``.

Two discretisations are available.  ``"reciprocal"`` (default) works with
``v = exp(-u) = 1/lam`` and the identity ``v Laplacian v - |grad v|^2 + 1 = 0``,
which is smooth up to the boundary (``v ~ d``) and converges at second
order.  ``"log"`` applies the 5-point Laplacian to ``u`` itself; its
Newton iterates are monotone from a supersolution, but the blow-up of
``u`` at the boundary limits it to first order.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from . import geometry as geo
from .errors import (
    DegenerateBandError,
    DomainError,
    InvariantViolation,
    NoConvergenceError,
    OutOfHullError,
    PreconditionError,
    SingularSystemError,
)
from .grid import BAND, EXTERIOR, INTERIOR, RING, TRUNCATION, Chart, Grid, discretize

SCHEMES = ("reciprocal", "log")
_SHIFTS = ((1, 0), (-1, 0), (0, 1), (0, -1))


# ---------------------------------------------------------------------------
# Boundary data
# ---------------------------------------------------------------------------


def puncture_model(r):
    """``u`` of the punctured unit disk at distance ``r`` from the puncture."""
    r = np.asarray(r, dtype=float)
    return -np.log(r * np.log(1.0 / r))


def infinity_puncture_model(w):
    """Chart ``u`` near an isolated boundary point at infinity (``|w| > 1``)."""
    m = np.abs(w)
    return -np.log(m * np.log(m))


def boundary_data(region: geo.Region, grid: Grid, exact=None) -> np.ndarray:
    """Array of ``u`` on band, ring and truncation nodes (NaN elsewhere).

    ``region`` is the plane region the grid was built for.  ``exact`` is an
    optional plane density ``lam(z)`` that replaces the models on every
    data node.
    """
    if grid.source is not None and region is not grid.source and region != grid.source:
        raise PreconditionError("grid was discretised for a different region")
    kind = grid.kind
    data = np.full(kind.shape, np.nan)
    pts = grid.points
    mask = (kind == BAND) | (kind == RING) | (kind == TRUNCATION)
    if exact is not None:
        w = pts[mask]
        z = grid.chart.from_chart(w)
        lam = np.asarray(exact(z), dtype=float)
        u = np.log(lam)
        if grid.chart.kind == "inversion":
            u = u - 2.0 * np.log(np.abs(w))
        data[mask] = u
        return data

    band = kind == BAND
    d = grid.sd[band]
    if d.size and d.min() < 1e-14:
        raise DegenerateBandError(f"band node at distance {d.min():.3g} from the boundary")
    data[band] = -np.log(d)

    ring = kind == RING
    if ring.any():
        w = pts[ring]
        r = np.min([np.abs(w - q) for q in grid.punctures], axis=0)
        if r.max() >= 0.5:
            raise PreconditionError("puncture ring too wide for the puncture model; refine h")
        data[ring] = puncture_model(r)

    trunc = kind == TRUNCATION
    if trunc.any():
        if grid.infinity_puncture:
            w = pts[trunc]
            if np.abs(w).min() <= 1.5:
                raise PreconditionError("truncation box too small for the puncture model at infinity")
            data[trunc] = infinity_puncture_model(w)
        else:
            data[trunc] = -np.log(grid.sd[trunc])
    return data


# ---------------------------------------------------------------------------
# Field
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LogDensityField:
    """Discrete ``u = log(mu)`` on a grid, ``mu`` being the chart density.

    ``u`` is NaN on exterior nodes.  ``residual_norm`` is the scaled residual
    ``max |Laplacian_h u * exp(-2u) - 1|`` of the scheme that produced it.
    """

    grid: Grid
    u: np.ndarray
    residual_norm: float
    newton_iterations: int
    scheme: str = "reciprocal"
    stats: dict = field(default_factory=dict)

    @property
    def chart(self) -> Chart:
        return self.grid.chart

    def chart_density(self) -> np.ndarray:
        return np.exp(self.u)

    def interior_values(self) -> np.ndarray:
        return self.u[self.grid.kind == INTERIOR]

    def summary(self) -> dict:
        return {"residual_norm": self.residual_norm, "newton_iterations": self.newton_iterations,
                "scheme": self.scheme, **self.grid.describe()}


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


class _System:
    """Index bookkeeping shared by both discretisations."""

    def __init__(self, grid: Grid, data: np.ndarray):
        self.grid = grid
        interior = grid.kind == INTERIOR
        self.nodes = np.argwhere(interior)
        self.n = len(self.nodes)
        index = -np.ones(grid.kind.shape, dtype=np.int64)
        index[interior] = np.arange(self.n)
        self.index = index
        self.nb_index = []
        self.nb_data = []
        for s in _SHIFTS:
            nb = self.nodes + s
            k = index[nb[:, 0], nb[:, 1]]
            vals = data[nb[:, 0], nb[:, 1]]
            if np.any((k < 0) & ~np.isfinite(vals)):
                raise PreconditionError("interior node has a neighbour without data")
            self.nb_index.append(k)
            self.nb_data.append(vals)
        self.rows = np.arange(self.n)

    def neighbours(self, x, data_vals):
        return [np.where(k >= 0, x[np.maximum(k, 0)], dv) for k, dv in zip(self.nb_index, data_vals)]

    def matrix(self, diag, offdiag):
        rows, cols, vals = [self.rows], [self.rows], [diag]
        for k, coef in zip(self.nb_index, offdiag):
            m = k >= 0
            rows.append(self.rows[m])
            cols.append(k[m])
            vals.append(coef[m] if np.ndim(coef) else np.full(m.sum(), coef))
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n, self.n))


class _Reciprocal:
    """Equations in ``v = 1/lam``.

    Rows flagged in ``log_rows`` use ``v^2 Laplacian_h(log v) + 1 = 0``
    instead of ``v Laplacian_h v - |grad_h v|^2 + 1 = 0``.  Both equal
    ``-(Laplacian u - exp(2u)) / lam^2`` in the continuum.  The second form
    has a zeroth-order term of the wrong sign where ``Laplacian v > 0``,
    which happens next to isolated boundary points, so those rows use the
    first form.

    ``groups`` (see :func:`puncture_groups`) append one unknown ``C`` per
    isolated boundary point: its data nodes carry ``v = a + r C`` and one
    extra equation asks the probe nodes further out to see the same ``C``.
    """

    name = "reciprocal"

    def __init__(self, system: _System, log_rows=None, groups=()):
        self.s = system
        self.h = system.grid.h
        self.n = system.n
        self.m = len(groups)
        self.groups = groups
        self.base = [np.exp(-d) for d in system.nb_data]
        self.log_rows = np.zeros(system.n, dtype=bool) if log_rows is None else log_rows
        grid = system.grid
        self.nb_group, self.nb_a, self.nb_r = [], [], []
        gid = -np.ones(grid.kind.shape, dtype=np.int64)
        ga = np.zeros(grid.kind.shape)
        gr = np.zeros(grid.kind.shape)
        for g, grp in enumerate(groups):
            ij = grp["data_nodes"]
            gid[ij[:, 0], ij[:, 1]] = g
            ga[ij[:, 0], ij[:, 1]] = grp["a"]
            gr[ij[:, 0], ij[:, 1]] = grp["r"]
        self.node_group, self.node_a, self.node_r = gid, ga, gr
        for sft in _SHIFTS:
            nb = system.nodes + sft
            self.nb_group.append(gid[nb[:, 0], nb[:, 1]])
            self.nb_a.append(ga[nb[:, 0], nb[:, 1]])
            self.nb_r.append(gr[nb[:, 0], nb[:, 1]])

    def to_state(self, u):
        return np.concatenate([np.exp(-u), np.zeros(self.m)])

    def to_u(self, x):
        return -np.log(x[: self.n])

    def data_u(self, x, bdata):
        """Boundary array with the fitted puncture data filled in."""
        out = bdata.copy()
        if self.m:
            g = self.node_group
            sel = g >= 0
            out[sel] = -np.log(self.node_a[sel] + self.node_r[sel] * x[self.n:][g[sel]])
        return out

    def _data(self, x):
        if not self.m:
            return self.base
        c = x[self.n:]
        return [np.where(g >= 0, a + r * c[np.maximum(g, 0)], b)
                for g, a, r, b in zip(self.nb_group, self.nb_a, self.nb_r, self.base)]

    def admissible(self, x):
        if not (np.all(x[: self.n] > 0) and np.all(np.isfinite(x))):
            return False
        return all(np.all(d[k < 0] > 0) for d, k in zip(self._data(x), self.s.nb_index))

    def parts(self, x):
        h = self.h
        v = x[: self.n]
        nb = self.s.neighbours(v, self._data(x))
        e, w, n, s = nb
        lap = (e + w + n + s - 4.0 * v) / (h * h)
        gx = (e - w) / (2 * h)
        gy = (n - s) / (2 * h)
        return v, nb, lap, gx, gy

    def residual(self, x):
        v, nb, lap, gx, gy = self.parts(x)
        g = v * lap - gx * gx - gy * gy + 1.0
        lr = self.log_rows
        if lr.any():
            s = sum(np.log(q[lr]) for q in nb) - 4.0 * np.log(v[lr])
            g[lr] = v[lr] ** 2 * s / (self.h * self.h) + 1.0
        if not self.m:
            return g
        extra = [np.mean((v[grp["probe"]] - grp["probe_a"]) / grp["probe_r"]) - x[self.n + k]
                 for k, grp in enumerate(self.groups)]
        return np.concatenate([g, extra])

    def scaled(self, x, g):
        return g

    def floor(self, x):
        """Rounding error of the residual rows at ``x``."""
        v, nb, _, _, _ = self.parts(x)
        tot = sum(np.abs(q) for q in nb) + 4.0 * v
        f = v * tot / (self.h * self.h)
        lr = self.log_rows
        if lr.any():
            tl = sum(np.abs(np.log(q[lr])) for q in nb) + 4.0 * np.abs(np.log(v[lr]))
            f[lr] = v[lr] ** 2 * tl / (self.h * self.h)
        return EPS * float(np.max(f))

    def jacobian(self, x):
        h = self.h
        v, nb, lap, gx, gy = self.parts(x)
        c = v / (h * h)
        diag = lap - 4.0 * v / (h * h)
        off = [c - gx / h, c + gx / h, c - gy / h, c + gy / h]
        lr = self.log_rows
        if lr.any():
            vl = v[lr]
            s = sum(np.log(q[lr]) for q in nb) - 4.0 * np.log(vl)
            diag[lr] = (2.0 * vl * s - 4.0 * vl) / (h * h)
            for o, q in zip(off, nb):
                o[lr] = vl ** 2 / (h * h * q[lr])
        mat = self.s.matrix(diag, off)
        if not self.m:
            return mat
        n, m = self.n, self.m
        rows, cols, vals = [], [], []
        for o, g, r in zip(off, self.nb_group, self.nb_r):
            sel = g >= 0
            rows.append(self.s.rows[sel])
            cols.append(n + g[sel])
            vals.append(o[sel] * r[sel])
        for k, grp in enumerate(self.groups):
            p = grp["probe"]
            rows.append(np.full(len(p) + 1, n + k))
            cols.append(np.concatenate([p, [n + k]]))
            vals.append(np.concatenate([1.0 / (len(p) * grp["probe_r"]), [-1.0]]))
        border = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(n + m, n + m))
        return (sp.block_diag([mat, sp.csc_matrix((m, m))], format="csc") + border).tocsc()


def puncture_groups(grid: Grid, system: _System) -> list:
    """Fitted-constant bookkeeping for every isolated boundary point.

    Near a finite puncture ``q`` the density is ``1/(r (log(1/r) + C))`` up
    to terms whose angular mean is ``O(r^2)``; near a puncture at infinity
    of the inversion chart, ``1/(|w| (log|w| + C))``.  Data nodes use
    ``v = a + r C`` with the unknown ``C``; probes are interior nodes on a
    shell twice as far out (half as far for infinity).
    """
    groups = []
    nodes = system.nodes
    w_int = grid.points[nodes[:, 0], nodes[:, 1]]
    h = grid.h
    if grid.punctures:
        qs = np.array(grid.punctures)
        pts = grid.points
        d_all = np.abs(pts[..., None] - qs)
        near_all = np.argmin(d_all, axis=-1)
        r_all = np.min(d_all, axis=-1)
        d_int = np.abs(w_int[:, None] - qs)
        near_int = np.argmin(d_int, axis=1)
        r_int = np.min(d_int, axis=1)
        for k in range(len(qs)):
            data = np.argwhere((grid.kind == RING) & (near_all == k))
            rr = r_all[data[:, 0], data[:, 1]]
            shell = (near_int == k) & (np.abs(r_int - 2 * grid.rho) < h)
            if not len(data) or not shell.any():
                continue
            pr = r_int[shell]
            groups.append({"data_nodes": data, "a": rr * np.log(1 / rr), "r": rr,
                           "probe": np.flatnonzero(shell), "probe_a": pr * np.log(1 / pr),
                           "probe_r": pr, "where": complex(qs[k])})
    if grid.infinity_puncture and grid.count(TRUNCATION):
        data = np.argwhere(grid.kind == TRUNCATION)
        m = np.abs(grid.points[data[:, 0], data[:, 1]])
        x0, x1, y0, y1 = grid.bbox
        half = 0.5 * min(-x0, x1, -y0, y1)
        cheb = np.maximum(np.abs(w_int.real), np.abs(w_int.imag))
        shell = np.abs(cheb - half) < h
        if shell.any():
            pm = np.abs(w_int[shell])
            groups.append({"data_nodes": data, "a": m * np.log(m), "r": m,
                           "probe": np.flatnonzero(shell), "probe_a": pm * np.log(pm),
                           "probe_r": pm, "where": "infinity"})
    return groups


def puncture_rows(grid: Grid, system: _System) -> np.ndarray:
    """Interior nodes whose nearest boundary point is an isolated one.

    Every row qualifies when the grid has no smooth boundary at all.
    """
    if not grid.punctures and not grid.infinity_puncture:
        return np.zeros(system.n, dtype=bool)
    if grid.count(BAND) == 0:
        return np.ones(system.n, dtype=bool)
    nodes = system.nodes
    w = grid.points[nodes[:, 0], nodes[:, 1]]
    sd = grid.sd[nodes[:, 0], nodes[:, 1]]
    rows = np.zeros(system.n, dtype=bool)
    for q in grid.punctures:
        rows |= np.abs(w - q) <= sd * (1 + 1e-9)
    return rows


class _Log:
    name = "log"

    def __init__(self, system: _System):
        self.s = system
        self.h = system.grid.h
        self.data = system.nb_data

    def to_state(self, u):
        return np.asarray(u, dtype=float).copy()

    def to_u(self, x):
        return x

    def admissible(self, x):
        return bool(np.all(np.isfinite(x)) and np.all(x < 300))

    def residual(self, x):
        h = self.h
        e, w, n, s = self.s.neighbours(x, self.data)
        return (e + w + n + s - 4.0 * x) / (h * h) - np.exp(2.0 * x)

    def scaled(self, x, f):
        return f * np.exp(-2.0 * x)

    def floor(self, x):
        nb = self.s.neighbours(x, self.data)
        tot = sum(np.abs(q) for q in nb) + 4.0 * np.abs(x)
        return EPS * float(np.max(tot * np.exp(-2.0 * x))) / (self.h * self.h)

    def jacobian(self, x):
        h = self.h
        diag = -4.0 / (h * h) - 2.0 * np.exp(2.0 * x)
        return self.s.matrix(diag, [1.0 / (h * h)] * 4)


class _Factor:
    """Sparse LU of the row-equilibrated matrix with a checked solve.

    The check is on the normwise backward error
    ``|r| / (|A| |x| + |b|)`` in the max norm.  Up to three steps of
    iterative refinement are taken before giving up.
    """

    def __init__(self, mat, rel_tol=1e-12):
        scale = 1.0 / abs(mat).max(axis=1).toarray().ravel()
        if not np.all(np.isfinite(scale)):
            raise SingularSystemError("matrix has an empty or non-finite row")
        self.scale = scale
        self.mat = (sp.diags(scale) @ mat).tocsc()
        self.rel_tol = rel_tol
        try:
            self.lu = spla.splu(self.mat, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise SingularSystemError(f"sparse factorisation failed: {exc}") from exc
        self.a_norm = spla.norm(self.mat, np.inf)

    def solve(self, rhs):
        rhs = self.scale * rhs
        b_norm = np.max(np.abs(rhs))

        def backward_error(x, r):
            den = self.a_norm * np.max(np.abs(x)) + b_norm
            return np.max(np.abs(r)) / den if den > 0 else 0.0

        x = self.lu.solve(rhs)
        r = rhs - self.mat @ x
        err = backward_error(x, r)
        for _ in range(3):
            if err <= self.rel_tol:
                break
            x = x + self.lu.solve(r)
            r = rhs - self.mat @ x
            err = backward_error(x, r)
        if not np.isfinite(err) or err > self.rel_tol:
            raise SingularSystemError(f"linear solve backward error {err:.3g} exceeds {self.rel_tol}")
        return x


def _linear_solve(mat, rhs, rel_tol=1e-12):
    return _Factor(mat, rel_tol).solve(rhs)


def _default_init(grid: Grid, system: _System) -> np.ndarray:
    """Model ``u`` on interior nodes: the larger of the half-plane and puncture models."""
    nodes = system.nodes
    w = grid.points[nodes[:, 0], nodes[:, 1]]
    v = grid.sd[nodes[:, 0], nodes[:, 1]].copy()
    for q in grid.punctures:
        r = np.abs(w - q)
        v = np.minimum(v, r * np.log1p(1.0 / r))
    return -np.log(v)


def _init_values(init, grid: Grid, system: _System) -> np.ndarray:
    nodes = system.nodes
    if isinstance(init, LogDensityField):
        # warm start from a field on the same grid
        u = init.u[nodes[:, 0], nodes[:, 1]]
    elif callable(init):
        w = grid.points[nodes[:, 0], nodes[:, 1]]
        z = grid.chart.from_chart(w)
        u = np.log(np.asarray(init(z), dtype=float))
        if grid.chart.kind == "inversion":
            u = u - 2.0 * np.log(np.abs(w))
    else:
        arr = np.asarray(init, dtype=float)
        u = arr[nodes[:, 0], nodes[:, 1]] if arr.shape == grid.kind.shape else arr
    if u.shape != (system.n,) or not np.all(np.isfinite(u)):
        raise PreconditionError("initial field must be finite on every interior node")
    return u


def is_supersolution(grid: Grid, data: np.ndarray, u_interior: np.ndarray, slack: float = 1e-12) -> bool:
    """``Laplacian_h u - exp(2u) <= 0`` on every interior node (5-point form)."""
    system = _System(grid, data)
    f = _Log(system).residual(u_interior)
    return bool(np.all(f * np.exp(-2.0 * u_interior) <= slack))


PRESOLVE_TOL = 1e-4
# rows are trusted to this many units of their rounding error
FLOOR_FACTOR = 16.0
EPS = float(np.finfo(float).eps)


def solve_liouville(grid: Grid, bdata=None, init=None, *, force: bool = False,
                    scheme: str = "reciprocal", tol: float = 1e-10, max_iter: int = 100,
                    puncture_fit: bool | None = None, callback=None) -> LogDensityField:
    """Damped Newton solve of the curvature equation on ``grid``.

    ``bdata`` defaults to :func:`boundary_data` for the grid's source region.
    ``init`` may be a plane density callable, a field or an array of ``u``;
    it must be a supersolution unless ``force`` is set.  ``callback(k, u)``
    receives each iterate as a full grid array.

    ``puncture_fit`` (reciprocal scheme only) solves for the constant in the
    puncture models instead of fixing it at 0; by default it is on exactly
    when the model boundary data is used.
    """
    if scheme not in SCHEMES:
        raise PreconditionError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if puncture_fit is None:
        puncture_fit = bdata is None
    if bdata is None:
        bdata = boundary_data(grid.source, grid)
    bdata = np.asarray(bdata, dtype=float)
    need = (grid.kind != INTERIOR) & (grid.kind != EXTERIOR)
    if not np.all(np.isfinite(bdata[need])):
        raise PreconditionError("boundary data must be finite on every data node")
    system = _System(grid, bdata)
    if scheme == "reciprocal":
        groups = puncture_groups(grid, system) if puncture_fit else []
        disc = _Reciprocal(system, puncture_rows(grid, system), groups)
    else:
        disc = _Log(system)

    if init is None:
        u0 = _default_init(grid, system)
        if disc.name == "reciprocal" and (disc.m or disc.log_rows.any()):
            # Newton in v wanders from the crude model near isolated points;
            # the log form is monotone from it and gives a close start
            pre = solve_liouville(grid, bdata, scheme="log", tol=PRESOLVE_TOL, max_iter=max_iter)
            u0 = pre.u[system.nodes[:, 0], system.nodes[:, 1]]
    else:
        u0 = _init_values(init, grid, system)
        if not force and not is_supersolution(grid, bdata, u0):
            raise PreconditionError("initial field is not a supersolution (pass force=True)")

    def full(x):
        data = disc.data_u(x, bdata) if hasattr(disc, "data_u") else bdata
        out = np.where(need, data, np.nan)
        nodes = system.nodes
        out[nodes[:, 0], nodes[:, 1]] = disc.to_u(x)
        return out

    x = disc.to_state(u0)
    g = disc.residual(x)
    res = float(np.max(np.abs(disc.scaled(x, g))))
    it = 0
    stalled = False
    if callback is not None:
        callback(0, full(x))
    floor = FLOOR_FACTOR * disc.floor(x)
    while res > max(tol, floor):
        if it >= max_iter:
            raise NoConvergenceError(f"no convergence after {max_iter} Newton steps", res)
        lu = _Factor(disc.jacobian(x))
        step = lu.solve(-g)
        weight = np.maximum(np.abs(x), 1.0)
        size = float(np.max(np.abs(step) / weight))
        if size <= 1e-14:
            stalled = True
            break
        # natural monotonicity: the simplified Newton correction at the
        # trial point must shrink; unlike the residual it ignores row scaling
        t = 1.0
        while True:
            trial = x + t * step
            if disc.admissible(trial):
                g_trial = disc.residual(trial)
                if np.all(np.isfinite(g_trial)):
                    res_trial = float(np.max(np.abs(disc.scaled(trial, g_trial))))
                    if res_trial <= max(tol, floor):
                        break
                    simple = float(np.max(np.abs(lu.solve(-g_trial)) / weight))
                    if simple <= (1.0 - t / 4.0) * size:
                        break
            t *= 0.5
            if t < 2.0 ** -30:
                raise NoConvergenceError("damped Newton step rejected at every length", res)
        x, g, res = trial, g_trial, res_trial
        floor = FLOOR_FACTOR * disc.floor(x)
        it += 1
        if callback is not None:
            callback(it, full(x))

    stats = {"stalled": stalled, "unknowns": system.n, "residual_floor": floor}
    if getattr(disc, "m", 0):
        stats["puncture_constants"] = [
            {"at": grp["where"], "constant": float(x[system.n + k])} for k, grp in enumerate(disc.groups)]
    return LogDensityField(grid=grid, u=full(x), residual_norm=res, newton_iterations=it,
                           scheme=disc.name, stats=stats)


def solve_region(region: geo.Region, h: float, chart: Chart | None = None, bbox=None,
                 exact=None, **kw) -> LogDensityField:
    """Discretise, attach boundary data and solve in one call."""
    chart = chart or Chart.identity()
    grid = discretize(region, chart, bbox, h)
    bdata = None if exact is None else boundary_data(region, grid, exact=exact)
    return solve_liouville(grid, bdata, **kw)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def density_at(fld: LogDensityField, z=None, *, at_infinity: bool = False):
    """Plane density ``lam(z)`` by bilinear interpolation of ``u``.

    With ``at_infinity=True`` (inversion chart only) returns the chart
    density ``mu(0)`` read at the node ``w = 0``.
    """
    grid = fld.grid
    if at_infinity:
        if grid.chart.kind != "inversion":
            raise PreconditionError("the point at infinity needs the inversion chart")
        ij = grid.nearest_index(0j)
        if ij is None or grid.kind[ij] != INTERIOR:
            raise OutOfHullError("w = 0 is not an interior node")
        return float(np.exp(fld.u[ij]))
    zz = np.asarray(z, dtype=complex)
    if grid.chart.kind == "inversion" and np.any(zz == grid.chart.center):
        raise OutOfHullError("the inversion centre maps to infinity in the chart")
    w = grid.chart.to_chart(zz)
    fx = w.real / grid.h - grid.i0
    fy = w.imag / grid.h - grid.j0
    i = np.floor(fx).astype(np.int64)
    j = np.floor(fy).astype(np.int64)
    if np.any((i < 0) | (j < 0) | (i + 1 >= grid.nx) | (j + 1 >= grid.ny)):
        raise OutOfHullError("query point outside the grid")
    corners = [fld.u[i, j], fld.u[i + 1, j], fld.u[i, j + 1], fld.u[i + 1, j + 1]]
    if not all(np.all(np.isfinite(c)) for c in corners):
        raise OutOfHullError("query point outside the discretised region")
    tx, ty = fx - i, fy - j
    u = ((1 - tx) * (1 - ty) * corners[0] + tx * (1 - ty) * corners[1]
         + (1 - tx) * ty * corners[2] + tx * ty * corners[3])
    lam = grid.chart.plane_density(np.exp(u), w)
    return float(lam) if lam.ndim == 0 else lam


def nodal_density(fld: LogDensityField, mask=None) -> np.ndarray:
    """Plane densities at grid nodes (all non-exterior nodes by default)."""
    grid = fld.grid
    if mask is None:
        mask = grid.kind != EXTERIOR
    w = grid.points[mask]
    return grid.chart.plane_density(np.exp(fld.u[mask]), w)


# ---------------------------------------------------------------------------
# Refinement studies
# ---------------------------------------------------------------------------


def observed_order(hs, values) -> float:
    """Order ``p`` with ``v(h) = v* + C h^p`` through the last three levels.

    Returns NaN when the differences do not bracket a positive order.
    """
    if len(hs) < 3:
        raise PreconditionError("observed order needs at least three levels")
    h0, h1, h2 = hs[-3:]
    v0, v1, v2 = values[-3:]
    if len({h0, h1, h2}) < 3:
        raise PreconditionError("refinement levels must be distinct")
    d1, d2 = v1 - v0, v2 - v1
    if d2 == 0 or d1 == 0 or (d1 > 0) != (d2 > 0):
        return float("nan")
    target = d1 / d2

    def f(p):
        return (h0 ** p - h1 ** p) / (h1 ** p - h2 ** p) - target

    try:
        return float(brentq(f, 1e-3, 20.0))
    except ValueError:
        return float("nan")


def richardson(hs, values, order: float = 2.0) -> float:
    """Extrapolate the last two levels assuming ``v(h) = v* + C h^order``."""
    h1, h2 = hs[-2], hs[-1]
    v1, v2 = values[-2], values[-1]
    return float(v2 + (v2 - v1) * h2 ** order / (h1 ** order - h2 ** order))


@dataclass(frozen=True)
class RefinementResult:
    mode: str
    parameters: list
    values: list
    extrapolated: float | None
    order: float | None
    fields: list = field(default_factory=list, repr=False)

    def to_dict(self):
        key = "h" if self.mode == "refine" else "delta"
        return {"mode": self.mode,
                "levels": [{key: p, "value": v} for p, v in zip(self.parameters, self.values)],
                "extrapolated": self.extrapolated, "order": self.order}


def _check_decreasing(seq, what):
    for a, b in zip(seq, seq[1:]):
        if not b < a:
            raise PreconditionError(f"{what} must be strictly decreasing, got {list(seq)}")


def refine_and_extrapolate(region: geo.Region, chart: Chart | None, point, h_list, *,
                           mode: str = "refine", deltas=None, bbox=None, at_infinity=False,
                           keep_fields=False, monotone_tol: float = 1e-8,
                           **solve_kw) -> RefinementResult:
    """Density at ``point`` across a refinement or exhaustion sequence.

    ``mode="refine"`` solves at every spacing in ``h_list`` (at least three,
    strictly decreasing) and reports a Richardson value and the observed
    order.  ``mode="exhaustion"`` keeps ``h_list[0]`` fixed and solves on the
    inner parallel sets ``{dist > delta}`` for the strictly decreasing
    ``deltas``; the values must not increase (up to ``monotone_tol``).
    """
    chart = chart or Chart.identity()
    hs = [float(h) for h in h_list]
    fields = []

    def evaluate(reg, h, box):
        fld = solve_region(reg, h, chart, box, **solve_kw)
        if keep_fields:
            fields.append(fld)
        return density_at(fld, point, at_infinity=at_infinity)

    if mode == "refine":
        if len(hs) < 3:
            raise PreconditionError("refinement needs at least three levels")
        _check_decreasing(hs, "grid spacings")
        values = [evaluate(region, h, bbox) for h in hs]
        return RefinementResult("refine", hs, values, richardson(hs, values),
                                observed_order(hs, values), fields)
    if mode == "exhaustion":
        if not deltas or len(deltas) < 2:
            raise PreconditionError("exhaustion needs at least two offsets")
        ds = [float(d) for d in deltas]
        _check_decreasing(ds, "exhaustion offsets")
        if ds[-1] < 0:
            raise PreconditionError("exhaustion offsets must be non-negative")
        h = hs[0]
        box = bbox if bbox is not None else _box_for(region, chart, h)
        values = []
        for d in ds:
            reg = geo.Offset(region, d) if d > 0 else region
            values.append(evaluate(reg, h, box))
            if len(values) > 1 and values[-1] > values[-2] + monotone_tol:
                raise InvariantViolation(
                    f"exhaustion values increased: {values[-2]!r} -> {values[-1]!r}")
        return RefinementResult("exhaustion", ds, values, None, None, fields)
    raise PreconditionError(f"unknown mode {mode!r}")


def _box_for(region, chart, h):
    from .grid import default_bbox

    return default_bbox(region, chart, h)


# ---------------------------------------------------------------------------
# CSV dump
# ---------------------------------------------------------------------------


def write_field_csv(fld: LogDensityField, target) -> None:
    """Write ``x,y,u,lambda`` rows for all non-exterior nodes.

    Rows run along x within each grid row (fixed y), rows by increasing y.
    Coordinates and densities are chart quantities.
    """
    grid = fld.grid
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    fh = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        fh.write(f"# chart={grid.chart.kind}\n")
        fh.write("x,y,u,lambda\n")
        x, y = grid.x, grid.y
        for j in range(grid.ny):
            row = grid.kind[:, j] != EXTERIOR
            for i in np.flatnonzero(row):
                u = fld.u[i, j]
                fh.write(f"{x[i]:.17g},{y[j]:.17g},{u:.17g},{math.exp(u):.17g}\n")
    finally:
        if own:
            fh.close()


def read_field_csv(source):
    """Parse a dump back into ``(chart_kind, array of rows)``."""
    text = source.read() if hasattr(source, "read") else open(source, encoding="utf-8").read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# chart="):
        raise DomainError("missing chart comment line")
    kind = lines[0].split("=", 1)[1].strip()
    if lines[1] != "x,y,u,lambda":
        raise DomainError("unexpected header")
    rows = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
    return kind, rows
