"""Acceptance suite: every criterion at its stated tolerance and time budget.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

import conftest
import oracles
from poincare import catalog as cat
from poincare import geometry as geo
from poincare import verify as V
from poincare.capacity import cap_connected_oracle, pcap
from poincare.grid import INTERIOR
from poincare.solver import refine_and_extrapolate, solve_region

PCAP_LEVELS = [1 / 16, 1 / 32, 1 / 64]
UP, RIGHT = geo.HalfPlane(0j, 1j), geo.HalfPlane(0j, 1 + 0j)
UNIT = geo.Disk(0j, 1.0)
LEFT_DISK, RIGHT_DISK = geo.Disk(-0.5 + 0j, 1.0), geo.Disk(0.5 + 0j, 1.0)


def record(name, ok, detail, elapsed):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail} ({elapsed:.1f} s)"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_catalog_curvature_order():
    t = time.perf_counter()
    orders = {}
    for name, metric in cat.curvature_fixtures().items():
        pts = geo.sample_nodes(metric.region(), 1 / 64, 100, seed=0)
        assert len(pts) == 100
        orders[name] = cat.curvature_order(metric, pts, [1e-2, 5e-3, 2.5e-3])["order"]
    elapsed = time.perf_counter() - t
    ok = all(1.8 <= p <= 2.2 for p in orders.values()) and elapsed < 10
    lo, hi = min(orders.values()), max(orders.values())
    record("catalog curvature", ok, f"{len(orders)} metrics, orders in [{lo:.3f}, {hi:.3f}]", elapsed)


def test_disk_solve_accuracy():
    errors, times = [], []
    hs = [1 / 32, 1 / 64, 1 / 128]
    for h in hs:
        t = time.perf_counter()
        fld = solve_region(UNIT, h)
        times.append(time.perf_counter() - t)
        g = fld.grid
        mask = (g.kind == INTERIOR) & (np.abs(g.points) <= 0.9)
        exact = oracles.disk_density(g.points[mask])
        errors.append(float(np.max(np.abs(np.exp(fld.u[mask]) / exact - 1))))
    order = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    ok = errors[-1] <= 1e-2 and order >= 1.5 and times[-1] < 60
    record("disk solve", ok, f"sup rel err {errors[-1]:.2e} at h=1/128, order {order:.2f}", times[-1])


def test_capacity_reproduction():
    t = time.perf_counter()
    disks = {r: pcap(geo.Disk(0j, float(r)), PCAP_LEVELS).extrapolated for r in (0.5, 1, 2)}
    seg = geo.Segment(-2 + 0j, 2 + 0j)
    seg_val = pcap(seg, PCAP_LEVELS).extrapolated
    two = pcap(geo.Points((0j, 1 + 0j)), PCAP_LEVELS).pcap
    three = pcap(geo.Points((0j, 1 + 0j, 1j)), PCAP_LEVELS)
    coarse, fine = three.levels[-2][1], three.levels[-1][1]
    elapsed = time.perf_counter() - t
    ok = (all(abs(v / r - 1) <= 2e-2 for r, v in disks.items())
          and abs(seg_val / cap_connected_oracle(seg) - 1) <= 5e-2
          and two == 0.0
          and fine > 0.01 and abs(fine / coarse - 1) <= 0.1
          and elapsed < 300)
    detail = (", ".join(f"r={r}: {v:.5f}" for r, v in disks.items())
              + f"; segment {seg_val:.4f}; two points {two}; three points {coarse:.4f} -> {fine:.4f}"
              + f" (closed form {oracles.PCAP_0_1_I:.4f})")
    record("pcap reproduction", ok, detail, elapsed)


def test_submultiplicativity_oracle_mode():
    t = time.perf_counter()
    planes = V.verify_theorem1(UP, RIGHT, 500, 1e-12, "oracle")
    nested = V.verify_theorem1(geo.Disk(0j, 1.0), geo.Disk(0j, 2.0), 500, 1e-12, "oracle")
    elapsed = time.perf_counter() - t
    ok = (len(planes.samples) == 500 and planes.min_ratio >= 1 - 1e-12
          and nested.max_deviation <= 1e-12 and nested.equality_detected and elapsed < 5)
    record("four-density ratio, closed forms", ok,
           f"half planes min {planes.min_ratio:.4f}; nested disks deviation {nested.max_deviation:.1e}, "
           f"equality {nested.equality_detected}", elapsed)


def test_submultiplicativity_pde_mode():
    t = time.perf_counter()
    rep = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 500, 5e-3, "pde", h=1 / 256)
    elapsed = time.perf_counter() - t
    gap = min(1.0 - abs(s.point - c) for s in rep.samples for c in (-0.5, 0.5))
    far = gap >= 4 / 256 - 1e-12
    mid = rep.ratio_at(0j)
    ok = (len(rep.samples) == 500 and far and rep.min_ratio >= 0.995 and mid > 1 + 1e-3
          and elapsed < 600)
    record("four-density ratio, solved fields", ok,
           f"min {rep.min_ratio:.4f}, midpoint {mid:.5f}, closest boundary gap {gap:.4f}", elapsed)


def test_weak_curvature_constant():
    t = time.perf_counter()
    rep = V.verify_weak_constant(UP, RIGHT, 200, 1e-3, "oracle")
    elapsed = time.perf_counter() - t
    ok = (len(rep.points) == 200 and rep.min_curvature >= -2 - 1e-3
          and rep.min_ratio >= 1 / math.sqrt(2) and rep.min_ratio >= 1)
    record("product metric curvature", ok,
           f"min curvature {rep.min_curvature:.4f}, min ratio {rep.min_ratio:.4f}", elapsed)


def test_exhaustion_limit():
    t = time.perf_counter()
    res = refine_and_extrapolate(UNIT, None, 0j, [1 / 128], mode="exhaustion",
                                 deltas=[0.2, 0.1, 0.05, 0.02, 0.01, 0.0])
    elapsed = time.perf_counter() - t
    vals = res.values
    ok = all(b <= a for a, b in zip(vals, vals[1:])) and abs(vals[-1] - 2) <= 1e-2
    record("exhaustion", ok, " > ".join(f"{v:.4f}" for v in vals), elapsed)


def test_boundary_ratio_limits():
    t = time.perf_counter()
    ds = [1e-1, 1e-2, 1e-3]
    half = geo.Intersection((UNIT, UP))
    good = V.boundary_ratio(UNIT, half, 1j, [1j * (1 - d) for d in ds])
    bad = V.counterexample(ds)["punctured_disk"]
    elapsed = time.perf_counter() - t
    ok = (good[-1] >= 0.95 and all(b >= a for a, b in zip(good, good[1:]))
          and bad[-1] <= 0.2 and all(b < a for a, b in zip(bad, bad[1:])))
    record("boundary ratio", ok,
           f"half disk {', '.join(f'{r:.6f}' for r in good)}; punctured disk "
           f"{', '.join(f'{r:.4f}' for r in bad)}", elapsed)


def test_capacity_submultiplicativity():
    t = time.perf_counter()
    over = V.verify_capacity_submult(LEFT_DISK, RIGHT_DISK, PCAP_LEVELS, tol=2e-2)
    apart = V.verify_capacity_submult(geo.Disk(-2 + 0j, 1.0), geo.Disk(2 + 0j, 0.5), PCAP_LEVELS)
    elapsed = time.perf_counter() - t
    ok = over.passed and apart.lhs == 0.0 and apart.degenerate
    record("capacity product", ok,
           f"overlapping {over.lhs:.4f} <= {over.rhs:.4f}; disjoint lhs {apart.lhs}", elapsed)


def _nested_pairs():
    lens = geo.Intersection((LEFT_DISK, RIGHT_DISK))
    square = geo.Intersection(tuple(geo.HalfPlane(0.5 * a, -a) for a in (1 + 0j, -1 + 0j, 1j, -1j)))
    return [
        ("disk in larger disk", UNIT, geo.Disk(0j, 2.0), "oracle"),
        ("off-centre disk in disk", geo.Disk(0.4 + 0.1j, 0.5), UNIT, "oracle"),
        ("shifted half plane", geo.HalfPlane(1j, 1j), UP, "oracle"),
        ("punctured disk in disk", cat.PuncturedDisk(0j, 1.0).region(), UNIT, "oracle"),
        ("annulus in punctured disk", cat.Annulus(0j, 0.5, 1.0).region(),
         cat.PuncturedDisk(0j, 1.0).region(), "oracle"),
        ("wedge in half plane", cat.Wedge(0j, math.pi / 2, math.pi / 2).region(), UP, "oracle"),
        ("disk in twice punctured plane", geo.Disk(0.5 + 0j, 0.4),
         cat.TwicePuncturedPlane().region(), "oracle"),
        ("lens in disk", lens, LEFT_DISK, "pde"),
        ("square in disk", square, UNIT, "pde"),
        ("half disk in disk", geo.Intersection((UNIT, UP)), UNIT, "mixed"),
    ]


def test_monotonicity_suite():
    t = time.perf_counter()
    worst, lines = -math.inf, []
    for name, inner, outer, mode in _nested_pairs():
        h = 1 / 64 if mode != "oracle" else None
        rep = V.verify_monotonicity(inner, outer, 200, 5e-3, mode, h)
        worst = max(worst, rep.max_excess)
        if not rep.passed:
            lines.append(name)
    elapsed = time.perf_counter() - t
    ok = not lines
    record("monotonicity", ok, f"10 pairs, largest excess {worst:.2e}"
           + (f"; failing: {', '.join(lines)}" if lines else ""), elapsed)
