import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from poincare import geometry as geo
from poincare import verify as V
from poincare.errors import DomainError, NoSamplesError, PreconditionError, UnsupportedOracleError

UP, RIGHT = geo.HalfPlane(0j, 1j), geo.HalfPlane(0j, 1 + 0j)
D1, D2 = geo.Disk(0j, 1.0), geo.Disk(0j, 2.0)
LEFT_DISK, RIGHT_DISK = geo.Disk(-0.5 + 0j, 1.0), geo.Disk(0.5 + 0j, 1.0)


def test_identical_domains_ratio_one():
    assert V.submult_ratio(D1, D1, 0.3) == 1.0


def test_nested_ratio_one():
    for z in (0, 0.5j, -0.7 + 0.1j):
        assert V.submult_ratio(D1, D2, z) == pytest.approx(1.0, abs=1e-15)


def test_half_plane_pair_at_one_plus_i():
    assert V.submult_ratio(UP, RIGHT, 1 + 1j) == pytest.approx(
        oracles.HALF_PLANE_PAIR_RATIO_AT_1_PLUS_I, rel=1e-14)


def test_ratio_outside_intersection():
    with pytest.raises(DomainError):
        V.submult_ratio(UP, RIGHT, -1 + 1j)


def test_non_hyperbolic_union():
    with pytest.raises(PreconditionError):
        V.submult_ratio(geo.PuncturedPlane((0j,)), D1, 0.5)


@settings(max_examples=30)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.3, 2.0),
       st.floats(-1, 1), st.floats(-1, 1))
def test_oracle_ratio_at_least_one_for_crossing_disks(cx, cy, r, s, t):
    a, b = geo.Disk(0j, 1.0), geo.Disk(complex(cx, cy), r)
    z = complex(s, t) * 0.999
    if not (geo.contains(a, z) and geo.contains(b, z)):
        return
    if min(a.sdf(np.asarray(z)), b.sdf(np.asarray(z))) < 1e-3:
        return
    try:
        ratio = V.submult_ratio(a, b, z)
    except UnsupportedOracleError:
        return  # tangent configurations fall outside the resolver
    assert ratio >= 1 - 1e-12


def test_half_plane_report():
    rep = V.verify_theorem1(UP, RIGHT, 500, 0.0, "oracle")
    assert rep.passed and len(rep.samples) == 500
    assert rep.min_ratio >= 1 - 1e-12
    assert not rep.nested and not rep.equality_detected
    assert rep.check_consistency()


def test_nested_report_detects_equality():
    rep = V.verify_theorem1(D1, D2, 200, 1e-12, "oracle")
    assert rep.equality_detected and rep.nested and rep.max_deviation <= 1e-12


def test_near_one_without_nesting_is_not_equality():
    # a large tolerance lets every ratio pass the closeness test; nesting still fails
    rep = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 100, 1.0, "oracle")
    assert rep.max_deviation <= 1.0 and not rep.equality_detected


def test_report_is_deterministic_for_a_seed():
    a = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 50, 5e-3, "oracle", seed=11).to_dict()
    b = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 50, 5e-3, "oracle", seed=11).to_dict()
    assert a == b


def test_pde_mode_on_coarse_grid():
    rep = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 100, 5e-2, "pde", h=1 / 32)
    assert rep.passed and rep.bbox is not None
    assert rep.ratio_at(0) > 1.1
    assert all(s.kind == "pde" for s in rep.sources)


def test_mixed_mode_uses_catalog_where_possible():
    tri = geo.Intersection((geo.Disk(0j, 1.0), geo.HalfPlane(-0.5 + 0j, 1 + 0j)))
    src = V.density_sources([D1, tri], "mixed", h=1 / 32)
    assert [s.kind for s in src] == ["oracle", "oracle"]
    sq = geo.Intersection(tuple(geo.HalfPlane(a, -a) for a in (1 + 0j, -1 + 0j, 1j, -1j)))
    src = V.density_sources([D1, sq], "mixed", h=1 / 32)
    assert [s.kind for s in src] == ["oracle", "pde"]


def test_pde_mode_needs_bounded_domains():
    with pytest.raises(PreconditionError):
        V.verify_theorem1(UP, RIGHT, 10, 5e-3, "pde", h=1 / 16)


def test_no_samples():
    with pytest.raises(NoSamplesError):
        V.verify_theorem1(geo.Disk(0j, 0.01), D1, 10, 5e-3, "oracle")


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("POINCARE_THREADS", "3")
    assert V.thread_cap() == 3
    monkeypatch.setenv("POINCARE_THREADS", "0")
    with pytest.raises(PreconditionError):
        V.thread_cap()


def test_parallel_and_serial_solves_agree(monkeypatch):
    monkeypatch.setenv("POINCARE_THREADS", "1")
    a = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 30, 5e-2, "pde", h=1 / 16).to_dict()
    monkeypatch.setenv("POINCARE_THREADS", "4")
    b = V.verify_theorem1(LEFT_DISK, RIGHT_DISK, 30, 5e-2, "pde", h=1 / 16).to_dict()
    assert a == b


# -- weak constant --------------------------------------------------------------------


def test_weak_constant_half_planes():
    rep = V.verify_weak_constant(UP, RIGHT, 200)
    assert rep.passed and rep.min_curvature >= -2 - 1e-3 and rep.min_ratio >= 1


def test_weak_constant_identical_disks_has_curvature_minus_one():
    rep = V.verify_weak_constant(D1, D1, 50)
    assert np.allclose(rep.curvatures, -1.0, atol=1e-3)


def test_weak_constant_overlapping_disks_pde():
    rep = V.verify_weak_constant(LEFT_DISK, RIGHT_DISK, 100, mode="pde", h=1 / 32)
    assert rep.min_ratio >= 1 / math.sqrt(2) + 0.29


# -- boundary behaviour ---------------------------------------------------------------


def test_half_disk_ratio_tends_to_one():
    half = geo.Intersection((D1, UP))
    ratios = V.boundary_ratio(D1, half, 1j, [1j * (1 - d) for d in (1e-1, 1e-2, 1e-3)])
    assert ratios == sorted(ratios) and ratios[-1] >= 0.95


def test_same_domain_ratio_constant():
    assert V.boundary_ratio(D1, D1, 1, [0.5, 0.9, 0.99]) == [1.0, 1.0, 1.0]


def test_boundary_ratio_guards():
    with pytest.raises(DomainError):
        V.boundary_ratio(D1, geo.Intersection((D1, UP)), 1j, [-0.5j])
    with pytest.raises(DomainError):
        V.boundary_ratio(D1, D1, 0.5, [0.2])


def test_counterexample_ratios_fall():
    res = V.counterexample((1e-1, 1e-2, 1e-3))
    pd, plane = res["punctured_disk"], res["twice_punctured_plane"]
    assert pd == sorted(pd, reverse=True) and pd[-1] <= 0.2
    d = 1e-3
    assert pd[-1] == pytest.approx((1 / (d * math.log(2 / d))) / oracles.disk_density(1 - d), rel=1e-12)
    assert all(p < q for p, q in zip(plane, pd))


# -- capacities ------------------------------------------------------------------------


def test_capacity_submult_identical_and_disjoint():
    same = V.verify_capacity_submult(D1, D1, [1 / 16, 1 / 32])
    assert same.passed and same.lhs == pytest.approx(same.rhs, rel=1e-12)
    apart = V.verify_capacity_submult(geo.Disk(-2 + 0j, 1.0), geo.Disk(2 + 0j, 0.5), [1 / 16, 1 / 32])
    assert apart.degenerate and apart.lhs == 0.0 and apart.passed


# -- monotonicity ------------------------------------------------------------------------


def test_monotonicity_oracle_and_pde():
    assert V.verify_monotonicity(D1, D2, 100).max_excess < 0
    rep = V.verify_monotonicity(geo.Intersection((LEFT_DISK, RIGHT_DISK)), LEFT_DISK, 100,
                                mode="pde", h=1 / 32)
    assert rep.passed


def test_monotonicity_requires_nesting():
    with pytest.raises(PreconditionError):
        V.verify_monotonicity(D2, D1, 50)
