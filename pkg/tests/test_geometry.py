import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poincare import geometry as geo
from poincare.errors import (DomainError, ExhaustedError, NoSamplesError, PreconditionError,
                             StructuralError)
from poincare.grid import Chart, discretize

coord = st.floats(-3, 3, allow_nan=False)
radius = st.floats(0.2, 2.0)


def unit_disk():
    return geo.Disk(0j, 1.0)


# -- parsing -----------------------------------------------------------------


def test_parse_round_trip_nested_tree():
    data = {"type": "intersection", "args": [
        {"type": "disk", "center": [0, 0], "radius": 1},
        {"type": "complement", "arg": {"type": "halfplane", "anchor": [0, 0], "normal": [0, 1]}},
        {"type": "punctures", "points": [[0.25, 0.0]]},
    ]}
    region = geo.parse_region(data)
    assert geo.parse_region(json.loads(json.dumps(region.to_dict()))) == region


@pytest.mark.parametrize("bad", [
    {"type": "disk", "center": [0, 0], "radius": 1, "colour": "red"},
    {"type": "disk", "center": [0, 0]},
    {"type": "ellipse"},
    {"type": "union", "args": []},
    {"center": [0, 0]},
    {"type": "disk", "center": [0, 0], "radius": -1},
])
def test_parse_rejects_malformed_nodes(bad):
    with pytest.raises(StructuralError):
        geo.parse_region(bad)


def test_load_region_reports_invalid_json(tmp_path):
    p = tmp_path / "r.json"
    p.write_text("{not json")
    with pytest.raises(StructuralError):
        geo.load_region(p)


# -- point queries ---------------------------------------------------------------


def test_membership_open_and_closed():
    d = unit_disk()
    assert geo.contains(d, 0.5) and not geo.contains(d, 1.0)
    assert geo.closed_contains(d, 1.0)


def test_distance_to_boundary_outside_raises():
    assert geo.distance_to_boundary(unit_disk(), 0.25) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        geo.distance_to_boundary(unit_disk(), 2.0)


@given(coord, coord, radius, coord, coord)
def test_complement_membership_is_negation(cx, cy, r, x, y):
    d = geo.Disk(complex(cx, cy), r)
    z = complex(x, y)
    if abs(abs(z - d.center) - r) < 1e-9:
        return
    assert geo.contains(geo.Complement(d), z) == (not geo.closed_contains(d, z))


@given(coord, coord, coord, coord)
def test_union_and_intersection_follow_their_arguments(ax, ay, x, y):
    a, b = geo.Disk(complex(ax, ay), 1.0), geo.HalfPlane(0j, 1j)
    z = complex(x, y)
    ina, inb = geo.contains(a, z), geo.contains(b, z)
    assert geo.contains(geo.Union((a, b)), z) == (ina or inb)
    assert geo.contains(geo.Intersection((a, b)), z) == (ina and inb)


# -- classification ----------------------------------------------------------


@pytest.mark.parametrize("region, hyperbolic", [
    (geo.Disk(0j, 1.0), True),
    (geo.HalfPlane(0j, 1j), True),
    (geo.PuncturedPlane((0j, 1 + 0j)), True),
    (geo.PuncturedPlane((0j,)), False),
    (geo.FullPlane(), False),
    (geo.Complement(geo.Points((0j, 1 + 0j))), False),
    (geo.Complement(geo.Points((0j, 1 + 0j, 1j))), True),
])
def test_hyperbolicity_counts_complement_points(region, hyperbolic):
    assert geo.is_hyperbolic(region) is hyperbolic


def test_infinity_status():
    assert geo.infinity_status(geo.Disk(0j, 1.0)) == "outside"
    assert geo.infinity_status(geo.HalfPlane(0j, 1j)) == "boundary"
    assert geo.infinity_status(geo.PuncturedPlane((0j, 1 + 0j))) == "puncture"
    assert geo.infinity_status(geo.Complement(geo.Points((0j, 1 + 0j, 1j)))) == "inside"


def test_isolated_boundary_point_of_punctured_disk():
    pd = geo.Intersection((geo.Disk(0j, 1.0), geo.PuncturedPlane((0j,))))
    assert geo.isolated_boundary_points(pd, 1e-3) == [0j]
    assert geo.isolated_boundary_points(geo.Disk(0j, 1.0), 1e-3) == []


def test_normal_form_pushes_complements_down():
    tree = geo.Complement(geo.Union((geo.Disk(0j, 1.0), geo.HalfPlane(0j, 1j))))
    nf = geo.normal_form(tree)
    assert isinstance(nf, geo.Intersection)
    assert not any(isinstance(a, geo.Complement) for a in nf.args)


def test_bounds_of_union_and_unbounded_region():
    u = geo.Union((geo.Disk(0j, 1.0), geo.Disk(3 + 0j, 1.0)))
    assert geo.bounds(u) == pytest.approx((-1.0, 4.0, -1.0, 1.0))
    assert geo.bounds(geo.HalfPlane(0j, 1j)) is None


# -- compact sets --------------------------------------------------------------


@pytest.mark.parametrize("region, cls", [
    (geo.Points((0j,)), 1),
    (geo.Points((0j, 1 + 0j)), 2),
    (geo.Points((0j, 1 + 0j, 1j)), "many"),
    (geo.Segment(-2 + 0j, 2 + 0j), "many"),
    (geo.Intersection((geo.Disk(-2 + 0j, 1.0), geo.Disk(2 + 0j, 1.0))), 0),
    (geo.Intersection((geo.Disk(-1 + 0j, 1.0), geo.Disk(1 + 0j, 1.0))), 1),
])
def test_point_count_class(region, cls):
    assert geo.CompactSpec(region).point_count_class() == cls


def test_compact_rejects_open_pieces():
    with pytest.raises(PreconditionError):
        geo.CompactSpec(geo.HalfPlane(0j, 1j))


def test_default_center_lies_in_the_set():
    seg = geo.CompactSpec(geo.Segment(-2 + 0j, 2 + 0j))
    assert seg.contains(seg.default_center())
    lens = geo.CompactSpec(geo.Intersection((geo.Disk(-0.5 + 0j, 1.0), geo.Disk(0.5 + 0j, 1.0))))
    assert lens.depth(lens.default_center()) > 0.4


# -- inversion -------------------------------------------------------------------


@given(coord, coord, radius, st.floats(-1, 1), st.floats(-1, 1))
def test_inversion_preserves_membership(cx, cy, r, x, y):
    d = geo.Disk(complex(cx, cy), r)
    c = complex(5.0, 0.5)  # never inside d
    z = complex(x, y) * 3
    if abs(abs(z - d.center) - r) < 1e-6 or z == c:
        return
    w = 1.0 / (z - c)
    assert geo.contains(geo.invert(d, c), w) == geo.contains(d, z)


def test_inverted_segment_complement_contains_neighbourhood_of_origin():
    comp = geo.Complement(geo.Segment(-2 + 0j, 2 + 0j))
    img = geo.invert(comp, 0j)
    assert geo.contains(img, 0.3j) and not geo.contains(img, 0.6)


def test_points_image_under_inversion():
    img = geo.invert(geo.Complement(geo.Points((0j, 1 + 0j, 1j))), 0j)
    assert geo.infinity_status(img) == "puncture"
    assert sorted(geo.isolated_boundary_points(img, 1e-6), key=abs) == pytest.approx([1, -1j])


# -- grid masks and samples --------------------------------------------------------


def test_erode_guards():
    g = discretize(unit_disk(), Chart.identity(), None, 1 / 16)
    assert geo.erode(unit_disk(), g, 0.25).sum() < (g.sdf(unit_disk()) > 0).sum()
    with pytest.raises(PreconditionError):
        geo.erode(unit_disk(), g, 1 / 32)
    with pytest.raises(ExhaustedError):
        geo.erode(unit_disk(), g, 1.5)


def test_component_mask_separates_disjoint_pieces():
    u = geo.Union((geo.Disk(-2 + 0j, 1.0), geo.Disk(2 + 0j, 1.0)))
    g = discretize(u, Chart.identity(), None, 1 / 16)
    left = geo.component_mask(u, g, -2)
    assert left.any() and not left[g.points.real > 0].any()
    with pytest.raises(DomainError):
        geo.component_mask(u, g, 0)


def test_sample_nodes_are_seeded_and_keep_margin():
    lens = geo.Intersection((geo.Disk(-0.5 + 0j, 1.0), geo.Disk(0.5 + 0j, 1.0)))
    a = geo.sample_nodes(lens, 1 / 64, 100, seed=3)
    b = geo.sample_nodes(lens, 1 / 64, 100, seed=3)
    assert np.array_equal(a, b)
    assert np.all(lens.sdf(a) >= 4 / 64)
    assert not np.array_equal(a, geo.sample_nodes(lens, 1 / 64, 100, seed=4))


def test_sample_nodes_empty():
    with pytest.raises(NoSamplesError):
        geo.sample_nodes(geo.Disk(0j, 0.01), 1 / 64, 10)
