import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from quasilab.errors import BoundaryPoint, InvalidPolyline, OutsideDisk, PoleOnPath
from quasilab.geometry import (
    Disk,
    Polyline,
    circle_polyline_intersections,
    hyperbolic_rho,
    point_in_jordan,
    point_set_diameter,
    points_in_jordan,
    winding_integral,
)

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
points = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2,
                  max_size=60)


def _brute_diameter(p):
    p = np.asarray(p)
    return max(abs(a - b) for a, b in itertools.combinations(p, 2)) if p.size > 1 else 0.0


@settings(max_examples=200, deadline=None)
@given(points)
def test_diameter_matches_brute_force(pts):
    assert point_set_diameter(np.array(pts)) == pytest.approx(_brute_diameter(pts), rel=1e-12, abs=1e-12)


def test_diameter_rounded_grid():
    rng = np.random.default_rng(0)
    p = np.round(rng.normal(size=300) * 3) + 1j * np.round(rng.normal(size=300) * 3)
    assert point_set_diameter(p) == pytest.approx(_brute_diameter(p))


def test_polyline_validation():
    with pytest.raises(InvalidPolyline):
        Polyline([0j], False)
    with pytest.raises(InvalidPolyline):
        Polyline([0j, 0j, 1j], False)
    with pytest.raises(InvalidPolyline):
        Polyline([0j, 1 + 0j], True)
    with pytest.raises(InvalidPolyline):
        Polyline([0j, complex("nan")], False)


def test_square_measurements():
    sq = Polyline([0, 1, 1 + 1j, 1j], True)
    assert sq.length == pytest.approx(4.0)
    assert sq.signed_area == pytest.approx(1.0)
    assert sq.reversed().signed_area == pytest.approx(-1.0)
    assert sq.diameter == pytest.approx(math.sqrt(2))
    assert sq.is_simple()
    bowtie = Polyline([0, 1 + 1j, 1, 1j], True)
    assert not bowtie.is_simple()


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 3.999))
def test_locate_inverts_arclength(s):
    sq = Polyline([0, 1, 1 + 1j, 1j], True)
    seg, t = sq.locate(s)
    assert sq.arclength_of(int(seg), float(t)) == pytest.approx(s, abs=1e-12)


def test_winding_integral_full_turns():
    n = 64
    circle = Polyline(np.exp(2j * np.pi * np.arange(n + 1) / n), False)
    assert winding_integral(circle, 0.1 + 0.2j) == pytest.approx(2 * math.pi)
    assert winding_integral(circle, 3.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PoleOnPath):
        winding_integral(circle, 1.0)


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord)
def test_segment_winding_is_argument_change(x0, y0, x1, y1):
    a, b = complex(x0, y0), complex(x1, y1)
    assume(abs(a - b) > 1e-3)
    pole = 0.37 - 0.21j
    seg = Polyline([a, b], False)
    assume(abs(((a - pole).conjugate() * (b - pole)).imag) > 1e-6)
    expected = np.angle((b - pole) / (a - pole))
    assert winding_integral(seg, pole) == pytest.approx(expected, abs=1e-12)


def test_point_in_jordan_matches_shapely():
    shapely = pytest.importorskip("shapely.geometry")
    rng = np.random.default_rng(1)
    t = np.sort(rng.uniform(0, 2 * np.pi, 40))
    r = 1 + 0.4 * rng.uniform(-1, 1, 40)
    v = r * np.exp(1j * t)
    poly = Polyline(v, True)
    sp = shapely.Polygon(np.c_[v.real, v.imag])
    q = rng.uniform(-1.5, 1.5, 400) + 1j * rng.uniform(-1.5, 1.5, 400)
    mine = points_in_jordan(poly, q)
    for z, m in zip(q, mine):
        if sp.exterior.distance(shapely.Point(z.real, z.imag)) < 1e-9:
            continue
        assert m == sp.contains(shapely.Point(z.real, z.imag))
        assert point_in_jordan(poly, z) == m
    with pytest.raises(BoundaryPoint):
        point_in_jordan(poly, v[0])


def test_hyperbolic_rho():
    assert hyperbolic_rho(0, 0.5) == pytest.approx(0.5)
    # Moebius invariance: rho(z, w) == rho(T z, T w) for a disk automorphism T
    a = 0.3 + 0.2j
    T = lambda z: (z - a) / (1 - np.conj(a) * z)
    z, w = 0.1 - 0.4j, -0.5 + 0.3j
    assert hyperbolic_rho(z, w) == pytest.approx(hyperbolic_rho(T(z), T(w)))
    with pytest.raises(OutsideDisk):
        hyperbolic_rho(1.0, 0)


def test_circle_crossings_square():
    sq = Polyline([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j], True)
    hits = circle_polyline_intersections(Disk(1 + 0j, 0.5), sq)
    assert len(hits) == 2
    assert {round(h.point.imag, 12) for h in hits} == {-0.5, 0.5}
    # entries and exits alternate
    assert hits[0].entering != hits[1].entering
    assert circle_polyline_intersections(Disk(0j, 0.3), sq) == []
