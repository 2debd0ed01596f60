import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasilab.atlas import AtlasDomain
from quasilab.errors import BasepointSwallowed, Ineligible, NoPath
from quasilab.geometry import Disk
from quasilab.repellers import generate_prefractal, koch, reflect, twisted_koch
from quasilab.rotation import (
    CROSSCUT_SLACK,
    TRACKING_BOUND,
    rot_crosscut,
    rot_disk,
    rot_point,
    rot_symbolic,
    truncated_component,
)
from quasilab.spectra import _support

shapely = pytest.importorskip("shapely")
from shapely.geometry import Point, Polygon  # noqa: E402

DISK = AtlasDomain.disk().jordan_domain
KOCH4 = generate_prefractal(koch(), 4)
TWIST3 = generate_prefractal(twisted_koch(0.15), 3)


def _boundary_point(dom, u):
    seg, t = dom.boundary.locate(u * dom.boundary.length)
    return complex(dom.boundary.index.point(int(seg), float(t)))


def _gate_oracle(dom, z, delta):
    """Circle arcs on the boundary of the basepoint's piece of (domain minus closed disk), from exact polygon clipping."""
    v = dom.boundary.vertices
    rest = Polygon(np.c_[v.real, v.imag]).difference(Point(z.real, z.imag).buffer(delta, quad_segs=4096))
    z0 = Point(dom.basepoint.real, dom.basepoint.imag)
    comp = next(g for g in getattr(rest, "geoms", [rest]) if g.contains(z0))
    ring = np.array(comp.exterior.coords)[:-1]
    on = np.abs(np.abs(ring[:, 0] + 1j * ring[:, 1] - z) - delta) < 1e-7
    return int(np.sum(on & ~np.roll(on, 1)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(0.005, 0.5))
def test_disk_closed_form(theta, delta):
    # the gate ends where |y - z| = delta meets the circle, at pi/2 - asin(delta/2) from the inward normal
    z = complex(math.cos(theta), math.sin(theta))
    rv = rot_point(DISK, z, delta)
    expected = math.atan2(-z.imag, -z.real) - math.pi / 2 + math.asin(delta / 2)
    if abs(abs(math.atan2(-z.imag, -z.real)) - math.pi) < 1e-3:
        return  # branch cut of the anchor
    assert rv.log_rot == pytest.approx(expected, abs=1e-4)
    assert rv.gates == 1


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0.02, 0.35), st.sampled_from(["koch", "twist"]))
def test_gate_count_matches_exact_clipping(u, delta, which):
    dom = KOCH4 if which == "koch" else TWIST3
    z = _boundary_point(dom, u)
    try:
        comp = truncated_component(dom, z, delta)
    except (BasepointSwallowed, NoPath):
        return
    assert comp.gate_count == _gate_oracle(dom, z, delta)
    assert abs(comp.loop_closure) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.floats(0.03, 0.3))
def test_tracking_and_path_integral_agree(u, delta):
    z = _boundary_point(KOCH4, u)
    try:
        a = rot_point(KOCH4, z, delta)
        b = rot_point(KOCH4, z, delta, method="path_integral")
    except (BasepointSwallowed, NoPath):
        return
    assert abs(a.log_rot - b.log_rot) <= a.additive_error_bound + b.additive_error_bound
    assert a.log_rot == pytest.approx(b.log_rot, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.floats(0.03, 0.3))
def test_reflection_negates_within_bounds(u, delta):
    dom = TWIST3
    ref = reflect(dom)
    z = _boundary_point(dom, u)
    try:
        a = rot_point(dom, z, delta)
        b = rot_point(ref, z.conjugate(), delta)
    except (BasepointSwallowed, NoPath):
        return
    assert abs(a.log_rot + b.log_rot) <= 2 * TRACKING_BOUND + 1e-9


def test_errors():
    with pytest.raises(BasepointSwallowed):
        rot_point(KOCH4, 1 + 0j, 2.0)
    # a disk of radius 1.9 centred on the unit circle contains the centre
    with pytest.raises(BasepointSwallowed):
        rot_point(AtlasDomain.disk().jordan_domain, 1 + 0j, 1.9)
    with pytest.raises(NoPath):
        rot_point(KOCH4, KOCH4.basepoint + 0.2, 0.01, on_boundary=False)
    with pytest.raises(Ineligible):
        rot_disk(DISK, Disk(0.5 + 0j, 0.05))


def test_rot_disk_on_boundary_center():
    a = rot_disk(DISK, Disk(1 + 0j, 0.2))
    b = rot_point(DISK, 1 + 0j, 0.2)
    assert a.log_rot == pytest.approx(b.log_rot)


def test_crosscut_and_symbolic():
    spec = koch()
    rv = rot_crosscut(KOCH4, _support(KOCH4, (1, 2)))
    assert rv.additive_error_bound == pytest.approx(TRACKING_BOUND + CROSSCUT_SLACK)
    sym = rot_symbolic(spec, (1, 1, 2, 0))
    assert sym.log_rot == pytest.approx(math.pi / 3)
    assert sym.additive_error_bound == 0.0


def test_truncated_component_geometry():
    z = _boundary_point(KOCH4, 0.3)
    comp = truncated_component(KOCH4, z, 0.1)
    outer = comp.outer_boundary().vertices
    assert np.all(np.abs(outer - z) >= 0.1 - 1e-9)
    for g in comp.gates:
        pts = g.points(z, 0.1)
        assert np.allclose(np.abs(pts - z), 0.1)
