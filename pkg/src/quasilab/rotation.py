"""Boundary rotation rot(z, delta) of a Jordan domain.

The truncated domain is the component of {y in the domain : |y - z| > delta}
containing the basepoint.  Its boundary is a loop made of boundary pieces
(outside the disk) and gate arcs (pieces of the circle |y - z| = delta lying
in the domain).  Because the closed disk meets the boundary, arg(y - z) has a
single-valued branch on the truncated domain, fixed by its principal value at
the basepoint.

Two methods compute the infimum of that branch over the gates:

* boundary_tracking: follow the loop, adding exact argument increments along
  boundary pieces and circle sweeps along gates.  The branch is anchored on
  the straight segment from the basepoint toward z, where arg(y - z) is
  constant.  arg is monotone along a gate, so the infimum sits at a gate end.
* path_integral: winding integrals along raster paths from the basepoint to
  each gate end, a slower check whose paths are independent of the loop.
"""

from collections import deque
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import BasepointSwallowed, Ineligible, NoPath
from .geometry import Disk, Polyline, circle_crossings, point_set_diameter, winding_integral

TWO_PI = 2 * math.pi
TRACKING_BOUND = math.pi
PATH_BOUND = 3 * math.pi + math.pi
CROSSCUT_SLACK = 10 * math.pi


@dataclass(frozen=True)
class RotationValue:
    log_rot: float
    method: str
    additive_error_bound: float
    gates: int = 0

    @property
    def rot(self):
        return math.exp(self.log_rot)


@dataclass(frozen=True)
class Gate:
    """Circle arc from an entry crossing clockwise to an exit crossing."""

    entry: int
    exit: int
    start_angle: float
    sweep: float

    def points(self, center, radius, samples=17):
        a = self.start_angle - np.linspace(0.0, self.sweep, samples)
        return center + radius * np.exp(1j * a)


@dataclass(frozen=True, eq=False)
class TruncatedComponent:
    """The truncated component as an alternating cycle of boundary pieces and gates.

    Attributes:
        domain: source domain.
        center, radius: the removed disk.
        crossings: (segment, parameter, kind, angle) arrays of circle crossings
            in boundary order (kind +1 enters the disk).
        gates: gates on this component, in loop order.
        anchor: crossing-relative position of the anchor and its argument value.
    """

    domain: object
    center: complex
    radius: float
    seg: np.ndarray
    par: np.ndarray
    kind: np.ndarray
    angle: np.ndarray
    gates: tuple
    anchor_point: complex
    anchor_arg: float
    gate_exit_args: np.ndarray = field(repr=False)
    loop_closure: float = 0.0

    @property
    def gate_count(self):
        return len(self.gates)

    def crossing_point(self, k):
        return self.domain.boundary.index.point(int(self.seg[k]), float(self.par[k]))

    def outer_boundary(self, samples_per_gate=17):
        """The loop as a closed polyline (gates sampled, boundary pieces verbatim)."""
        poly = self.domain.boundary
        pts = []
        for g in self.gates:
            pts.append(g.points(self.center, self.radius, samples_per_gate)[:-1])
            nxt = self._next_entry(g.exit)
            piece = poly.sub_arc_vertices(int(self.seg[g.exit]), float(self.par[g.exit]),
                                          int(self.seg[nxt]), float(self.par[nxt]))
            pts.append(piece[:-1])
        v = np.concatenate(pts)
        keep = np.concatenate([[True], np.abs(np.diff(v)) > 0])
        v = v[keep]
        if v[0] == v[-1]:
            v = v[:-1]
        return Polyline(v, True)

    def _next_entry(self, k):
        return (k + 1) % self.seg.size


def _crossings(domain, center, radius):
    seg, par, kind, degen = circle_crossings(Disk(center, radius), domain.boundary)
    pts = domain.boundary.index.points(seg, par)
    ang = np.angle(pts - center)
    return seg, par, kind, ang


def _first_boundary_hit(boundary, a, b):
    """First point of the segment a->b meeting the boundary: (s along a->b, seg, t) or None."""
    p = boundary.starts
    r = boundary.ends - p
    d = b - a
    den = d.real * r.imag - d.imag * r.real
    q = p - a
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (q.real * r.imag - q.imag * r.real) / den
        u = (q.real * d.imag - q.imag * d.real) / den
    ok = (den != 0) & (s >= 0) & (s <= 1) & (u >= 0) & (u <= 1)
    if not ok.any():
        return None
    idx = np.flatnonzero(ok)
    j = idx[np.argmin(s[idx])]
    return float(s[j]), int(j), float(u[j])


def _cw(a_from, a_to):
    """Clockwise angle from a_from to a_to, in [0, 2pi)."""
    return float((a_from - a_to) % TWO_PI)


def truncated_component(domain, z, delta):
    """Component of the domain outside the closed disk B(z, delta) that contains the basepoint.

    Raises:
        BasepointSwallowed: if the basepoint lies in the closed disk.
        NoPath: if the circle crossings are degenerate (no consistent gate pairing).
    """
    z = complex(z)
    z0 = domain.basepoint
    dist0 = abs(z0 - z)
    if dist0 <= delta:
        raise BasepointSwallowed(f"basepoint within {delta} of {z}")
    poly = domain.boundary
    idx = poly.index
    seg, par, kind, ang = _crossings(domain, z, delta)
    m = seg.size
    if m == 0:
        raise NoPath("the circle does not cross the boundary")
    if m % 2 or np.any(kind == np.roll(kind, 1)):
        raise NoPath("circle crossings do not alternate")

    # gate starting at each entry: clockwise-next crossing on the circle must be an exit
    order = np.argsort(ang, kind="stable")
    rank = np.empty(m, np.int64)
    rank[order] = np.arange(m)
    gate_exit = {}
    for k in np.flatnonzero(kind == 1):
        j = int(order[(rank[k] - 1) % m])
        if kind[j] != -1:
            raise NoPath("degenerate gate pairing")
        gate_exit[int(k)] = j
    exit_gate = {v: k for k, v in gate_exit.items()}
    if len(exit_gate) != len(gate_exit):
        raise NoPath("degenerate gate pairing")

    # anchor: arg(y - z) equals the principal Arg(z0 - z) along the segment from z0 toward z
    direction = (z0 - z) / dist0
    a0 = math.atan2(direction.imag, direction.real)
    g = z + delta * direction
    hit = _first_boundary_hit(poly, z0, g)

    def piece_increment(k_exit, k_entry):
        return idx.arc_increment(z, int(seg[k_exit]), float(par[k_exit]), int(seg[k_entry]), float(par[k_entry]))

    gates = []
    exits = []

    def visit_gate(k_in):
        k_out = gate_exit[k_in]
        sweep = _cw(ang[k_in], ang[k_out])
        gates.append(Gate(k_in, k_out, float(ang[k_in]), sweep))
        return k_out

    if hit is None:
        k_in0 = next((k for k, j in gate_exit.items() if _cw(ang[k], a0) <= _cw(ang[k], ang[j])), None)
        if k_in0 is None:
            raise NoPath("anchor lies on no gate")
        k_out = visit_gate(k_in0)
        cur = a0 - _cw(a0, ang[k_out])
        exits.append(cur)
        while True:
            k_in = (k_out + 1) % m
            cur += piece_increment(k_out, k_in)
            if k_in == k_in0:
                cur -= _cw(ang[k_in], a0)
                break
            k_out = visit_gate(k_in)
            cur -= gates[-1].sweep
            exits.append(cur)
        anchor = g
    else:
        _, hseg, ht = hit
        s_hit = float(poly.arclength_of(hseg, ht))
        s_cross = poly.arclength_of(seg, par)
        before = np.flatnonzero(s_cross <= s_hit)
        k_out0 = int(before[-1]) if before.size else m - 1
        if kind[k_out0] != -1:
            raise NoPath("anchor hit lies inside the disk")
        k_in = (k_out0 + 1) % m
        cur = a0 + idx.arc_increment(z, hseg, ht, int(seg[k_in]), float(par[k_in]))
        for _ in range(m):
            k_out = visit_gate(k_in)
            cur -= gates[-1].sweep
            exits.append(cur)
            if k_out == k_out0:
                cur += idx.arc_increment(z, int(seg[k_out]), float(par[k_out]), hseg, ht)
                break
            k_in = (k_out + 1) % m
            cur += piece_increment(k_out, k_in)
        else:
            raise NoPath("loop did not return to the anchored piece")
        anchor = complex(idx.point(hseg, ht))
    return TruncatedComponent(domain, z, float(delta), seg, par, kind, ang, tuple(gates), anchor, a0,
                              np.array(exits), float(cur - a0))



def _snap(domain, z):
    d, s, t = domain.boundary.index.nearest(complex(z))
    return complex(domain.boundary.index.point(s, t))


def rot_point(domain, z, delta, method="boundary_tracking", on_boundary=True, resolution=512):
    """log rot(z, delta): infimum over gates of the anchored branch of arg(y - z).

    With on_boundary (default) z is first snapped to its nearest boundary point.
    """
    if on_boundary:
        z = _snap(domain, z)
    comp = truncated_component(domain, z, delta)
    if method == "boundary_tracking":
        if abs(comp.loop_closure) > 1e-6:
            raise NoPath(f"loop increment {comp.loop_closure} does not vanish")
        return RotationValue(float(comp.gate_exit_args.min()), method, TRACKING_BOUND, comp.gate_count)
    if method == "path_integral":
        vals = _path_integral_exits(comp, resolution)
        return RotationValue(float(min(vals)), method, PATH_BOUND, comp.gate_count)
    raise ValueError(f"unknown method {method!r}")


def _raster(comp, resolution):
    """Cells of a square grid inside the truncated component; returns grid data and flood-fill labels."""
    from .geometry import points_in_jordan

    dom = comp.domain
    v = dom.boundary.vertices
    lo = complex(v.real.min(), v.imag.min())
    span = max(v.real.max() - v.real.min(), v.imag.max() - v.imag.min())
    h = max(comp.radius / 8, span / resolution)
    nx = int(math.ceil((v.real.max() - lo.real) / h)) + 1
    ny = int(math.ceil((v.imag.max() - lo.imag) / h)) + 1
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    pts = lo + h * (gx + 1j * gy)
    flat = pts.ravel()
    inside = points_in_jordan(dom.boundary, flat)
    dist, _, _ = dom.boundary.index.nearest_many(flat)
    ok = inside & (dist > 0.75 * h) & (np.abs(flat - comp.center) > comp.radius + h)
    return lo, h, nx, ny, ok.reshape(nx, ny), pts


def _bfs(ok, start):
    nx, ny = ok.shape
    prev = -np.ones(nx * ny, np.int64)
    seen = np.zeros(nx * ny, bool)
    s = start[0] * ny + start[1]
    seen[s] = True
    q = deque([s])
    steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    while q:
        c = q.popleft()
        i, j = divmod(c, ny)
        for di, dj in steps:
            a, b = i + di, j + dj
            if 0 <= a < nx and 0 <= b < ny and ok[a, b]:
                n = a * ny + b
                if not seen[n]:
                    seen[n] = True
                    prev[n] = c
                    q.append(n)
    return seen.reshape(nx, ny), prev


def _path_integral_exits(comp, resolution):
    lo, h, nx, ny, ok, pts = _raster(comp, resolution)
    z0 = comp.domain.basepoint
    cell = np.argmin(np.where(ok, np.abs(pts - z0), np.inf))
    si, sj = divmod(int(cell), ny)
    if not ok[si, sj]:
        raise NoPath("no raster cell inside the component")
    seen, prev = _bfs(ok, (si, sj))
    z = comp.center
    a0 = math.atan2((z0 - z).imag, (z0 - z).real)
    out = []
    for g in comp.gates:
        y = g.points(z, comp.radius, 2)[-1]
        target = np.argmin(np.where(seen, np.abs(pts - y), np.inf))
        if not seen.ravel()[target]:
            raise NoPath("gate unreachable on the raster")
        chain = []
        c = int(target)
        while c >= 0:
            chain.append(pts.ravel()[c])
            c = prev[c]
        path = np.array([z0] + chain[::-1] + [y])
        keep = np.concatenate([[True], np.abs(np.diff(path)) > 0])
        out.append(a0 + winding_integral(Polyline(path[keep]), z))
    return out


def boundary_diameter_in_disk(domain, disk):
    """Diameter of the boundary inside the disk (vertices inside plus circle crossings)."""
    v = domain.boundary.vertices
    inside = v[np.abs(v - disk.center) < disk.radius]
    seg, par, _, _ = circle_crossings(disk, domain.boundary)
    pts = np.concatenate([inside, domain.boundary.index.points(seg, par)])
    return point_set_diameter(pts)


def rot_disk(domain, disk, method="boundary_tracking"):
    """Rotation of a disk that meets the boundary substantially.

    Raises:
        Ineligible: unless diam(boundary inside B) / diam(B) >= 1/4.
    """
    ratio = boundary_diameter_in_disk(domain, disk) / (2 * disk.radius)
    if ratio < 0.25:
        raise Ineligible(f"boundary fills only {ratio:.3f} of the disk diameter")
    return rot_point(domain, disk.center, disk.radius, method=method, on_boundary=False)


def rot_crosscut(domain, support, method="boundary_tracking"):
    """Rotation of a crosscut, evaluated at the support midpoint with radius equal to its diameter.

    `support` is a vertex array of a connected boundary sub-arc.
    """
    pts = np.asarray(support, dtype=np.complex128)
    seglen = np.abs(np.diff(pts))
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    half = cum[-1] / 2
    k = int(np.clip(np.searchsorted(cum, half, side="right") - 1, 0, seglen.size - 1))
    mid = pts[k] + (half - cum[k]) / seglen[k] * (pts[k + 1] - pts[k])
    diam = point_set_diameter(pts)
    # on lattice-like prefractals the circle can pass exactly through a vertex;
    # nudging the radius restores general position
    for factor in (1.0, 1 + 1e-7, 1 - 1e-7):
        try:
            rv = rot_point(domain, mid, diam * factor, method=method)
            break
        except NoPath:
            if factor == 1 - 1e-7:
                raise
    return RotationValue(rv.log_rot, rv.method, rv.additive_error_bound + CROSSCUT_SLACK, rv.gates)


def rot_symbolic(spec, word):
    """Exact renormalized rotation of a cylinder: the sum of the letters' rotation angles."""
    word = spec.check_word(word)
    return RotationValue(spec.symbolic_rotation(word), "symbolic", 0.0)
