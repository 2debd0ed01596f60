"""Planar primitives: polylines, disks, winding integrals, hyperbolic pseudo-distance.

Points are Python/numpy complex numbers throughout.  The single geometric
tolerance is ``eps_geom = EPS_GEOM_REL * bbox diameter`` of the curve in
question.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from numba import njit

from ._segtree import SegmentIndex, seg_distance
from .errors import BoundaryPoint, InvalidPolyline, NotSimple, OutsideDisk, PoleOnPath

EPS_GEOM_REL = 1e-12

Point = complex


def as_point(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite point {z!r}")
    return z


@njit(cache=True)
def _seg_seg_distance(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return 0.0
    best = seg_distance(ax, ay, cx, cy, dx, dy)[0]
    best = min(best, seg_distance(bx, by, cx, cy, dx, dy)[0])
    best = min(best, seg_distance(cx, cy, ax, ay, bx, by)[0])
    best = min(best, seg_distance(dx, dy, ax, ay, bx, by)[0])
    return best


@njit(cache=True)
def _first_self_intersection(ax, ay, bx, by, lo, hi, left, right, cx, cy, rad, closed, tol):
    n = ax.shape[0]
    stack = np.empty(256, np.int64)
    for i in range(n):
        mx = 0.5 * (ax[i] + bx[i])
        my = 0.5 * (ay[i] + by[i])
        ri = 0.5 * math.hypot(bx[i] - ax[i], by[i] - ay[i]) + tol
        stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if math.hypot(mx - cx[node], my - cy[node]) > ri + rad[node]:
                continue
            if hi[node] <= i + 1:
                continue
            if left[node] >= 0:
                stack[sp] = left[node]
                stack[sp + 1] = right[node]
                sp += 2
                continue
            for j in range(max(lo[node], i + 1), hi[node]):
                adjacent = j == i + 1 or (closed and i == 0 and j == n - 1)
                if adjacent:
                    # neighbours share one vertex; they only clash when folding back
                    if j == i + 1:
                        d = seg_distance(bx[j], by[j], ax[i], ay[i], bx[i], by[i])[0]
                        e = seg_distance(ax[i], ay[i], ax[j], ay[j], bx[j], by[j])[0]
                    else:
                        d = seg_distance(ax[j], ay[j], ax[i], ay[i], bx[i], by[i])[0]
                        e = seg_distance(bx[i], by[i], ax[j], ay[j], bx[j], by[j])[0]
                    if min(d, e) <= tol:
                        return i, j
                    continue
                if _seg_seg_distance(ax[i], ay[i], bx[i], by[i], ax[j], ay[j], bx[j], by[j]) <= tol:
                    return i, j
    return -1, -1


@njit(cache=True)
def _hull_diameter(px, py):
    # points sorted by (x, y); monotone chain hull, then rotating calipers
    n = px.shape[0]
    if n < 2:
        return 0.0
    hx = np.empty(2 * n + 1)
    hy = np.empty(2 * n + 1)
    k = 0
    for i in range(n):
        while k >= 2 and (hx[k - 1] - hx[k - 2]) * (py[i] - hy[k - 2]) - (hy[k - 1] - hy[k - 2]) * (px[i] - hx[k - 2]) <= 0:
            k -= 1
        hx[k] = px[i]
        hy[k] = py[i]
        k += 1
    t = k + 1
    for i in range(n - 2, -1, -1):
        while k >= t and (hx[k - 1] - hx[k - 2]) * (py[i] - hy[k - 2]) - (hy[k - 1] - hy[k - 2]) * (px[i] - hx[k - 2]) <= 0:
            k -= 1
        hx[k] = px[i]
        hy[k] = py[i]
        k += 1
    m = k - 1
    if m < 3:
        best = 0.0
        for i in range(k):
            for j in range(i + 1, k):
                best = max(best, math.hypot(hx[i] - hx[j], hy[i] - hy[j]))
        return best
    best = 0.0
    j = 1
    for i in range(m):
        i2 = i + 1
        ex = hx[i2] - hx[i]
        ey = hy[i2] - hy[i]
        while True:
            j2 = (j + 1) % m
            cur = abs(ex * (hy[j] - hy[i]) - ey * (hx[j] - hx[i]))
            nxt = abs(ex * (hy[j2] - hy[i]) - ey * (hx[j2] - hx[i]))
            if nxt > cur:
                j = j2
            else:
                break
        best = max(best, math.hypot(hx[i] - hx[j], hy[i] - hy[j]), math.hypot(hx[i2] - hx[j], hy[i2] - hy[j]))
    return best


def point_set_diameter(points):
    """Diameter of a finite point set (convex hull, then all hull pairs)."""
    pts = np.asarray(points, dtype=np.complex128).ravel()
    if pts.size < 2:
        return 0.0
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    return float(_hull_diameter(np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag)))


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered vertex list, open or closed.

    Attributes:
        vertices: complex array of vertices (a closed polyline does not repeat its first vertex).
        closed: whether the last vertex connects back to the first.
    """

    vertices: np.ndarray
    closed: bool = False
    check_simple: bool = field(default=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.complex128).ravel()
        if v.size < 2:
            raise InvalidPolyline("a polyline needs at least 2 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidPolyline("vertices must be finite")
        nxt = np.roll(v, -1) if self.closed else v[1:]
        cur = v if self.closed else v[:-1]
        if np.any(cur == nxt):
            raise InvalidPolyline("consecutive vertices must be distinct")
        if self.closed and v.size < 3:
            raise InvalidPolyline("a closed polyline needs at least 3 vertices")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        if self.check_simple and self.closed:
            i, j = self.first_self_intersection()
            if i >= 0:
                raise NotSimple(f"segments {i} and {j} intersect")

    def __len__(self):
        return self.vertices.size

    @property
    def n_segments(self):
        return self.vertices.size if self.closed else self.vertices.size - 1

    @cached_property
    def starts(self):
        return self.vertices[: self.n_segments]

    @cached_property
    def ends(self):
        return np.roll(self.vertices, -1) if self.closed else self.vertices[1:]

    @cached_property
    def segment_lengths(self):
        return np.abs(self.ends - self.starts)

    @cached_property
    def cumulative_length(self):
        """Arclength at the start of each segment, plus the total at the end."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def length(self):
        return float(self.cumulative_length[-1])

    @cached_property
    def bbox_diameter(self):
        v = self.vertices
        return float(math.hypot(v.real.max() - v.real.min(), v.imag.max() - v.imag.min()))

    @property
    def eps_geom(self):
        return EPS_GEOM_REL * self.bbox_diameter

    @cached_property
    def diameter(self):
        return point_set_diameter(self.vertices)

    @cached_property
    def index(self):
        return SegmentIndex(self.starts, self.ends, self.closed)

    @cached_property
    def signed_area(self):
        if not self.closed:
            return 0.0
        a, b = self.starts, self.ends
        return 0.5 * float(np.sum(a.real * b.imag - b.real * a.imag))

    def first_self_intersection(self):
        idx = self.index
        i, j = _first_self_intersection(*idx.arrays, self.closed, self.eps_geom)
        return int(i), int(j)

    def is_simple(self):
        return self.first_self_intersection()[0] < 0

    def point_at(self, seg, t):
        return self.index.point(seg, t)

    def locate(self, s):
        """(segment, parameter) of the point at arclength s (wrapped for closed curves)."""
        s = np.asarray(s, dtype=float)
        total = self.length
        if self.closed:
            s = np.mod(s, total)
        else:
            s = np.clip(s, 0.0, total)
        cum = self.cumulative_length
        seg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, self.n_segments - 1)
        t = np.clip((s - cum[seg]) / self.segment_lengths[seg], 0.0, 1.0)
        return seg, t

    def arclength_of(self, seg, t):
        seg = np.asarray(seg)
        return self.cumulative_length[seg] + np.asarray(t) * self.segment_lengths[seg]

    def sub_arc_vertices(self, i0, t0, i1, t1):
        """Vertices of the sub-arc from (i0, t0) forward to (i1, t1), endpoints included."""
        n = self.n_segments
        p0 = self.point_at(i0, t0)
        p1 = self.point_at(i1, t1)
        if i0 == i1 and t1 >= t0:
            return np.array([p0, p1])
        if i1 > i0:
            mid = self.ends[i0:i1]
        else:
            if not self.closed:
                raise ValueError("open polylines cannot wrap")
            mid = np.concatenate([self.ends[i0:n], self.ends[:i1]])
        return np.concatenate([[p0], mid, [p1]])

    def reversed(self):
        v = self.vertices
        if self.closed:
            return Polyline(np.concatenate([v[:1], v[:0:-1]]), True)
        return Polyline(v[::-1], False)

    def conjugate(self):
        return Polyline(np.conj(self.vertices), self.closed)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("disk radius must be positive and finite")

    def scaled(self, factor):
        return Disk(self.center, self.radius * factor)

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius


def _min_distance_to_path(path, pole):
    a, b = path.starts, path.ends
    d = b - a
    l2 = np.abs(d) ** 2
    t = np.clip(np.real((pole - a) * np.conj(d)) / l2, 0.0, 1.0)
    return float(np.min(np.abs(a + t * d - pole)))


def winding_integral(path, pole):
    """Im of the integral of d(xi)/(xi - pole) along the polyline.

    Each segment contributes its exact turning angle, which lies in (-pi, pi).

    Raises:
        PoleOnPath: if the pole is within eps_geom of the path.
    """
    pole = as_point(pole)
    tol = max(path.eps_geom, EPS_GEOM_REL * abs(pole))
    if _min_distance_to_path(path, pole) <= tol:
        raise PoleOnPath(f"pole {pole} lies on the path")
    u = path.starts - pole
    w = path.ends - pole
    return float(np.sum(np.arctan2((u.real * w.imag - u.imag * w.real), (u.real * w.real + u.imag * w.imag))))


@dataclass(frozen=True, eq=False)
class PathArgument:
    path: Polyline
    pole: complex
    total_imag: float

    @classmethod
    def of(cls, path, pole):
        return cls(path, as_point(pole), winding_integral(path, pole))


def hyperbolic_rho(z, w):
    """Pseudo-hyperbolic distance |(z - w) / (1 - conj(z) w)| in the unit disk."""
    z = as_point(z)
    w = as_point(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise OutsideDisk("both points must lie in the open unit disk")
    return abs((z - w) / (1 - z.conjugate() * w))


@dataclass(frozen=True)
class Intersection:
    point: complex
    segment: int
    t: float
    entering: bool
    degenerate: bool


def circle_crossings(circle, curve):
    """Raw crossing arrays (segment, parameter, kind, degenerate) in curve order."""
    tol = max(curve.eps_geom, EPS_GEOM_REL * circle.radius)
    return curve.index.circle_crossings(circle.center, circle.radius, tol)


def circle_polyline_intersections(circle, curve):
    """All crossings of the circle with the curve, in curve order.

    Vertices at distance exactly `radius` are treated as outside, so
    tangential contacts are pushed outward and vanish; near-tangent
    crossings carry a degeneracy flag.
    """
    seg, par, kind, degen = circle_crossings(circle, curve)
    pts = curve.index.points(seg, par)
    return [
        Intersection(complex(p), int(s), float(t), bool(k > 0), bool(g))
        for p, s, t, k, g in zip(pts, seg, par, kind, degen)
    ]


def point_in_jordan(boundary, z):
    """Winding-number containment test for a closed simple polyline.

    Raises:
        BoundaryPoint: if z is within eps_geom of the boundary.
    """
    if not boundary.closed:
        raise InvalidPolyline("containment needs a closed polyline")
    z = as_point(z)
    d, _, _ = boundary.index.nearest(z)
    if d <= boundary.eps_geom:
        raise BoundaryPoint(f"{z} is on the boundary")
    return abs(boundary.index.total_increment(z)) > math.pi


def points_in_jordan(boundary, z):
    """Vectorised containment; boundary-adjacent points are reported as outside."""
    z = np.asarray(z, dtype=np.complex128)
    wind = boundary.index.winding_many(z.ravel())
    return (np.abs(wind) > math.pi).reshape(z.shape)


def chain_diameter(points):
    return point_set_diameter(points)
