"""Bounding-circle hierarchy over polyline segments kept in curve order.

Nodes cover contiguous index ranges, so a node is also a sub-arc of the
curve.  That makes the same tree serve nearest-segment queries (walk on
spheres), circle crossings, and continuous argument increments along
sub-arcs: a sub-arc whose bounding disk misses the pole contributes
exactly the principal angle between its endpoints.
"""

import math

import numpy as np
from numba import njit

LEAF_SIZE = 8
_STACK = 256


@njit(cache=True)
def _build(ax, ay, bx, by, leaf):
    n = ax.shape[0]
    cap = 4 * (n // leaf + 2) + 8
    lo = np.empty(cap, np.int64)
    hi = np.empty(cap, np.int64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    cx = np.empty(cap)
    cy = np.empty(cap)
    rad = np.empty(cap)
    lo[0] = 0
    hi[0] = n
    count = 1
    head = 0
    while head < count:
        node = head
        head += 1
        l0 = lo[node]
        h0 = hi[node]
        xmin = math.inf
        xmax = -math.inf
        ymin = math.inf
        ymax = -math.inf
        for i in range(l0, h0):
            xmin = min(xmin, ax[i], bx[i])
            xmax = max(xmax, ax[i], bx[i])
            ymin = min(ymin, ay[i], by[i])
            ymax = max(ymax, ay[i], by[i])
        mx = 0.5 * (xmin + xmax)
        my = 0.5 * (ymin + ymax)
        rr = 0.0
        for i in range(l0, h0):
            rr = max(rr, math.hypot(ax[i] - mx, ay[i] - my), math.hypot(bx[i] - mx, by[i] - my))
        cx[node] = mx
        cy[node] = my
        rad[node] = rr
        if h0 - l0 > leaf:
            mid = (l0 + h0) // 2
            left[node] = count
            lo[count] = l0
            hi[count] = mid
            count += 1
            right[node] = count
            lo[count] = mid
            hi[count] = h0
            count += 1
    return lo[:count], hi[:count], left[:count], right[:count], cx[:count], cy[:count], rad[:count]


@njit(cache=True, inline="always")
def seg_distance(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    t = 0.0
    if l2 > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * dx
    qy = ay + t * dy
    return math.hypot(px - qx, py - qy), t


@njit(cache=True, inline="always")
def turn_angle(px, py, ux, uy, vx, vy):
    """Signed angle swept by (xi - p) as xi moves straight from u to v."""
    ax = ux - px
    ay = uy - py
    bx = vx - px
    by = vy - py
    return math.atan2(ax * by - ay * bx, ax * bx + ay * by)


@njit(cache=True)
def nearest(px, py, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    return nearest_hint(px, py, -1, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)


@njit(cache=True)
def nearest_hint(px, py, hint, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    """Nearest segment; a hint segment (or -1) seeds the pruning bound."""
    best = math.inf
    bseg = -1
    bt = 0.0
    if hint >= 0:
        best, bt = seg_distance(px, py, ax[hint], ay[hint], bx[hint], by[hint])
        bseg = hint
    stack = np.empty(_STACK, np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if math.hypot(px - cx[node], py - cy[node]) - rad[node] >= best:
            continue
        lch = left[node]
        if lch < 0:
            for i in range(lo[node], hi[node]):
                d, t = seg_distance(px, py, ax[i], ay[i], bx[i], by[i])
                if d < best:
                    best = d
                    bseg = i
                    bt = t
        else:
            rch = right[node]
            dl = math.hypot(px - cx[lch], py - cy[lch]) - rad[lch]
            dr = math.hypot(px - cx[rch], py - cy[rch]) - rad[rch]
            if dl < dr:
                stack[sp] = rch
                stack[sp + 1] = lch
            else:
                stack[sp] = lch
                stack[sp + 1] = rch
            sp += 2
    return best, bseg, bt


@njit(cache=True)
def range_increment(px, py, i0, i1, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    """Argument increment of (xi - p) along the full segments i0..i1-1."""
    if i1 <= i0:
        return 0.0
    total = 0.0
    stack = np.empty(_STACK, np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        l0 = lo[node]
        h0 = hi[node]
        if h0 <= i0 or l0 >= i1:
            continue
        inside = l0 >= i0 and h0 <= i1
        if inside and math.hypot(px - cx[node], py - cy[node]) > rad[node] * (1.0 + 1e-9) + 1e-300:
            total += turn_angle(px, py, ax[l0], ay[l0], bx[h0 - 1], by[h0 - 1])
            continue
        if left[node] < 0:
            for i in range(max(l0, i0), min(h0, i1)):
                total += turn_angle(px, py, ax[i], ay[i], bx[i], by[i])
        else:
            stack[sp] = left[node]
            stack[sp + 1] = right[node]
            sp += 2
    return total


@njit(cache=True)
def circle_candidates(px, py, radius, lo, hi, left, right, cx, cy, rad, out):
    count = 0
    stack = np.empty(_STACK, np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        d = math.hypot(px - cx[node], py - cy[node])
        if d + rad[node] < radius * (1.0 - 1e-12) or d - rad[node] > radius * (1.0 + 1e-12):
            continue
        if left[node] < 0:
            for i in range(lo[node], hi[node]):
                out[count] = i
                count += 1
        else:
            stack[sp] = left[node]
            stack[sp + 1] = right[node]
            sp += 2
    return count


@njit(cache=True)
def segment_crossings(px, py, radius, cand, ncand, ax, ay, bx, by, tol):
    """Crossings of the circle |xi - p| = radius, one row per crossing.

    A vertex counts as inside iff its distance is < radius; this symbolic
    rule keeps entries and exits alternating along the curve and pushes
    tangencies outward.  Columns: segment, parameter, +1 entering / -1
    leaving the disk, degeneracy flag.
    """
    seg = np.empty(2 * ncand + 2, np.int64)
    par = np.empty(2 * ncand + 2)
    kind = np.empty(2 * ncand + 2, np.int64)
    degen = np.zeros(2 * ncand + 2, np.bool_)
    m = 0
    r2 = radius * radius
    for k in range(ncand):
        i = cand[k]
        ux = ax[i] - px
        uy = ay[i] - py
        dx = bx[i] - ax[i]
        dy = by[i] - ay[i]
        aa = dx * dx + dy * dy
        bb = ux * dx + uy * dy
        cc = ux * ux + uy * uy - r2
        ina = cc < 0.0
        vx = bx[i] - px
        vy = by[i] - py
        inb = vx * vx + vy * vy - r2 < 0.0
        disc = bb * bb - aa * cc
        near_a = abs(math.sqrt(ux * ux + uy * uy) - radius) <= tol
        if ina == inb:
            if ina or aa == 0.0 or disc <= 0.0:
                continue
            sq = math.sqrt(disc)
            t1 = (-bb - sq) / aa
            t2 = (-bb + sq) / aa
            if t1 <= 0.0 or t2 >= 1.0 or t1 >= t2:
                continue
            flag = sq <= tol * math.sqrt(aa) or near_a
            seg[m] = i
            par[m] = t1
            kind[m] = 1
            degen[m] = flag
            m += 1
            seg[m] = i
            par[m] = t2
            kind[m] = -1
            degen[m] = flag
            m += 1
        else:
            sq = math.sqrt(max(disc, 0.0))
            if ina:
                t = (-bb + sq) / aa
                kd = -1
            else:
                t = (-bb - sq) / aa
                kd = 1
            t = min(max(t, 0.0), 1.0)
            seg[m] = i
            par[m] = t
            kind[m] = kd
            degen[m] = near_a or sq <= tol * math.sqrt(aa)
            m += 1
    return seg[:m], par[:m], kind[:m], degen[:m]


@njit(cache=True)
def point_on_segment(t, ax, ay, bx, by):
    return ax + t * (bx - ax), ay + t * (by - ay)


@njit(cache=True)
def arc_increment(px, py, i0, t0, i1, t1, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad, closed):
    """Argument increment of (xi - p) along the curve from (i0, t0) forward to (i1, t1).

    For closed curves the traversal wraps through the last vertex; a start
    point after the end point on the same segment means a full turn.
    """
    n = ax.shape[0]
    x0, y0 = point_on_segment(t0, ax[i0], ay[i0], bx[i0], by[i0])
    x1, y1 = point_on_segment(t1, ax[i1], ay[i1], bx[i1], by[i1])
    if i0 == i1 and t1 >= t0:
        return turn_angle(px, py, x0, y0, x1, y1)
    total = turn_angle(px, py, x0, y0, bx[i0], by[i0])
    if i1 > i0:
        total += range_increment(px, py, i0 + 1, i1, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
    else:
        if not closed:
            return math.nan
        total += range_increment(px, py, i0 + 1, n, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
        total += range_increment(px, py, 0, i1, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
    total += turn_angle(px, py, ax[i1], ay[i1], x1, y1)
    return total


@njit(cache=True)
def nearest_many(px, py, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    m = px.shape[0]
    dist = np.empty(m)
    seg = np.empty(m, np.int64)
    par = np.empty(m)
    for k in range(m):
        d, s, t = nearest(px[k], py[k], ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
        dist[k] = d
        seg[k] = s
        par[k] = t
    return dist, seg, par


@njit(cache=True)
def winding_many(px, py, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    m = px.shape[0]
    out = np.empty(m)
    n = ax.shape[0]
    for k in range(m):
        out[k] = range_increment(px[k], py[k], 0, n, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
    return out


class SegmentIndex:
    """Immutable segment store with a bounding-circle hierarchy.

    Args:
        a: complex start points of the segments.
        b: complex end points of the segments.
        closed: whether segment n-1 connects back to segment 0.
    """

    def __init__(self, a, b, closed):
        a = np.ascontiguousarray(a, dtype=np.complex128)
        b = np.ascontiguousarray(b, dtype=np.complex128)
        self.closed = bool(closed)
        self.n = a.shape[0]
        self.ax = np.ascontiguousarray(a.real)
        self.ay = np.ascontiguousarray(a.imag)
        self.bx = np.ascontiguousarray(b.real)
        self.by = np.ascontiguousarray(b.imag)
        self.tree = _build(self.ax, self.ay, self.bx, self.by, LEAF_SIZE)
        for arr in (self.ax, self.ay, self.bx, self.by, *self.tree):
            arr.flags.writeable = False

    @property
    def arrays(self):
        return (self.ax, self.ay, self.bx, self.by) + tuple(self.tree)

    def nearest(self, z):
        d, s, t = nearest(z.real, z.imag, *self.arrays)
        return d, int(s), t

    def nearest_many(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return nearest_many(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), *self.arrays)

    def point(self, seg, t):
        return complex(self.ax[seg] + t * (self.bx[seg] - self.ax[seg]), self.ay[seg] + t * (self.by[seg] - self.ay[seg]))

    def points(self, seg, t):
        seg = np.asarray(seg)
        return (self.ax[seg] + t * (self.bx[seg] - self.ax[seg])) + 1j * (self.ay[seg] + t * (self.by[seg] - self.ay[seg]))

    def arc_increment(self, pole, i0, t0, i1, t1):
        return arc_increment(pole.real, pole.imag, int(i0), float(t0), int(i1), float(t1), *self.arrays, self.closed)

    def total_increment(self, pole):
        return range_increment(pole.real, pole.imag, 0, self.n, *self.arrays)

    def winding_many(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return winding_many(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), *self.arrays)

    def circle_crossings(self, center, radius, tol):
        cand = np.empty(self.n, np.int64)
        lo, hi, left, right, cx, cy, rad = self.tree
        k = circle_candidates(center.real, center.imag, radius, lo, hi, left, right, cx, cy, rad, cand)
        seg, par, kind, degen = segment_crossings(
            center.real, center.imag, radius, cand, k, self.ax, self.ay, self.bx, self.by, tol
        )
        order = np.lexsort((par, seg))
        return seg[order], par[order], kind[order], degen[order]
