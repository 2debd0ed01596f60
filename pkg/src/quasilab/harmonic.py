"""Harmonic measure by walk-on-spheres.

A walk jumps from z to a uniform point on the largest circle around z that
avoids the boundary, and stops once it is within ``eps_hit`` of a segment;
the hit is recorded as (segment, parameter) of the nearest boundary point.
Hit samples are cached per (domain, start, walks, seed, eps_hit), so every
set measured from one sample shares the same histogram.
"""

from dataclasses import dataclass
from functools import cached_property
import csv
import math
import weakref

import numpy as np
import numba
from numba import njit, prange

from . import _rng
from ._segtree import nearest_hint
from .errors import EmptyIntersection, InvalidDomain, MaxStepsExceeded, NotFound
from .geometry import Disk, Polyline, circle_crossings, point_set_diameter

DEFAULT_MAX_STEPS = 100_000
TWO_PI = 2.0 * math.pi


@njit(parallel=True, cache=True)
def _wos_kernel(seed, walk0, n, x0, y0, d0, seg0, t0, eps, max_steps, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad):
    # (d0, seg0, t0) is the nearest-segment query at the shared start point
    seg = np.empty(n, np.int64)
    par = np.empty(n)
    steps = np.empty(n, np.int64)
    for k in prange(n):
        walk = walk0 + k
        x = x0
        y = y0
        s = 0
        d = d0
        sg = seg0
        t = t0
        while True:
            if s > 0:
                d, sg, t = nearest_hint(x, y, sg, ax, ay, bx, by, lo, hi, left, right, cx, cy, rad)
            if d < eps:
                break
            if s >= max_steps:
                sg = -1
                break
            a = TWO_PI * _rng.uniform(seed, walk, s)
            x += d * math.cos(a)
            y += d * math.sin(a)
            s += 1
        seg[k] = sg
        par[k] = t
        steps[k] = s
    return seg, par, steps


def wos_walk(domain, z0, eps_hit, seed, walk, max_steps=DEFAULT_MAX_STEPS):
    """One walk; returns (segment, parameter, hit point, steps)."""
    seg, par, steps = _run(domain.boundary, complex(z0), eps_hit, seed, walk, 1, max_steps)
    return int(seg[0]), float(par[0]), complex(domain.boundary.index.point(int(seg[0]), float(par[0]))), int(steps[0])


def _run(boundary, z0, eps_hit, seed, walk0, n, max_steps):
    d0, seg0, t0 = boundary.index.nearest(z0)
    seg, par, steps = _wos_kernel(np.uint64(seed), np.int64(walk0), np.int64(n), z0.real, z0.imag, d0, np.int64(seg0),
                                  t0, float(eps_hit), np.int64(max_steps), *boundary.index.arrays)
    if np.any(seg < 0):
        k = int(np.flatnonzero(seg < 0)[0])
        raise MaxStepsExceeded(f"walk {walk0 + k} took more than {max_steps} steps")
    return seg, par, steps


def default_eps_hit(domain):
    """1e-3 of the smallest cylinder diameter at the working depth (or of the shortest segment)."""
    if domain.arc is not None:
        spec = domain.arc.spec
        base = abs(spec.base[1] - spec.base[0])
        return 1e-3 * base * float(spec.scales.min()) ** domain.arc.generation
    return 1e-3 * float(domain.boundary.segment_lengths.min())


@dataclass(frozen=True, eq=False)
class HitSample:
    """Hit locations of a batch of walks started at one point."""

    domain: object
    start: complex
    walks: int
    seed: int
    eps_hit: float
    segment: np.ndarray
    parameter: np.ndarray
    steps: np.ndarray

    @cached_property
    def points(self):
        return self.domain.boundary.index.points(self.segment, self.parameter)

    @cached_property
    def arclength(self):
        return self.domain.boundary.arclength_of(self.segment, self.parameter)

    @cached_property
    def sorted_arclength(self):
        return np.sort(self.arclength)

    @cached_property
    def histogram(self):
        return np.bincount(self.segment, minlength=self.domain.boundary.n_segments)

    def estimate(self, hits):
        return MeasureEstimate.from_hits(int(hits), self.walks, self.histogram, self.seed)

    def count_arclength(self, s0, s1):
        """Hits with arclength in [s0, s1] (forward, wrapping around the closed curve)."""
        a = self.sorted_arclength
        total = self.domain.boundary.length
        if s1 - s0 >= total:
            return self.walks
        s0 = s0 % total
        s1 = s1 % total
        if s0 <= s1:
            return int(np.searchsorted(a, s1, "right") - np.searchsorted(a, s0, "left"))
        return int(a.size - np.searchsorted(a, s0, "left") + np.searchsorted(a, s1, "right"))


_CACHE = weakref.WeakKeyDictionary()


def sample_hits(domain, walks, seed=0, eps_hit=None, start=None, max_steps=DEFAULT_MAX_STEPS, threads=None):
    """Run (or reuse) a batch of walks from `start` (default: the basepoint).

    Raises:
        InvalidDomain: if the start is within eps_hit of the boundary.
        MaxStepsExceeded: if a walk fails to reach the boundary.
    """
    eps = default_eps_hit(domain) if eps_hit is None else float(eps_hit)
    z0 = domain.basepoint if start is None else complex(start)
    key = (z0, int(walks), int(seed), eps)
    per = _CACHE.setdefault(domain, {})
    if key in per:
        return per[key]
    d, _, _ = domain.boundary.index.nearest(z0)
    if d <= eps:
        raise InvalidDomain("walk start must be farther than eps_hit from the boundary")
    if threads is not None:
        numba.set_num_threads(int(threads))
    seg, par, steps = _run(domain.boundary, z0, eps, seed, 0, int(walks), max_steps)
    sample = HitSample(domain, z0, int(walks), int(seed), eps, seg, par, steps)
    per[key] = sample
    return sample


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    std_error: float
    walks: int
    hits: int
    hit_histogram: np.ndarray
    rng_seed: int

    @classmethod
    def from_hits(cls, hits, walks, histogram, seed):
        v = hits / walks
        return cls(v, math.sqrt(v * (1 - v) / walks), walks, hits, histogram, seed)


@dataclass(frozen=True)
class BoundaryArc:
    """Forward boundary sub-arc from (seg0, t0) to (seg1, t1)."""

    seg0: int
    t0: float
    seg1: int
    t1: float

    def arclength_range(self, boundary):
        s0 = float(boundary.arclength_of(self.seg0, self.t0))
        s1 = float(boundary.arclength_of(self.seg1, self.t1))
        if s1 < s0:
            s1 += boundary.length
        return s0, s1

    def vertices(self, boundary):
        return boundary.sub_arc_vertices(self.seg0, self.t0, self.seg1, self.t1)

    def diameter(self, boundary):
        return point_set_diameter(self.vertices(boundary))


class BoundaryIndex:
    """Segment store of a domain with optional word ownership per depth."""

    def __init__(self, domain):
        self.domain = domain
        self.segments = domain.boundary.index

    def nearest(self, z):
        return self.segments.nearest(complex(z))

    def owner_words(self, depth):
        """Word index at `depth` of every boundary segment (-1 off the repeller arc)."""
        arc = self.domain.arc
        if arc is None:
            raise InvalidDomain("domain has no repeller arc")
        if depth > arc.generation:
            raise ValueError("depth exceeds the generation")
        w = arc.segment_word
        span = arc.spec.n_letters ** (arc.generation - depth)
        return np.where(w >= 0, w // span, -1)


def _segment_mask(domain, S):
    n = domain.boundary.n_segments
    if isinstance(S, tuple) and all(isinstance(x, (int, np.integer)) for x in S):
        mask = np.zeros(n, bool)
        mask[domain.cylinder_segments(S)] = True
        return mask
    S = np.asarray(S)
    if S.dtype == bool:
        if S.size != n:
            raise ValueError("mask length must equal the number of segments")
        return S
    mask = np.zeros(n, bool)
    mask[S.astype(np.int64)] = True
    return mask


def measure_of_set(domain, S, walks, seed=0, eps_hit=None, start=None, sample=None):
    """Harmonic measure of a set of segments, a cylinder word, or a BoundaryArc."""
    hs = sample or sample_hits(domain, walks, seed, eps_hit, start)
    if isinstance(S, BoundaryArc):
        s0, s1 = S.arclength_range(domain.boundary)
        return hs.estimate(hs.count_arclength(s0, s1))
    mask = _segment_mask(domain, S)
    return hs.estimate(int(hs.histogram[mask].sum()))


def measure_of_disk(domain, disk, walks, seed=0, eps_hit=None, start=None, sample=None):
    """Harmonic measure of the boundary inside an open disk.

    Raises:
        EmptyIntersection: if the disk misses the boundary.
    """
    d, _, _ = domain.boundary.index.nearest(disk.center)
    if d >= disk.radius:
        raise EmptyIntersection("disk does not meet the boundary")
    hs = sample or sample_hits(domain, walks, seed, eps_hit, start)
    inside = np.abs(hs.points - disk.center) < disk.radius
    return hs.estimate(int(inside.sum()))


@dataclass(frozen=True)
class RepresentativeArc:
    arc: BoundaryArc
    measure: MeasureEstimate
    disk_measure: MeasureEstimate
    diameter: float
    window: tuple


def disk_components(domain, disk):
    """Maximal boundary pieces inside the disk, as BoundaryArcs (whole curve if no crossings)."""
    poly = domain.boundary
    seg, par, kind, _ = circle_crossings(disk, poly)
    if seg.size == 0:
        if abs(poly.vertices[0] - disk.center) < disk.radius:
            return [BoundaryArc(0, 0.0, poly.n_segments - 1, 1.0)]
        return []
    out = []
    m = seg.size
    for k in range(m):
        if kind[k] == 1:
            k2 = (k + 1) % m
            out.append(BoundaryArc(int(seg[k]), float(par[k]), int(seg[k2]), float(par[k2])))
    return out


def representative_arc(domain, disk, walks, seed=0, eps_hit=None, sample=None):
    """A connected boundary arc inside 2B with measure in (w/log^2(1/w), w), w = measure of B.

    Components of the boundary inside 2B are tried in order of decreasing
    measure; one that is too heavy is trimmed to the hits nearest to the
    center so its count sits at the geometric middle of the window.

    Raises:
        NotFound: if no component can be brought into the window.
    """
    hs = sample or sample_hits(domain, walks, seed, eps_hit)
    wb = measure_of_disk(domain, disk, walks, sample=hs)
    if wb.value <= 0 or wb.value >= 1:
        raise NotFound("disk measure is degenerate")
    lower = wb.value / math.log(1 / wb.value) ** 2
    upper = wb.value
    poly = domain.boundary
    total = poly.length
    a = hs.arclength
    best = None
    for comp in disk_components(domain, disk.scaled(2.0)):
        s0, s1 = comp.arclength_range(poly)
        rel = np.mod(a - s0, total)
        sel = rel <= (s1 - s0)
        count = int(sel.sum())
        if count / hs.walks <= lower:
            continue
        if count / hs.walks < upper:
            cand = (comp, count)
        else:
            target = int(round(math.sqrt(lower * upper) * hs.walks))
            if target / hs.walks <= lower or target < 1:
                continue
            pos = np.sort(rel[sel])
            pts = hs.points[sel][np.argsort(rel[sel])]
            j = int(np.argmin(np.abs(pts - disk.center)))
            i0 = max(0, min(j - target // 2, pos.size - target))
            i1 = i0 + target - 1
            seg0, t0 = poly.locate(s0 + pos[i0])
            seg1, t1 = poly.locate(s0 + pos[i1])
            cand = (BoundaryArc(int(seg0), float(t0), int(seg1), float(t1)), target)
        if best is None or cand[1] > best[1]:
            best = cand
    if best is None:
        raise NotFound("no component of the boundary in 2B has measure in the window")
    arc, count = best
    return RepresentativeArc(arc, hs.estimate(count), wb, arc.diameter(poly), (lower, upper))


def advance_by_diameter(poly, s0, delta):
    """Arclength s1 > s0 at which the forward sub-arc from s0 first reaches diameter delta (capped one lap)."""
    seg, t = poly.locate(s0)
    seg = int(seg)
    pts = [complex(poly.index.point(seg, float(t)))]
    s = float(s0)
    n = poly.n_segments
    for _ in range(n):
        end = complex(poly.ends[seg])
        cur = np.array(pts)
        if np.max(np.abs(cur - end)) >= delta:
            p = pts[-1]
            lo, hi = 0.0, 1.0
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if np.max(np.abs(cur - (p + mid * (end - p)))) >= delta:
                    hi = mid
                else:
                    lo = mid
            return s + hi * abs(end - p)
        s += abs(end - pts[-1])
        pts.append(end)
        seg = (seg + 1) % n
    return s0 + poly.length


@dataclass(frozen=True)
class DoublingRecord:
    c_disk: float
    c_arc: float
    disk_trials: int
    arc_trials: int


def doubling_check(domain, trials=50, walks=100_000, seed=0, min_hits=200, radius_range=None):
    """Empirical doubling constants for disks and for adjacent equal-diameter arcs.

    Disk centers are hit points, radii are log-uniform in `radius_range`
    (default diam/256 .. diam/8).  Arc pairs start at hit points and each arc
    has the same diameter, so both ratios count.  Samples whose smaller
    measure has fewer than `min_hits` hits are skipped.
    """
    if trials < 50:
        raise ValueError("use at least 50 trials")
    hs = sample_hits(domain, walks, seed)
    poly = domain.boundary
    diam = poly.diameter
    rmin, rmax = radius_range or (diam / 256, diam / 8)
    c_disk = 0.0
    c_arc = 0.0
    nd = na = 0
    pts = hs.points
    for k in range(trials):
        u0 = _rng.uniform(seed + 1, k, 0)
        u1 = _rng.uniform(seed + 1, k, 1)
        i = min(int(u0 * hs.walks), hs.walks - 1)
        r = rmin * (rmax / rmin) ** u1
        c = pts[i]
        small = int(np.count_nonzero(np.abs(pts - c) < r))
        if small >= min_hits:
            big = int(np.count_nonzero(np.abs(pts - c) < 2 * r))
            c_disk = max(c_disk, big / small)
            nd += 1
        s0 = float(hs.arclength[i])
        s1 = advance_by_diameter(poly, s0, r)
        s2 = advance_by_diameter(poly, s1, r)
        m1 = hs.count_arclength(s0, s1)
        m2 = hs.count_arclength(s1, s2)
        if min(m1, m2) >= min_hits:
            c_arc = max(c_arc, m1 / m2, m2 / m1)
            na += 1
    return DoublingRecord(c_disk, c_arc, nd, na)


def write_histogram_csv(target, sample, depth=None):
    """Columns: segment, word (depth-d word as dot-separated letters, empty off the arc), hits.

    `target` is a path or an open text stream.
    """
    words = None
    if depth is not None:
        words = BoundaryIndex(sample.domain).owner_words(depth)
        n = sample.domain.arc.spec.n_letters
    if isinstance(target, str):
        with open(target, "w", newline="") as fh:
            return write_histogram_csv(fh, sample, depth)
    w = csv.writer(target, lineterminator="\n")
    w.writerow(["segment", "word", "hits"])
    for seg, h in enumerate(sample.histogram):
        label = ""
        if words is not None and words[seg] >= 0:
            label = ".".join(str(x) for x in _digits(int(words[seg]), n, depth))
        w.writerow([seg, label, int(h)])


def _digits(index, base, length):
    out = []
    for _ in range(length):
        out.append(index % base)
        index //= base
    return out[::-1]
