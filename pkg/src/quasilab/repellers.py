"""Markov similarity repellers, their prefractal Jordan domains, and quasicircle diagnostics.

A repeller is an arc from ``base[0]`` to ``base[1]`` invariant under a finite
family of contracting orientation-preserving similarities.  Letters are
0-based and ordered along the arc, so letter 0 fixes ``base[0]`` and the last
letter fixes ``base[1]``.  A closure recipe (more similarities applied to the
arc) completes it to a Jordan curve, e.g. three Koch arcs forming a snowflake.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import _rng
from .errors import (
    DeltaOutOfRange,
    ExpandingViolation,
    Inadmissible,
    InvalidDomain,
    NotMarkov,
    NotSimple,
)
from .geometry import Disk, Polyline, circle_crossings, point_in_jordan, point_set_diameter


@dataclass(frozen=True)
class Similarity:
    """z -> scale * exp(i angle) * z + translation."""

    scale: float
    angle: float
    translation: complex = 0j
    orientation_preserving: bool = True

    @property
    def coef(self):
        return self.scale * complex(math.cos(self.angle), math.sin(self.angle))

    def __call__(self, z):
        return self.coef * np.asarray(z) + self.translation

    @classmethod
    def through(cls, p, q):
        """The similarity taking the segment [0, 1] onto [p, q]."""
        d = complex(q) - complex(p)
        return cls(abs(d), math.atan2(d.imag, d.real), complex(p))

    @classmethod
    def from_coef(cls, coef, translation):
        coef = complex(coef)
        return cls(abs(coef), math.atan2(coef.imag, coef.real), complex(translation))

    def conjugate(self):
        return Similarity(self.scale, -self.angle, complex(self.translation).conjugate())


def _primitive(adj):
    n = adj.shape[0]
    m = adj.astype(np.int64)
    p = np.eye(n, dtype=np.int64)
    for _ in range((n - 1) ** 2 + 1):
        p = np.minimum(p @ m, 1)
    return bool(np.all(p > 0))


@dataclass(frozen=True, eq=False)
class RepellerSpec:
    """Alphabet of similarity maps with Markov adjacency and a closure recipe.

    Attributes:
        name: preset or user label.
        maps: one similarity per letter, ordered along the arc.
        adjacency: adjacency[i][j] is True when letter j may follow letter i.
        closure: similarities whose images of the arc, each traversed backwards,
            follow the arc (also backwards) to close the Jordan curve.
        base: arc endpoints.
        k_max: deepest generation used for geometry.
        surrogate_weights: per-letter product weights for surrogate measures.
    """

    name: str
    maps: tuple
    adjacency: tuple = None
    closure: tuple = ()
    base: tuple = (0j, 1 + 0j)
    k_max: int = 8
    surrogate_weights: tuple = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.maps)
        if n < 2:
            raise ValueError("the alphabet needs at least two letters")
        for j, f in enumerate(self.maps):
            if not f.orientation_preserving:
                raise ValueError("only orientation-preserving similarities are supported")
            if not (0.0 < f.scale < 1.0):
                raise ExpandingViolation(f"letter {j} has scale {f.scale}; every scale must lie in (0, 1)")
        adj = np.ones((n, n), bool) if self.adjacency is None else np.array(self.adjacency, bool)
        if adj.shape != (n, n):
            raise ValueError("adjacency must be N x N")
        if not _primitive(adj):
            raise NotMarkov("adjacency matrix is not primitive")
        object.__setattr__(self, "adjacency", tuple(tuple(bool(x) for x in row) for row in adj))
        w = self.surrogate_weights
        if w is None:
            w = tuple([1.0 / n] * n)
        if len(w) != n or any(x <= 0 for x in w):
            raise ValueError("surrogate weights must be positive, one per letter")
        object.__setattr__(self, "surrogate_weights", tuple(float(x) for x in w))
        object.__setattr__(self, "base", (complex(self.base[0]), complex(self.base[1])))
        self._check_markov()

    @property
    def n_letters(self):
        return len(self.maps)

    @property
    def adjacency_matrix(self):
        return np.array(self.adjacency, bool)

    @property
    def scales(self):
        return np.array([f.scale for f in self.maps])

    @property
    def angles(self):
        return np.array([f.angle for f in self.maps])

    @property
    def expansion_rate(self):
        return 1.0 / float(self.scales.max())

    def _check_markov(self):
        b0, b1 = self.base
        tol = 1e-9 * abs(b1 - b0)
        ends = [(complex(f(b0)), complex(f(b1))) for f in self.maps]
        if abs(ends[0][0] - b0) > tol or abs(ends[-1][1] - b1) > tol:
            raise NotMarkov("the first and last letters must fix the arc endpoints")
        for j in range(len(ends) - 1):
            if abs(ends[j][1] - ends[j + 1][0]) > tol:
                raise NotMarkov(f"images of letters {j} and {j + 1} do not share an endpoint")
        adj = self.adjacency_matrix
        for j in range(self.n_letters):
            succ = np.flatnonzero(adj[j])
            if succ[0] != 0 or succ[-1] != self.n_letters - 1 or np.any(np.diff(succ) != 1):
                raise NotMarkov(f"successors of letter {j} do not tile its image of the arc")

    def admissible(self, word):
        word = tuple(word)
        if len(word) == 0:
            return False
        if any(not (0 <= x < self.n_letters) for x in word):
            return False
        return all(self.adjacency[a][b] for a, b in zip(word, word[1:]))

    def check_word(self, word):
        if not self.admissible(word):
            raise Inadmissible(f"word {tuple(word)} is not admissible")
        return tuple(int(x) for x in word)

    def word_map(self, word):
        """Coefficient and translation of f_{w1} o ... o f_{wn}."""
        coef = 1 + 0j
        trans = 0j
        for x in word:
            f = self.maps[x]
            trans = trans + coef * f.translation
            coef = coef * f.coef
        return coef, trans

    def renormalized_diameter(self, word):
        return float(np.prod([self.maps[x].scale for x in word]))

    def symbolic_rotation(self, word):
        return float(sum(self.maps[x].angle for x in word))

    def words(self, length):
        """All admissible words of the given length, as an int array in arc order."""
        n = self.n_letters
        if length == 0:
            return np.zeros((1, 0), np.int64)
        grid = np.array(list(itertools.product(range(n), repeat=length)), dtype=np.int64)
        if length > 1:
            adj = self.adjacency_matrix
            ok = np.all(adj[grid[:, :-1], grid[:, 1:]], axis=1)
            grid = grid[ok]
        return grid

    def arc_vertices(self, generation):
        """Vertices of the generation-k arc (full shift: N**k + 1 points)."""
        v = np.array(self.base, dtype=np.complex128)
        for _ in range(generation):
            pieces = [f.coef * v[:-1] + f.translation for f in self.maps]
            v = np.concatenate(pieces + [v[-1:]])
        return v

    def conjugate(self):
        return RepellerSpec(
            name=f"reflected({self.name})",
            maps=tuple(f.conjugate() for f in self.maps),
            adjacency=self.adjacency,
            closure=tuple(g.conjugate() for g in self.closure),
            base=(self.base[0].conjugate(), self.base[1].conjugate()),
            k_max=self.k_max,
            surrogate_weights=self.surrogate_weights,
            params=dict(self.params, reflected=not self.params.get("reflected", False)),
        )

    def to_dict(self):
        return {
            "name": self.name,
            "letters": [
                {"scale": f.scale, "angle": f.angle, "translation": [f.translation.real, f.translation.imag]}
                for f in self.maps
            ],
            "adjacency": [[int(x) for x in row] for row in self.adjacency],
            "closure": [
                {"scale": g.scale, "angle": g.angle, "translation": [g.translation.real, g.translation.imag]}
                for g in self.closure
            ],
            "base": [[self.base[0].real, self.base[0].imag], [self.base[1].real, self.base[1].imag]],
            "k_max": self.k_max,
            "surrogate_weights": list(self.surrogate_weights),
        }

    @classmethod
    def from_dict(cls, d):
        def sim(e):
            t = e.get("translation", [0.0, 0.0])
            return Similarity(float(e["scale"]), float(e["angle"]), complex(t[0], t[1]))

        base = d.get("base", [[0.0, 0.0], [1.0, 0.0]])
        return cls(
            name=d.get("name", "custom"),
            maps=tuple(sim(e) for e in d["letters"]),
            adjacency=d.get("adjacency"),
            closure=tuple(sim(e) for e in d.get("closure", [])),
            base=(complex(*base[0]), complex(*base[1])),
            k_max=int(d.get("k_max", 8)),
            surrogate_weights=d.get("surrogate_weights"),
        )


def _snowflake_closure(b0=0j, b1=1 + 0j):
    w = b0 + (b1 - b0) * complex(0.5, -math.sqrt(3) / 2)
    return (
        Similarity.from_coef(-(w - b0), w),
        Similarity.from_coef(w - b1, b1),
    )


def koch(k_max=8):
    """Classic Koch arc: four letters of scale 1/3, angles (0, pi/3, -pi/3, 0), snowflake closure."""
    pts = [0, 1 / 3, complex(0.5, math.sqrt(3) / 6), 2 / 3, 1]
    maps = tuple(Similarity.through(p, q) for p, q in zip(pts, pts[1:]))
    return RepellerSpec("koch", maps, closure=_snowflake_closure(), k_max=k_max)


def twisted_koch(twist, k_max=8):
    """Koch-type arc whose outer letters carry an extra rotation `twist`.

    All four letters keep scale 1/3; the two middle angles are re-solved so
    the chain still closes at 1, which leaves a net spiral bias.
    """
    u = 3 - 2 * complex(math.cos(twist), math.sin(twist))
    if abs(u) > 2:
        raise ValueError("twist too large for an equal-scale four-letter chain")
    phase = math.atan2(u.imag, u.real)
    half = math.acos(abs(u) / 2)
    angles = [twist, phase + half, phase - half, twist]
    pts = [0j]
    for a in angles:
        pts.append(pts[-1] + complex(math.cos(a), math.sin(a)) / 3)
    pts[-1] = 1 + 0j
    maps = tuple(Similarity.through(p, q) for p, q in zip(pts, pts[1:]))
    return RepellerSpec(f"twisted_koch({twist:g})", maps, closure=_snowflake_closure(), k_max=k_max,
                        params={"twist": twist})


def carleson_linear(k_max=5):
    """Six linear letters with scales (1/3, 1/9, 1/9, 1/9, 1/9, 1/3): outer thirds copy the arc, the middle third is a small Koch bump."""
    mid = [1 / 3, 1 / 3 + 1 / 9, complex(0.5, math.sqrt(3) / 18), 2 / 3 - 1 / 9, 2 / 3]
    pts = [0] + mid + [1]
    maps = tuple(Similarity.through(p, q) for p, q in zip(pts, pts[1:]))
    return RepellerSpec("carleson_linear", maps, closure=_snowflake_closure(), k_max=k_max)


PRESETS = {"koch": koch, "twisted_koch": twisted_koch, "carleson_linear": carleson_linear}


def preset(name, **kwargs):
    try:
        return PRESETS[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True, eq=False)
class RepellerArc:
    """How a prefractal domain's boundary segments map back to words.

    Attributes:
        spec: generating spec.
        generation: word length of the finest segments.
        arc_segments: boundary segment index of each arc segment, in word order.
        segment_word: word index (base-N, first letter most significant) of each
            boundary segment on the repeller arc, -1 elsewhere.
        forward: True when the boundary runs along the arc in word order.
    """

    spec: RepellerSpec
    generation: int
    arc_segments: np.ndarray
    segment_word: np.ndarray
    forward: bool

    def word_range(self, word):
        """Range [lo, hi) of word-order arc segment positions covered by the cylinder."""
        n = self.spec.n_letters
        k = self.generation
        m = len(word)
        if m > k:
            raise ValueError(f"word of length {m} is deeper than generation {k}")
        idx = 0
        for x in word:
            idx = idx * n + int(x)
        span = n ** (k - m)
        return idx * span, (idx + 1) * span

    def cylinder_segments(self, word):
        lo, hi = self.word_range(word)
        return self.arc_segments[lo:hi]


@dataclass(frozen=True, eq=False)
class JordanDomain:
    """Closed simple polyline boundary (counter-clockwise) with an interior basepoint."""

    boundary: Polyline
    basepoint: complex
    provenance: str = "polyline"
    arc: RepellerArc = None
    vertex_param: np.ndarray = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.boundary.closed:
            raise InvalidDomain("the boundary must be closed")
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        if self.validate:
            if self.boundary.signed_area <= 0:
                raise InvalidDomain("the boundary must be counter-clockwise")
            i, j = self.boundary.first_self_intersection()
            if i >= 0:
                raise NotSimple(f"boundary segments {i} and {j} intersect")
            if not point_in_jordan(self.boundary, self.basepoint):
                raise InvalidDomain("the basepoint must lie inside the boundary")

    @property
    def vertex_count(self):
        return len(self.boundary)

    @property
    def arc_vertex_count(self):
        """Vertices counted per closure arc, so shared corners count once per arc."""
        if self.arc is None:
            return len(self.boundary)
        sides = 1 + len(self.arc.spec.closure)
        return len(self.boundary) + sides

    def cylinder_segments(self, word):
        if self.arc is None:
            raise InvalidDomain("domain has no repeller arc")
        return self.arc.cylinder_segments(word)


def polygon_centroid(vertices):
    v = np.asarray(vertices)
    w = np.roll(v, -1)
    cross = v.real * w.imag - w.real * v.imag
    area = 0.5 * cross.sum()
    cx = ((v.real + w.real) * cross).sum() / (6 * area)
    cy = ((v.imag + w.imag) * cross).sum() / (6 * area)
    return complex(cx, cy)


def generate_prefractal(spec, generation, validate=True):
    """Closed prefractal boundary at the given generation.

    Raises:
        NotSimple: if the boundary self-intersects.
        ValueError: if generation exceeds spec.k_max.
    """
    if generation < 0 or generation > spec.k_max:
        raise ValueError(f"generation must lie in [0, {spec.k_max}]")
    arc = spec.arc_vertices(generation)
    nseg = arc.size - 1
    rev = arc[::-1]
    sides = [rev] + [g.coef * rev + g.translation for g in spec.closure]
    verts = np.concatenate([s[:-1] for s in sides])
    n = verts.size
    # boundary segment j of side 0 runs over arc segment nseg-1-j, backwards
    segment_word = np.full(n, -1, np.int64)
    segment_word[:nseg] = np.arange(nseg)[::-1]
    arc_segments = np.arange(nseg)[::-1].copy()
    forward = False
    poly = Polyline(verts, True)
    if poly.signed_area < 0:
        verts = np.concatenate([verts[:1], verts[:0:-1]])
        segment_word = segment_word[::-1].copy()
        arc_segments = n - 1 - arc_segments
        forward = True
        poly = Polyline(verts, True)
    if validate:
        i, j = poly.first_self_intersection()
        if i >= 0:
            raise NotSimple(f"generation-{generation} boundary segments {i} and {j} intersect")
    info = RepellerArc(spec, generation, arc_segments, segment_word, forward)
    return JordanDomain(poly, polygon_centroid(verts), f"repeller:{spec.name}:gen{generation}", arc=info,
                        validate=validate)


@dataclass(frozen=True, eq=False)
class Cylinder:
    word: tuple
    arc: Polyline
    raw_diameter: float
    renormalized_diameter: float


def cylinder(spec, word, generation=None):
    """The cylinder arc f_w(arc) drawn at the given generation (default spec.k_max).

    Raises:
        Inadmissible: if the word is not admissible or deeper than k_max.
    """
    word = spec.check_word(word)
    if len(word) > spec.k_max:
        raise Inadmissible(f"word longer than k_max={spec.k_max}")
    g = spec.k_max if generation is None else generation
    g = max(g, len(word))
    coef, trans = spec.word_map(word)
    verts = coef * spec.arc_vertices(g - len(word)) + trans
    return Cylinder(word, Polyline(verts, False), point_set_diameter(verts), spec.renormalized_diameter(word))


def _pair_stream(seed, count, n):
    """Deterministic (i, offset) pairs; extending `count` extends the list."""
    u = np.array([[_rng.uniform(seed, k, 0), _rng.uniform(seed, k, 1)] for k in range(count)])
    i = np.minimum((u[:, 0] * n).astype(np.int64), n - 1)
    span = max(n // 2, 1)
    off = np.maximum(1, np.floor(np.exp(u[:, 1] * math.log(span + 1)))).astype(np.int64)
    return i, np.minimum(off, span)


def three_point_ratio(vertices, i, j):
    """Max over w on the smaller-diameter arc between vertices i and j of the three-point ratio."""
    v = vertices
    n = v.size
    a, b = (i, j) if i < j else (j, i)
    arc1 = v[a : b + 1]
    arc2 = np.concatenate([v[b:], v[: a + 1]])
    d1 = point_set_diameter(arc1)
    d2 = point_set_diameter(arc2)
    arc = arc1 if d1 <= d2 else arc2
    w1, w2 = v[a], v[b]
    chord = abs(w1 - w2)
    return float(np.max((np.abs(arc - w1) + np.abs(arc - w2)) / chord))


def dilatation_estimate(domain, samples=1000, seed=0):
    """Empirical three-point constant over `samples` vertex pairs.

    Pairs use log-uniform index offsets so every scale is probed.  The pair
    list for n samples is a prefix of the list for more samples, so the
    estimate never decreases as samples grow.
    """
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    v = domain.boundary.vertices
    n = v.size
    i, off = _pair_stream(seed, samples, n)
    best = 1.0
    for a, o in zip(i, off):
        b = (a + o) % n
        best = max(best, three_point_ratio(v, int(a), int(b)))
    return best


def _arc_walk_end(points, start, delta):
    """First parameter along segment points[k]->points[k+1] where the arc diameter reaches delta."""
    base = points[: start + 1]
    p, q = points[start], points[start + 1]
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        x = p + mid * (q - p)
        if np.max(np.abs(base - x)) >= delta:
            hi = mid
        else:
            lo = mid
    return hi


def greedy_arc_partition(curve, delta, L=64.0):
    """Split a curve into adjacent sub-arcs of diameter delta (the last one at most delta).

    Returns a list of vertex arrays.

    Raises:
        DeltaOutOfRange: unless diam(curve)/L <= delta < diam(curve).
    """
    diam = curve.diameter
    if not (diam / L <= delta < diam):
        raise DeltaOutOfRange(f"delta={delta} outside [{diam / L}, {diam})")
    v = curve.vertices
    if curve.closed:
        v = np.concatenate([v, v[:1]])
    arcs = []
    current = [v[0]]
    k = 0
    tol = 1e-12 * diam
    while k < v.size - 1:
        nxt = v[k + 1]
        pts = np.array(current)
        if np.max(np.abs(pts - nxt)) < delta - tol:
            current.append(nxt)
            k += 1
            continue
        t = _arc_walk_end(np.concatenate([pts, [nxt]]), len(pts) - 1, delta)
        cut = current[-1] + t * (nxt - current[-1])
        current.append(cut)
        arcs.append(np.array(current))
        current = [cut]
        if t >= 1.0 - 1e-15:
            k += 1
    if len(current) > 1:
        arcs.append(np.array(current))
    return arcs


def reflect(domain):
    """Complex-conjugated copy with orientation restored; applying it twice is the identity."""
    v = np.conj(domain.boundary.vertices)
    v = np.concatenate([v[:1], v[:0:-1]])
    arc = None
    if domain.arc is not None:
        n = v.size
        old = domain.arc
        seg_word = old.segment_word[::-1].copy()
        arc = RepellerArc(old.spec.conjugate(), old.generation, n - 1 - old.arc_segments, seg_word, not old.forward)
    vp = None if domain.vertex_param is None else np.concatenate([domain.vertex_param[:1], domain.vertex_param[:0:-1]])
    prov = domain.provenance[len("reflected:"):] if domain.provenance.startswith("reflected:") else "reflected:" + domain.provenance
    return JordanDomain(Polyline(v, True), domain.basepoint.conjugate(), prov, arc=arc, vertex_param=vp,
                        validate=False)


def components_meeting(domain, disk, L=2.0):
    """Number of connected pieces of the boundary inside L*disk that come within disk."""
    big = disk.scaled(L)
    seg, par, kind, _ = circle_crossings(big, domain.boundary)
    poly = domain.boundary
    if seg.size == 0:
        inside = abs(poly.vertices[0] - disk.center) < big.radius
        return int(inside and _chain_distance(np.append(poly.vertices, poly.vertices[:1]), disk.center) < disk.radius)
    count = 0
    m = seg.size
    for k in range(m):
        if kind[k] != 1:
            continue
        k2 = (k + 1) % m
        pts = poly.sub_arc_vertices(int(seg[k]), float(par[k]), int(seg[k2]), float(par[k2]))
        if _chain_distance(pts, disk.center) < disk.radius:
            count += 1
    return count


def _chain_distance(pts, z):
    """Distance from z to the polyline through pts."""
    if pts.size == 1:
        return float(abs(pts[0] - z))
    a, d = pts[:-1], np.diff(pts)
    l2 = np.abs(d) ** 2
    t = np.clip(np.real((z - a) * np.conj(d)) / np.where(l2 > 0, l2, 1.0), 0.0, 1.0)
    return float(np.min(np.abs(a + t * d - z)))


def diameter_between(domain, i, j):
    """Chord and smaller connecting-arc diameter between boundary vertices i and j."""
    v = domain.boundary.vertices
    a, b = min(i, j), max(i, j)
    d1 = point_set_diameter(v[a : b + 1])
    d2 = point_set_diameter(np.concatenate([v[b:], v[: a + 1]]))
    return abs(v[a] - v[b]), min(d1, d2)
