"""Finite-scale counts behind the four spectra, and exponent fitting.

Signs select the threshold side for the measure (first) and the rotation
(second) condition: "+" keeps items above the lower threshold, "-" keeps items
below the upper one, and "b" keeps items inside both (two-sided).

* packing:    disks B(z, delta) centered on the boundary, thresholds
              delta**(alpha +- eta) on the harmonic measure and
              delta**(gamma +- eta) on rot.
* word:       words of the symbolic coding with renormalized measure and
              rotation, same thresholds.
* crosscut:   word cylinders with measure near 1 - r, a diameter floor, and a
              rotation floor.
* distortion: equal-measure boundary arcs with |phi'| and |phi'^{-i}| proxies.
"""

from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    BasepointSwallowed,
    BudgetExceeded,
    InsufficientHits,
    NoPath,
    TooFewScales,
    WindowEmpty,
)
from .geometry import point_set_diameter
from .harmonic import sample_hits
from .rotation import rot_crosscut, rot_point

SIDES = ("+", "-", "b")


def parse_signs(signs):
    """'++', '+-', '-b', ... or 'both' -> (measure side, rotation side)."""
    if signs in ("both", "two-sided", "bb"):
        return "b", "b"
    if len(signs) != 2 or any(c not in SIDES for c in signs):
        raise ValueError(f"signs must be two of {SIDES} or 'both', got {signs!r}")
    return signs[0], signs[1]


def passes(log_value, log_scale, center, eta, side):
    """Threshold test in log form: value vs scale**(center +- eta), with log_scale = log(scale) < 0."""
    if side in ("+", "b") and not (log_value > (center + eta) * log_scale):
        return False
    if side in ("-", "b") and not (log_value < (center - eta) * log_scale):
        return False
    return True


@dataclass
class PackingResult:
    delta: float
    count: int
    centers: list
    log_measures: list
    log_rots: list
    candidates: int
    skipped: int


def boundary_candidates(domain, spacing, region="boundary"):
    """Boundary points at equal arclength spacing (the repeller arc only with region='arc')."""
    poly = domain.boundary
    if region == "arc":
        if domain.arc is None:
            raise ValueError("region='arc' needs a repeller domain")
        segs = domain.arc.arc_segments
        if not domain.arc.forward:
            segs = segs[::-1]
        lens = poly.segment_lengths[segs]
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        s = np.arange(0.0, cum[-1] + 1e-12 * cum[-1], spacing)
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, segs.size - 1)
        t = np.clip((s - cum[k]) / lens[k], 0.0, 1.0)
        return poly.index.points(segs[k], t)
    s = np.arange(0.0, poly.length, spacing)
    seg, t = poly.locate(s)
    return poly.index.points(seg, t)


def packing_count(domain, delta, alpha, gamma, eta, signs="bb", walks=100_000, seed=0, region="boundary",
                  sample=None):
    """Greedy disjoint packing of delta-disks on the boundary that pass the measure/rotation windows.

    Candidates are visited in arclength order at spacing delta/4.  gamma=None
    drops the rotation condition.
    """
    sm, sr = parse_signs(signs)
    hs = sample or sample_hits(domain, walks, seed)
    tree = cKDTree(np.column_stack([hs.points.real, hs.points.imag]))
    cand = boundary_candidates(domain, delta / 4, region)
    log_d = math.log(delta)
    cell = 2 * delta
    grid = {}
    centers, lms, lrs = [], [], []
    skipped = 0
    for c in cand:
        key = (math.floor(c.real / cell), math.floor(c.imag / cell))
        clash = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for q in grid.get((key[0] + dx, key[1] + dy), ()):
                    if abs(q - c) < 2 * delta:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if clash:
            continue
        hits = len(tree.query_ball_point((c.real, c.imag), delta * (1 - 1e-12)))
        lm = math.log(hits / hs.walks) if hits else -math.inf
        if not passes(lm, log_d, alpha, eta, sm):
            continue
        lr = 0.0
        if gamma is not None:
            try:
                lr = rot_point(domain, c, delta, on_boundary=False).log_rot
            except (BasepointSwallowed, NoPath):
                skipped += 1
                continue
            if not passes(lr, log_d, gamma, eta, sr):
                continue
        grid.setdefault(key, []).append(c)
        centers.append(complex(c))
        lms.append(lm)
        lrs.append(lr)
    return PackingResult(delta, len(centers), centers, lms, lrs, int(cand.size), skipped)


def word_index_set(spec, delta, tau=0.0):
    """Multi-indices (k_1..k_N) with prod scale_j**k_j within [delta(1-tau), delta(1+tau)]."""
    if not (0.0 <= tau <= 0.5):
        raise ValueError("tau must lie in [0, 0.5]")
    logs = -np.log(spec.scales)
    lo = -math.log(delta * (1 + tau))
    hi = -math.log(delta * (1 - tau))
    slack = 1e-9 * max(1.0, hi)
    lo -= slack
    hi += slack
    n = logs.size
    out = []

    def rec(j, acc, prefix):
        if j == n:
            if lo <= acc <= hi:
                out.append(tuple(prefix))
            return
        k = 0
        while acc + k * logs[j] <= hi:
            rec(j + 1, acc + k * logs[j], prefix + [k])
            k += 1

    rec(0, 0.0, [])
    return out


def words_in_window(spec, delta, tau=0.0, max_length=None):
    """Admissible words (depth-first, lexicographic) whose renormalized diameter lies in the window."""
    logs = -np.log(spec.scales)
    lo = -math.log(delta * (1 + tau))
    hi = -math.log(delta * (1 - tau))
    slack = 1e-9 * max(1.0, hi)
    lo -= slack
    hi += slack
    adj = spec.adjacency_matrix
    out = []
    stack = [((), 0.0)]
    while stack:
        w, acc = stack.pop()
        if w and lo <= acc <= hi:
            out.append(w)
        if max_length is not None and len(w) >= max_length:
            continue
        nxt = range(spec.n_letters) if not w else np.flatnonzero(adj[w[-1]])
        for x in reversed(list(nxt)):
            a = acc + logs[x]
            if a <= hi:
                stack.append((w + (int(x),), a))
    return out


def prefix_free(words):
    """Greedy prefix-free subset in the given order."""
    chosen = set()
    prefixes = set()
    out = []
    for w in words:
        if w in prefixes or any(w[:k] in chosen for k in range(1, len(w) + 1)):
            continue
        chosen.add(w)
        prefixes.update(w[:k] for k in range(1, len(w) + 1))
        out.append(w)
    return out


@dataclass
class WordWeights:
    """Renormalized log-measure and log-rotation of words."""

    kind: str
    log_measure: dict
    log_rot: dict
    std_error: dict = field(default_factory=dict)


def surrogate_weights(spec, words):
    lw = np.log(np.array(spec.surrogate_weights))
    th = spec.angles
    lm = {w: float(lw[list(w)].sum()) for w in words}
    lr = {w: float(th[list(w)].sum()) for w in words}
    return WordWeights("surrogate", lm, lr)


def mc_weights(spec, words, domain, walks, seed=0, with_rotation=True):
    """Cylinder measures from walk hits and crosscut rotations, both divided by the whole arc's."""
    hs = sample_hits(domain, walks, seed)
    hist = hs.histogram
    arc = domain.arc
    on_arc = int(hist[arc.arc_segments].sum())
    if on_arc == 0:
        raise BudgetExceeded("no walk hit the repeller arc")
    base_rot = 0.0
    if with_rotation:
        try:
            base_rot = rot_crosscut(domain, _support(domain, ())).log_rot
        except (BasepointSwallowed, NoPath):
            base_rot = 0.0
    lm, lr, se = {}, {}, {}
    for w in words:
        h = int(hist[domain.cylinder_segments(w)].sum())
        p = h / on_arc
        lm[w] = math.log(p) if h else -math.inf
        se[w] = math.sqrt(max(p * (1 - p), 1e-300) / on_arc) / p if h else math.inf
        if with_rotation:
            try:
                lr[w] = rot_crosscut(domain, _support(domain, w)).log_rot - base_rot
            except (BasepointSwallowed, NoPath):
                lr[w] = math.nan
        else:
            lr[w] = 0.0
    return WordWeights("mc", lm, lr, se)


def _support(domain, word):
    """Vertices of the cylinder arc in word order."""
    arc = domain.arc
    poly = domain.boundary
    if word:
        lo, hi = arc.word_range(word)
    else:
        lo, hi = 0, arc.arc_segments.size
    segs = arc.arc_segments[lo:hi]
    if arc.forward:
        return np.concatenate([poly.starts[segs], poly.ends[segs[-1:]]])
    return np.concatenate([poly.ends[segs], poly.starts[segs[-1:]]])


@dataclass
class WordCountResult:
    delta: float
    count: int
    words: list
    candidates: int
    zero_hit_words: int = 0


def word_count(spec, delta, alpha, gamma, eta, signs="bb", weights="surrogate", tau=0.0, domain=None,
               walks=100_000, seed=0, weight_table=None):
    """Maximal prefix-free family of words at scale delta passing the renormalized windows.

    Raises:
        BudgetExceeded: with mc weights, when a counted word's relative standard
            error exceeds the log-window width eta*log(1/delta).
    """
    sm, sr = parse_signs(signs)
    words = words_in_window(spec, delta, tau)
    if weight_table is None:
        if weights == "surrogate":
            weight_table = surrogate_weights(spec, words)
        elif weights == "mc":
            depth = max((len(w) for w in words), default=0)
            if depth > spec.k_max:
                raise BudgetExceeded(f"words of length {depth} exceed k_max={spec.k_max}")
            if domain is None:
                from .repellers import generate_prefractal

                domain = generate_prefractal(spec, max(depth, 1))
            weight_table = mc_weights(spec, words, domain, walks, seed, with_rotation=gamma is not None)
        else:
            raise ValueError(f"unknown weights {weights!r}")
    log_d = math.log(delta)
    width = eta * math.log(1 / delta)
    ok = []
    zero = 0
    for w in words:
        lm = weight_table.log_measure[w]
        if lm == -math.inf:
            zero += 1
        if not passes(lm, log_d, alpha, eta, sm):
            continue
        if gamma is not None:
            lr = weight_table.log_rot[w]
            if math.isnan(lr) or not passes(lr, log_d, gamma, eta, sr):
                continue
        if weight_table.kind == "mc" and weight_table.std_error.get(w, 0.0) > width and lm > -math.inf:
            raise BudgetExceeded(f"relative error of word {w} exceeds the window width {width:.3g}")
        ok.append(w)
    chosen = prefix_free(ok)
    return WordCountResult(delta, len(chosen), chosen, len(words), zero)


@dataclass
class CrosscutResult:
    r: float
    count: int
    paper_window_count: int
    words: list
    window: tuple
    paper_window: tuple


def crosscut_count(spec, r, a, b, W=2.0, weights="surrogate", domain=None, walks=100_000, seed=0, max_length=None):
    """Disjoint word cylinders with measure in [(1-r)/W, W(1-r)], diam >= (1-r)**(1-a), rot >= (1-r)**(-b).

    Raises:
        WindowEmpty: if no cylinder measure lands in the measure window.
    """
    q = 1 - r
    lo, hi = q / W, W * q
    L = math.log(1 / q)
    lll = math.log(math.log(L)) if L > 1 and math.log(L) > 1 else math.nan
    paper = (q * (1 - q / lll), q * (1 + q / lll)) if lll > 0 else (math.nan, math.nan)
    max_length = max_length or spec.k_max
    # every word whose surrogate/mc measure could still exceed lo
    cands = []
    lw = np.log(np.array(spec.surrogate_weights))
    adj = spec.adjacency_matrix
    stack = [((), 0.0)]
    while stack:
        w, acc = stack.pop()
        if w:
            cands.append(w)
        if len(w) >= max_length:
            continue
        nxt = range(spec.n_letters) if not w else np.flatnonzero(adj[w[-1]])
        for x in reversed(list(nxt)):
            a_ = acc + lw[x]
            if weights != "surrogate" or a_ >= math.log(lo) - 1e-12:
                stack.append((w + (int(x),), a_))
    if weights == "surrogate":
        table = surrogate_weights(spec, cands)
    else:
        if domain is None:
            from .repellers import generate_prefractal

            domain = generate_prefractal(spec, max_length)
        table = mc_weights(spec, cands, domain, walks, seed)
    in_window = [w for w in cands if lo <= math.exp(table.log_measure[w]) <= hi]
    if not in_window:
        raise WindowEmpty(f"no cylinder measure in [{lo:.3g}, {hi:.3g}]")
    dmin = q ** (1 - a)
    ok = [w for w in in_window
          if spec.renormalized_diameter(w) >= dmin and table.log_rot[w] >= b * L]
    chosen = prefix_free(ok)
    paper_ok = [w for w in chosen if paper[0] <= math.exp(table.log_measure[w]) <= paper[1]]
    return CrosscutResult(r, len(chosen), len(paper_ok), chosen, (lo, hi), paper)


@dataclass
class DistortionResult:
    r: float
    arcs: int
    count: int
    lambda1: float
    lambda1_normalized: float
    d_exponent: float
    d_exponent_unnormalized: float
    log_proxies: list
    log_rots: list


def equal_measure_arcs(sample, n):
    """Boundary arcs (arclength intervals) of equal hit count, from hit quantiles."""
    a = sample.sorted_arclength
    cuts = a[(np.arange(n) * a.size) // n]
    total = sample.domain.boundary.length
    ends = np.concatenate([cuts[1:], [cuts[0] + total]])
    return list(zip(cuts, ends))


def arc_vertices(poly, s0, s1):
    seg0, t0 = poly.locate(s0)
    seg1, t1 = poly.locate(s1)
    if s1 - s0 >= poly.length:
        seg1, t1 = seg0, t0
    v = poly.sub_arc_vertices(int(seg0), float(t0), int(seg1), float(t1))
    keep = np.concatenate([[True], np.abs(np.diff(v)) > 0])
    return v[keep]


def distortion_count(domain, r, a, b, eta, signs="bb", walks=100_000, seed=0, sample=None):
    """Count equal-measure arcs whose |phi'| and |phi'^{-i}| proxies pass the windows at scale 1 - r.

    The proxies are diam(arc)/(2 pi (1-r)) and exp(rot of the arc as a crosscut).
    lambda1 = 2 pi (1-r) count is the length of the passing set on the circle;
    the d-exponent uses its normalized form (1-r) count, so that a full count
    gives exponent 1.

    Raises:
        InsufficientHits: unless the sample has at least 10/(1-r) hits.
    """
    sm, sr = parse_signs(signs)
    q = 1 - r
    n = int(math.ceil(1 / q - 1e-9))
    hs = sample or sample_hits(domain, walks, seed)
    if hs.walks < 10 * n:
        raise InsufficientHits(f"need {10 * n} hits, have {hs.walks}")
    poly = domain.boundary
    log_q = math.log(q)
    count = 0
    lps, lrs = [], []
    for s0, s1 in equal_measure_arcs(hs, n):
        v = arc_vertices(poly, s0, s1)
        diam = point_set_diameter(v)
        lp = math.log(diam / (2 * math.pi * q)) if diam > 0 else -math.inf
        try:
            lr = rot_crosscut(domain, v).log_rot
        except (BasepointSwallowed, NoPath):
            lr = math.nan
        lps.append(lp)
        lrs.append(lr)
        # |phi'| > (1-r)^(-a+eta) is lp > (-a + eta) log q, i.e. centre -a in the shared test
        if not passes(lp, log_q, -a, eta, sm):
            continue
        if math.isnan(lr) or not passes(lr, log_q, -b, eta, sr):
            continue
        count += 1
    lam = 2 * math.pi * q * count
    lam_n = q * count
    L = math.log(1 / q)
    d = math.log(lam_n) / L + 1 if count else -math.inf
    d_raw = math.log(lam) / L + 1 if count else -math.inf
    return DistortionResult(r, n, count, lam, lam_n, d, d_raw, lps, lrs)


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    used: list
    excluded: list


def fit_exponent(rows):
    """Least-squares slope of log(value) against log(1/scale); zero rows are excluded and listed.

    Raises:
        TooFewScales: with fewer than three positive rows.
    """
    used = [(s, v) for s, v in rows if v > 0]
    excluded = [(s, v) for s, v in rows if not v > 0]
    if len(used) < 3:
        raise TooFewScales(f"need 3 scales with positive values, got {len(used)}")
    x = np.array([math.log(1 / s) for s, _ in used])
    y = np.array([math.log(v) for _, v in used])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return FitResult(float(coef[0]), float(coef[1]), res, used, excluded)


@dataclass
class SpectrumQuery:
    """One spectrum computation over a list of scales.

    Attributes:
        variant: packing, word, crosscut or distortion.
        signs: measure/rotation sides, see parse_signs.
        params: (alpha, gamma) for packing/word, (a, b) for crosscut/distortion.
        eta: window half-width in the exponent.
        scales: delta values (packing/word) or 1 - r values, strictly decreasing.
    """

    variant: str
    signs: str
    params: tuple
    eta: float
    scales: tuple
    walks: int = 100_000
    seed: int = 0
    weights: str = "surrogate"

    def __post_init__(self):
        if self.variant not in ("packing", "word", "crosscut", "distortion"):
            raise ValueError(f"unknown variant {self.variant!r}")
        parse_signs(self.signs)
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        s = list(self.scales)
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ValueError("scales must be strictly decreasing")
        if self.variant == "distortion" and not self.params[0] < 1:
            raise ValueError("distortion needs a < 1")


@dataclass
class SpectrumRow:
    scale: float
    count: int
    value: float
    exponent: float


@dataclass
class SpectrumTable:
    query: SpectrumQuery
    rows: list
    fit: FitResult = None

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale", "count", "value", "exponent"])
        for r in self.rows:
            w.writerow([repr(r.scale), r.count, repr(r.value), repr(r.exponent)])
        return buf.getvalue()

    def to_json(self):
        d = {
            "query": asdict(self.query),
            "rows": [asdict(r) for r in self.rows],
            "fit": None if self.fit is None else {"slope": self.fit.slope, "intercept": self.fit.intercept,
                                                  "residual": self.fit.residual},
        }
        return json.dumps(d, indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def run_query(query, domain=None, spec=None, region="boundary"):
    """Evaluate a query at every scale and fit the exponent when possible."""
    rows = []
    p0, p1 = query.params
    for s in query.scales:
        if query.variant == "packing":
            res = packing_count(domain, s, p0, p1, query.eta, query.signs, query.walks, query.seed, region)
            c, v = res.count, float(res.count)
            e = math.log(c) / math.log(1 / s) if c else -math.inf
        elif query.variant == "word":
            res = word_count(spec, s, p0, p1, query.eta, query.signs, query.weights, domain=domain,
                             walks=query.walks, seed=query.seed)
            c, v = res.count, float(res.count)
            e = math.log(c) / math.log(1 / s) if c else -math.inf
        elif query.variant == "crosscut":
            res = crosscut_count(spec, 1 - s, p0, p1, weights=query.weights, domain=domain, walks=query.walks,
                                 seed=query.seed)
            c, v = res.count, float(res.count)
            e = math.log(c) / math.log(1 / s) if c else -math.inf
        else:
            res = distortion_count(domain, 1 - s, p0, p1, query.eta, query.signs, query.walks, query.seed)
            c, v, e = res.count, res.lambda1_normalized, res.d_exponent
        rows.append(SpectrumRow(s, c, v, e))
    fit = None
    if query.variant in ("packing", "word", "crosscut"):
        try:
            fit = fit_exponent([(r.scale, r.value) for r in rows])
        except TooFewScales:
            fit = None
    return SpectrumTable(query, rows, fit)
