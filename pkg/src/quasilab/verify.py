"""Desk-scale checks of the quantitative lemmas on repellers and atlas domains."""

from dataclasses import asdict, dataclass, field
from fractions import Fraction
import json
import math
import time

import numpy as np

from .errors import BasepointSwallowed, BudgetExceeded, NoPath
from .harmonic import sample_hits
from .repellers import dilatation_estimate, generate_prefractal
from .rotation import CROSSCUT_SLACK, TRACKING_BOUND, rot_crosscut, rot_point
from .spectra import _support, parse_signs, passes, word_index_set, words_in_window


@dataclass
class VerificationReport:
    """Outcome of one check; failing rows keep every input needed to replay them."""

    lemma: str
    rows: list
    passed: bool
    tolerances: dict
    seeds: dict
    runtime: float
    summary: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_plain)

    def to_text(self):
        lines = [f"{self.lemma}: {'PASS' if self.passed else 'FAIL'}"]
        for k, v in sorted(self.summary.items()):
            lines.append(f"  {k} = {v}")
        for k, v in sorted(self.tolerances.items()):
            lines.append(f"  tolerance {k} = {v}")
        return "\n".join(lines)


def _plain(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(type(x))


def _word_str(w):
    return ".".join(str(x) for x in w)


# ---------------------------------------------------------------- Carleson


def _cylinder_hits(domain, sample, word):
    return int(sample.histogram[domain.cylinder_segments(word)].sum())


def carleson_ratio_scan(spec, x_pool, y_lengths, z_pool, walks, seed=0, weights="mc", generation=None,
                        triples_per_length=200, max_rel_se=0.02):
    """Deviation |w(XYZ) w(Y) / (w(XY) w(YZ)) - 1| per |Y|.

    mc weights use cylinder hit counts on one walk sample; triples whose
    cylinders have relative standard error above `max_rel_se` are dropped.
    Surrogate weights are evaluated in exact rational arithmetic.
    """
    t0 = time.time()
    rng = np.random.default_rng(seed)
    x_pool = [tuple(x) for x in x_pool]
    z_pool = [tuple(z) for z in z_pool]
    longest = max(len(x) for x in x_pool) + max(y_lengths) + max(len(z) for z in z_pool)
    domain = sample = None
    if weights == "mc":
        g = generation or min(spec.k_max, longest + 1)
        if longest > g:
            raise BudgetExceeded(f"|XYZ| = {longest} exceeds generation {g}")
        domain = generate_prefractal(spec, g)
        sample = sample_hits(domain, walks, seed)
        on_arc = int(sample.histogram[domain.arc.arc_segments].sum())
    else:
        wts = [Fraction(w) for w in spec.surrogate_weights]

    def measure(w):
        if weights == "mc":
            h = _cylinder_hits(domain, sample, w)
            return h / on_arc, (math.sqrt(1 / h) if h else math.inf)
        p = Fraction(1)
        for x in w:
            p *= wts[x]
        return p, 0.0

    rows = []
    per = {}
    for m in y_lengths:
        devs, vars_ = [], []
        tried = 0
        while len(devs) < triples_per_length and tried < 50 * triples_per_length:
            tried += 1
            x = x_pool[rng.integers(len(x_pool))]
            z = z_pool[rng.integers(len(z_pool))]
            y = tuple(int(a) for a in rng.integers(spec.n_letters, size=m))
            words = [x + y + z, y, x + y, y + z]
            if not all(spec.admissible(w) for w in words):
                continue
            vals = [measure(w) for w in words]
            if weights == "mc" and max(v[1] for v in vals) > max_rel_se:
                continue
            ratio = vals[0][0] * vals[1][0] / (vals[2][0] * vals[3][0])
            dev = abs(ratio - 1)
            var = float(ratio) ** 2 * sum(v[1] ** 2 for v in vals)
            devs.append(dev)
            vars_.append(var)
            rows.append({"X": _word_str(x), "Y": _word_str(y), "Z": _word_str(z), "deviation": float(dev),
                         "std_error": math.sqrt(var), "exact": dev if weights != "mc" else None})
        n = len(devs)
        mean = float(sum(float(d) for d in devs) / n) if n else math.nan
        err = math.sqrt(sum(vars_)) / n if n else math.nan
        per[m] = {"mean": mean, "error": err, "triples": n, "exact_zero": weights != "mc" and all(d == 0 for d in devs)}
    lengths = sorted(per)
    lo, hi = lengths[0], lengths[-1]
    gap = per[lo]["mean"] - per[hi]["mean"]
    bar = 2 * math.hypot(per[lo]["error"], per[hi]["error"])
    if weights == "mc":
        passed = gap > bar
    else:
        passed = all(v["exact_zero"] for v in per.values())
    rate = math.nan
    pos = [(m, per[m]["mean"]) for m in lengths if per[m]["mean"] > 0]
    if len(pos) >= 2:
        rate = float(np.polyfit([m for m, _ in pos], [math.log(v) for _, v in pos], 1)[0])
    return VerificationReport("carleson", rows, bool(passed), {"error_bars": 2.0, "max_rel_se": max_rel_se},
                              {"seed": seed, "walks": walks}, time.time() - t0,
                              {"per_length": per, "gap": gap, "two_sigma": bar, "log_decay_rate": rate,
                               "weights": weights})


# ----------------------------------------------------- rotation multiplicativity


def _frac_rot(spec, w):
    return sum((Fraction(spec.angles[x]) for x in w), Fraction(0))


def rotation_multiplicativity_scan(spec, pairs, method="symbolic", generation=None):
    """Symbolic: exact additivity of letter angles.  Geometric: crosscut rotations with a last-letter correction.

    The geometric deviation is g(XY) - g(X) - g(Y) + g(last letter of X) with
    g the renormalized crosscut log-rotation; the cushion is twice the sum of
    the four values' error bounds.
    """
    t0 = time.time()
    rows = []
    worst = 0.0
    cushion = 0.0
    if method == "symbolic":
        for x, y in pairs:
            x, y = tuple(x), tuple(y)
            spec.check_word(x + y)
            dev = _frac_rot(spec, x + y) - _frac_rot(spec, x) - _frac_rot(spec, y)
            rows.append({"X": _word_str(x), "Y": _word_str(y), "deviation": float(dev), "exact_zero": dev == 0})
            worst = max(worst, abs(float(dev)))
        passed = all(r["exact_zero"] for r in rows)
    else:
        longest = max(len(x) + len(y) for x, y in pairs)
        g = generation or min(spec.k_max, longest + 1)
        domain = generate_prefractal(spec, g)
        try:
            base = rot_crosscut(domain, _support(domain, ())).log_rot
        except (BasepointSwallowed, NoPath):
            base = 0.0
        cache = {}

        def geo(w):
            if w not in cache:
                rv = rot_crosscut(domain, _support(domain, w))
                cache[w] = (rv.log_rot - base, rv.additive_error_bound)
            return cache[w]

        cushion = 2 * 4 * (TRACKING_BOUND + CROSSCUT_SLACK)
        for x, y in pairs:
            x, y = tuple(x), tuple(y)
            vals = [geo(x + y), geo(x), geo(y), geo(x[-1:])]
            dev = vals[0][0] - vals[1][0] - vals[2][0] + vals[3][0]
            rows.append({"X": _word_str(x), "Y": _word_str(y), "deviation": dev, "violation": abs(dev) > cushion})
            worst = max(worst, abs(dev))
        passed = not any(r["violation"] for r in rows)
    return VerificationReport("rotation_multiplicativity", rows, bool(passed), {"cushion": cushion}, {},
                              time.time() - t0, {"max_deviation": worst, "method": method, "pairs": len(pairs)})


# ------------------------------------------------------------ propagation


def _multinomial(ks):
    out = math.factorial(sum(ks))
    for k in ks:
        out //= math.factorial(k)
    return out


def surrogate_word_count(spec, delta, alpha, gamma, eta, signs="bb"):
    """Exact word count under surrogate weights by grouping words by letter counts.

    Product weights and angle sums depend only on the multi-index, so every
    word of a passing multi-index passes; a full shift has multinomial many
    words per multi-index.  With tau = 0 the family is automatically prefix-free.
    """
    if not spec.adjacency_matrix.all():
        return len(_surrogate_enumerated(spec, delta, alpha, gamma, eta, signs))
    sm, sr = parse_signs(signs)
    lw = np.log(np.array(spec.surrogate_weights))
    th = spec.angles
    log_d = math.log(delta)
    total = 0
    for ks in word_index_set(spec, delta):
        if sum(ks) == 0:
            continue
        k = np.array(ks)
        lm = float(np.dot(k, lw))
        lr = float(np.dot(k, th))
        if passes(lm, log_d, alpha, eta, sm) and (gamma is None or passes(lr, log_d, gamma, eta, sr)):
            total += _multinomial(ks)
    return total


def _surrogate_enumerated(spec, delta, alpha, gamma, eta, signs):
    from .spectra import word_count

    return word_count(spec, delta, alpha, gamma, eta, signs, "surrogate").words


def propagation_check(spec, delta, alpha, gamma, eta, n_max=4, signs="bb", enumeration_limit=200_000):
    """N_word(delta**n, 2 eta) >= N_word(delta, eta)**n in exact integers for n = 2..n_max.

    Counts at delta**n come from multi-index grouping; when the word family is
    small enough they are cross-checked by explicit enumeration.  The
    concatenation count sum_m C(N, m) m**n (ordered strings of n words drawn
    from a qualifying set of size N, grouped by the set of words used) is
    reported next to N**n.
    """
    t0 = time.time()
    base = surrogate_word_count(spec, delta, alpha, gamma, eta, signs)
    rows = []
    ok = True
    for n in range(2, n_max + 1):
        dn = delta**n
        count = surrogate_word_count(spec, dn, alpha, gamma, 2 * eta, signs)
        enumerated = None
        if _family_size(spec, dn) <= enumeration_limit:
            enumerated = len(_surrogate_enumerated(spec, dn, alpha, gamma, 2 * eta, signs))
        concat = sum(math.comb(base, m) * _surjections(n, m) for m in range(1, base + 1)) if base else 0
        bound = base**n
        good = count >= bound and (enumerated is None or enumerated == count)
        ok &= good
        rows.append({"n": n, "delta_n": dn, "count": count, "enumerated": enumerated, "base_count": base,
                     "power": bound, "concatenations": concat, "multinomial_sum": _mult_sum(base, n),
                     "holds": good})
    return VerificationReport("propagation", rows, bool(ok), {"exact": True},
                              {}, time.time() - t0, {"base_count": base, "delta": delta, "eta": eta,
                                                     "alpha": alpha, "gamma": gamma})


def _family_size(spec, delta):
    return sum(_multinomial(k) for k in word_index_set(spec, delta) if sum(k))


def _surjections(n, m):
    """Strings of length n over m symbols using every symbol."""
    return sum((-1) ** j * math.comb(m, j) * (m - j) ** n for j in range(m + 1))


def _mult_sum(N, n):
    """sum_{m=1}^{N} C(N, m) m**n."""
    return sum(math.comb(N, m) * m**n for m in range(1, N + 1))


# ------------------------------------------------------ finite-scale spectrum


def finite_scale_spectrum(spec, delta0, alpha, gamma, eta0, eps=0.0, powers=(2, 3), signs="bb",
                          weights="surrogate", walks=100_000, seed=0):
    """Finite-scale exponent at delta0 and the exponents at delta0**n with eta doubled.

    Surrogate counts are exact; mc counts carry a slack of eps plus the
    spread implied by the walk budget.
    """
    t0 = time.time()

    def exponent(d, e):
        if weights == "surrogate":
            c = surrogate_word_count(spec, d, alpha, gamma, e, signs)
        else:
            from .spectra import word_count

            c = word_count(spec, d, alpha, gamma, e, signs, "mc", walks=walks, seed=seed).count
        return c, (math.log(c) / math.log(1 / d) if c else 0.0)

    c0, e0 = exponent(delta0, eta0)
    rows = [{"n": 1, "delta": delta0, "count": c0, "exponent": e0}]
    ok = True
    for n in powers:
        c, e = exponent(delta0**n, 2 * eta0)
        good = e >= e0 - eps
        ok &= good
        rows.append({"n": n, "delta": delta0**n, "count": c, "exponent": e, "holds": good})
    return VerificationReport("finite_scale", rows, bool(ok), {"eps": eps}, {"seed": seed}, time.time() - t0,
                              {"exponent": e0, "weights": weights})


# ------------------------------------------------------------ rotation stability


def rotation_stability_scan(domain, delta, pairs=100, concentric=50, seed=0, k_hat=None, dilatation_samples=1000):
    """Rotation stability in the center (10 pi) and in the radius (120 K log(1/d2)/log(1/d1)).

    Centers are boundary points drawn by arclength; partners lie within delta
    along the boundary.  Concentric pairs use radii delta and a random
    smaller radius down to delta**2.  Every bound is widened by twice the
    method error bound of the two values compared.
    """
    t0 = time.time()
    rng = np.random.default_rng(seed)
    poly = domain.boundary
    k_hat = k_hat or dilatation_estimate(domain, dilatation_samples, seed)
    rows = []
    viol_center = viol_radius = 0
    done = 0
    tries = 0
    while done < pairs and tries < 20 * pairs:
        tries += 1
        s = rng.uniform(0, poly.length)
        seg, t = poly.locate(s)
        xi = complex(poly.index.point(int(seg), float(t)))
        s2 = s + rng.uniform(-1, 1) * delta
        seg2, t2 = poly.locate(s2)
        w = complex(poly.index.point(int(seg2), float(t2)))
        if not abs(xi - w) < delta:
            continue
        try:
            a = rot_point(domain, xi, delta)
            b = rot_point(domain, w, delta)
        except (BasepointSwallowed, NoPath):
            continue
        bound = 10 * math.pi + 2 * (a.additive_error_bound + b.additive_error_bound)
        diff = abs(a.log_rot - b.log_rot)
        bad = diff > bound
        viol_center += bad
        rows.append({"kind": "center", "xi": xi, "w": w, "delta": delta, "difference": diff, "bound": bound,
                     "violation": bool(bad)})
        done += 1
    done = 0
    tries = 0
    while done < concentric and tries < 20 * concentric:
        tries += 1
        s = rng.uniform(0, poly.length)
        seg, t = poly.locate(s)
        z = complex(poly.index.point(int(seg), float(t)))
        d1 = delta
        d2 = delta ** rng.uniform(1.0, 2.0)
        try:
            a = rot_point(domain, z, d1)
            b = rot_point(domain, z, d2)
        except (BasepointSwallowed, NoPath):
            continue
        bound = 120 * k_hat * math.log(1 / d2) / math.log(1 / d1) + 2 * (a.additive_error_bound + b.additive_error_bound)
        diff = abs(a.log_rot - b.log_rot)
        bad = diff > bound
        viol_radius += bad
        rows.append({"kind": "radius", "z": z, "delta1": d1, "delta2": d2, "difference": diff, "bound": bound,
                     "violation": bool(bad)})
        done += 1
    passed = viol_center == 0 and viol_radius == 0
    centers = [r["difference"] for r in rows if r["kind"] == "center"]
    radii = [r["difference"] for r in rows if r["kind"] == "radius"]
    return VerificationReport("rotation_stability", rows, bool(passed),
                              {"center": "10pi + 2 bounds", "radius": "120 K log(1/d2)/log(1/d1) + 2 bounds"},
                              {"seed": seed}, time.time() - t0,
                              {"k_hat": k_hat, "center_pairs": len(centers), "radius_pairs": len(radii),
                               "max_center_difference": max(centers, default=math.nan),
                               "max_radius_difference": max(radii, default=math.nan),
                               "center_violations": viol_center, "radius_violations": viol_radius})


# ------------------------------------------------------------ relation between spectra


def relation_check(spec, points, m=6, eta=0.5, walks=1_000_000, seed=0, generation=None, tolerance=0.15,
                   signs="bb"):
    """Compare the distortion exponent d(a, b) with (1 - a) f(1/(1 - a), -b/(1 - a)) at matched scales.

    Words live at delta = D**-m (D the reciprocal common scale) and the
    distortion arcs at 1 - r = delta**(1/(1 - a)); the word window is eta/(1 - a)
    so that both counts select the same cylinders up to bounded distortion.
    Both sides share one walk sample on a single prefractal.
    """
    from .spectra import distortion_count, word_count

    t0 = time.time()
    scales = np.unique(np.round(spec.scales, 12))
    if scales.size != 1:
        raise ValueError("matched scales need a single contraction ratio")
    delta = float(scales[0]) ** m
    g = generation or min(spec.k_max, m + 1)
    domain = generate_prefractal(spec, g)
    sample = sample_hits(domain, walks, seed)
    rows = []
    ok = True
    for a, b in points:
        q = delta ** (1 / (1 - a))
        dist = distortion_count(domain, 1 - q, a, b, eta, signs, sample=sample)
        wc = word_count(spec, delta, 1 / (1 - a), -b / (1 - a), eta / (1 - a), signs, "mc", domain=domain,
                        walks=walks, seed=seed)
        f = math.log(wc.count) / math.log(1 / delta) if wc.count else -math.inf
        rhs = (1 - a) * f
        diff = abs(dist.d_exponent - rhs)
        good = diff <= tolerance
        ok &= good
        rows.append({"a": a, "b": b, "one_minus_r": q, "delta": delta, "arcs": dist.arcs, "arc_count": dist.count,
                     "d_exponent": dist.d_exponent, "word_count": wc.count, "f_exponent": f,
                     "scaled_f": rhs, "difference": diff, "holds": bool(good)})
    return VerificationReport("relation", rows, bool(ok), {"difference": tolerance, "eta": eta},
                              {"seed": seed, "walks": walks}, time.time() - t0,
                              {"generation": g, "m": m, "max_difference": max(r["difference"] for r in rows)})


# ------------------------------------------------------------ reflection


def _swap_side(side):
    return {"+": "-", "-": "+", "b": "b"}[side]


def _pass_probability(lm, se, log_d, center, eta, side):
    """Probability that a normal log-measure with standard error se passes the window."""
    if not math.isfinite(lm) or not math.isfinite(se):
        return 0.0
    from scipy.special import ndtr

    lo, hi = -math.inf, math.inf
    if side in ("+", "b"):
        lo = (center + eta) * log_d
    if side in ("-", "b"):
        hi = (center - eta) * log_d
    s = max(se, 1e-12)
    return float(ndtr((hi - lm) / s) - ndtr((lo - lm) / s))


def reflection_check(spec, delta, alpha, gamma, eta, signs, weights="surrogate", walks=1_000_000, seed=0,
                     generation=None):
    """Counts for (spec, gamma, signs) against (conjugate spec, -gamma, rotation side swapped).

    Surrogate counts must agree exactly.  mc counts are taken on the
    prefractal and on its reflection with the same seed; they must agree
    within twice the combined count spread, the spread summing p(1 - p) over
    words with p the chance a word passes given its log-measure error.
    """
    from .repellers import reflect
    from .spectra import mc_weights, word_count

    t0 = time.time()
    sm, sr = parse_signs(signs)
    mirrored = sm + _swap_side(sr)
    conj = spec.conjugate()
    if weights == "surrogate":
        n1 = word_count(spec, delta, alpha, gamma, eta, sm + sr, "surrogate").count
        n2 = word_count(conj, delta, alpha, -gamma, eta, mirrored, "surrogate").count
        bar = 0.0
        passed = n1 == n2
        residual = 0.0
    else:
        words = words_in_window(spec, delta)
        g = generation or min(spec.k_max, max(len(w) for w in words) + 1)
        dom = generate_prefractal(spec, g)
        ref = reflect(dom)
        wt1 = mc_weights(spec, words, dom, walks, seed)
        wt2 = mc_weights(conj, words, ref, walks, seed)
        n1 = word_count(spec, delta, alpha, gamma, eta, sm + sr, "mc", weight_table=wt1).count
        n2 = word_count(conj, delta, alpha, -gamma, eta, mirrored, "mc", weight_table=wt2).count
        log_d = math.log(delta)
        var = 0.0
        for wt, c, side in ((wt1, gamma, sr), (wt2, -gamma, _swap_side(sr))):
            for w in words:
                lr = wt.log_rot[w]
                if math.isnan(lr) or not passes(lr, log_d, c, eta, side):
                    continue
                p = _pass_probability(wt.log_measure[w], wt.std_error[w], log_d, alpha, eta, sm)
                var += p * (1 - p)
        bar = 2 * math.sqrt(var)
        passed = abs(n1 - n2) <= bar
        pairs = [(wt1.log_rot[w], wt2.log_rot[w]) for w in words]
        residual = max((abs(x + y) for x, y in pairs if not (math.isnan(x) or math.isnan(y))), default=0.0)
    row = {"delta": delta, "alpha": alpha, "gamma": gamma, "eta": eta, "signs": sm + sr, "mirrored_signs": mirrored,
           "count": n1, "mirrored_count": n2, "bar": bar, "weights": weights}
    return VerificationReport("reflection", [row], bool(passed), {"bar": "exact" if weights == "surrogate" else "2 sigma"},
                              {"seed": seed, "walks": walks}, time.time() - t0,
                              {"count": n1, "mirrored_count": n2, "max_antisymmetry_residual": residual,
                               "antisymmetry_bound": 2 * TRACKING_BOUND})
