"""Closed-form Riemann maps used as ground truth.

Every map has the form phi(z) = 1 - (1 - z)**c on the unit disk with a
principal branch, so phi(0) = 0 and the boundary has a single tip at phi(1) = 1:

* Disk:              c = 1 (identity)
* Wedge(a):          c = a, a corner of opening a*pi at the tip
* SpiralWedge(a, b): c = a + ib, a corner that also spirals as b*log|1 - z|
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import ArcTooLong, InvalidDomain, NotSimple, OutsideDisk
from .geometry import Polyline, point_set_diameter
from .repellers import JordanDomain

KINDS = ("disk", "wedge", "spiral_wedge")
MIN_RESOLUTION = 2**14
TIP_DISTANCE = 1e-7


@dataclass(frozen=True, eq=False)
class AtlasDomain:
    """A domain with an explicit conformal map from the unit disk.

    Attributes:
        kind: "disk", "wedge" or "spiral_wedge".
        alpha: real part of the exponent.
        beta: imaginary part of the exponent (spiral_wedge only).
        resolution: uniform boundary samples before tip refinement.
    """

    kind: str
    alpha: float = 1.0
    beta: float = 0.0
    resolution: int = MIN_RESOLUTION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown atlas kind {self.kind!r}")
        if self.kind == "disk" and (self.alpha != 1.0 or self.beta != 0.0):
            raise ValueError("the disk kind takes no parameters")
        if self.kind == "wedge":
            if not (0.5 <= self.alpha <= 1.5):
                raise InvalidDomain("wedge exponent must lie in [0.5, 1.5]")
            if self.beta != 0.0:
                raise ValueError("use spiral_wedge for a nonzero beta")
        if self.kind == "spiral_wedge":
            if not (0.6 <= self.alpha <= 1.4) or abs(self.beta) > 0.3:
                raise InvalidDomain("spiral wedge needs alpha in [0.6, 1.4] and |beta| <= 0.3")
        if self.resolution < MIN_RESOLUTION:
            raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
        if not self.boundary_polyline.is_simple():
            raise NotSimple(f"{self.kind} boundary is not simple at these parameters")

    @classmethod
    def disk(cls, **kw):
        return cls("disk", **kw)

    @classmethod
    def wedge(cls, alpha, **kw):
        return cls("wedge", alpha, **kw)

    @classmethod
    def spiral_wedge(cls, alpha, beta, **kw):
        return cls("spiral_wedge", alpha, beta, **kw)

    @property
    def exponent(self):
        return complex(self.alpha, self.beta)

    @property
    def basepoint(self):
        return 0j

    @property
    def name(self):
        if self.kind == "disk":
            return "disk"
        if self.kind == "wedge":
            return f"wedge({self.alpha:g})"
        return f"spiral_wedge({self.alpha:g},{self.beta:g})"

    def phi(self, z):
        z = _inside(z)
        if self.kind == "disk":
            return z
        return 1 - np.exp(self.exponent * np.log(1 - z))

    def phi_prime(self, z):
        z = _inside(z)
        if self.kind == "disk":
            return np.ones_like(z)
        c = self.exponent
        return c * np.exp((c - 1) * np.log(1 - z))

    def arg_phi_prime(self, z):
        """Continuous branch of arg phi' with arg phi'(0) in (-pi, pi]."""
        z = _inside(z)
        w = 1 - z
        return math.atan2(self.beta, self.alpha) + (self.alpha - 1) * np.angle(w) + self.beta * np.log(np.abs(w))

    def log_abs_phi_prime(self, z):
        z = _inside(z)
        w = 1 - z
        return math.log(abs(self.exponent)) + (self.alpha - 1) * np.log(np.abs(w)) - self.beta * np.angle(w)

    def boundary_point(self, t):
        """phi(exp(it)) for t in [0, 2pi), using 1 - e^{it} = 2 sin(t/2) e^{i(t/2 - pi/2)}."""
        t = np.mod(np.asarray(t, dtype=float), 2 * math.pi)
        s = 2 * np.sin(t / 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_w = np.log(s) + 1j * (t / 2 - math.pi / 2)
            out = 1 - np.exp(self.exponent * log_w)
        return np.where(s > 0, out, 1 + 0j)

    @cached_property
    def vertex_params(self):
        """Boundary parameters: tip first, then increasing t; graded geometrically toward the tip."""
        n = self.resolution
        h = 2 * math.pi / n
        uniform = np.arange(1, n) * h
        if self.kind == "disk":
            return np.concatenate([[0.0], uniform])
        ratio = 1 + 1 / (10 * abs(self.exponent))
        # first graded vertex sits about TIP_DISTANCE from the tip
        t_min = max(1e-10, TIP_DISTANCE ** (1 / self.alpha))
        kmax = int(math.ceil(math.log(h / t_min) / math.log(ratio)))
        graded = t_min * ratio ** np.arange(kmax)
        graded = graded[graded < h]
        near = np.concatenate([graded, uniform[: n // 2]])
        return np.concatenate([[0.0], near, 2 * math.pi - near[-2::-1]])

    @cached_property
    def boundary_polyline(self):
        v = self.boundary_point(self.vertex_params)
        if self.kind == "disk":
            v = np.exp(1j * self.vertex_params)
        return Polyline(v, True)

    @cached_property
    def jordan_domain(self):
        return JordanDomain(self.boundary_polyline, 0j, f"atlas:{self.name}", vertex_param=self.vertex_params,
                            validate=False)

    def vertex_of_param(self, t):
        """Index of the boundary vertex whose parameter is nearest to t (mod 2pi)."""
        t = float(np.mod(t, 2 * math.pi))
        p = self.vertex_params
        d = np.abs(np.angle(np.exp(1j * (p - t))))
        return int(np.argmin(d))

    def arc_segments(self, t0, t1):
        """Boundary segments covering the parameter interval [t0, t1] snapped to vertices.

        Returns (segment indices, snapped preimage length).
        """
        i0 = self.vertex_of_param(t0)
        i1 = self.vertex_of_param(t1)
        n = self.vertex_params.size
        segs = np.arange(i0, i1 if i1 > i0 else i1 + n) % n
        p = self.vertex_params
        length = float(np.mod(p[i1] - p[i0], 2 * math.pi))
        return segs, length


def _inside(z):
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) >= 1):
        raise OutsideDisk("phi is evaluated on the open unit disk only")
    return z


@dataclass(frozen=True)
class ArcOnCircle:
    """Arc of the unit circle given by its center angle and length (radians)."""

    center: float
    length: float

    def __post_init__(self):
        if not (0 < self.length < math.pi):
            raise ValueError("arc length must lie in (0, pi)")

    @property
    def endpoints(self):
        return self.center - self.length / 2, self.center + self.length / 2


def representing_point(arc):
    if arc.length >= 0.5:
        raise ArcTooLong("representing points need arc length below 1/2")
    return complex(math.cos(arc.center), math.sin(arc.center)) * (1 - arc.length)


def exact_harmonic_measure(domain, t0, t1):
    """Harmonic measure at phi(0) of the image of the preimage interval [t0, t1]."""
    return (t1 - t0) / (2 * math.pi)


def half_disk_measure(z):
    """Harmonic measure of the semicircle in the upper half-disk, seen from z."""
    w = (1 + complex(z)) / (1 - complex(z))
    return 2 / math.pi * math.atan2(w.imag, w.real)


def image_arc(domain, arc, samples=4097):
    """Dense sample of phi(arc) graded toward the tip when the arc contains it."""
    t0, t1 = arc.endpoints
    u = np.linspace(-1.0, 1.0, samples)
    # cubic grading concentrates samples near the center of the arc (the tip for tip-centered arcs)
    if abs(np.angle(np.exp(1j * arc.center))) < arc.length:
        t = arc.center + (arc.length / 2) * u**3
    else:
        t = np.linspace(t0, t1, samples)
    return domain.boundary_point(t)


@dataclass(frozen=True)
class ProbeRecord:
    arc: ArcOnCircle
    point: complex
    exact_abs_derivative: float
    exact_exp_arg: float
    log_exact_abs: float
    exact_arg: float
    proxy_abs_derivative: float
    log_rot: float
    rot_error_bound: float


def main_lemma_probe(domain, arc, with_rotation=True):
    """Exact derivative data at the representing point next to its geometric proxies."""
    if arc.length >= 0.25:
        raise ArcTooLong("the probe needs arc length below 1/4")
    z = representing_point(arc)
    log_abs = float(domain.log_abs_phi_prime(z))
    arg = float(domain.arg_phi_prime(z))
    pts = image_arc(domain, arc)
    diam = point_set_diameter(pts)
    log_rot = float("nan")
    bound = float("nan")
    if with_rotation:
        from .rotation import rot_point

        poly = domain.boundary_polyline
        i = domain.vertex_of_param(arc.center)
        rv = rot_point(domain.jordan_domain, poly.vertices[i], diam)
        log_rot, bound = rv.log_rot, rv.additive_error_bound
    return ProbeRecord(arc, z, math.exp(log_abs), math.exp(arg), log_abs, arg, diam / arc.length, log_rot, bound)


@dataclass(frozen=True)
class ProbeScan:
    """Probe records over arc lengths 2**-k and the fitted trend of the derivative ratio in k."""

    ks: tuple
    records: tuple
    derivative_ratios: tuple
    rotation_ratios: tuple
    derivative_trend: float


def probe_scan(domain, ks=range(4, 13), center=0.0, with_rotation=True):
    """Run main_lemma_probe on arcs of length 2**-k centered at `center`.

    derivative ratio: log(proxy |phi'|) / log(exact |phi'|);
    rotation ratio: log rot / arg phi' at the representing point.
    """
    ks = tuple(int(k) for k in ks)
    recs = tuple(main_lemma_probe(domain, ArcOnCircle(center, 2.0**-k), with_rotation) for k in ks)
    dr = tuple(math.log(r.proxy_abs_derivative) / r.log_exact_abs if r.log_exact_abs else math.nan for r in recs)
    rr = tuple(r.log_rot / r.exact_arg if r.exact_arg else math.nan for r in recs)
    trend = float(np.polyfit(ks, dr, 1)[0]) if len(ks) >= 2 and all(map(math.isfinite, dr)) else math.nan
    return ProbeScan(ks, recs, dr, rr, trend)
