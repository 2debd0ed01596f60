"""Desk-scale acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary,
then asserts.  Run with `pytest tests/test_acceptance.py -v`.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from quasilab import spectra as S
from quasilab import verify as V
from quasilab.atlas import AtlasDomain, probe_scan
from quasilab.harmonic import sample_hits
from quasilab.repellers import generate_prefractal, koch, twisted_koch

from conftest import ACCEPTANCE

DIM = math.log(4) / math.log(3)


def record(n, name, passed, detail):
    line = f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return passed


def test_01_disk_harmonic_measure():
    t0 = time.time()
    disk = AtlasDomain.disk().jordan_domain
    hs = sample_hits(disk, 100_000, seed=1)
    total = disk.boundary.length
    worst = 0.0
    counts = []
    for k in range(20):
        h = hs.count_arclength(total * k / 20, total * (k + 1) / 20)
        est = hs.estimate(h)
        worst = max(worst, abs(est.value - 1 / 20) / est.std_error)
        counts.append(h)
    # boundary points shared by two arcs are counted twice only on exact ties
    p = stats.chisquare(counts).pvalue
    runtime = time.time() - t0
    ok = worst <= 3 and p > 1e-3 and runtime < 60
    record(1, "disk harmonic measure", ok, f"max |z| = {worst:.2f} (<= 3), chi2 p = {p:.3g}, {runtime:.1f}s")
    assert ok


def test_02_atlas_derivative_proxy():
    t0 = time.time()
    parts = []
    ok = True
    for dom in (AtlasDomain("wedge", 0.7), AtlasDomain("spiral_wedge", 1.0, 0.2),
                AtlasDomain("spiral_wedge", 1.0, -0.2)):
        scan = probe_scan(dom, range(4, 13), with_rotation=False)
        r12 = scan.derivative_ratios[-1]
        good = 0.9 <= r12 <= 1.1 and abs(scan.derivative_trend) <= 0.1
        ok &= good
        parts.append(f"{dom.kind}({dom.alpha:g},{dom.beta:g}) ratio@2^-12 = {r12:.3f}, trend = {scan.derivative_trend:.3f}")
    runtime = time.time() - t0
    ok &= runtime < 300
    record(2, "atlas derivative proxy", ok, "; ".join(parts) + f"; {runtime:.0f}s")
    assert ok


def test_03_atlas_rotation_proxy():
    parts = []
    ok = True
    for beta in (0.2, -0.2):
        dom = AtlasDomain("spiral_wedge", 1.0, beta)
        scan = probe_scan(dom, [10])
        r = scan.rotation_ratios[0]
        good = 0.85 <= r <= 1.15
        ok &= good
        parts.append(f"beta = {beta:+g}: log rot / arg = {r:.3f}")
    record(3, "atlas rotation proxy", ok, "; ".join(parts) + " (need [0.85, 1.15])")
    assert ok


def test_04_rotation_stability():
    dom = generate_prefractal(koch(), 6)
    rep = V.rotation_stability_scan(dom, 0.05, pairs=100, concentric=50, seed=3)
    s = rep.summary
    ok = rep.passed and s["center_pairs"] == 100 and s["radius_pairs"] == 50
    record(4, "rotation stability", ok,
           f"{s['center_pairs']} center pairs (max diff {s['max_center_difference']:.2f}), "
           f"{s['radius_pairs']} concentric (max diff {s['max_radius_difference']:.2f}), "
           f"violations {s['center_violations']}+{s['radius_violations']}")
    assert ok


@pytest.mark.slow
def test_05_koch_box_dimension():
    t0 = time.time()
    dom = generate_prefractal(koch(), 8)
    hs = sample_hits(dom, 1_000_000, seed=0)
    rows = []
    for m in range(4, 8):
        # eta = 50 opens both windows: a plain disjoint delta-disk count along the arc
        res = S.packing_count(dom, 3.0 ** -m, 1.26, 0.0, 50.0, "--", sample=hs, region="arc")
        rows.append((3.0 ** -m, res.count))
    fit = S.fit_exponent(rows)
    runtime = time.time() - t0
    ok = abs(fit.slope - DIM) <= 0.05 and runtime < 600
    record(5, "Koch box dimension", ok,
           f"slope {fit.slope:.4f} vs {DIM:.4f} +- 0.05, counts {[c for _, c in rows]}, {runtime:.0f}s")
    assert ok


@pytest.mark.slow
def test_06_distortion_exponent_one():
    parts = []
    ok = True
    for name, dom in (("disk", AtlasDomain.disk().jordan_domain), ("koch gen 6", generate_prefractal(koch(), 6))):
        hs = sample_hits(dom, 1_000_000, seed=5)
        for q in (2.0 ** -8, 2.0 ** -10):
            res = S.distortion_count(dom, 1 - q, 0.0, 0.0, 0.5, sample=hs)
            good = abs(res.d_exponent - 1) <= 0.1
            ok &= good
            parts.append(f"{name} 1-r=2^{round(math.log2(q))}: d = {res.d_exponent:.3f}")
    record(6, "d(0,0) = 1", ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_07_refined_carleson():
    t0 = time.time()
    letters = [(i,) for i in range(4)]
    sur = V.carleson_ratio_scan(koch(), letters, [1, 2, 3, 4], letters, 0, weights="surrogate",
                                triples_per_length=200)
    mc = V.carleson_ratio_scan(koch(), letters, [1, 2, 3, 4], letters, 10_000_000, seed=11, generation=7,
                               triples_per_length=200, max_rel_se=0.05)
    per = mc.summary["per_length"]
    runtime = time.time() - t0
    ok = sur.passed and mc.passed and runtime < 1800
    means = ", ".join(f"|Y|={m}: {per[m]['mean']:.4f}+-{per[m]['error']:.4f}" for m in sorted(per))
    record(7, "refined Carleson decay", ok,
           f"surrogate exact zero {sur.passed}; {means}; gap {mc.summary['gap']:.4f} vs 2 sigma "
           f"{mc.summary['two_sigma']:.4f}; {runtime:.0f}s")
    assert ok


def test_08_rotation_multiplicativity():
    rng = np.random.default_rng(0)
    pairs = [(tuple(int(x) for x in rng.integers(4, size=3)), tuple(int(x) for x in rng.integers(4, size=3)))
             for _ in range(50)]
    sym = V.rotation_multiplicativity_scan(twisted_koch(0.15), pairs, "symbolic")
    geo = V.rotation_multiplicativity_scan(koch(), pairs, "geometric")
    ok = sym.passed and geo.passed and len(geo.rows) == 50
    record(8, "rotation multiplicativity", ok,
           f"symbolic max deviation {sym.summary['max_deviation']}; geometric max {geo.summary['max_deviation']:.3f} "
           f"<= cushion {geo.tolerances['cushion']:.1f} on {len(geo.rows)} pairs")
    assert ok


def test_09_propagation():
    parts = []
    ok = True
    for alpha, gamma, eta in ((DIM, 0.0, 0.05), (DIM, 0.0, 0.2), (1.3, None, 0.1)):
        rep = V.propagation_check(koch(), 1 / 9, alpha, gamma, eta, n_max=4)
        ok &= rep.passed and [r["n"] for r in rep.rows] == [2, 3, 4]
        counts = ", ".join(f"{r['count']}>={r['power']}" for r in rep.rows)
        parts.append(f"({alpha:.4f},{gamma},{eta}): {counts}")
    record(9, "propagation", ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_10_relation():
    rep = V.relation_check(twisted_koch(0.15), [(-0.2, 0.0), (0.25, 0.0)], m=6, eta=0.5, walks=1_000_000,
                           seed=5, generation=7)
    parts = [f"(a,b)=({r['a']},{r['b']}): d={r['d_exponent']:.3f}, (1-a)f={r['scaled_f']:.3f}, "
             f"diff={r['difference']:.4f}" for r in rep.rows]
    record(10, "relation at desk scale", rep.passed, "; ".join(parts) + " (<= 0.15)")
    assert rep.passed


@pytest.mark.slow
def test_11_reflection():
    spec = twisted_koch(0.15)
    sur = V.reflection_check(spec, 3.0 ** -4, 1.4, 0.5, 0.3, "b+")
    mc = V.reflection_check(spec, 3.0 ** -4, 1.4, 0.5, 0.3, "b+", "mc", walks=1_000_000, seed=2, generation=6)
    ok = sur.passed and mc.passed
    record(11, "reflection symmetry", ok,
           f"surrogate {sur.summary['count']} vs {sur.summary['mirrored_count']}; mc {mc.summary['count']} vs "
           f"{mc.summary['mirrored_count']} (bar {mc.rows[0]['bar']:.1f}); rotation antisymmetry residual "
           f"{mc.summary['max_antisymmetry_residual']:.3f} <= {mc.summary['antisymmetry_bound']:.3f}")
    assert ok


def _cli(*args):
    out = subprocess.run([sys.executable, "-m", "quasilab.cli", *args], capture_output=True, timeout=1800)
    return out.returncode, out.stdout


@pytest.mark.slow
def test_12_determinism():
    commands = [
        ["pack", "--gen", "6", "--walks", "200000", "--seed", "4", "--delta", repr(3.0 ** -4),
         "--delta", repr(3.0 ** -5), "--alpha", "1.26", "--gamma", "0", "--eta", "50", "--signs", "--",
         "--region", "arc"],
        ["verify", "relation", "--preset", "twisted_koch", "--twist", "0.15", "--gen", "7", "--walks", "1000000",
         "--seed", "5", "--eta", "0.5", "--format", "json"],
        ["distortion", "--gen", "6", "--walks", "100000", "--seed", "5", "--scale", repr(2.0 ** -8),
         "--eta", "0.5"],
    ]
    ok = True
    parts = []
    for cmd in commands:
        a, b = _cli(*cmd), _cli(*cmd)
        same = a == b and a[0] in (0, 2) and len(a[1]) > 0
        ok &= same
        parts.append(f"{cmd[0]}{' ' + cmd[1] if cmd[0] == 'verify' else ''}: {'identical' if same else 'DIFFERENT'}")
    record(12, "determinism", ok, "; ".join(parts))
    assert ok
