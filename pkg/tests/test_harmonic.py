import csv
import io
import math

import numpy as np
import pytest
from scipy import stats

from quasilab.atlas import AtlasDomain, half_disk_measure
from quasilab.errors import EmptyIntersection, MaxStepsExceeded
from quasilab.geometry import Disk
from quasilab.harmonic import (
    BoundaryArc,
    BoundaryIndex,
    default_eps_hit,
    disk_components,
    doubling_check,
    measure_of_disk,
    measure_of_set,
    representative_arc,
    sample_hits,
    write_histogram_csv,
)
from quasilab.repellers import generate_prefractal, koch

from conftest import polygon_domain


@pytest.fixture(scope="module")
def disk():
    return AtlasDomain.disk().jordan_domain


@pytest.fixture(scope="module")
def disk_sample(disk):
    return sample_hits(disk, 20_000, seed=1)


def test_disk_arcs_match_length(disk, disk_sample):
    # harmonic measure from the center of the unit disk is normalized arclength
    total = disk.boundary.length
    for k in range(10):
        s0 = total * k / 10
        s1 = s0 + total * 0.07
        est = disk_sample.estimate(disk_sample.count_arclength(s0, s1))
        assert abs(est.value - 0.07) <= 4 * est.std_error


def test_disk_uniformity(disk_sample):
    counts = np.histogram(disk_sample.arclength, bins=16, range=(0, disk_sample.domain.boundary.length))[0]
    assert stats.chisquare(counts).pvalue > 1e-3


def test_half_disk_against_closed_form():
    n = 1024
    t = np.pi * np.arange(n + 1) / n
    semicircle = np.exp(1j * t)
    diameter = np.linspace(-1, 1, 65)[1:-1]
    dom = polygon_domain(np.concatenate([semicircle, diameter]), 0.5j, "half-disk")
    hs = sample_hits(dom, 20_000, seed=4)
    est = measure_of_set(dom, np.arange(n), 20_000, sample=hs)
    assert abs(est.value - half_disk_measure(0.5j)) <= 4 * est.std_error


def test_square_sides_by_symmetry(unit_square):
    hs = sample_hits(unit_square, 20_000, seed=2)
    for side in range(4):
        est = measure_of_set(unit_square, [side], 20_000, sample=hs)
        assert abs(est.value - 0.25) <= 4 * est.std_error


def test_sampling_is_deterministic(unit_square):
    a = sample_hits(unit_square, 3000, seed=11)
    b = sample_hits(polygon_domain(unit_square.boundary.vertices, 0j), 3000, seed=11)
    assert np.array_equal(a.segment, b.segment)
    assert np.array_equal(a.parameter, b.parameter)
    c = sample_hits(polygon_domain(unit_square.boundary.vertices, 0j), 3000, seed=12)
    assert not np.array_equal(a.parameter, c.parameter)


def test_prefix_property(unit_square):
    # walk k depends only on (seed, k): a larger batch extends a smaller one
    dom = polygon_domain(unit_square.boundary.vertices, 0j)
    small = sample_hits(dom, 500, seed=3)
    big = sample_hits(polygon_domain(unit_square.boundary.vertices, 0j), 1500, seed=3)
    assert np.array_equal(small.parameter, big.parameter[:500])


def test_hits_lie_on_the_boundary(unit_square):
    hs = sample_hits(unit_square, 2000, seed=5)
    d, _, _ = unit_square.boundary.index.nearest_many(hs.points)
    assert np.max(d) < 1e-12
    assert hs.eps_hit == pytest.approx(default_eps_hit(unit_square))


def test_max_steps(unit_square):
    with pytest.raises(MaxStepsExceeded):
        sample_hits(polygon_domain(unit_square.boundary.vertices, 0j), 50, seed=1, max_steps=1)


def test_koch_cylinders_partition_arc_measure():
    dom = generate_prefractal(koch(), 4)
    hs = sample_hits(dom, 20_000, seed=6)
    arc_hits = int(hs.histogram[dom.arc.arc_segments].sum())
    parts = sum(measure_of_set(dom, tuple(map(int, w)), 20_000, sample=hs).hits for w in koch().words(2))
    assert parts == arc_hits
    # the snowflake has threefold symmetry: the arc carries a third of the measure
    est = hs.estimate(arc_hits)
    assert abs(est.value - 1 / 3) <= 4 * est.std_error
    words = BoundaryIndex(dom).owner_words(1)
    assert set(np.unique(words)) == {-1, 0, 1, 2, 3}


def test_boundary_arc_and_disk_measures(disk, disk_sample):
    est = measure_of_disk(disk, Disk(1 + 0j, 0.2), 20_000, sample=disk_sample)
    # the chord of length 0.2 from 1 subtends angle 2 asin(0.1) on each side
    exact = 4 * math.asin(0.1) / (2 * math.pi)
    assert abs(est.value - exact) <= 4 * est.std_error
    with pytest.raises(EmptyIntersection):
        measure_of_disk(disk, Disk(0j, 0.5), 20_000, sample=disk_sample)
    comps = disk_components(disk, Disk(1 + 0j, 0.2))
    assert len(comps) == 1
    arc = comps[0]
    assert isinstance(arc, BoundaryArc)
    m = measure_of_set(disk, arc, 20_000, sample=disk_sample)
    assert m.hits == est.hits


def test_representative_arc_window(disk, disk_sample):
    rep = representative_arc(disk, Disk(1 + 0j, 0.1), 20_000, sample=disk_sample)
    lo, hi = rep.window
    assert lo < rep.measure.value <= hi


def test_doubling_disk_is_small(disk):
    rec = doubling_check(disk, trials=50, walks=20_000, seed=7, min_hits=100)
    assert 1.0 <= rec.c_disk < 4.0
    assert 1.0 <= rec.c_arc < 4.0


def test_histogram_csv():
    dom = generate_prefractal(koch(), 2)
    hs = sample_hits(dom, 2000, seed=8)
    buf = io.StringIO()
    write_histogram_csv(buf, hs, depth=1)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["segment", "word", "hits"]
    assert len(rows) == dom.boundary.n_segments + 1
    assert sum(int(r[2]) for r in rows[1:]) == 2000
    assert {r[1] for r in rows[1:]} == {"", "0", "1", "2", "3"}
