import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from quasilab import spectra as S
from quasilab.atlas import AtlasDomain
from quasilab.errors import TooFewScales, WindowEmpty
from quasilab.repellers import carleson_linear, koch, twisted_koch


def brute_words(spec, delta, max_len=8):
    """All admissible words with product of scales equal to delta (up to 1e-9 in log)."""
    out = []
    for n in range(1, max_len + 1):
        for w in itertools.product(range(spec.n_letters), repeat=n):
            if not spec.admissible(w):
                continue
            d = math.prod(spec.maps[x].scale for x in w)
            if abs(math.log(d) - math.log(delta)) < 1e-9:
                out.append(w)
    return sorted(out)


def brute_prefix_free(words):
    out = []
    for w in words:
        if any(w[: len(v)] == v or v[: len(w)] == w for v in out):
            continue
        out.append(w)
    return out


def test_parse_signs():
    assert S.parse_signs("both") == ("b", "b")
    assert S.parse_signs("+-") == ("+", "-")
    for bad in ("+", "x+", "+++", ""):
        with pytest.raises(ValueError):
            S.parse_signs(bad)


@given(st.floats(-30, 0), st.floats(0.1, 3), st.floats(0.01, 1))
def test_two_sided_is_both_one_sided(lv, center, eta):
    ld = math.log(1e-3)
    b = S.passes(lv, ld, center, eta, "b")
    assert b == (S.passes(lv, ld, center, eta, "+") and S.passes(lv, ld, center, eta, "-"))


def test_passes_direction():
    ld = math.log(0.01)
    # value delta**1.5 sits below delta**1 (so fails "+" at centre 1, eta 0.2) and passes "-"
    v = 1.5 * ld
    assert not S.passes(v, ld, 1.0, 0.2, "+")
    assert S.passes(v, ld, 1.0, 0.2, "-")
    assert S.passes(v, ld, 1.5, 0.2, "b")


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_koch_multi_indices(m):
    # four equal scales: compositions of m into four parts
    idx = S.word_index_set(koch(), 3.0 ** -m)
    assert len(idx) == math.comb(m + 3, 3)
    assert all(sum(k) == m for k in idx)


def test_carleson_multi_indices():
    # scales 1/3 (two letters), 1/9 (four letters): delta = 1/9 needs two thirds or one ninth
    idx = S.word_index_set(carleson_linear(), 1 / 9)
    assert len(idx) == 3 + 4


@pytest.mark.parametrize("spec,delta", [(koch(), 3.0 ** -3), (carleson_linear(), 1 / 9),
                                        (carleson_linear(), 1 / 27), (twisted_koch(0.15), 3.0 ** -2)])
def test_words_in_window_vs_brute(spec, delta):
    got = S.words_in_window(spec, delta)
    assert got == brute_words(spec, delta, max_len=4)


@given(st.lists(st.lists(st.integers(0, 2), min_size=1, max_size=4).map(tuple), max_size=30))
def test_prefix_free(words):
    got = S.prefix_free(words)
    assert got == brute_prefix_free(words)
    for u, v in itertools.combinations(got, 2):
        assert u[: len(v)] != v and v[: len(u)] != u


def _brute_word_count(spec, delta, alpha, gamma, eta, signs):
    sm, sr = S.parse_signs(signs)
    ld = math.log(delta)
    ok = []
    for w in brute_words(spec, delta, max_len=6):
        lm = sum(math.log(spec.surrogate_weights[x]) for x in w)
        lr = sum(spec.maps[x].angle for x in w)
        if S.passes(lm, ld, alpha, eta, sm) and (gamma is None or S.passes(lr, ld, gamma, eta, sr)):
            ok.append(w)
    return len(brute_prefix_free(ok))


@pytest.mark.parametrize("spec,delta,alpha,gamma,eta,signs", [
    (koch(), 3.0 ** -4, math.log(4) / math.log(3), 0.0, 0.2, "bb"),
    (koch(), 3.0 ** -4, math.log(4) / math.log(3), 0.0, 0.05, "b+"),
    (koch(), 3.0 ** -4, 1.3, None, 0.1, "bb"),
    (twisted_koch(0.15), 3.0 ** -4, 1.26, 0.1, 0.2, "b-"),
    (carleson_linear(), 3.0 ** -4, 1.2, None, 0.3, "bb"),
])
def test_word_count_vs_brute(spec, delta, alpha, gamma, eta, signs):
    got = S.word_count(spec, delta, alpha, gamma, eta, signs)
    assert got.count == _brute_word_count(spec, delta, alpha, gamma, eta, signs)


def balanced_count(m, kmax):
    """Koch words of length m with angle sum k*pi/3, |k| <= kmax: two zero letters, one +, one -."""
    total = 0
    for p in range(m + 1):
        for n in range(m - p + 1):
            if abs(p - n) <= kmax:
                total += math.factorial(m) // (math.factorial(p) * math.factorial(n) * math.factorial(m - p - n)) \
                    * 2 ** (m - p - n)
    return total


@pytest.mark.parametrize("eta,kmax", [(0.2, 0), (0.3, 1), (0.5, 2)])
def test_koch_word_count_closed_form(eta, kmax):
    # rotation window |theta| < eta log(81) admits |k| pi/3 below it
    assert kmax * math.pi / 3 < eta * math.log(81) < (kmax + 1) * math.pi / 3
    res = S.word_count(koch(), 3.0 ** -4, math.log(4) / math.log(3), 0.0, eta, "bb")
    assert res.candidates == 256
    assert res.count == balanced_count(4, kmax)


def test_balanced_count_values():
    assert balanced_count(4, 0) == 70
    assert balanced_count(4, 4) == 256


def test_crosscut_koch_single_generation():
    # window [q/2, 2q] with q = 4^-3 holds exactly the 64 generation-3 cylinders
    res = S.crosscut_count(koch(), 1 - 4.0 ** -3, 0.0, -10.0)
    assert res.count == 64
    assert all(len(w) == 3 for w in res.words)


def test_crosscut_window_empty():
    # [q/1.1, 1.1 q] with q between 4^-3 and 4^-2 misses every cylinder measure
    with pytest.raises(WindowEmpty):
        S.crosscut_count(koch(), 1 - 0.5 * (4.0 ** -2 + 4.0 ** -3), 0.0, -10.0, W=1.1)


def test_fit_exponent_exact_power_law():
    rows = [(s, 7.0 * s ** -1.37) for s in (0.1, 0.03, 0.01, 0.003)]
    fit = S.fit_exponent(rows)
    assert fit.slope == pytest.approx(1.37, abs=1e-10)
    assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-10)
    assert fit.residual < 1e-10


def test_fit_exponent_excludes_zero_rows():
    rows = [(0.1, 10.0), (0.01, 0.0), (0.001, 1000.0), (1e-4, 1e4)]
    fit = S.fit_exponent(rows)
    assert fit.excluded == [(0.01, 0.0)]
    assert fit.slope == pytest.approx(1.0)
    with pytest.raises(TooFewScales):
        S.fit_exponent([(0.1, 1.0), (0.01, 0.0), (0.001, 5.0)])


def test_query_validation():
    with pytest.raises(ValueError):
        S.SpectrumQuery("word", "bb", (1.2, 0.0), 0.1, (0.1, 0.2))
    with pytest.raises(ValueError):
        S.SpectrumQuery("spiral", "bb", (1.2, 0.0), 0.1, (0.1,))
    with pytest.raises(ValueError):
        S.SpectrumQuery("word", "bb", (1.2, 0.0), 0.0, (0.1,))
    with pytest.raises(ValueError):
        S.SpectrumQuery("distortion", "bb", (1.0, 0.0), 0.1, (0.1,))


def test_word_query_table():
    q = S.SpectrumQuery("word", "bb", (math.log(4) / math.log(3), None), 0.05, tuple(3.0 ** -m for m in (2, 3, 4)))
    table = S.run_query(q, spec=koch())
    # near the dimension every word passes: 4^m words
    assert [r.count for r in table.rows] == [16, 64, 256]
    assert table.fit.slope == pytest.approx(math.log(4) / math.log(3))
    assert table.to_csv().splitlines()[0] == "scale,count,value,exponent"


def test_disk_packing_bounded_by_perimeter():
    disk = AtlasDomain.disk().jordan_domain
    res = S.packing_count(disk, 1e-3, 1.0, None, 0.2, "bb", walks=100_000, seed=1)
    # disjoint delta-disks centred on the unit circle: at most pi/delta of them
    assert 0.5 * math.pi / 1e-3 < res.count <= math.pi / 1e-3
    centers = res.centers
    for a, b in zip(centers, centers[1:]):
        assert abs(a - b) >= 2e-3


def test_disk_distortion_full_count():
    disk = AtlasDomain.disk().jordan_domain
    res = S.distortion_count(disk, 1 - 2.0 ** -8, 0.0, 0.0, 0.9, walks=100_000, seed=3)
    assert res.arcs == 256
    assert res.count == 256
    assert res.d_exponent == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 1.6), st.floats(-0.4, 0.4), st.floats(0.02, 0.3), st.floats(0.0, 0.3),
       st.sampled_from(["++", "+-", "-+", "--"]), st.integers(2, 4))
def test_counts_monotone_in_eta_and_two_sided_smallest(alpha, gamma, eta, extra, signs, m):
    spec = twisted_koch(0.2)
    d = 3.0 ** -m
    small = S.word_count(spec, d, alpha, gamma, eta, signs).count
    assert small <= S.word_count(spec, d, alpha, gamma, eta + extra, signs).count
    both = S.word_count(spec, d, alpha, gamma, eta, "bb").count
    assert both <= small


def test_wide_window_keeps_every_word():
    # the middle letters carry different angles from the outer ones, so only a wide-open window keeps all
    spec = twisted_koch(0.15)
    d = 3.0 ** -3
    assert S.word_count(spec, d, 1.26, 0.0, 100.0, "bb").count == 4 ** 3


def test_crosscut_rotation_floor_extremes():
    q = 4.0 ** -3
    spec = twisted_koch(0.15)
    assert S.crosscut_count(spec, 1 - q, 0.0, -1e6).count == 64
    # symbolic rotation of a length-3 word is at most 3 * max |angle|, far below a floor of 1e6 * L
    assert S.crosscut_count(spec, 1 - q, 0.0, 1e6).count == 0


def test_distortion_zero_for_a_at_least_one():
    disk = AtlasDomain.disk().jordan_domain
    res = S.distortion_count(disk, 1 - 2.0 ** -6, 1.0, 0.0, 0.05, walks=20_000, seed=3)
    assert res.count == 0


def test_fit_constant_counts_slope_zero():
    fit = S.fit_exponent([(3.0 ** -m, 17.0) for m in range(2, 7)])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
