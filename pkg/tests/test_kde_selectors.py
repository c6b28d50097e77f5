import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import normal_mise_optimum

from unibw.densities import NormalMixture, UniformDensity
from unibw.errors import DegenerateSample, NonPositiveDensity
from unibw.kde import band_cor11, band_half_width, expected_kde, kde, kde_many, l2_norm_sq, KdeEstimate
from unibw.kernels import make_kernel
from unibw.selectors import plugin_density, random_bandwidth_check, sheather_jones, silverman


def test_kde_examples():
    assert kde([0.5], make_kernel("uniform"), 0.5, 0.25).value == 2.0
    assert kde([0.9], make_kernel("uniform"), 0.1, 0.25).value == 0.0


def test_expected_kde_examples():
    U01 = UniformDensity(0, 1)
    assert expected_kde(U01, make_kernel("uniform"), 0.2, 0.3) == pytest.approx(1.0)
    assert expected_kde(UniformDensity(0, 0.5), make_kernel("uniform"), 0.1, 0.2) == pytest.approx(2.0)
    assert expected_kde(U01, make_kernel("triangular"), 0.2, 0.3) == pytest.approx(0.5)


def test_l2_norms():
    assert l2_norm_sq(make_kernel("uniform")) == pytest.approx(1.0)
    assert l2_norm_sq(make_kernel("polynomial", coeffs=[0, 1])) == pytest.approx(1 / 3)
    assert l2_norm_sq(make_kernel("triangular")) == pytest.approx(1 / 3)


def test_band_examples():
    assert band_half_width(10**4, 0.01, 1.0, 1.0) == pytest.approx(math.sqrt(2 * math.log(100) / 100))
    assert band_half_width(10**4, 0.01, 1.0, 4.0) == pytest.approx(2 * band_half_width(10**4, 0.01, 1.0, 1.0))
    with pytest.raises(NonPositiveDensity):
        band_half_width(10**4, 0.01, 0.0, 1.0)
    b = band_cor11(KdeEstimate(1.0, 10**4, 0.01, (0.5,)), 1.0, make_kernel("uniform"))
    assert b.lower == pytest.approx(1 - 0.30349, abs=1e-5) and b.upper == pytest.approx(1.30349, abs=1e-5)


@given(st.lists(st.floats(0, 2), min_size=1, max_size=50), st.floats(0.01, 0.9))
def test_kde_many_matches_pointwise(pts, h):
    K = make_kernel("triangular")
    z = np.array([0.1, 0.7, 1.3])
    many = kde_many(pts, K, h, z[:, None])
    assert many == pytest.approx([kde(pts, K, h, zz).value for zz in z])
    assert np.all(many >= 0)


def test_silverman_hand_formula():
    x = np.random.default_rng(0).normal(size=10**4)
    sd = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    want = 0.9 * min(sd, (q75 - q25) / 1.34) * x.size ** -0.2
    assert silverman(x).h_star == pytest.approx(want, rel=1e-12)
    with pytest.raises(DegenerateSample):
        silverman(np.ones(10))


def test_sheather_jones_against_mise_optimum():
    x = np.random.default_rng(0).normal(size=10**4)
    h = sheather_jones(x).h_star
    h_opt = normal_mise_optimum(x.size)
    assert abs(h - h_opt) <= 0.25 * h_opt


def test_sheather_jones_scale_equivariance():
    x = np.random.default_rng(1).normal(size=2000)
    for c in (0.01, 3.7, 250.0):
        assert sheather_jones(c * x).h_star == pytest.approx(c * sheather_jones(x).h_star, rel=1e-6)


def test_sheather_jones_bimodal_below_silverman():
    dens = NormalMixture([0.5, 0.5], [-2, 2], [0.5, 0.5])
    x = dens.sample(np.random.default_rng(2), 5000)[:, 0]
    assert sheather_jones(x).h_star < silverman(x).h_star


def test_selectors_deterministic():
    x = np.random.default_rng(3).normal(size=500)
    assert sheather_jones(x) == sheather_jones(x.copy())
    assert silverman(x) == silverman(x.copy())


def test_plugin_density_reports_source():
    x = np.random.default_rng(4).normal(size=3000)
    vals, src = plugin_density(x, [0.0])
    assert vals[0] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=0.1)
    assert src["method"] == "sheather-jones" and src["kernel"] == "gaussian"


def test_random_bandwidth_examples():
    ns = [10**k for k in range(2, 8)]
    assert random_bandwidth_check([(n, n ** -0.2) for n in ns])["pass"]
    # log log n / log n drops below 0.1 only once log n exceeds about 36
    big = [10**k for k in range(2, 21, 2)]
    r = random_bandwidth_check([(n, 1 / math.log(n)) for n in big])
    assert not r["pass"] and r["witness"]["n"] == big[-1]
    assert r["rows"][0]["inside"]
    assert not random_bandwidth_check([(n, 1 / n) for n in ns])["pass"]
