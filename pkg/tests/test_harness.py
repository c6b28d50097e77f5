import math

import numpy as np
import pytest
from oracles import max_packing
from scipy import stats

from unibw import harness, io
from unibw.errors import ConfigInvalid, TargetOutsideBall, UnibwError
from unibw.geometry import FiniteFunctional, extreme_point, gram
from unibw.grids import Box
from unibw.kernels import Kernel, KernelFamily, indicator_family
from unibw.densities import UniformDensity

SMALL = harness.ExperimentConfig(n_list=(300, 3000), R=6, conc_n=2000, conc_levels=4, pois_n=2000,
                                 pois_h=0.02, rho=1.3)


def test_defaults_validate():
    harness.ExperimentConfig().validate()


@pytest.mark.parametrize("kw", [
    {"R": 0}, {"a_lo": 0.8}, {"n_list": (1000, 100)}, {"rho": 1.0}, {"delta": 0.0}, {"threads": 0},
    {"H": Box([0.1], [1.9]), "n_list": (100,)},
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigInvalid):
        harness.replace(SMALL, **kw).validate()


def test_config_mapping_round_trip():
    cfg = harness.ExperimentConfig.from_mapping(SMALL.to_mapping())
    assert cfg.to_mapping() == SMALL.to_mapping()


def test_summary_and_trend():
    s = harness.summarize([1.0, 2.0, 3.0, 4.0])
    assert s["median"] == 2.5 and s["se_median"] == pytest.approx(math.sqrt(math.pi / 2) * s["sd"] / 2)
    v = harness.trend_verdict([1.0, 1.05, 0.8], [0.1, 0.1, 0.1])
    assert v["nonincreasing"] and v["final_below_initial"]
    assert not harness.trend_verdict([1.0, 2.0], [0.1, 0.1])["nonincreasing"]


def test_replication_streams_are_distinct_and_stable():
    a = harness.replication_rng(0, "thm1-i", 0, 0).random(3)
    assert np.array_equal(a, harness.replication_rng(0, "thm1-i", 0, 0).random(3))
    assert not np.array_equal(a, harness.replication_rng(0, "thm1-i", 0, 1).random(3))
    assert not np.array_equal(a, harness.replication_rng(0, "cor11", 0, 0).random(3))


def test_thm1_i_deterministic_across_threads():
    r1 = harness.run_thm1_i(SMALL)
    r4 = harness.run_thm1_i(harness.replace(SMALL, threads=4))
    assert io.payload_bytes(r1) == io.payload_bytes(r4)
    for dist, norm in zip(r1.stats["sup_distance"], r1.stats["sup_norm"]):
        assert all(0 <= a <= b + 1e-9 for a, b in zip(dist, norm))
    assert len(r1.summary["sup_distance"]) == 2


def test_thm1_ii_zero_target_bounded_by_min_norm():
    fam = SMALL.family
    rep = harness.run_thm1_ii(SMALL, FiniteFunctional(np.zeros(len(fam)), fam))
    for gap, zero in zip(rep.stats["gap"], rep.stats["zero_target_gap"]):
        assert all(a <= b + 1e-12 for a, b in zip(gap, zero))
    with pytest.raises(TargetOutsideBall):
        harness.run_thm1_ii(SMALL, FiniteFunctional(1.2 ** 0.5 * extreme_point(gram(fam), [1, 0, 0, 0]).y))


def test_cor11_small():
    rep = harness.run_cor11(SMALL)
    sup = rep.stats["sup"]
    inf = rep.stats["inf"]
    assert all(a >= b for x, y in zip(sup, inf) for a, b in zip(x, y))
    assert rep.target == {"sup": 1.0, "inf": -1.0}


def test_concentration_censoring_and_single_level():
    rep = harness.run_concentration(harness.replace(SMALL, conc_c=5.0))
    rows = rep.summary["levels"]
    cens = [r for r in rows if r["censored"]]
    assert cens and all(r["p_hat"] == pytest.approx(1 / (SMALL.R + 1)) for r in cens)
    one = harness.run_concentration(harness.replace(SMALL, conc_levels=1))
    assert all(f["slope"] is None and "skipped" in f for f in one.summary["fits"])
    assert one.verdict == {"fitted": False}


def test_concentration_rejects_bad_ratios():
    with pytest.raises(ConfigInvalid):
        harness.run_concentration(SMALL, rho0_over_tau=(0.0,))


def test_chernoff_examples():
    rep = harness.chernoff_check([1, 10])
    r1, r10 = rep["rows"]
    assert r1["exact"] == pytest.approx(0.08030, abs=1e-5) and r1["bound"] == pytest.approx(0.67957, abs=1e-5)
    assert r10["exact"] == pytest.approx(0.00159, abs=1e-5) and r10["bound"] == pytest.approx(0.02100, abs=1e-5)
    assert rep["all_hold"] and rep["bound_decreasing"]
    with pytest.raises(UnibwError):
        harness.chernoff_check([0])


def test_chernoff_third_route():
    for n in (1, 5, 50, 200):
        assert harness.poisson_tail_sum(n) == pytest.approx(stats.poisson.sf(2 * n, n), rel=1e-9)


def test_covering_examples():
    same = KernelFamily((Kernel("indicator", 1, (0.3,)),) * 5)
    probe = UniformDensity(0, 1)
    rep = harness.estimate_covering(same, [0.1, 0.5], probe, 200, 0)
    assert [r["packing"] for r in rep["rows"]] == [1, 1]
    fam = indicator_family(np.arange(16) / 16)
    rep = harness.estimate_covering(fam, [0.3], probe, 400, 1)
    X = probe.sample(harness.replication_rng(1, "covering", 0, 0), 400)
    V = np.array([K(X[:, 0]) for K in fam])
    assert rep["rows"][0]["packing"] == max_packing(V, 0.3)


def test_poissonization_threshold_zero():
    rep = harness.poissonization_gap(harness.replace(SMALL, pois_threshold=0.0))
    v = rep.verdict
    assert v["p_G"] == 1.0 and v["p_G_poisson"] == 1.0 and v["ratio"] == 1.0


def test_poissonization_deterministic():
    a = harness.poissonization_gap(SMALL)
    b = harness.poissonization_gap(harness.replace(SMALL, threads=3))
    assert io.payload_bytes(a) == io.payload_bytes(b)


def test_report_dict_round_trip():
    rep = harness.run_cor11(harness.replace(SMALL, R=3))
    again = harness.StudyReport.from_dict(rep.to_dict())
    assert again.payload() == rep.payload() and again.wall_time == rep.wall_time
