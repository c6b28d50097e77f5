"""Acceptance criteria, one test each, run at the full study configuration.

Every test prints a ``criterion N PASS|FAIL`` line (also repeated in the
terminal summary) before asserting.
"""
import io as _io
import json
import time
from contextlib import redirect_stdout
from dataclasses import replace

import numpy as np
import pytest
from oracles import function_grid, grid_linf_distance, least_norm_rate, max_packing

from unibw import harness
from unibw.cli import main
from unibw.densities import UniformDensity
from unibw.geometry import (GramEllipsoid, extreme_point, gram, in_ball, indicator_gram, quadrature_gram, rate_J,
                            sup_distance_to_ball)
from unibw.kde import expected_kde, kde
from unibw.kernels import Kernel, KernelFamily, indicator_family, make_kernel
from unibw.process import eval_increment, stieltjes_band_identity

pytestmark = pytest.mark.slow

BASE = harness.ExperimentConfig()  # uniform on [0, 2], H = [0.5, 1.5], n = 1e3..1e5, R = 50, seed 0


def _spread_thresholds(rng, p, d, gap=0.05):
    while True:
        s = rng.uniform(0, 0.9, size=(p, d))
        if p == 1 or np.min(np.abs(np.diff(np.sort(s[:, 0])))) > gap:
            return s


def test_c01_gram_exactness(verdict):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        d = 1 + i % 2
        p = int(rng.integers(1, 9))
        s = rng.uniform(0, 1, size=(p, d))
        worst = max(worst, float(np.max(np.abs(indicator_gram(s) - quadrature_gram(indicator_family(s))))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 10
    verdict(1, "Gram closed form vs quadrature", ok, f"max abs diff {worst:.2e} (tol 1e-6), {dt:.2f}s (< 10s)")
    assert ok


def test_c02_rate_function_oracle(verdict):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        p = int(rng.integers(1, 4))
        fam = indicator_family(_spread_thresholds(rng, p, 1)[:, 0])
        E = gram(fam)
        c = rng.normal(size=p)
        y = E.M @ c / np.sqrt(c @ E.M @ c) * rng.uniform(0.2, 1.8)
        worst = max(worst, abs(rate_J(y, E) - least_norm_rate(function_grid(list(fam)), y)))
    edge = 0.0
    for _ in range(50):
        p = int(rng.integers(1, 6))
        E = gram(indicator_family(rng.uniform(0, 1, size=(p, 1 + p % 2))))
        edge = max(edge, abs(rate_J(extreme_point(E, rng.normal(size=p)), E) - 1.0))
    ok = worst <= 1e-3 and edge <= 1e-10
    verdict(2, "rate function vs least-norm search", ok,
            f"max |J - oracle| {worst:.2e} (tol 1e-3); max |J - 1| on boundary {edge:.1e} (tol 1e-10)")
    assert ok


def test_c03_sup_distance_oracle(verdict):
    rng = np.random.default_rng(103)
    worst = 0.0
    zero_ok = True
    for i in range(50):
        p = int(rng.integers(1, 4))
        k = int(rng.integers(1, p + 1))
        A = rng.normal(size=(p, k))
        M = A @ A.T
        E = GramEllipsoid.from_matrix(M)
        y = 1.5 * rng.normal(size=p)
        d = sup_distance_to_ball(y, E)
        worst = max(worst, abs(d - grid_linf_distance(M, y)))
        zero_ok &= (d == 0.0) == in_ball(y, E)
        inside = 0.9 * extreme_point(E, rng.normal(size=p)).y
        zero_ok &= sup_distance_to_ball(inside, E) == 0.0
    ok = worst <= 1e-3 and zero_ok
    verdict(3, "sup-distance vs grid search", ok,
            f"max abs diff {worst:.2e} (tol 1e-3); zero exactly inside the ball: {zero_ok}")
    assert ok


def test_c04_chernoff(verdict):
    t0 = time.perf_counter()
    rep = harness.chernoff_check(range(1, 201))
    dt = time.perf_counter() - t0
    ok = rep["all_hold"] and rep["max_disagreement"] <= 1e-10 and dt < 1
    verdict(4, "Poisson tail bound", ok,
            f"bound holds for n=1..200: {rep['all_hold']}; route disagreement {rep['max_disagreement']:.1e} "
            f"(tol 1e-10); {dt:.3f}s (< 1s)")
    assert ok


def test_c05_stieltjes_identity(verdict):
    K = make_kernel("triangular")
    dens = BASE.density
    n, h, z = 10**4, 0.01, 1.0
    s = np.linspace(0, 1, 2001)
    worst = 0.0
    for r in range(20):
        pts = dens.sample(np.random.default_rng([105, r]), n)[:, 0]
        stj = stieltjes_band_identity(eval_increment(pts, h, z, s, dens), K)
        direct = kde(pts, K, h, z).value - expected_kde(dens, K, h, z)
        worst = max(worst, abs(stj - direct))
    ok = worst <= 1e-3
    verdict(5, "Stieltjes route vs direct route", ok, f"max abs diff over 20 replications {worst:.2e} (tol 1e-3)")
    assert ok


def test_c06_band_trend(verdict):
    t0 = time.perf_counter()
    rep = harness.run_cor11(BASE)
    dt = time.perf_counter() - t0
    sup = [s["median"] for s in rep.summary["sup"]]
    inf = [s["median"] for s in rep.summary["inf"]]
    ok_sup = 0.6 <= sup[-1] <= 1.4 and rep.verdict["nonincreasing"]
    ok_inf = -1.4 <= inf[-1] <= -0.6 and rep.verdict["inf"]["nonincreasing"]
    ok = ok_sup and ok_inf and dt < 600
    verdict(6, "normalized KDE deviation trend", ok,
            f"sup medians {[round(v, 4) for v in sup]}, inf medians {[round(v, 4) for v in inf]}; "
            f"|median -+ 1| nonincreasing within 2 SE: sup {rep.verdict['nonincreasing']}, "
            f"inf {rep.verdict['inf']['nonincreasing']}; {dt:.0f}s")
    assert ok


def test_c07_distance_to_ball_trend(verdict):
    rep = harness.run_thm1_i(BASE)
    med = rep.verdict["tracked"]
    se = [s["se_median"] for s in rep.summary["sup_distance"]]
    ok = rep.verdict["nonincreasing"] and rep.verdict["final_below_initial"]
    verdict(7, "sup-distance to the ball trend", ok,
            f"medians {[round(v, 4) for v in med]} (SE {[round(v, 4) for v in se]}); "
            f"nonincreasing within 2 SE: {rep.verdict['nonincreasing']}; "
            f"final < initial: {rep.verdict['final_below_initial']}")
    assert ok


def test_c08_boundary_target_trend(verdict):
    E = gram(BASE.family)
    target = extreme_point(E, [1.0, 0.0, 0.0, 0.0], BASE.family)
    rep = harness.run_thm1_ii(BASE, target)
    med = rep.verdict["tracked"]
    ok = rep.verdict["nonincreasing"]
    verdict(8, "boundary target gap trend", ok,
            f"medians {[round(v, 4) for v in med]}; nonincreasing within 2 SE: {ok}")
    assert ok


def test_c09_concentration_shape(verdict):
    rep = harness.run_concentration(replace(BASE, R=400))
    v = rep.verdict
    fits = rep.summary["fits"]
    ok = (v.get("fitted", False) and v["all_negative"] and v["spearman"] == pytest.approx(1.0)
          and v["min_r2"] >= 0.8)
    slopes = [None if f["slope"] is None else round(f["slope"], 3) for f in fits]
    verdict(9, "tail-frequency slopes", ok,
            f"slopes {slopes} for ratios {list(rep.extras['ratios'])}; Spearman {v.get('spearman')}; "
            f"min R^2 {v.get('min_r2', float('nan')):.3f} (>= 0.8)")
    assert ok


SMALL_CFG = """
study.n = [300, 3000]
study.replications = 4
grid.rho = 1.3
conc.n = 2000
conc.levels = 4
poisson.n = 2000
poisson.h = 0.02
"""


def _stdout(argv):
    buf = _io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue().encode()


def test_c10_determinism(verdict, tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_CFG)
    studies = [["thm1-i"], ["thm1-ii"], ["cor11"], ["conc"], ["poissonize"], ["chernoff", "--n", "1,10,50"],
               ["covering", "--eps", "0.2,0.3,0.5", "--m-probe", "300"]]
    bad = []
    for st in studies:
        outs = set()
        for threads in ("1", "4"):
            for _ in range(2):
                code, out = _stdout(["verify", *st, "--config", str(cfg), "--seed", "7", "--threads", threads])
                if code != 0:
                    bad.append(f"{st[0]} exit {code}")
                outs.add(out)
        if len(outs) != 1:
            bad.append(st[0])
    ok = not bad
    verdict(10, "byte-identical verify payloads", ok,
            f"{len(studies)} subcommands x threads {{1, 4}} x 2 runs; mismatches: {bad or 'none'}")
    assert ok


def test_c11_covering(verdict):
    probe = UniformDensity(0, 1)
    fam16 = indicator_family(np.arange(16) / 16)
    rep = harness.estimate_covering(fam16, [0.2, 0.3, 0.5], probe, 500, 11)
    X = probe.sample(harness.replication_rng(11, "covering", 0, 0), 500)
    V = np.array([K(X[:, 0]) for K in fam16])
    exact = {e: max_packing(V, e) for e in (0.2, 0.3, 0.5)}
    greedy = {r["eps"]: r["packing"] for r in rep["rows"]}
    match = greedy == exact
    eps = [0.05, 0.1, 0.2, 0.3, 0.5, 0.8]
    families = {
        "indicators16": (fam16, probe),
        "indicators2d": (indicator_family(np.random.default_rng(5).uniform(0, 1, (12, 2))), UniformDensity([0, 0], [1, 1])),
        "smooth": (KernelFamily((make_kernel("uniform"), make_kernel("triangular"),
                                 Kernel("polynomial", 1, (0.0, 1.0)), Kernel("polynomial", 1, (1.0, -1.0)),
                                 Kernel("polynomial", 1, (0.0, 0.0, 1.0)))), probe),
    }
    mono = {name: harness.estimate_covering(f, eps, pr, 500, 3)["nonincreasing"] for name, (f, pr) in families.items()}
    ok = match and all(mono.values())
    verdict(11, "greedy packing vs exhaustive", ok,
            f"greedy {greedy} vs exhaustive {exact}; nonincreasing in eps: {mono}")
    assert ok
