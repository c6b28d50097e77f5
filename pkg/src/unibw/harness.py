"""Seeded Monte-Carlo studies of the uniform-in-bandwidth limit laws.

Every study is a pure function of its configuration: replication ``r`` at the
``k``-th sample size draws from its own generator, seeded from
``(seed, study, k, r)``, and results are reduced in index order, so reports
do not depend on the thread count.

Suprema over continuous ``(h, z)`` are taken over a geometric bandwidth net of
``[n**-a_hi, n**-a_lo]`` and, for each level, the anchors of a cube tiling of
the region ``H``.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import _kernels
from .densities import DensityModel, UniformDensity, density_from_mapping
from .errors import ConfigInvalid, TargetOutsideBall, UnibwError
from .geometry import BALL_TOL, gram, max_distance_to_ball, rate_J
from .grids import Box, make_bandwidth_grid, make_spatial_grid
from .kde import l2_norm_sq
from .kernels import Kernel, KernelFamily, indicator_family
from .process import family_expectations, kernel_sums
from .sample import Sample

STUDY_CODES = {"thm1-i": 1, "thm1-ii": 2, "cor11": 3, "conc": 4, "poissonize": 5, "covering": 6}
SE_MEDIAN_FACTOR = math.sqrt(math.pi / 2.0)


# ---------------------------------------------------------------------------
# configuration


def kernel_from_mapping(m):
    return Kernel(m["shape"], int(m.get("dim", 1)), tuple(m.get("coeffs", ())), float(m.get("scale", 1.0)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of a Monte-Carlo study.

    Bandwidth ranges are ``h_n = n**-a_hi`` and ``H_n = n**-a_lo``; ``rho`` and
    ``delta`` set the bandwidth net ratio and the cube-volume factor of the
    spatial tiling. The ``conc_*`` and ``pois_*`` knobs only affect the
    concentration and Poissonization studies.
    """

    density: DensityModel = field(default_factory=lambda: UniformDensity(0.0, 2.0))
    family: KernelFamily = field(default_factory=lambda: indicator_family([0.0, 0.25, 0.5, 0.75]))
    kernel: Kernel = field(default_factory=lambda: Kernel("uniform"))
    H: Box = field(default_factory=lambda: Box([0.5], [1.5]))
    a_lo: float = 0.3
    a_hi: float = 0.7
    n_list: tuple = (1000, 10000, 100000)
    R: int = 50
    rho: float = 1.1
    delta: float = 0.5
    seed: int = 0
    threads: int = 1
    conc_n: int = 10000
    conc_levels: int = 6
    conc_c: float = 0.4
    conc_ratios: tuple = (0.5, 1.0, 2.0)
    pois_n: int = 10000
    pois_h: float = 0.01
    pois_quantile: float = 0.9
    pois_threshold: float = -1.0

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "conc_ratios", tuple(float(r) for r in self.conc_ratios))
        object.__setattr__(self, "R", int(self.R))

    def validate(self):
        """Raise ``ConfigInvalid`` unless the study hypotheses hold."""
        if self.R < 1:
            raise ConfigInvalid(f"replications must be >= 1, got {self.R}")
        if not 0 < self.a_lo < self.a_hi < 1:
            raise ConfigInvalid(f"need 0 < a_lo < a_hi < 1, got a_lo={self.a_lo}, a_hi={self.a_hi}")
        ns = self.n_list
        if any(n < 2 for n in ns):
            raise ConfigInvalid("every n must be >= 2")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigInvalid("n list must be strictly increasing")
        for n in ns:
            if not n ** (self.a_hi - self.a_lo) > 2:
                raise ConfigInvalid(f"upper bandwidth must exceed twice the lower one at n={n}")
        if not self.rho > 1:
            raise ConfigInvalid("rho must exceed 1")
        if not self.delta > 0:
            raise ConfigInvalid("delta must be > 0")
        if self.threads < 1:
            raise ConfigInvalid("threads must be >= 1")
        d = self.family.dim
        if self.kernel.dim != d or self.density.dim != d or self.H.dim != d:
            raise ConfigInvalid("density, family, kernel and region must share one dimension")
        if ns:
            alpha = (1.0 + self.delta ** (1.0 / d)) * ns[0] ** (-self.a_lo / d)
            cert = self.density.certificate(self.H, alpha)
            if not cert["positive"]:
                raise ConfigInvalid("density is not bounded away from 0 around the region H")
        return self

    def bands(self, n):
        return n ** (-self.a_hi), n ** (-self.a_lo)

    def to_mapping(self):
        return {
            "density": self.density.to_mapping(),
            "family": [k.to_mapping() for k in self.family],
            "kernel": self.kernel.to_mapping(),
            "H": {"lo": self.H.lo.tolist(), "hi": self.H.hi.tolist()},
            "a_lo": self.a_lo, "a_hi": self.a_hi,
            "n_list": list(self.n_list), "R": self.R,
            "rho": self.rho, "delta": self.delta, "seed": self.seed,
            "conc_n": self.conc_n, "conc_levels": self.conc_levels, "conc_c": self.conc_c,
            "conc_ratios": list(self.conc_ratios),
            "pois_n": self.pois_n, "pois_h": self.pois_h, "pois_quantile": self.pois_quantile,
            "pois_threshold": self.pois_threshold,
        }

    @classmethod
    def from_mapping(cls, m):
        kw = dict(m)
        kw.pop("threads", None)
        if "density" in kw:
            kw["density"] = density_from_mapping(kw["density"])
        if "family" in kw:
            kw["family"] = KernelFamily(tuple(kernel_from_mapping(k) for k in kw["family"]))
        if "kernel" in kw:
            kw["kernel"] = kernel_from_mapping(kw["kernel"])
        if "H" in kw:
            kw["H"] = Box(kw["H"]["lo"], kw["H"]["hi"])
        return cls(**kw)


# ---------------------------------------------------------------------------
# reports


def summarize(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"count": 0}
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    q = np.quantile(v, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {
        "count": int(v.size), "mean": float(v.mean()), "median": float(q[2]), "sd": sd,
        "q05": float(q[0]), "q25": float(q[1]), "q75": float(q[3]), "q95": float(q[4]),
        "se_mean": sd / math.sqrt(v.size), "se_median": SE_MEDIAN_FACTOR * sd / math.sqrt(v.size),
    }


def trend_verdict(medians, ses, slack=2.0):
    """Nonincreasing medians up to ``slack`` pooled standard errors per step."""
    steps = []
    ok = True
    for k in range(len(medians) - 1):
        pooled = math.sqrt(ses[k] ** 2 + ses[k + 1] ** 2)
        step_ok = medians[k + 1] <= medians[k] + slack * pooled
        ok &= step_ok
        steps.append({"from": k, "to": k + 1, "change": medians[k + 1] - medians[k],
                      "allowance": slack * pooled, "ok": bool(step_ok)})
    return {"nonincreasing": bool(ok), "steps": steps,
            "final_below_initial": bool(len(medians) > 1 and medians[-1] < medians[0])}


@dataclass
class StudyReport:
    study: str
    config: dict
    seed: int
    n_list: list
    stats: dict
    summary: dict
    verdict: dict
    target: object = None
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def payload(self):
        """Everything except the wall time; identical across reruns with one seed."""
        return {
            "study": self.study, "config": self.config, "seed": self.seed,
            "n_list": list(self.n_list), "stats": self.stats, "summary": self.summary,
            "verdict": self.verdict, "target": self.target, "extras": self.extras,
        }

    def to_dict(self):
        d = self.payload()
        d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["study"], d["config"], d["seed"], list(d["n_list"]), d["stats"], d["summary"],
                   d["verdict"], d.get("target"), d.get("extras", {}), d.get("wall_time", 0.0))


def replication_rng(seed, study, n_index, rep):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(STUDY_CODES[study], int(n_index), int(rep)))
    return np.random.default_rng(ss)


def _run_replications(fn, R, threads):
    if threads <= 1 or R <= 1:
        return [fn(r) for r in range(R)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(R)))


# ---------------------------------------------------------------------------
# the (h, z) net for one sample size


@dataclass
class _Level:
    h: float
    anchors: np.ndarray
    scale: np.ndarray       # sqrt(2 f(z) n h log(1/h)) per anchor
    expect: np.ndarray      # (A, p) kernel expectations


def _plan(cfg, n, kernels):
    h_lo, h_hi = cfg.bands(n)
    grid = make_bandwidth_grid(h_lo, h_hi, cfg.rho)
    levels = []
    for h in grid.levels:
        sg = make_spatial_grid(cfg.H, cfg.delta, h)
        f = np.atleast_1d(cfg.density.pdf(sg.anchors))
        if np.any(f <= 0):
            raise ConfigInvalid("density vanishes at an anchor of H")
        scale = np.sqrt(2.0 * f * n * h * math.log(1.0 / h))
        levels.append(_Level(h, sg.anchors, scale, family_expectations(cfg.density, kernels, h, sg.anchors)))
    return grid, levels


def _normalized(sample, kernels, n, lv):
    sums = np.column_stack([kernel_sums(sample, K, lv.h, lv.anchors) for K in kernels])
    return (sums - n * lv.expect) / lv.scale[:, None]


def _draw(cfg, rng, n):
    return Sample(cfg.density.sample(rng, n), cfg.density.dim)


def _grid_meta(grid, levels):
    return {"levels": len(grid.levels), "R_index": grid.R, "anchors_total": int(sum(lv.anchors.shape[0] for lv in levels))}


def _finish(study, cfg, stats, key, t0, target_value=None, extras=None, target=None):
    summary = {}
    for name, per_n in stats.items():
        summary[name] = [summarize(v) for v in per_n]
    main = summary[key]
    if target_value is None:
        med = [s["median"] for s in main]
    else:
        med = [abs(s["median"] - target_value) for s in main]
    verdict = trend_verdict(med, [s["se_median"] for s in main])
    verdict["statistic"] = key
    verdict["tracked"] = med
    return StudyReport(study, cfg.to_mapping(), cfg.seed, list(cfg.n_list), stats, summary, verdict,
                       target, extras or {}, time.perf_counter() - t0)


def run_thm1_i(cfg):
    """Sup over the ``(h, z)`` net of the l-infinity distance to the unit ball.

    Records per replication the statistic and ``max ||Theta||``, which
    dominates it because the ball contains 0.
    """
    cfg.validate()
    t0 = time.perf_counter()
    kernels = list(cfg.family)
    E = gram(cfg.family)
    stats = {"sup_distance": [], "sup_norm": []}
    meta = []
    for k, n in enumerate(cfg.n_list):
        grid, levels = _plan(cfg, n, kernels)
        meta.append(_grid_meta(grid, levels))

        def one(r, n=n, k=k, levels=levels):
            sample = _draw(cfg, replication_rng(cfg.seed, "thm1-i", k, r), n)
            best, norm = 0.0, 0.0
            for lv in levels:
                theta = _normalized(sample, kernels, n, lv)
                norm = max(norm, float(np.max(np.abs(theta))))
                best = max_distance_to_ball(theta, E, floor=best)
            if best > norm + 1e-9:
                raise UnibwError("distance to the ball exceeds the sup norm")
            return best, norm

        res = _run_replications(one, cfg.R, cfg.threads)
        stats["sup_distance"].append([r[0] for r in res])
        stats["sup_norm"].append([r[1] for r in res])
    return _finish("thm1-i", cfg, stats, "sup_distance", t0, extras={"grids": meta, "rank": E.rank})


def run_thm1_ii(cfg, target):
    """``max_h min_z ||Theta(h, z) - target||_inf`` over the net."""
    cfg.validate()
    E = gram(cfg.family)
    psi = np.asarray(getattr(target, "y", target), dtype=float).reshape(-1)
    if psi.size != len(cfg.family):
        raise UnibwError("target length does not match the family")
    J = rate_J(psi, E)
    if not J <= 1.0 + BALL_TOL:
        raise TargetOutsideBall(f"target has rate {J:.6g} > 1")
    t0 = time.perf_counter()
    kernels = list(cfg.family)
    psi_norm = float(np.max(np.abs(psi)))
    stats = {"gap": [], "zero_target_gap": []}
    meta = []
    for k, n in enumerate(cfg.n_list):
        grid, levels = _plan(cfg, n, kernels)
        meta.append(_grid_meta(grid, levels))

        def one(r, n=n, k=k, levels=levels):
            sample = _draw(cfg, replication_rng(cfg.seed, "thm1-ii", k, r), n)
            gap, zero = 0.0, 0.0
            for lv in levels:
                theta = _normalized(sample, kernels, n, lv)
                gap = max(gap, float(np.min(np.max(np.abs(theta - psi), axis=1))))
                zero = max(zero, float(np.min(np.max(np.abs(theta), axis=1))))
            if gap > zero + psi_norm + 1e-9:
                raise UnibwError("gap violates the triangle inequality")
            return gap, zero

        res = _run_replications(one, cfg.R, cfg.threads)
        stats["gap"].append([r[0] for r in res])
        stats["zero_target_gap"].append([r[1] for r in res])
    return _finish("thm1-ii", cfg, stats, "gap", t0, extras={"grids": meta, "target_rate": J},
                   target=psi.tolist())


def run_cor11(cfg, K=None):
    """Sup and inf over the net of ``sqrt(nh)(f_n - E f_n)/sqrt(2 log(1/h) f(z))``.

    Their almost-sure limits are ``+sqrt(int K^2)`` and ``-sqrt(int K^2)``.
    """
    cfg.validate()
    K = cfg.kernel if K is None else K
    t0 = time.perf_counter()
    target = math.sqrt(l2_norm_sq(K))
    stats = {"sup": [], "inf": []}
    meta = []
    for k, n in enumerate(cfg.n_list):
        grid, levels = _plan(cfg, n, [K])
        meta.append(_grid_meta(grid, levels))

        def one(r, n=n, k=k, levels=levels):
            sample = _draw(cfg, replication_rng(cfg.seed, "cor11", k, r), n)
            hi, lo = -math.inf, math.inf
            for lv in levels:
                v = _normalized(sample, [K], n, lv)[:, 0]
                hi = max(hi, float(v.max()))
                lo = min(lo, float(v.min()))
            return hi, lo

        res = _run_replications(one, cfg.R, cfg.threads)
        stats["sup"].append([r[0] for r in res])
        stats["inf"].append([r[1] for r in res])
    rep = _finish("cor11", cfg, stats, "sup", t0, target_value=target,
                  extras={"grids": meta, "kernel": K.to_mapping(), "l2_norm": target})
    inf_med = [abs(s["median"] + target) for s in rep.summary["inf"]]
    rep.verdict["inf"] = trend_verdict(inf_med, [s["se_median"] for s in rep.summary["inf"]])
    rep.verdict["inf"]["tracked"] = inf_med
    rep.target = {"sup": target, "inf": -target}
    return rep


# ---------------------------------------------------------------------------
# concentration of maximal partial sums


def _linfit(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[1]), float(coef[0]), r2


def run_concentration(cfg, family=None, rho0_over_tau=None):
    """Tail frequencies of ``max_m ||T_m||`` against ``(tau + rho0) c sqrt(nh log(1/h))``.

    ``tau**2 = max_K Var K((Z - z0)/h**(1/d)) / h`` at the center ``z0`` of
    ``H``. For each ratio ``r = rho0/tau`` the log-frequency is regressed on
    ``log(1/h)`` over the non-censored levels; zero counts are reported as
    ``1/(R+1)`` and flagged.
    """
    cfg.validate()
    family = cfg.family if family is None else family
    ratios = tuple(cfg.conc_ratios if rho0_over_tau is None else rho0_over_tau)
    if not ratios or any(not r > 0 for r in ratios):
        raise ConfigInvalid("threshold ratios must be positive")
    if cfg.conc_levels < 1 or cfg.conc_n < 2 or not cfg.conc_c > 0:
        raise ConfigInvalid("concentration study needs levels >= 1, n >= 2 and c > 0")
    t0 = time.perf_counter()
    n = cfg.conc_n
    kernels = list(family)
    d = family.dim
    z0 = 0.5 * (cfg.H.lo + cfg.H.hi)
    h_lo, h_hi = cfg.bands(n)
    L = cfg.conc_levels
    hs = [h_hi] if L == 1 else list(h_lo * (h_hi / h_lo) ** (np.arange(L) / (L - 1)))
    lv = []
    for h in hs:
        m1 = family_expectations(cfg.density, kernels, h, z0)[0]
        m2 = np.array([_second_moment(cfg.density, K, h, z0) for K in kernels])
        tau = math.sqrt(float(np.max(m2 - m1 * m1)) / h)
        lv.append((h, m1, tau))

    def one(r):
        rng = replication_rng(cfg.seed, "conc", 0, r)
        pts = cfg.density.sample(rng, n)
        out = []
        for h, m1, tau in lv:
            w = h ** (1.0 / d)
            u = (pts - z0) / w
            vals = np.column_stack([K(u) for K in kernels]) - m1
            out.append(_kernels.max_abs_partial_sum(np.ascontiguousarray(vals)))
        return out

    maxima = np.array(_run_replications(one, cfg.R, cfg.threads))  # (R, L)
    R = cfg.R
    rows, fits = [], []
    for r in ratios:
        xs, ys = [], []
        for j, (h, _, tau) in enumerate(lv):
            thr = (1.0 + r) * tau * cfg.conc_c * math.sqrt(n * h * math.log(1.0 / h))
            hits = int(np.sum(maxima[:, j] >= thr))
            censored = hits == 0
            p = 1.0 / (R + 1) if censored else hits / R
            rows.append({"ratio": r, "h": h, "log_inv_h": math.log(1.0 / h), "tau": tau, "threshold": thr,
                         "exceedances": hits, "p_hat": p, "censored": censored})
            if not censored:
                xs.append(math.log(1.0 / h))
                ys.append(math.log(p))
        if len(xs) >= 2:
            slope, icpt, r2 = _linfit(xs, ys)
            fits.append({"ratio": r, "slope": slope, "intercept": icpt, "r2": r2, "points": len(xs)})
        else:
            fits.append({"ratio": r, "slope": None, "intercept": None, "r2": None, "points": len(xs),
                         "skipped": "fewer than 2 non-censored levels"})
    slopes = [f["slope"] for f in fits]
    have = all(s is not None for s in slopes)
    verdict = {"fitted": have}
    if have:
        order_r = np.argsort(np.argsort(np.square(ratios)))
        order_s = np.argsort(np.argsort(-np.asarray(slopes)))
        verdict.update({
            "all_negative": bool(all(s < 0 for s in slopes)),
            "spearman": _spearman(np.square(ratios), -np.asarray(slopes)),
            "monotone_in_ratio": bool(np.array_equal(order_r, order_s)),
            "min_r2": float(min(f["r2"] for f in fits)),
        })
    stats = {"max_partial_sum": maxima.T.tolist()}
    return StudyReport("conc", cfg.to_mapping(), cfg.seed, [n], stats,
                       {"levels": rows, "fits": fits}, verdict, None,
                       {"z0": z0.tolist(), "c": cfg.conc_c, "ratios": list(ratios), "h_levels": hs},
                       time.perf_counter() - t0)


def _spearman(a, b):
    ra = np.argsort(np.argsort(a)).astype(float)
    rb = np.argsort(np.argsort(b)).astype(float)
    if ra.size < 2 or np.std(ra) == 0 or np.std(rb) == 0:
        return None
    return float(np.corrcoef(ra, rb)[0, 1])


def _second_moment(density, K, h, z):
    from .quadrature import kernel_window_second_moments
    return float(kernel_window_second_moments(density, K, h, np.atleast_2d(z))[0])


# ---------------------------------------------------------------------------
# Chernoff bound for Poisson counts


def poisson_tail_sum(n):
    """``P(Poisson(n) > 2n)`` by summing ``p_k`` for ``k > 2n`` with a ratio recursion."""
    k = 2 * n + 1
    log_p = -n + k * math.log(n) - math.lgamma(k + 1)
    term = math.exp(log_p)
    total = 0.0
    while True:
        total += term
        k += 1
        term *= n / k
        if term <= 1e-17 * total:
            break
    return total


def poisson_tail_gamma(n):
    """Same tail through the regularized lower incomplete gamma ``P(2n + 1, n)``."""
    return float(special.gammainc(2 * n + 1, n))


def chernoff_check(n_list):
    """Exact ``P(Poisson(n) > 2n)`` against ``exp(-(2 log 2 - 1) n)``."""
    rows = []
    rate = 2.0 * math.log(2.0) - 1.0
    for n in n_list:
        n = int(n)
        if n < 1:
            raise UnibwError("n must be >= 1")
        exact = poisson_tail_sum(n)
        alt = poisson_tail_gamma(n)
        bound = math.exp(-rate * n)
        rows.append({"n": n, "exact": exact, "exact_gamma": alt, "agreement": abs(exact - alt),
                     "bound": bound, "holds": bool(exact <= bound)})
    srt = sorted(rows, key=lambda r: r["n"])
    return {
        "rows": rows,
        "all_hold": bool(all(r["holds"] for r in rows)),
        "max_disagreement": max((r["agreement"] for r in rows), default=0.0),
        "bound_decreasing": bool(all(b["bound"] < a["bound"] for a, b in zip(srt, srt[1:]) if b["n"] > a["n"])),
    }


# ---------------------------------------------------------------------------
# covering numbers


def packing_number(V, eps):
    return int(_kernels.greedy_packing(np.ascontiguousarray(V, dtype=float), float(eps)).size)


def estimate_covering(family, eps_list, probe_measure, m_probe, seed, declared=None):
    """Greedy ``eps``-packing sizes under the empirical L2 norm of a probe sample.

    A maximal ``eps``-packing is also an ``eps``-cover, so its size is a
    covering-number proxy. ``declared = (C0, v0)`` adds an advisory comparison
    with ``C0 * eps**-v0``.
    """
    if m_probe < 1:
        raise UnibwError("m_probe must be >= 1")
    eps = [float(e) for e in eps_list]
    if any(not 0 < e < 1 for e in eps):
        raise UnibwError("eps values must lie in (0, 1)")
    rng = replication_rng(seed, "covering", 0, 0)
    X = probe_measure.sample(rng, m_probe)
    V = np.array([K(X if family.dim > 1 else X[:, 0]) for K in family])
    rows = [{"eps": e, "packing": packing_number(V, e)} for e in eps]
    srt = sorted(rows, key=lambda r: r["eps"])
    out = {"rows": rows, "m_probe": int(m_probe), "p": len(family),
           "nonincreasing": bool(all(b["packing"] <= a["packing"] for a, b in zip(srt, srt[1:])))}
    distinct = sorted({r["eps"] for r in rows})
    if len(distinct) >= 2:
        x = [math.log(1.0 / r["eps"]) for r in srt]
        y = [math.log(r["packing"]) for r in srt]
        slope, icpt, r2 = _linfit(x, y)
        out["exponent"] = slope
        out["log_constant"] = icpt
        out["fit_r2"] = r2
    if declared is not None:
        C0, v0 = declared
        out["declared"] = {"C0": C0, "v0": v0,
                           "within": bool(all(r["packing"] <= C0 * r["eps"] ** (-v0) for r in rows))}
    return out


# ---------------------------------------------------------------------------
# Poissonization


def poissonization_gap(cfg, K=None):
    """Tail frequencies of ``sup_z |G_n|`` versus its Poissonized counterpart.

    Both use ``n = pois_n`` and ``h = pois_h`` over the anchors of ``H``. The
    common threshold is ``pois_threshold`` when it is ``>= 0``, otherwise the
    empirical ``pois_quantile`` of the Poissonized statistic. The verdict
    checks ``P(G event) <= 2 P(G~ event)`` up to three standard errors of the
    ratio.
    """
    cfg.validate()
    K = cfg.kernel if K is None else K
    n, h = int(cfg.pois_n), float(cfg.pois_h)
    if n < 1 or not 0 < h < 1:
        raise ConfigInvalid("Poissonization study needs n >= 1 and h in (0, 1)")
    t0 = time.perf_counter()
    sg = make_spatial_grid(cfg.H, cfg.delta, h)
    expect = family_expectations(cfg.density, [K], h, sg.anchors)[:, 0]

    def one(r):
        rng = replication_rng(cfg.seed, "poissonize", 0, r)
        a = Sample(cfg.density.sample(rng, n), cfg.density.dim)
        eta = int(rng.poisson(n))
        b = Sample(cfg.density.sample(rng, eta), cfg.density.dim)
        g = float(np.max(np.abs(kernel_sums(a, K, h, sg.anchors) - n * expect)))
        gt = float(np.max(np.abs(kernel_sums(b, K, h, sg.anchors) - n * expect)))
        return g, gt, eta

    res = _run_replications(one, cfg.R, cfg.threads)
    G = np.array([r[0] for r in res])
    Gt = np.array([r[1] for r in res])
    R = cfg.R
    thr = cfg.pois_threshold if cfg.pois_threshold >= 0 else float(np.quantile(Gt, cfg.pois_quantile))
    p = float(np.mean(G >= thr))
    pt = float(np.mean(Gt >= thr))
    if pt > 0:
        ratio = p / pt
        # delta-method standard error of a ratio of two independent frequencies
        var = (p * (1 - p) / R) / pt**2 + (p**2) * (pt * (1 - pt) / R) / pt**4
        se = math.sqrt(var)
    else:
        ratio, se = (1.0 if p == 0 else math.inf), 0.0
    holds = bool(ratio <= 2.0 + 3.0 * se)
    stats = {"G": [G.tolist()], "G_poisson": [Gt.tolist()], "eta": [[r[2] for r in res]]}
    summary = {"G": [summarize(G)], "G_poisson": [summarize(Gt)]}
    verdict = {"threshold": thr, "p_G": p, "p_G_poisson": pt, "ratio": ratio if math.isfinite(ratio) else None,
               "ratio_se": se, "factor_two_holds": holds}
    return StudyReport("poissonize", cfg.to_mapping(), cfg.seed, [n], stats, summary, verdict, None,
                       {"h": h, "anchors": sg.J, "kernel": K.to_mapping()}, time.perf_counter() - t0)


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
