"""Data-driven bandwidths for one-dimensional samples.

Both selectors return the standard deviation of a Gaussian smoothing kernel,
the usual per-axis bandwidth. For ``d = 1`` this is also the window volume
used elsewhere in the package.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateSample, NoRoot, UnibwError
from .sample import as_sample

SQRT_2PI = math.sqrt(2.0 * math.pi)
_DELMAX = 1000.0


@dataclass(frozen=True)
class SelectorResult:
    h_star: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.h_star > 0:
            raise UnibwError("selected bandwidth must be > 0")


def _values(sample, need):
    x = as_sample(sample, 1).points[:, 0]
    if x.size < need:
        raise DegenerateSample(f"need at least {need} observations, got {x.size}")
    return x


def _iqr(x):
    q75, q25 = np.percentile(x, [75, 25])
    return float(q75 - q25)


def silverman(sample):
    """``0.9 min(sd, IQR/1.34) n**(-1/5)``; falls back to ``sd`` when the IQR is 0."""
    x = _values(sample, 2)
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateSample("sample has zero spread")
    iqr = _iqr(x)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * spread * x.size ** (-0.2)
    return SelectorResult(h, "silverman", {"sd": sd, "iqr": iqr, "n": int(x.size)})


class _BinnedFunctionals:
    """Binned estimates of the density-derivative functionals ``psi_4`` and ``psi_6``."""

    def __init__(self, x, nb):
        n = x.size
        lo, hi = float(x.min()), float(x.max())
        self.n = n
        self.delta = (hi - lo) * 1.01 / nb
        idx = np.minimum(((x - lo) / self.delta).astype(np.int64), nb - 1)
        w = np.bincount(idx, minlength=nb).astype(float)
        self.cnt = _kernels.binned_pair_counts(w)
        self.lag = np.arange(nb) * self.delta

    def _sum(self, h, poly):
        delta = (self.lag / h) ** 2
        keep = delta < _DELMAX
        dd = delta[keep]
        return float(np.sum(np.exp(-0.5 * dd) * poly(dd) * self.cnt[keep]))

    def phi4(self, h):
        n = self.n
        s = 2.0 * self._sum(h, lambda d: d * d - 6.0 * d + 3.0) + 3.0 * n
        return s / (n * (n - 1) * h**5 * SQRT_2PI)

    def phi6(self, h):
        n = self.n
        s = 2.0 * self._sum(h, lambda d: ((d - 15.0) * d + 45.0) * d - 15.0) - 15.0 * n
        return s / (n * (n - 1) * h**7 * SQRT_2PI)


def sheather_jones(sample, nb=1000, lower=1e-6, upper=1.0, rtol=1e-8):
    """Solve-the-equation plug-in bandwidth with binned pilot functionals.

    The equation ``h = (c1 / psi4(alpha2 h**(5/7)))**(1/5)`` is solved by
    bisection over ``h = u * scale`` with ``u`` in ``[lower, upper]``;
    ``scale = min(sd, IQR/1.349)``. Working in units of ``scale`` makes the
    result exactly scale-equivariant.
    """
    x = _values(sample, 10)
    n = x.size
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DegenerateSample("sample has zero spread")
    iqr = _iqr(x)
    scale = min(sd, iqr / 1.349) if iqr > 0 else sd
    F = _BinnedFunctionals(x, nb)
    a = 1.24 * scale * n ** (-1.0 / 7.0)
    b = 1.23 * scale * n ** (-1.0 / 9.0)
    c1 = 1.0 / (2.0 * math.sqrt(math.pi) * n)
    td = -F.phi6(b)
    if not (math.isfinite(td) and td > 0):
        raise DegenerateSample("sample too sparse to estimate the sixth-derivative functional")
    alph2 = 1.357 * (F.phi4(a) / td) ** (1.0 / 7.0)
    if not math.isfinite(alph2):
        raise DegenerateSample("sample too sparse to estimate the pilot constant")

    def fsd(u):
        h = u * scale
        sd_h = F.phi4(alph2 * h ** (5.0 / 7.0))
        if not sd_h > 0:
            return math.inf
        return (c1 / sd_h) ** 0.2 - h

    lo, hi = float(lower), float(upper)
    flo, fhi = fsd(lo), fsd(hi)
    tries = 0
    while flo * fhi > 0:
        if tries >= 99:
            raise NoRoot("no sign change of the plug-in equation", bracket=(lo * scale, hi * scale))
        if tries % 2 == 0:
            hi *= 1.2
            fhi = fsd(hi)
        else:
            lo /= 1.2
            flo = fsd(lo)
        tries += 1
    steps = 0
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        fm = fsd(mid)
        steps += 1
        if fm == 0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    h = 0.5 * (lo + hi) * scale
    diag = {"scale": scale, "a": a, "b": b, "TD": td, "alpha2": alph2, "bins": nb,
            "bisection_steps": steps, "n": int(n)}
    return SelectorResult(h, "sheather-jones", diag)


def gaussian_kde_at(sample, z, bw):
    """Gaussian-kernel density estimate with standard deviation ``bw``."""
    x = _values(sample, 1)
    u = (np.atleast_1d(np.asarray(z, dtype=float))[:, None] - x[None, :]) / bw
    return np.mean(np.exp(-0.5 * u * u), axis=1) / (bw * SQRT_2PI)


def plugin_density(sample, z):
    """Pilot estimate of ``f(z)`` for real-data bands, with its source.

    Uses a Gaussian kernel at the plug-in bandwidth; falls back to the
    rule-of-thumb bandwidth when the plug-in equation has no root.
    """
    try:
        sel = sheather_jones(sample)
    except (NoRoot, DegenerateSample):
        sel = silverman(sample)
    vals = gaussian_kde_at(sample, z, sel.h_star)
    return vals, {"method": sel.method, "bandwidth": sel.h_star, "kernel": "gaussian"}


def random_bandwidth_check(h_values, c_lo=0.1, c_hi=0.9):
    """Ratios ``log(1/h*_n) / log n`` and whether all lie in ``[c_lo, c_hi]``.

    A finite-n surrogate for random bandwidths squeezed between two power laws.
    """
    if not 0 < c_lo <= c_hi < 1:
        raise UnibwError("need 0 < c_lo <= c_hi < 1")
    rows = []
    prev = None
    for n, h in h_values:
        if prev is not None and n <= prev:
            raise UnibwError("n must be strictly increasing")
        if not h > 0:
            raise UnibwError("bandwidths must be positive")
        if n < 2:
            raise UnibwError("n must be >= 2")
        prev = n
        r = math.log(1.0 / h) / math.log(n)
        rows.append({"n": int(n), "h": float(h), "ratio": r, "inside": bool(c_lo <= r <= c_hi)})
    failing = [r for r in rows if not r["inside"]]
    out = {"c_lo": c_lo, "c_hi": c_hi, "rows": rows, "pass": not failing}
    if failing:
        out["witness"] = failing[-1]
    return out
