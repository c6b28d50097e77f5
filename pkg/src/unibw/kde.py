"""Parzen-Rosenblatt estimates, their expectations and uniform-in-bandwidth bands.

``h`` is the window volume: ``f_n(K, h, z) = (nh)^-1 sum_i K((Z_i - z)/h**(1/d))``.
With the common per-axis bandwidth ``b`` the volume is ``h = b**d``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadBandwidth, EmptySample, NonPositiveDensity, UnibwError
from .kernels import DEFAULT_NODES
from .process import kernel_sums, window_expectations
from .quadrature import tensor_rule
from .sample import as_sample

BAND_LEVEL = "asymptotic-exact (a.s. limit)"


@dataclass(frozen=True)
class KdeEstimate:
    value: float
    n: int
    h: float
    z: tuple
    kernel: str = ""

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise UnibwError("estimate must be finite")
        object.__setattr__(self, "z", tuple(float(c) for c in np.atleast_1d(self.z)))


@dataclass(frozen=True)
class ConfidenceBand:
    center: KdeEstimate
    half_width: float
    level: str = BAND_LEVEL

    def __post_init__(self):
        if not self.half_width >= 0:
            raise UnibwError("half width must be >= 0")

    @property
    def h(self):
        return self.center.h

    @property
    def z(self):
        return self.center.z

    @property
    def lower(self):
        return self.center.value - self.half_width

    @property
    def upper(self):
        return self.center.value + self.half_width


def kde(sample, K, h, z):
    """Parzen-Rosenblatt estimate at one point.

    >>> from unibw.kernels import make_kernel
    >>> kde([0.5], make_kernel("uniform"), 0.5, 0.25).value
    2.0
    """
    if not 0 < h <= 1:
        raise BadBandwidth(f"h must lie in (0, 1], got {h}")
    sample = as_sample(sample, K.dim)
    if sample.n == 0:
        raise EmptySample("the estimator needs at least one observation")
    zz = np.asarray(z, dtype=float).reshape(-1, K.dim)[:1]
    s = kernel_sums(sample, K, h, zz)[0]
    return KdeEstimate(float(s / (sample.n * h)), sample.n, float(h), zz[0], K.label)


def kde_many(sample, K, h, anchors):
    """Estimates at many points, as an array."""
    sample = as_sample(sample, K.dim)
    if sample.n == 0:
        raise EmptySample("the estimator needs at least one observation")
    return kernel_sums(sample, K, h, anchors) / (sample.n * h)


def expected_kde(density, K, h, z):
    """``h^-1 int K((y - z)/h**(1/d)) f(y) dy``."""
    if not 0 < h <= 1:
        raise BadBandwidth(f"h must lie in (0, 1], got {h}")
    return float(window_expectations(density, K, h, z)[0] / h)


def l2_norm_sq(K, nodes=None):
    """``int K**2``, exact for the piecewise-polynomial registry shapes."""
    d = K.dim
    nodes = nodes or DEFAULT_NODES.get(d, 16)
    X, W = tensor_rule(np.zeros(d), np.full(d, K.side), [K.axis_breaks(k) for k in range(d)], nodes)
    v = K(X)
    val = float(np.dot(v * v, W))
    return val


def band_half_width(n, h, f_z, l2sq):
    """``sqrt(2 log(1/h) f(z) int K^2 / (n h))``."""
    if not f_z > 0:
        raise NonPositiveDensity(f"f(z) must be > 0, got {f_z}")
    if not 0 < h < 1:
        raise BadBandwidth(f"h must lie in (0, 1), got {h}")
    return math.sqrt(2.0 * math.log(1.0 / h) * f_z * l2sq / (n * h))


def band_cor11(estimate, f_z, K):
    """Band ``f_n +- sqrt(2 log(1/h) f(z) int K^2 / (nh))`` around ``E f_n``.

    Uniformly over bandwidths in the admissible range and points of a compact
    region, the normalized deviation has almost-sure limsup ``+sqrt(int K^2)``
    and liminf ``-sqrt(int K^2)``, so the band is asymptotically exact.

    >>> from unibw.kernels import make_kernel
    >>> est = KdeEstimate(1.0, 10**4, 0.01, (0.5,))
    >>> round(band_cor11(est, 1.0, make_kernel("uniform")).half_width, 5)
    0.30349
    """
    hw = band_half_width(estimate.n, estimate.h, f_z, l2_norm_sq(K))
    return ConfidenceBand(estimate, hw)
