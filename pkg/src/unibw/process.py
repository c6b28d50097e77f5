"""Local empirical process, centered sums, increments and Poissonization.

Bandwidths follow the volume convention: ``h`` is the window volume and the
window around ``z`` has side ``h**(1/d)``, so
``G_n(K, h, z) = sum_i K((Z_i - z)/h**(1/d)) - n E K((Z - z)/h**(1/d))``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (BadBandwidth, DimensionUnsupported, EmptySample, GridTooCoarse,
                     NonPositiveDensity, QuadratureFailure, UnibwError)
from .kernels import DEFAULT_NODES, Kernel, KernelFamily
from .quadrature import integrate_box, interval_masses, kernel_window_expectations
from .sample import Sample, as_sample


def _check_h(h, allow_one=True):
    ok = 0 < h <= 1 if allow_one else 0 < h < 1
    if not ok:
        rng = "(0, 1]" if allow_one else "(0, 1)"
        raise BadBandwidth(f"h must lie in {rng}, got {h}")


def _anchor_array(z, d):
    z = np.asarray(z, dtype=float)
    return z.reshape(-1, d)


def kernel_sums(sample, K, h, anchors):
    """``sum_i K((Z_i - z)/h**(1/d))`` for every anchor ``z`` (rows of ``anchors``)."""
    d = K.dim
    sample = as_sample(sample, d)
    anchors = _anchor_array(anchors, d)
    if sample.n == 0:
        return np.zeros(anchors.shape[0])
    w = h ** (1.0 / d)
    srt = sample.sorted_points()
    if d == 1:
        return _kernels.window_sums(np.ascontiguousarray(srt[:, 0]), np.ascontiguousarray(anchors[:, 0]),
                                    w, K.code, K.params_array(), K.scale, K.side)
    first = srt[:, 0]
    span = w * K.side
    out = np.empty(anchors.shape[0])
    for a, z in enumerate(anchors):
        pad = 1e-12 * (abs(z[0]) + span)
        i0 = np.searchsorted(first, z[0] - pad, side="left")
        i1 = np.searchsorted(first, z[0] + span + pad, side="right")
        out[a] = float(np.sum(K((srt[i0:i1] - z) / w))) if i1 > i0 else 0.0
    return out


def window_expectations(density, K, h, anchors, nodes=None):
    """``E K((Z - z)/h**(1/d))`` for every anchor."""
    return kernel_window_expectations(density, K, h, _anchor_array(anchors, K.dim), nodes)


@dataclass(frozen=True)
class ProcessEvaluation:
    """Values of the local process for every member of a family at one ``(h, z)``."""

    values: np.ndarray
    n: int
    h: float
    z: tuple
    normalized: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(v)):
            raise UnibwError("process values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "z", tuple(float(c) for c in np.atleast_1d(self.z)))

    def as_dict(self):
        return {i: float(v) for i, v in enumerate(self.values)}


def eval_Gn(sample, K, h, z, density):
    """Local empirical process ``G_n(K, h, z)`` for a single kernel and point.

    Examples
    --------
    >>> from unibw.densities import UniformDensity
    >>> from unibw.kernels import make_kernel
    >>> eval_Gn([0.1, 0.5, 0.9], make_kernel("uniform"), 0.25, 0.0, UniformDensity(0, 1))
    0.25
    """
    _check_h(h)
    sample = as_sample(sample, K.dim)
    zz = _anchor_array(z, K.dim)[:1]
    s = kernel_sums(sample, K, h, zz)[0]
    if sample.n == 0:
        return 0.0
    e = window_expectations(density, K, h, zz)[0]
    return float(s - sample.n * e)


def gn_field(sample, family, h, anchors, density=None, expectations=None):
    """``G_n`` for every anchor and family member, shape ``(A, p)``.

    ``expectations`` (same shape) may be passed in to reuse quadrature across
    replications that share ``(n, h, anchors)``.
    """
    _check_h(h)
    kernels = list(family) if isinstance(family, KernelFamily) else [family]
    d = kernels[0].dim
    sample = as_sample(sample, d)
    anchors = _anchor_array(anchors, d)
    if expectations is None:
        if density is None:
            raise UnibwError("need a density or precomputed expectations")
        expectations = family_expectations(density, kernels, h, anchors)
    sums = np.column_stack([kernel_sums(sample, K, h, anchors) for K in kernels])
    return sums - sample.n * np.asarray(expectations)


def family_expectations(density, family, h, anchors):
    return np.column_stack([window_expectations(density, K, h, anchors) for K in family])


def eval_family(sample, family, h, z, density):
    """``ProcessEvaluation`` of ``G_n(K_i, h, z)`` over a family."""
    vals = gn_field(sample, family, h, z, density)[0]
    return ProcessEvaluation(vals, as_sample(sample, family.dim).n, h, z, False)


def _g_breaks(g, d):
    if hasattr(g, "axis_breaks"):
        return [np.asarray(g.axis_breaks(k), dtype=float) for k in range(d)]
    return [np.empty(0)] * d


def eval_Tn(sample, g, density, breaks=None, nodes=None):
    """Centered sum ``sum_i g(Z_i) - n E g(Z)``.

    ``g`` is a ``Kernel`` or any vectorized callable on ``(N, d)`` points;
    ``breaks`` (one array per axis) lists kinks of ``g`` so the quadrature for
    ``E g(Z)`` can split there.
    """
    d = density.dim
    sample = as_sample(sample, d)
    if sample.n == 0:
        return 0.0
    box = density.quadrature_box()
    br = _g_breaks(g, d)
    if breaks is not None:
        extra = [np.atleast_1d(np.asarray(b, dtype=float)) for b in (breaks if d > 1 else [breaks])]
        br = [np.concatenate((br[k], extra[k])) for k in range(d)]
    br = [np.concatenate((br[k], density.axis_breaks(k))) for k in range(d)]
    m = nodes or DEFAULT_NODES.get(d, 16)

    def integrand(y):
        return _eval_g(g, y, d) * density.pdf(y)

    e = integrate_box(integrand, box.lo, box.hi, br, m)
    s = float(np.sum(_eval_g(g, sample.points, d)))
    val = s - sample.n * e
    if not math.isfinite(val):
        raise QuadratureFailure("non-finite centered sum")
    return val


def _eval_g(g, y, d):
    y = np.asarray(y, dtype=float).reshape(-1, d)
    v = np.asarray(g(y[:, 0] if d == 1 else y), dtype=float)
    return np.broadcast_to(v, (y.shape[0],)) if v.ndim == 0 else v.reshape(-1)


@dataclass(frozen=True)
class IncrementField:
    """Values of ``g_{n,h,z}(s)`` on a grid of ``s`` in the unit cube."""

    grid: np.ndarray
    values: np.ndarray
    n: int
    h: float
    z: tuple

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        g = g.reshape(-1, 1) if g.ndim == 1 else g
        v = np.array(self.values, dtype=float).reshape(-1)
        if g.shape[0] != v.size:
            raise UnibwError("one value per grid point is required")
        if np.any(g < 0) or np.any(g > 1):
            raise UnibwError("increment grid must lie in the unit cube")
        if not np.all(np.isfinite(v)):
            raise UnibwError("increment values must be finite")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "z", tuple(float(c) for c in np.atleast_1d(self.z)))

    @property
    def dim(self):
        return self.grid.shape[1]


def eval_increment(sample, h, z, s_grid, density):
    """``g_{n,h,z}(s) = (nh)^-1 sum_i [1_[s,1](U_i) - P(U in [s,1])]``, ``U_i = (Z_i - z)/h**(1/d)``.

    Every summand is centered individually.
    """
    _check_h(h)
    s = np.asarray(s_grid, dtype=float)
    s = s.reshape(-1, 1) if s.ndim <= 1 else s
    d = s.shape[1]
    sample = as_sample(sample, d)
    if sample.n == 0:
        raise EmptySample("increments need at least one observation")
    if np.any(s < 0) or np.any(s > 1):
        raise UnibwError("s-grid must lie in the unit cube")
    zz = _anchor_array(z, d)[:1]
    n = sample.n
    w = h ** (1.0 / d)
    srt = sample.sorted_points()
    if d == 1:
        # 1_[s,1](U) for all s at once: count U in [s, 1] via a sorted pass
        pad = 1e-12 * (abs(zz[0, 0]) + w)
        i0 = np.searchsorted(srt[:, 0], zz[0, 0] - pad, side="left")
        i1 = np.searchsorted(srt[:, 0], zz[0, 0] + w + pad, side="right")
        u = (srt[i0:i1, 0] - zz[0, 0]) / w
        u = np.sort(u[(u >= 0) & (u <= 1)])
        counts = u.size - np.searchsorted(u, s[:, 0], side="left")
        edges = np.unique(np.concatenate((s[:, 0], [1.0])))
        tail = np.concatenate((np.cumsum(interval_masses(density, zz[0, 0] + w * edges)[::-1])[::-1], [0.0]))
        expect = tail[np.searchsorted(edges, s[:, 0])]
    else:
        counts = np.array([kernel_sums(sample, Kernel("indicator", d, tuple(row)), h, zz)[0] for row in s])
        expect = np.array([window_expectations(density, Kernel("indicator", d, tuple(row)), h, zz)[0]
                           for row in s])
    vals = (counts - n * expect) / (n * h)
    return IncrementField(s, vals, n, h, zz[0])


def stieltjes_band_identity(increments, K):
    """``int_[0,1] g(s) dK(s)`` for a 1-d increment field on a grid from 0 to 1.

    The atom ``K(0)`` at the left end multiplies ``g(0)``; on each cell
    ``[s_j, s_{j+1}]`` the jump ``K(s_{j+1}) - K(s_j)`` is weighted by the
    average of ``g`` at the two cell ends. ``g`` vanishes almost surely at
    ``s = 1``, so the drop of ``K`` to zero there carries no mass.
    """
    if increments.dim != 1 or K.dim != 1:
        raise DimensionUnsupported("the Stieltjes identity is implemented for d = 1 only")
    s = increments.grid[:, 0]
    g = increments.values
    if s.size < 2:
        raise GridTooCoarse("need at least 2 grid points")
    order = np.argsort(s, kind="stable")
    s, g = s[order], g[order]
    if s[0] != 0.0 or s[-1] != 1.0:
        raise GridTooCoarse("grid must start at 0 and end at 1")
    k = np.asarray(K(s), dtype=float)
    return float(k[0] * g[0] + np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(k)))


def poissonized_Gn(seed, n, density, K, h, z):
    """Poissonized process: ``eta ~ Poisson(n)`` points, centering with ``n`` (not ``eta``)."""
    if n < 1:
        raise UnibwError("n must be >= 1")
    _check_h(h)
    rng = np.random.default_rng(seed)
    eta = int(rng.poisson(n))
    pts = density.sample(rng, eta)
    zz = _anchor_array(z, K.dim)[:1]
    s = kernel_sums(Sample(pts, K.dim), K, h, zz)[0]
    return float(s - n * window_expectations(density, K, h, zz)[0])


def normalization(f_z, n, h):
    """``sqrt(2 f(z) n h log(1/h))``."""
    if not f_z > 0:
        raise NonPositiveDensity(f"f(z) must be > 0, got {f_z}")
    _check_h(h, allow_one=False)
    if n < 1:
        raise UnibwError("n must be >= 1")
    return math.sqrt(2.0 * f_z * n * h * math.log(1.0 / h))


def normalize(value, f_z, n, h):
    """``value / sqrt(2 f(z) n h log(1/h))``.

    >>> round(normalize(1.0, 1.0, 100, 0.01), 5)
    0.32951
    """
    return value / normalization(f_z, n, h)
