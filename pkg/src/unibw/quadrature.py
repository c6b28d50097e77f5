"""Tensor-product Gauss-Legendre quadrature on boxes split at known kinks.

Splitting every axis at the breakpoints of the integrand makes the rule exact
for piecewise-polynomial integrands (indicator and polynomial kernels against
piecewise-constant densities) once ``nodes`` covers the polynomial degree.
"""
import itertools
from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure


@lru_cache(maxsize=64)
def _legendre(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def piecewise_rule(lo, hi, breaks, nodes):
    """1-d Gauss-Legendre rule on ``[lo, hi]`` with one ``nodes``-point panel per piece."""
    b = np.asarray(breaks, dtype=float).ravel()
    b = b[(b > lo) & (b < hi)]
    edges = np.unique(np.concatenate(([lo], b, [hi])))
    if edges.size < 2 or hi <= lo:
        return np.empty(0), np.empty(0)
    x, w = _legendre(nodes)
    a, c = edges[:-1, None], edges[1:, None]
    half = 0.5 * (c - a)
    pts = (a + c) * 0.5 + half * x
    wts = half * w
    return pts.ravel(), wts.ravel()


def tensor_rule(lo, hi, breaks, nodes):
    """Tensor rule on the box ``[lo, hi]``; ``breaks[k]`` are interior kinks on axis ``k``."""
    rules = [piecewise_rule(lo[k], hi[k], breaks[k] if breaks is not None else (), nodes)
             for k in range(len(lo))]
    if any(r[0].size == 0 for r in rules):
        return np.empty((0, len(lo))), np.empty(0)
    if len(rules) == 1:
        return rules[0][0][:, None], rules[0][1]
    pts = np.array(list(itertools.product(*[r[0] for r in rules])))
    wts = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
    return pts, wts


def integrate_box(func, lo, hi, breaks=None, nodes=64):
    """Integrate ``func(points (N, d)) -> (N,)`` over ``[lo, hi]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise QuadratureFailure("integration box must be finite")
    pts, wts = tensor_rule(lo, hi, breaks, nodes)
    if wts.size == 0:
        return 0.0
    val = float(np.dot(np.asarray(func(pts), dtype=float).reshape(-1), wts))
    if not np.isfinite(val):
        raise QuadratureFailure("non-finite integral")
    return val


def kernel_window_expectations(density, K, h, anchors, nodes=None):
    """``E K((Z - z)/h**(1/d))`` for every anchor ``z`` (rows of ``anchors``).

    Substituting ``y = z + w x`` with ``w = h**(1/d)`` gives
    ``h * int_{[0, side]^d} K(x) f(z + w x) dx``; the kernel's kinks and the
    density's kinks mapped into kernel coordinates split the panels.
    """
    d = K.dim
    anchors = np.asarray(anchors, dtype=float).reshape(-1, d)
    if nodes is None:
        nodes = {1: 64, 2: 32}.get(d, 16)
    w = h ** (1.0 / d)
    side = K.side
    zeros, sides = np.zeros(d), np.full(d, side)
    kbreaks = [K.axis_breaks(k) for k in range(d)]
    dbreaks = [np.asarray(density.axis_breaks(k), dtype=float) for k in range(d)]

    # anchors whose window contains a density kink need their own panels
    dirty = np.zeros(anchors.shape[0], dtype=bool)
    for k in range(d):
        if dbreaks[k].size:
            t = (dbreaks[k][None, :] - anchors[:, k:k + 1]) / w
            dirty |= np.any((t > 0) & (t < side), axis=1)

    out = np.empty(anchors.shape[0])
    clean = ~dirty
    if np.any(clean):
        X, W = tensor_rule(zeros, sides, kbreaks, nodes)
        kw = K(X) * W
        keep = kw != 0
        X, kw = X[keep], kw[keep]
        za = anchors[clean]
        block = max(1, 2_000_000 // max(1, X.shape[0]))
        vals = np.empty(za.shape[0])
        for i in range(0, za.shape[0], block):
            zz = za[i:i + block]
            f = density.pdf((zz[:, None, :] + w * X[None, :, :]).reshape(-1, d)).reshape(zz.shape[0], -1)
            vals[i:i + block] = f @ kw
        out[clean] = h * vals
    for i in np.flatnonzero(dirty):
        z = anchors[i]
        br = [np.concatenate((kbreaks[k], (dbreaks[k] - z[k]) / w)) for k in range(d)]
        X, W = tensor_rule(zeros, sides, br, nodes)
        out[i] = h * float(np.dot(K(X) * density.pdf(z + w * X), W))
    if not np.all(np.isfinite(out)):
        raise QuadratureFailure("non-finite kernel expectation")
    return out


def kernel_window_second_moments(density, K, h, anchors, nodes=None):
    """``E K((Z - z)/h**(1/d))**2`` for every anchor."""
    sq = _SquaredKernel(K)
    return kernel_window_expectations(density, sq, h, anchors, nodes)


class _SquaredKernel:
    def __init__(self, K):
        self.K = K
        self.dim = K.dim
        self.side = K.side

    def axis_breaks(self, axis):
        return self.K.axis_breaks(axis)

    def __call__(self, x):
        v = self.K(x)
        return v * v


def interval_masses(density, edges, nodes=32):
    """``P(edges[j] <= Z < edges[j+1])`` for a 1-d density and sorted ``edges``."""
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    br = np.asarray(density.axis_breaks(0), dtype=float)
    x, w = _legendre(nodes)
    out = np.empty(a.size)
    dirty = np.any((br[None, :] > a[:, None]) & (br[None, :] < b[:, None]), axis=1) if br.size else np.zeros(a.size, bool)
    clean = ~dirty
    if np.any(clean):
        ac, bc = a[clean, None], b[clean, None]
        half = 0.5 * (bc - ac)
        pts = 0.5 * (ac + bc) + half * x
        out[clean] = np.sum(density.pdf(pts.reshape(-1)).reshape(pts.shape) * w * half, axis=1)
    for j in np.flatnonzero(dirty):
        p, q = piecewise_rule(a[j], b[j], br, nodes)
        out[j] = float(np.dot(density.pdf(p), q))
    return out
