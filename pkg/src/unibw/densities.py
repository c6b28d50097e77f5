"""Sampling densities with known pdf, used for expectations and simulation."""
import math

import numpy as np
from scipy import special

from .errors import UnibwError
from .grids import Box


class DensityModel:
    """Base class: a pdf on R^d with a seeded sampler.

    Subclasses provide ``pdf``, ``sample``, ``support``, ``axis_breaks`` and
    ``to_mapping``. ``axis_breaks(k)`` lists the points where the pdf is not
    smooth along axis ``k``; quadrature splits there.
    """

    dim = 1

    def pdf(self, y):
        raise NotImplementedError

    def sample(self, rng, n):
        raise NotImplementedError

    def support(self):
        raise NotImplementedError

    def axis_breaks(self, axis):
        return np.empty(0)

    def quadrature_box(self):
        """A finite box carrying all but a negligible part of the mass."""
        return self.support()

    def _points(self, y):
        y = np.asarray(y, dtype=float)
        if self.dim == 1 and not (y.ndim >= 2 and y.shape[-1] == 1):
            return y.reshape(-1, 1), y.shape
        return y.reshape(-1, self.dim), y.shape[:-1]

    def certificate(self, H, alpha):
        """Lower bound of the pdf on the enlarged region ``H^alpha``.

        Returns a dict with the certified box and ``f_min``; ``f_min > 0`` means
        the positivity hypothesis holds on that box.
        """
        from .grids import enlarge

        box = enlarge(H, alpha)
        f_min = self._min_on_box(box)
        return {"box": box.to_mapping(), "f_min": float(f_min), "positive": bool(f_min > 0)}

    def _min_on_box(self, box):
        raise NotImplementedError


class UniformDensity(DensityModel):
    """Uniform law on the box ``[lo, hi]``."""

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise UnibwError("uniform density needs lo < hi on every axis")
        self.lo, self.hi = lo, hi
        self.dim = lo.size
        self.height = 1.0 / float(np.prod(hi - lo))

    def pdf(self, y):
        pts, shape = self._points(y)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        out = np.where(inside, self.height, 0.0).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.random((int(n), self.dim))

    def support(self):
        return Box(self.lo, self.hi)

    def axis_breaks(self, axis):
        return np.array([self.lo[axis], self.hi[axis]])

    def _min_on_box(self, box):
        inside = np.all(box.lo >= self.lo) and np.all(box.hi <= self.hi)
        return self.height if inside else 0.0

    def to_mapping(self):
        return {"kind": "uniform", "lo": self.lo.tolist(), "hi": self.hi.tolist()}

    def __repr__(self):
        return f"UniformDensity(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class NormalDensity(DensityModel):
    """Product of independent normals ``N(mean_k, sd_k**2)``."""

    def __init__(self, mean=0.0, sd=1.0):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.sd = np.atleast_1d(np.asarray(sd, dtype=float))
        if self.mean.shape != self.sd.shape or np.any(self.sd <= 0):
            raise UnibwError("normal density needs matching mean/sd with sd > 0")
        self.dim = self.mean.size

    def pdf(self, y):
        pts, shape = self._points(y)
        u = (pts - self.mean) / self.sd
        out = np.exp(-0.5 * np.sum(u * u, axis=1)) / np.prod(self.sd * math.sqrt(2 * math.pi))
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, n):
        return self.mean + self.sd * rng.standard_normal((int(n), self.dim))

    def support(self):
        return Box(np.full(self.dim, -np.inf), np.full(self.dim, np.inf))

    def quadrature_box(self):
        return Box(self.mean - 12 * self.sd, self.mean + 12 * self.sd)

    def _min_on_box(self, box):
        far = np.where(np.abs(box.lo - self.mean) > np.abs(box.hi - self.mean), box.lo, box.hi)
        return self.pdf(far)

    def to_mapping(self):
        return {"kind": "normal", "mean": self.mean.tolist(), "sd": self.sd.tolist()}

    def __repr__(self):
        return f"NormalDensity(mean={self.mean.tolist()}, sd={self.sd.tolist()})"


class NormalMixture(DensityModel):
    """One-dimensional finite mixture of normals."""

    def __init__(self, weights, means, sds):
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.sds = np.asarray(sds, dtype=float)
        if not (self.weights.shape == self.means.shape == self.sds.shape) or self.weights.ndim != 1:
            raise UnibwError("mixture weights, means and sds must be 1-d of equal length")
        if np.any(self.weights < 0) or np.any(self.sds <= 0) or not np.isclose(self.weights.sum(), 1.0):
            raise UnibwError("mixture weights must be a probability vector and sds positive")
        self.dim = 1

    def pdf(self, y):
        pts, shape = self._points(y)
        u = (pts[:, :1] - self.means) / self.sds
        out = np.sum(self.weights * np.exp(-0.5 * u * u) / (self.sds * math.sqrt(2 * math.pi)), axis=1)
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, n):
        comp = rng.choice(self.weights.size, size=int(n), p=self.weights)
        return (self.means[comp] + self.sds[comp] * rng.standard_normal(int(n)))[:, None]

    def support(self):
        return Box([-np.inf], [np.inf])

    def quadrature_box(self):
        return Box([np.min(self.means - 12 * self.sds)], [np.max(self.means + 12 * self.sds)])

    def cdf(self, y):
        y = np.asarray(y, dtype=float)[..., None]
        return np.sum(self.weights * special.ndtr((y - self.means) / self.sds), axis=-1)

    def _min_on_box(self, box):
        xs = np.linspace(box.lo[0], box.hi[0], 4097)
        return float(np.min(self.pdf(xs)))

    def to_mapping(self):
        return {"kind": "mixture", "weights": self.weights.tolist(), "means": self.means.tolist(),
                "sds": self.sds.tolist()}

    def __repr__(self):
        return f"NormalMixture(weights={self.weights.tolist()}, means={self.means.tolist()}, sds={self.sds.tolist()})"


def density_from_mapping(m):
    kind = m.get("kind", "uniform")
    if kind == "uniform":
        return UniformDensity(m.get("lo", [0.0]), m.get("hi", [1.0]))
    if kind == "normal":
        return NormalDensity(m.get("mean", [0.0]), m.get("sd", [1.0]))
    if kind == "mixture":
        return NormalMixture(m["weights"], m["means"], m["sds"])
    raise UnibwError(f"unknown density kind {kind!r}")
