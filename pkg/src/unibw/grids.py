"""Boxes, geometric bandwidth nets and spatial hypercube tilings."""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadRange, DegenerateRegion, NonPositiveAlpha, NonPositiveRatio, UnibwError

_SNAP = 1e-12


def integer_part(u):
    """Floor of ``u``, snapping to the nearest integer when within 1e-12 of it."""
    r = round(u)
    if abs(u - r) <= _SNAP * max(1.0, abs(u)):
        return int(r)
    return math.floor(u)


def _ceil_snapped(u):
    r = round(u)
    if abs(u - r) <= _SNAP * max(1.0, abs(u)):
        return int(r)
    return math.ceil(u)


class Box:
    """Axis-aligned box ``[lo, hi]`` (or its interior when ``closed`` is False)."""

    def __init__(self, lo, hi, closed=True):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise UnibwError("box bounds must be 1-d arrays of equal length")
        if np.any(self.hi < self.lo):
            raise UnibwError("box needs lo <= hi on every axis")
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)
        self.closed = bool(closed)

    @property
    def dim(self):
        return self.lo.size

    @property
    def widths(self):
        return self.hi - self.lo

    @property
    def volume(self):
        return float(np.prod(self.widths))

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        if self.closed:
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def __eq__(self, other):
        return (isinstance(other, Box) and self.closed == other.closed
                and np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def __repr__(self):
        kind = "" if self.closed else ", closed=False"
        return f"Box({self.lo.tolist()}, {self.hi.tolist()}{kind})"

    def to_mapping(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(), "closed": self.closed}


def max_norm(z):
    """``max_k |z_k|``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size == 0:
        raise UnibwError("max norm of an empty vector")
    return float(np.max(np.abs(z)))


def enlarge(H, alpha):
    """Open box of points within max-norm distance ``alpha`` of ``H``."""
    if not alpha > 0:
        raise NonPositiveAlpha(f"alpha must be > 0, got {alpha}")
    return Box(H.lo - alpha, H.hi + alpha, closed=False)


@dataclass(frozen=True)
class BandwidthGrid:
    h_lo: float
    h_hi: float
    rho: float
    levels: tuple
    R: int

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def as_array(self):
        return np.asarray(self.levels)


def make_bandwidth_grid(h_lo, h_hi, rho):
    """Geometric net ``h_lo * rho**l`` (``l < R``) closed by ``h_hi``.

    ``R = [log(h_hi/h_lo)/log(rho)] + 1``; when the last geometric level hits
    ``h_hi`` within 1e-12 relative the two are merged.

    >>> make_bandwidth_grid(0.01, 0.05, 2).levels
    (0.01, 0.02, 0.04, 0.05)
    """
    if not rho > 1:
        raise NonPositiveRatio(f"rho must exceed 1, got {rho}")
    if not (0 < h_lo < h_hi < 1):
        raise BadRange(f"need 0 < h_lo < h_hi < 1, got h_lo={h_lo}, h_hi={h_hi}")
    R = integer_part(math.log(h_hi / h_lo) / math.log(rho)) + 1
    levels = [h_lo * rho**l for l in range(R)]
    if abs(levels[-1] - h_hi) <= _SNAP * h_hi:
        levels[-1] = float(h_hi)
    else:
        levels.append(float(h_hi))
    return BandwidthGrid(float(h_lo), float(h_hi), float(rho), tuple(levels), R)


@dataclass(frozen=True)
class SpatialGrid:
    region: Box
    delta: float
    h: float
    cube_side: float
    counts: tuple
    anchors: np.ndarray

    @property
    def J(self):
        return int(self.anchors.shape[0])

    @property
    def C(self):
        """Constant with ``J = C / h`` for this level."""
        return self.J * self.h


def make_spatial_grid(H, delta, h):
    """Tile ``H`` by disjoint cubes of side ``(delta*h)**(1/d)`` anchored inside ``H``.

    When a side of ``H`` is not a multiple of the cube side, the last cube on
    that axis overhangs ``H``.
    """
    if not delta > 0:
        raise UnibwError(f"delta must be > 0, got {delta}")
    if not 0 < h < 1:
        raise UnibwError(f"h must lie in (0, 1), got {h}")
    if np.any(H.widths <= 0):
        raise DegenerateRegion("region H has zero volume")
    d = H.dim
    side = (delta * h) ** (1.0 / d)
    counts = tuple(max(1, _ceil_snapped(w / side)) for w in H.widths)
    axes = [H.lo[k] + side * np.arange(c) for k, c in enumerate(counts)]
    anchors = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, d)
    anchors.setflags(write=False)
    return SpatialGrid(H, float(delta), float(h), float(side), counts, anchors)
