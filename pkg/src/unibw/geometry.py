"""Gram ellipsoids of kernel families and the rate function on finite subfamilies.

For a finite family ``K_1..K_p`` with Gram matrix ``M_ij = int K_i K_j``, the
least-norm representer of a functional ``y_i = int g K_i`` lies in the span of
the family, so the rate is ``J(y) = y' M^+ y`` when ``y`` lies in ``range(M)``
and ``+inf`` otherwise. The unit ball ``{J <= 1}`` is the ellipsoid
``{M c : c' M c <= 1}``.

Distances to the ball are measured in l-infinity over the family, which is a
lower bound for the sup-norm distance over the whole class.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NullDirection, UnibwError
from .kernels import KernelFamily, indicator_family
from .quadrature import tensor_rule

EIG_RTOL = 1e-10
RANGE_TOL = 1e-8
BALL_TOL = 1e-10


def indicator_gram(s):
    """Closed-form Gram of ``{1_[s_i,1]}``: ``M_ij = prod_k (1 - max(s_ik, s_jk))``."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    return np.prod(1.0 - np.maximum(s[:, None, :], s[None, :, :]), axis=2)


def quadrature_gram(family):
    """``int K_i K_j`` by tensor Gauss-Legendre split at every kernel kink."""
    d = family.dim
    side = max(k.side for k in family)
    breaks = [np.concatenate([k.axis_breaks(a) for k in family]) for a in range(d)]
    X, W = tensor_rule(np.zeros(d), np.full(d, side), breaks, family.nodes)
    V = np.array([k(X) for k in family])
    M = (V * W) @ V.T
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class GramEllipsoid:
    """Gram matrix plus its clamped eigendecomposition.

    Eigenvalues below ``1e-10 * max_eigenvalue`` (or below zero) are treated
    as zero when deciding the rank.
    """

    M: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    rank: int

    @classmethod
    def from_matrix(cls, M):
        M = np.array(M, dtype=float, ndmin=2)
        if M.shape[0] != M.shape[1]:
            raise UnibwError("Gram matrix must be square")
        if not np.allclose(M, M.T, atol=1e-12, rtol=0):
            raise UnibwError("Gram matrix must be symmetric")
        M = 0.5 * (M + M.T)
        w, V = np.linalg.eigh(M)
        if w.size and w.min() < -1e-10 * max(1.0, abs(w.max())):
            raise UnibwError("Gram matrix is not positive semidefinite")
        w = np.clip(w, 0.0, None)
        top = w.max() if w.size else 0.0
        keep = w > EIG_RTOL * top if top > 0 else np.zeros_like(w, dtype=bool)
        w = np.where(keep, w, 0.0)
        for a in (M, w, V):
            a.setflags(write=False)
        return cls(M, w, V, int(keep.sum()))

    @property
    def p(self):
        return self.M.shape[0]

    @property
    def lmax(self):
        return float(self.eigvals.max()) if self.eigvals.size else 0.0

    def _split(self, Y):
        """Coefficients on kept eigenvectors and the out-of-range residual norm."""
        keep = self.eigvals > 0
        C = Y @ self.eigvecs
        Vk = self.eigvecs[:, keep]
        resid = Y - C[..., keep] @ Vk.T
        return C[..., keep], np.linalg.norm(resid, axis=-1)

    def rates(self, Y):
        """Vectorized rate ``y' M^+ y`` for rows of ``Y`` (``inf`` off the range)."""
        Y = np.asarray(Y, dtype=float)
        C, resid = self._split(Y)
        lam = self.eigvals[self.eigvals > 0]
        J = np.sum(C * C / lam, axis=-1) if lam.size else np.zeros(Y.shape[:-1])
        norm = np.linalg.norm(Y, axis=-1)
        return np.where(resid > RANGE_TOL * norm, np.inf, J)

    @property
    def factor(self):
        """``B`` with ``B B' = M`` and one column per kept eigenvalue."""
        keep = self.eigvals > 0
        return np.ascontiguousarray(self.eigvecs[:, keep] * np.sqrt(self.eigvals[keep]))

    def pinv(self):
        lam = self.eigvals
        inv = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
        return (self.eigvecs * inv) @ self.eigvecs.T


def gram(family, method="auto"):
    """Gram ellipsoid of a family; indicator families use the closed form by default."""
    if method not in ("auto", "closed", "quadrature"):
        raise UnibwError(f"unknown Gram method {method!r}")
    if method == "closed" or (method == "auto" and family.is_indicator_family):
        M = indicator_gram(family.thresholds())
    else:
        M = quadrature_gram(family)
    return GramEllipsoid.from_matrix(M)


def _as_vector(y, E):
    y = np.asarray(getattr(y, "y", y), dtype=float).reshape(-1)
    if y.size != E.p:
        raise UnibwError(f"functional has {y.size} entries, family has {E.p}")
    if not np.all(np.isfinite(y)):
        raise UnibwError("functional values must be finite")
    return y


def rate_J(y, E):
    """Least squared L2 norm of a representer of ``y``; ``inf`` when none exists."""
    y = _as_vector(y, E)
    if not np.any(y):
        return 0.0
    return float(E.rates(y[None, :])[0])


def in_ball(y, E):
    return rate_J(y, E) <= 1.0 + BALL_TOL


def sup_distance_to_ball(y, E, gap_tol=1e-10, max_newton=10_000):
    """``min_{J(u) <= 1} max_i |y_i - u_i|``.

    Written as ``min t`` subject to ``|y_i - (B w)_i| <= t`` and ``|w| <= 1``
    with ``B B' = M`` and solved by a barrier interior-point method; the
    returned value is within ``gap_tol`` of the optimum.
    """
    y = _as_vector(y, E)
    if in_ball(y, E):
        return 0.0
    if E.rank == 0:
        return float(np.max(np.abs(y)))
    dist, _ = _kernels.linf_distance(E.factor, y, gap_tol, max_newton)
    return float(dist)


def distance_bounds(Y, E, J=None):
    """Cheap lower/upper bounds on the l-infinity distance for rows of ``Y``.

    The upper bound uses the radial point ``y / sqrt(J)`` (or 0 when ``J`` is
    infinite); the lower bound evaluates the dual ``a'y - sqrt(a'Ma)`` at
    ``||a||_1 = 1`` for the coordinate directions and the direction ``M^+ y``.
    """
    Y = np.asarray(Y, dtype=float)
    if J is None:
        J = E.rates(Y)
    absmax = np.max(np.abs(Y), axis=1)
    fin = np.isfinite(J)
    shrink = np.where(fin & (J > 1), 1.0 - 1.0 / np.sqrt(np.where(fin & (J > 1), J, 1.0)), 0.0)
    upper = np.where(fin, shrink * absmax, absmax)
    upper = np.where(fin & (J <= 1 + BALL_TOL), 0.0, upper)
    diag = np.sqrt(np.diag(E.M))
    lower = np.max(np.abs(Y) - diag, axis=1)
    A = Y @ E.pinv()
    l1 = np.sum(np.abs(A), axis=1)
    ok = l1 > 0
    A = np.where(ok[:, None], A / np.where(ok, l1, 1.0)[:, None], 0.0)
    lin = np.sum(A * Y, axis=1)
    quad = np.sqrt(np.clip(np.sum((A @ E.M) * A, axis=1), 0.0, None))
    lower = np.maximum(lower, lin - quad)
    return np.clip(lower, 0.0, None), upper


def max_distance_to_ball(Y, E, J=None, floor=0.0):
    """``max(floor, max_rows sup_distance_to_ball)`` with bound-based pruning.

    Rows whose upper bound cannot beat the running maximum are never solved
    exactly; ``floor`` seeds that maximum (e.g. from earlier batches).
    """
    Y = np.asarray(Y, dtype=float)
    best = float(floor)
    if Y.shape[0] == 0:
        return best
    if J is None:
        J = E.rates(Y)
    out = np.asarray(J) > 1.0 + BALL_TOL
    if not np.any(out):
        return best
    idx = np.flatnonzero(out)
    lower, upper = distance_bounds(Y[idx], E, J[idx])
    best = max(best, float(lower.max()))
    for i in np.argsort(-upper, kind="stable"):
        if upper[i] <= best:
            break
        best = max(best, sup_distance_to_ball(Y[idx[i]], E))
    return best


@dataclass(frozen=True)
class FiniteFunctional:
    """Values ``y_i = Psi(K_i)`` of a functional on a finite family."""

    y: np.ndarray
    family: KernelFamily = None

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        if not np.all(np.isfinite(y)):
            raise UnibwError("functional values must be finite")
        if self.family is not None and y.size != len(self.family):
            raise UnibwError("functional length does not match the family")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.size


def extreme_point(E, direction, family=None):
    """Boundary point ``M d / sqrt(d' M d)`` of the ball in direction ``d``."""
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.size != E.p:
        raise UnibwError("direction length does not match the family")
    Md = E.M @ d
    q = float(d @ Md)
    if not np.any(np.abs(Md) > 1e-14 * max(1.0, E.lmax)) or q <= 0:
        raise NullDirection("direction lies in the null space of the Gram matrix")
    return FiniteFunctional(Md / np.sqrt(q), family)


def strassen_S_distance(g_values, s_grid):
    """l-infinity distance from a function sampled on an s-grid to the Strassen set.

    The Strassen set ``{s -> int_[s,1] g' : int g'^2 <= 1}`` restricted to the
    grid is the unit ball of the indicator family ``{1_[s_i, 1]}``.
    """
    s = np.asarray(s_grid, dtype=float)
    g = np.asarray(g_values, dtype=float).reshape(-1)
    s2 = s[:, None] if s.ndim == 1 else s
    if s2.shape[0] != g.size or g.size < 1:
        raise UnibwError("need one value per s-grid point")
    if np.any(s2 < 0) or np.any(s2 > 1):
        raise UnibwError("s-grid must lie in the unit cube")
    E = GramEllipsoid.from_matrix(indicator_gram(s2))
    return sup_distance_to_ball(g, E)


def strassen_rate(g_values, s_grid):
    s = np.asarray(s_grid, dtype=float)
    E = GramEllipsoid.from_matrix(indicator_gram(s))
    return rate_J(np.asarray(g_values, dtype=float), E)


def strassen_family(s_grid):
    return indicator_family(s_grid)
