"""Kernels supported on the unit cube and finite kernel families.

Every kernel is a product over axes of a one-dimensional shape restricted to
``[0, 1]``, times a constant ``scale``. The registry is closed: kernels are
built from a shape name plus coefficients, never from user code.

``dilation`` realizes ``K_r(x) = K(r**(-1/d) x)``; a dilated kernel lives on
``[0, r**(1/d)]**d`` and is only meant for scale-identity checks.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import UnibwError

SHAPE_CODES = {"uniform": 0, "triangular": 1, "indicator": 2, "polynomial": 3}

DEFAULT_NODES = {1: 64, 2: 32}


@dataclass(frozen=True)
class Kernel:
    """A bounded, compactly supported product kernel.

    Parameters
    ----------
    shape : {'uniform', 'triangular', 'indicator', 'polynomial'}
        ``uniform`` is ``1_[0,1]^d``; ``triangular`` is ``prod(1 - |2 x_k - 1|)``;
        ``indicator`` is ``1_[s,1]`` with ``params = s``; ``polynomial`` applies
        ``sum_j c_j t**j`` on every axis with ``params = (c_0, c_1, ...)``.
    dim : int
        Dimension ``d`` of the argument.
    params : tuple of float
        Shape coefficients, see above.
    scale : float
        Constant multiplier (negative values allowed).
    dilation : float
        Volume dilation factor ``r >= 1``; 1 means the unit-cube support.
    label : str
        Identifier used in reports.
    """

    shape: str
    dim: int = 1
    params: tuple = ()
    scale: float = 1.0
    dilation: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.shape not in SHAPE_CODES:
            raise UnibwError(f"unknown kernel shape {self.shape!r}; choose from {sorted(SHAPE_CODES)}")
        if int(self.dim) < 1:
            raise UnibwError("kernel dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "dilation", float(self.dilation))
        if self.shape == "indicator":
            if len(self.params) != self.dim:
                raise UnibwError("indicator kernel needs one threshold per axis")
            if any(not 0.0 <= s <= 1.0 for s in self.params):
                raise UnibwError("indicator thresholds must lie in [0, 1]")
        elif self.shape == "polynomial":
            if len(self.params) == 0:
                raise UnibwError("polynomial kernel needs at least one coefficient")
        elif self.params:
            raise UnibwError(f"{self.shape} kernel takes no coefficients")
        if not np.isfinite(self.scale):
            raise UnibwError("kernel scale must be finite")
        if not self.dilation > 0:
            raise UnibwError("dilation must be positive")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self):
        if self.shape == "indicator":
            base = "ind[" + ",".join(f"{s:g}" for s in self.params) + "]"
        elif self.shape == "polynomial":
            base = "poly(" + ",".join(f"{c:g}" for c in self.params) + ")"
        else:
            base = self.shape
        if self.scale != 1.0:
            base = f"{self.scale:g}*{base}"
        if self.dilation != 1.0:
            base = f"{base}@dil{self.dilation:g}"
        return base

    @property
    def code(self):
        return SHAPE_CODES[self.shape]

    @property
    def side(self):
        """Per-axis support length ``dilation**(1/d)``."""
        if self.dilation == 1.0:
            return 1.0
        return self.dilation ** (1.0 / self.dim)

    @property
    def is_indicator(self):
        return self.shape in ("uniform", "indicator")

    def params_array(self):
        return np.asarray(self.params if self.params else (0.0,), dtype=float)

    def _factor(self, t, axis):
        inside = (t >= 0.0) & (t <= 1.0)
        if self.shape == "uniform":
            val = np.ones_like(t)
        elif self.shape == "triangular":
            val = 1.0 - np.abs(2.0 * t - 1.0)
        elif self.shape == "indicator":
            val = (t >= self.params[axis]).astype(float)
        else:
            val = np.polynomial.polynomial.polyval(t, self.params)
        return np.where(inside, val, 0.0)

    def __call__(self, x):
        """Evaluate at points ``x`` of shape ``(..., d)``; for ``d == 1`` any shape works."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and not (x.ndim >= 2 and x.shape[-1] == 1):
            shape = x.shape
        else:
            if x.shape[-1] != self.dim:
                raise UnibwError(f"expected points with {self.dim} coordinates, got shape {x.shape}")
            shape = x.shape[:-1]
        pts = x.reshape(-1, self.dim)
        side = self.side
        out = np.full(pts.shape[0], self.scale)
        for k in range(self.dim):
            t = pts[:, k] if side == 1.0 else pts[:, k] / side
            out = out * self._factor(t, k)
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    def axis_breaks(self, axis):
        """Points of non-smoothness on one axis, support ends included."""
        if self.shape == "triangular":
            b = [0.0, 0.5, 1.0]
        elif self.shape == "indicator":
            b = sorted({0.0, self.params[axis], 1.0})
        else:
            b = [0.0, 1.0]
        return np.asarray(b) * self.side

    def max_abs(self):
        """Declared ``sup |K|`` (exact for every registry shape)."""
        if self.shape != "polynomial":
            per_axis = 1.0
        else:
            poly = np.polynomial.Polynomial(self.params)
            cands = [0.0, 1.0]
            if len(self.params) > 1:
                for r in poly.deriv().roots():
                    if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0:
                        cands.append(r.real)
            per_axis = float(np.max(np.abs(poly(np.asarray(cands)))))
        return abs(self.scale) * per_axis ** self.dim

    def scaled(self, c):
        return Kernel(self.shape, self.dim, self.params, self.scale * c, self.dilation)

    def negated(self):
        return self.scaled(-1.0)

    def dilated(self, r):
        return Kernel(self.shape, self.dim, self.params, self.scale, self.dilation * r)

    def to_mapping(self):
        return {"shape": self.shape, "dim": self.dim, "coeffs": list(self.params), "scale": self.scale}


def make_kernel(shape, dim=1, coeffs=None, scale=1.0, label=""):
    """Build a registry kernel from a shape name and optional coefficients."""
    params = () if coeffs is None else tuple(np.atleast_1d(np.asarray(coeffs, dtype=float)))
    return Kernel(shape, dim, params, scale, 1.0, label)


@dataclass(frozen=True)
class KernelFamily:
    """An ordered finite family of kernels sharing one dimension.

    ``nodes`` is the Gauss-Legendre node count per axis and per smooth piece
    used for every L2 inner product over the family.
    """

    kernels: tuple
    nodes: int = 0
    scheme: str = "gauss-legendre"
    _dim: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        kernels = tuple(self.kernels)
        if len(kernels) < 1:
            raise UnibwError("a kernel family needs at least one kernel")
        dims = {k.dim for k in kernels}
        if len(dims) != 1:
            raise UnibwError("all kernels of a family must share the same dimension")
        d = dims.pop()
        nodes = self.nodes or DEFAULT_NODES.get(d, 16)
        if nodes < 2:
            raise UnibwError("quadrature needs at least 2 nodes per axis")
        if self.scheme != "gauss-legendre":
            raise UnibwError(f"unsupported quadrature scheme {self.scheme!r}")
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "nodes", int(nodes))
        object.__setattr__(self, "_dim", d)

    @property
    def dim(self):
        return self._dim

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def __getitem__(self, i):
        return self.kernels[i]

    @property
    def is_indicator_family(self):
        return all(k.shape == "indicator" and k.scale == 1.0 and k.dilation == 1.0 for k in self.kernels)

    def thresholds(self):
        """``(p, d)`` array of indicator thresholds (indicator families only)."""
        if not self.is_indicator_family:
            raise UnibwError("thresholds are defined for indicator families only")
        return np.array([k.params for k in self.kernels], dtype=float)


def indicator_family(s, nodes=0):
    """Family ``{1_[s_i, 1]}`` from thresholds of shape ``(p,)`` (d = 1) or ``(p, d)``."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    return KernelFamily(tuple(Kernel("indicator", s.shape[1], tuple(row)) for row in s), nodes=nodes)
