"""Brute-force reference computations, deliberately independent of the package code paths."""
import itertools
import math

import numpy as np
from scipy import linalg, optimize


def _sym_sqrt(M):
    R = linalg.sqrtm(np.asarray(M, dtype=float))
    return np.real(R)


def _ball_points(center, half, m, p):
    """A ``m**p`` grid around ``center``, radially pulled back into the unit ball."""
    axes = [np.linspace(c - half, c + half, m) for c in center]
    W = np.array(list(itertools.product(*axes)))
    r = np.linalg.norm(W, axis=1)
    W[r > 1] /= r[r > 1, None]
    return W


def grid_linf_distance(M, y, levels=40):
    """``min_{|w| <= 1} max_i |y_i - (S w)_i|`` with ``S = M**(1/2)``, by zooming grid search."""
    y = np.asarray(y, dtype=float)
    S = _sym_sqrt(M)
    p = y.size
    m = {1: 2001, 2: 121, 3: 25}[p]
    center, half = np.zeros(p), 1.0
    best_w, best = None, math.inf
    for _ in range(levels):
        W = _ball_points(center, half, m, p)
        f = np.max(np.abs(y[None, :] - W @ S.T), axis=1)
        k = int(np.argmin(f))
        if f[k] < best:
            best, best_w = float(f[k]), W[k]
        center = best_w
        half *= 0.6 if p == 3 else 0.3
        if half < 1e-9:
            break
    return best


def function_grid(kernels, m=200_000):
    """Kernel values on a midpoint grid of ``[0, 1]``; ``mean(u*v)`` then approximates ``int u v``."""
    x = (np.arange(m) + 0.5) / m
    return np.array([K(x) for K in kernels])


def least_norm_rate(F, y, rounds=30):
    """``sup_a (a'y)**2 / |sum_i a_i K_i|**2`` over coefficient directions ``a``.

    ``F`` holds the kernels sampled on a fine grid (``function_grid``); the
    norm is a Riemann sum, never the Gram matrix. Directions are searched on
    a zooming angular grid.
    """
    y = np.asarray(y, dtype=float)
    p = y.size

    G = (F @ F.T) / F.shape[1]  # Riemann-sum inner products of the sampled kernels

    def value(A):
        nrm = np.sum((A @ G) * A, axis=1)
        return (A @ y) ** 2 / nrm

    if p == 1:
        return float(value(np.ones((1, 1)))[0])
    if p == 2:
        lo, hi, m = 0.0, math.pi, 721
        best = -math.inf
        for _ in range(rounds):
            th = np.linspace(lo, hi, m)
            v = value(np.column_stack([np.cos(th), np.sin(th)]))
            k = int(np.argmax(v))
            best = max(best, float(v[k]))
            step = th[1] - th[0]
            lo, hi, m = th[k] - 2 * step, th[k] + 2 * step, 41
        return best
    # p == 3: spherical angles
    t_lo, t_hi, f_lo, f_hi, m = 0.0, math.pi, 0.0, math.pi, 121
    best = -math.inf
    for _ in range(rounds):
        th, ph = np.meshgrid(np.linspace(t_lo, t_hi, m), np.linspace(f_lo, f_hi, m), indexing="ij")
        th, ph = th.ravel(), ph.ravel()
        A = np.column_stack([np.cos(th), np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)])
        v = value(A)
        k = int(np.argmax(v))
        best = max(best, float(v[k]))
        dt = (t_hi - t_lo) / (m - 1)
        df = (f_hi - f_lo) / (m - 1)
        t_lo, t_hi = th[k] - 2 * dt, th[k] + 2 * dt
        f_lo, f_hi = ph[k] - 2 * df, ph[k] + 2 * df
        m = 21
    return best


def max_packing(V, eps):
    """Largest subset of rows with all pairwise empirical L2 distances ``> eps`` (exhaustive)."""
    p = V.shape[0]
    D2 = np.mean((V[:, None, :] - V[None, :, :]) ** 2, axis=2)
    conflict = [0] * p
    for i in range(p):
        for j in range(p):
            if i != j and D2[i, j] <= eps * eps:
                conflict[i] |= 1 << j
    best = 0
    for mask in range(1 << p):
        size = bin(mask).count("1")
        if size <= best:
            continue
        ok = True
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            if conflict[i] & mask:
                ok = False
                break
            m &= m - 1
        if ok:
            best = size
    return best


def normal_mise_optimum(n):
    """Bandwidth minimizing the exact MISE of a Gaussian-kernel estimate of N(0, 1)."""
    def mise(h):
        return (1.0 / (n * h) + (1.0 - 1.0 / n) / math.sqrt(1.0 + h * h)
                - 2.0 * math.sqrt(2.0) / math.sqrt(2.0 + h * h) + 1.0) / (2.0 * math.sqrt(math.pi))
    res = optimize.minimize_scalar(mise, bounds=(1e-4, 2.0), method="bounded", options={"xatol": 1e-10})
    return float(res.x)

