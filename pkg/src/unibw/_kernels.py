"""Hot inner loops, each in a numba flavour (``*_nb``) and a numpy flavour (``*_np``).

The public names (no suffix) point at the numba flavour unless
``UNIBW_DISABLE_NUMBA`` is set. Both flavours implement the same algorithm
and are cross-checked in the test suite; ``benchmarks/bench_kernels.py``
times them against each other.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# kernel shape evaluation (codes from kernels.SHAPE_CODES)


@njit
def _factor_nb(code, params, axis, t):
    if t < 0.0 or t > 1.0:
        return 0.0
    if code == 0:
        return 1.0
    if code == 1:
        return 1.0 - abs(2.0 * t - 1.0)
    if code == 2:
        return 1.0 if t >= params[axis] else 0.0
    acc = 0.0
    for j in range(params.shape[0] - 1, -1, -1):
        acc = acc * t + params[j]
    return acc


def _factor_np(code, params, axis, t):
    inside = (t >= 0.0) & (t <= 1.0)
    if code == 0:
        val = np.ones_like(t)
    elif code == 1:
        val = 1.0 - np.abs(2.0 * t - 1.0)
    elif code == 2:
        val = (t >= params[axis]).astype(float)
    else:
        val = np.zeros_like(t)
        for j in range(params.shape[0] - 1, -1, -1):
            val = val * t + params[j]
    return np.where(inside, val, 0.0)


# ---------------------------------------------------------------------------
# windowed kernel sums over a sorted 1-d sample


@njit
def window_sums_nb(xs, anchors, width, code, params, scale, side):
    """``scale * sum_i K0((xs_i - z)/width)`` for each anchor ``z``; ``xs`` sorted."""
    A = anchors.shape[0]
    out = np.zeros(A)
    span = width * side
    for a in range(A):
        z = anchors[a]
        pad = 1e-12 * (abs(z) + span)
        i0 = np.searchsorted(xs, z - pad, side="left")
        i1 = np.searchsorted(xs, z + span + pad, side="right")
        acc = 0.0
        for i in range(i0, i1):
            t = (xs[i] - z) / width
            if side != 1.0:
                t = t / side
            acc += _factor_nb(code, params, 0, t)
        out[a] = scale * acc
    return out


def window_sums_np(xs, anchors, width, code, params, scale, side):
    A = anchors.shape[0]
    span = width * side
    pad = 1e-12 * (np.abs(anchors) + span)
    i0 = np.searchsorted(xs, anchors - pad, side="left")
    i1 = np.searchsorted(xs, anchors + span + pad, side="right")
    lengths = i1 - i0
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(A)
    owner = np.repeat(np.arange(A), lengths)
    idx = np.arange(total) + np.repeat(i0 - (np.cumsum(lengths) - lengths), lengths)
    t = (xs[idx] - anchors[owner]) / width
    if side != 1.0:
        t = t / side
    vals = _factor_np(code, params, 0, t)
    return scale * np.bincount(owner, weights=vals, minlength=A)


# ---------------------------------------------------------------------------
# l-infinity distance from y to the ellipsoid {B w : |w| <= 1}
#
# min t  s.t.  |y_i - b_i'w| <= t,  w'w <= 1,  solved by a log-barrier
# interior-point method with damped Newton steps. ``B`` spans the range of the
# Gram matrix (B B' = M), so rank-deficient matrices need no special care.


@njit
def _barrier_nb(B, y, w, t, tau):
    p, r = B.shape
    val = tau * t
    for i in range(p):
        e = y[i]
        for k in range(r):
            e -= B[i, k] * w[k]
        s1 = t - e
        s2 = t + e
        if s1 <= 0.0 or s2 <= 0.0:
            return np.inf
        val -= math.log(s1) + math.log(s2)
    q = 1.0
    for k in range(r):
        q -= w[k] * w[k]
    if q <= 0.0:
        return np.inf
    return val - math.log(q)


@njit
def linf_distance_nb(B, y, gap_tol, max_newton):
    """Barrier path-following for ``min_{|w|<=1} max_i |y_i - (B w)_i|``.

    Returns (distance, Newton steps). The duality gap on exit is below
    ``gap_tol``.
    """
    p, r = B.shape
    n = r + 1
    w = np.zeros(r)
    t = 1.0
    for i in range(p):
        t = max(t, abs(y[i]) + 1.0)
    m = 2.0 * p + 1.0
    tau = m / max(t, 1.0)
    g = np.empty(n)
    H = np.empty((n, n))
    steps = 0
    while True:
        for _ in range(200):
            g[:] = 0.0
            H[:, :] = 0.0
            g[r] = tau
            for i in range(p):
                e = y[i]
                for k in range(r):
                    e -= B[i, k] * w[k]
                a = 1.0 / (t - e)
                c = 1.0 / (t + e)
                g[r] -= a + c
                for k in range(r):
                    g[k] += (c - a) * B[i, k]
                a2 = a * a
                c2 = c * c
                for k in range(r):
                    bk = B[i, k]
                    for l in range(k + 1):
                        H[k, l] += (a2 + c2) * bk * B[i, l]
                    H[r, k] += (a2 - c2) * bk
                H[r, r] += a2 + c2
            q = 1.0
            for k in range(r):
                q -= w[k] * w[k]
            for k in range(r):
                g[k] += 2.0 * w[k] / q
                for l in range(k + 1):
                    H[k, l] += 4.0 * w[k] * w[l] / (q * q)
                H[k, k] += 2.0 / q
            for k in range(n):
                for l in range(k + 1, n):
                    H[k, l] = H[l, k]
            dx = np.linalg.solve(H, -g)
            dec = 0.0
            for k in range(n):
                dec -= g[k] * dx[k]
            steps += 1
            if dec <= 1e-9 or steps >= max_newton:
                break
            f0 = _barrier_nb(B, y, w, t, tau)
            s = 1.0
            wn = np.empty(r)
            while True:
                for k in range(r):
                    wn[k] = w[k] + s * dx[k]
                tn = t + s * dx[r]
                f1 = _barrier_nb(B, y, wn, tn, tau)
                if f1 <= f0 - 0.25 * s * dec:
                    break
                s *= 0.5
                if s < 1e-12:
                    break
            if s < 1e-12:
                break
            w[:] = wn
            t = tn
        if m / tau <= gap_tol or steps >= max_newton:
            break
        tau *= 8.0
    return t, steps


def _barrier_np(B, y, w, t, tau):
    e = y - B @ w
    s1, s2 = t - e, t + e
    q = 1.0 - float(w @ w)
    if np.any(s1 <= 0) or np.any(s2 <= 0) or q <= 0:
        return np.inf
    return tau * t - float(np.sum(np.log(s1) + np.log(s2))) - math.log(q)


def linf_distance_np(B, y, gap_tol, max_newton):
    p, r = B.shape
    w = np.zeros(r)
    t = float(np.max(np.abs(y))) + 1.0
    m = 2.0 * p + 1.0
    tau = m / max(t, 1.0)
    steps = 0
    while True:
        for _ in range(200):
            e = y - B @ w
            a, c = 1.0 / (t - e), 1.0 / (t + e)
            q = 1.0 - float(w @ w)
            g = np.empty(r + 1)
            g[:r] = B.T @ (c - a) + 2.0 * w / q
            g[r] = tau - float(np.sum(a + c))
            H = np.empty((r + 1, r + 1))
            H[:r, :r] = (B.T * (a * a + c * c)) @ B + 2.0 * np.eye(r) / q + 4.0 * np.outer(w, w) / q**2
            H[r, :r] = H[:r, r] = B.T @ (a * a - c * c)
            H[r, r] = float(np.sum(a * a + c * c))
            dx = np.linalg.solve(H, -g)
            dec = -float(g @ dx)
            steps += 1
            if dec <= 1e-9 or steps >= max_newton:
                break
            f0 = _barrier_np(B, y, w, t, tau)
            s = 1.0
            while True:
                wn, tn = w + s * dx[:r], t + s * dx[r]
                if _barrier_np(B, y, wn, tn, tau) <= f0 - 0.25 * s * dec:
                    break
                s *= 0.5
                if s < 1e-12:
                    break
            if s < 1e-12:
                break
            w, t = wn, tn
        if m / tau <= gap_tol or steps >= max_newton:
            break
        tau *= 8.0
    return t, steps


# ---------------------------------------------------------------------------
# greedy epsilon-packing under empirical L2


@njit
def greedy_packing_nb(V, eps):
    """Indices of a greedy eps-separated subset of the rows of ``V`` (row order)."""
    p, m = V.shape
    centers = np.empty(p, dtype=np.int64)
    k = 0
    eps2 = eps * eps
    for i in range(p):
        keep = True
        for c in range(k):
            j = centers[c]
            s = 0.0
            for q in range(m):
                diff = V[i, q] - V[j, q]
                s += diff * diff
            if s / m <= eps2:
                keep = False
                break
        if keep:
            centers[k] = i
            k += 1
    return centers[:k]


def greedy_packing_np(V, eps):
    centers = []
    eps2 = eps * eps
    for i in range(V.shape[0]):
        if centers:
            d2 = np.mean((V[centers] - V[i]) ** 2, axis=1)
            if np.any(d2 <= eps2):
                continue
        centers.append(i)
    return np.asarray(centers, dtype=np.int64)


# ---------------------------------------------------------------------------
# binned pair counts for plug-in bandwidth functionals


@njit
def binned_pair_counts_nb(w):
    """``cnt[k] = sum_i w_i w_{i+k}`` for ``k >= 1`` and ``cnt[0] = sum_i w_i (w_i - 1) / 2``."""
    nb = w.shape[0]
    cnt = np.zeros(nb)
    for i in range(nb):
        wi = w[i]
        if wi == 0.0:
            continue
        cnt[0] += wi * (wi - 1.0)
        for j in range(i + 1, nb):
            cnt[j - i] += wi * w[j]
    cnt[0] *= 0.5
    return cnt


def binned_pair_counts_np(w):
    nb = w.shape[0]
    cnt = np.correlate(w, w, mode="full")[nb - 1:].astype(float)
    cnt[0] = 0.5 * float(np.sum(w * (w - 1.0)))
    return cnt


# ---------------------------------------------------------------------------
# maximal partial sums


@njit
def max_abs_partial_sum_nb(vals):
    """``max_m max_j |sum_{i<=m} vals[i, j]|``."""
    n, p = vals.shape
    acc = np.zeros(p)
    best = 0.0
    for i in range(n):
        for j in range(p):
            acc[j] += vals[i, j]
            a = abs(acc[j])
            if a > best:
                best = a
    return best


def max_abs_partial_sum_np(vals):
    if vals.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.cumsum(vals, axis=0))))


if USE_NUMBA:
    window_sums = window_sums_nb
    linf_distance = linf_distance_nb
    greedy_packing = greedy_packing_nb
    binned_pair_counts = binned_pair_counts_nb
    max_abs_partial_sum = max_abs_partial_sum_nb
else:
    window_sums = window_sums_np
    linf_distance = linf_distance_np
    greedy_packing = greedy_packing_np
    binned_pair_counts = binned_pair_counts_np
    max_abs_partial_sum = max_abs_partial_sum_np

BACKEND = "numba" if USE_NUMBA else "numpy"
