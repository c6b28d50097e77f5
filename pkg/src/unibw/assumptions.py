"""Checkable reports for bandwidth-sequence and kernel-family hypotheses.

Bandwidth checks cover the power-law family ``h_n = c n**(-a)``, for which the
limits have exact symbolic answers; a finite scan over the requested range
supplies witnesses when a condition fails. Kernel checks are numeric and
advisory: the hypotheses they probe are asymptotic.
"""
import numpy as np

from .errors import UnibwError
from .quadrature import tensor_rule

DEFAULT_SHIFTS = (0.1, 0.05, 0.01, 0.005, 0.001)
DEFAULT_DILATIONS = (1.1, 1.05, 1.01, 1.005, 1.001)


def _scan_points(lo, hi, count=400):
    pts = np.unique(np.round(np.geomspace(lo, hi, count)).astype(np.int64))
    return pts[(pts >= lo) & (pts <= hi)]


def check_crs(c, a, n_range=(2, 10**6)):
    """Verdicts on the bandwidth decay conditions for ``h_n = c n**(-a)``.

    ``HV1``: ``h_n`` in (0, 1), nonincreasing with limit 0, and ``n h_n``
    nondecreasing with limit infinity. ``HV2``: ``n h_n / log n -> inf``.
    ``HV3``: ``log(1/h_n) / log log n -> inf``.

    Returns a dict; failing conditions carry a ``witness`` entry.

    >>> check_crs(1.0, 0.5, (2, 10**6))["all_pass"]
    True
    """
    if not c > 0:
        raise UnibwError("c must be > 0")
    lo, hi = int(n_range[0]), int(n_range[1])
    if lo < 2 or hi < lo:
        raise UnibwError("n_range must satisfy 2 <= lo <= hi")
    ns = _scan_points(lo, hi)
    h = c * ns.astype(float) ** (-a)
    nh = ns * h

    hv1 = {"symbolic": bool(0 < a < 1), "reasons": []}
    if not a > 0:
        hv1["reasons"].append("h_n does not tend to 0 (a <= 0)")
    if not a < 1:
        hv1["reasons"].append("n h_n does not tend to infinity (a >= 1)")
    bad = np.flatnonzero((h <= 0) | (h >= 1))
    if bad.size:
        hv1["reasons"].append("h_n outside (0, 1)")
        hv1["witness"] = {"n": int(ns[bad[0]]), "h_n": float(h[bad[0]])}
    if np.any(np.diff(h) > 0):
        hv1["reasons"].append("h_n increases")
    if np.any(np.diff(nh) < -1e-12 * nh[1:]):
        k = int(np.flatnonzero(np.diff(nh) < -1e-12 * nh[1:])[0])
        hv1["reasons"].append("n h_n decreases")
        hv1.setdefault("witness", {"n": int(ns[k + 1]), "n_h_n": float(nh[k + 1])})
    if a >= 1 and "witness" not in hv1:
        hv1["witness"] = {"n": int(ns[-1]), "n_h_n": float(nh[-1])}
    if a <= 0 and "witness" not in hv1:
        hv1["witness"] = {"n": int(ns[-1]), "h_n": float(h[-1])}
    hv1["pass"] = not hv1["reasons"]

    ratio2 = nh / np.log(ns)
    hv2 = {"symbolic": bool(a < 1), "pass": bool(a < 1),
           "ratio_at_end": float(ratio2[-1])}
    if not hv2["pass"]:
        hv2["witness"] = {"n": int(ns[-1]), "n_h_n_over_log_n": float(ratio2[-1])}

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio3 = np.log(1.0 / h) / np.log(np.log(ns))
    hv3 = {"symbolic": bool(a > 0), "pass": bool(a > 0), "ratio_at_end": float(ratio3[-1])}
    if not hv3["pass"]:
        hv3["witness"] = {"n": int(ns[-1]), "log_inv_h_over_loglog_n": float(ratio3[-1])}

    return {
        "family": "h_n = c * n**(-a)",
        "c": float(c),
        "a": float(a),
        "n_range": [lo, hi],
        "HV1": hv1,
        "HV2": hv2,
        "HV3": hv3,
        "all_pass": bool(hv1["pass"] and hv2["pass"] and hv3["pass"]),
    }


def _l2_sq(fun, lo, hi, breaks, nodes):
    X, W = tensor_rule(lo, hi, breaks, nodes)
    v = fun(X)
    return float(np.dot(v * v, W))


def translation_modulus(K, u, nodes=None):
    """``max_k int (K(x) - K(x + u e_k))**2 dx`` over the coordinate directions."""
    d = K.dim
    nodes = nodes or (64 if d == 1 else 16)
    side = K.side
    best = 0.0
    for k in range(d):
        shift = np.zeros(d)
        shift[k] = u
        lo = np.full(d, -abs(u))
        hi = np.full(d, side + abs(u))
        br = [np.concatenate((K.axis_breaks(j), K.axis_breaks(j) - shift[j])) for j in range(d)]
        best = max(best, _l2_sq(lambda X: K(X) - K(X + shift), lo, hi, br, nodes))
    return best


def dilation_modulus(K, lam, nodes=None):
    """``int (K(x) - K(lam x))**2 dx``."""
    if not lam > 0:
        raise UnibwError("dilation factor must be positive")
    d = K.dim
    nodes = nodes or (64 if d == 1 else 16)
    top = K.side * max(1.0, 1.0 / lam)
    br = [np.concatenate((K.axis_breaks(j), K.axis_breaks(j) / lam)) for j in range(d)]
    return _l2_sq(lambda X: K(X) - K(lam * X), np.zeros(d), np.full(d, top), br, nodes)


def check_family_assumptions(family, probes=1000, seed=0, shifts=DEFAULT_SHIFTS, dilations=DEFAULT_DILATIONS):
    """Numeric spot-checks of the kernel-family hypotheses.

    Reports the translation and dilation moduli over decreasing nets, a
    sampled estimate of ``max |K|`` next to the declared bound, and any
    nonzero values found at sampled points outside the unit cube.
    """
    if probes < 1:
        raise UnibwError("probes must be >= 1")
    rng = np.random.default_rng(seed)
    d = family.dim
    inside = rng.random((probes, d))
    # exterior probes: push one coordinate out of [0, 1]
    outside = rng.uniform(-1.0, 2.0, size=(probes, d))
    axis = rng.integers(0, d, size=probes)
    push = np.where(rng.random(probes) < 0.5, -rng.uniform(1e-9, 1.0, probes), 1.0 + rng.uniform(1e-9, 1.0, probes))
    outside[np.arange(probes), axis] = push
    outside = np.vstack([outside, np.full((1, d), 2.0)])

    trans = {float(u): max(translation_modulus(K, u, family.nodes) for K in family) for u in shifts}
    dil = {float(l): max(dilation_modulus(K, l, family.nodes) for K in family) for l in dilations}
    sampled = max(float(np.max(np.abs(K(inside)))) for K in family)
    declared = max(K.max_abs() for K in family)
    ext = []
    for i, K in enumerate(family):
        if K.dilation != 1.0:
            continue
        vals = K(outside)
        for j in np.flatnonzero(vals != 0)[:5]:
            ext.append({"kernel": i, "point": outside[j].tolist(), "value": float(vals[j])})
    tv = list(trans.values())
    return {
        "p": len(family),
        "dim": d,
        "translation_modulus": {f"{u:g}": v for u, v in trans.items()},
        "dilation_modulus": {f"{l:g}": v for l, v in dil.items()},
        "translation_decreasing": bool(all(tv[i + 1] <= tv[i] + 1e-12 for i in range(len(tv) - 1))),
        "max_abs_sampled": sampled,
        "max_abs_declared": declared,
        "bounded_by_one": bool(declared <= 1.0 + 1e-12),
        "exterior_violations": ext,
        "advisory": True,
    }

