"""The numba and numpy flavours of every hot kernel must agree."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from unibw import _kernels as k


@given(hnp.arrays(float, st.integers(0, 60), elements=st.floats(-1, 3)),
       hnp.arrays(float, st.integers(1, 8), elements=st.floats(-1, 2)),
       st.floats(0.01, 1.0), st.sampled_from([0, 1, 2, 3]))
def test_window_sums(xs, anchors, width, code):
    xs = np.sort(xs)
    params = {0: np.zeros(0), 1: np.zeros(0), 2: np.array([0.4]), 3: np.array([1.0, -0.5, 0.25])}[code]
    a = k.window_sums_nb(xs, anchors, width, code, params, 1.5, 1.0)
    b = k.window_sums_np(xs, anchors, width, code, params, 1.5, 1.0)
    assert a == pytest.approx(b, abs=1e-12)


@given(hnp.arrays(float, st.tuples(st.integers(1, 12), st.integers(1, 30)), elements=st.sampled_from([0.0, 1.0])),
       st.floats(0.05, 0.9))
def test_greedy_packing(V, eps):
    assert np.array_equal(k.greedy_packing_nb(V, eps), k.greedy_packing_np(V, eps))


@given(hnp.arrays(float, st.integers(1, 40), elements=st.integers(0, 9).map(float)))
def test_binned_pair_counts(w):
    a = k.binned_pair_counts_nb(w)
    b = k.binned_pair_counts_np(w)
    assert a == pytest.approx(b)
    # brute force
    n = w.size
    want = np.array([w[:n - j] @ w[j:] for j in range(n)])
    want[0] = np.sum(w * (w - 1)) / 2
    assert a == pytest.approx(want)


@given(hnp.arrays(float, st.tuples(st.integers(0, 30), st.integers(1, 4)), elements=st.floats(-5, 5)))
def test_max_abs_partial_sum(vals):
    a = k.max_abs_partial_sum_nb(vals)
    b = k.max_abs_partial_sum_np(vals)
    assert a == pytest.approx(b, abs=1e-12)
    brute = max((abs(vals[:m + 1].sum(axis=0)).max() for m in range(vals.shape[0])), default=0.0)
    assert a == pytest.approx(brute, abs=1e-12)


def test_env_flag_selects_numpy():
    env = dict(os.environ, UNIBW_DISABLE_NUMBA="1")
    res = subprocess.run([sys.executable, "-c", "from unibw import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True)
    assert res.stdout.strip() == "numpy"


def test_numpy_backend_matches_numba_study():
    # the flavours sum in different orders, so agreement is numerical rather than bitwise
    code = ("from unibw import harness; import json;"
            "cfg = harness.ExperimentConfig(n_list=(300, 3000), R=3, rho=1.3);"
            "print(json.dumps(harness.run_thm1_i(cfg).stats))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, UNIBW_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append(json.loads(res.stdout))
    for key in outs[0]:
        assert np.array(outs[0][key]) == pytest.approx(np.array(outs[1][key]), abs=1e-8)
