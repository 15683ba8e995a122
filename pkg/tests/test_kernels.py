import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbertsep import _kernels_py, kernels

compiled = pytest.importorskip("hilbertsep._kernels", reason="compiled kernels not built")


def random_tableau(rng, rows, cols):
    """Phase-2 style tableau with a feasible slack basis."""
    T = np.zeros((rows + 1, cols + rows + 1))
    T[:rows, :cols] = rng.normal(size=(rows, cols))
    T[:rows, cols:cols + rows] = np.eye(rows)
    T[:rows, -1] = rng.uniform(0, 1, size=rows) * (rng.random(rows) < 0.7)  # degenerate rows
    T[rows, :cols] = rng.normal(size=cols)
    basis = np.arange(cols, cols + rows, dtype=np.intp)
    return T, basis


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 12),
       st.integers(0, 30))
def test_simplex_loop_backends_agree(seed, rows, cols, bland_after):
    rng = np.random.default_rng(seed)
    T, basis = random_tableau(rng, rows, cols)
    T1, b1 = T.copy(), basis.copy()
    T2, b2 = T.copy(), basis.copy()
    r1 = _kernels_py.simplex_loop(T1, b1, 500, bland_after, 1e-9, 1e-10)
    r2 = compiled.simplex_loop(T2, b2, 500, bland_after, 1e-9, 1e-10)
    assert tuple(r1) == tuple(r2)
    assert np.array_equal(b1, b2)
    assert np.allclose(T1, T2, rtol=1e-12, atol=1e-12)


def test_pivot_backends_agree(rng):
    T = rng.normal(size=(6, 9))
    T1, T2 = T.copy(), T.copy()
    _kernels_py.pivot(T1, 2, 4)
    compiled.pivot(T2, 2, 4)
    assert np.allclose(T1, T2, rtol=1e-14, atol=1e-15)
    assert T1[:, 4] == pytest.approx(np.eye(6)[2])


def test_log_ratio_backends_agree(rng):
    P = rng.uniform(0.01, 2, size=(40, 7))
    Q = rng.uniform(0.01, 2, size=(40, 7))
    hi1, lo1 = _kernels_py.log_ratio_extrema(P, Q)
    hi2, lo2 = compiled.log_ratio_extrema(P, Q)
    assert np.allclose(hi1, hi2, rtol=0, atol=1e-14)
    assert np.allclose(lo1, lo2, rtol=0, atol=1e-14)


def test_read_only_inputs_accepted(rng):
    P = rng.uniform(0.5, 1, size=(3, 4))
    P.setflags(write=False)
    hi, lo = kernels.log_ratio_extrema(P, P)
    assert np.all(hi == 0) and np.all(lo == 0)


def test_backend_selection():
    assert kernels.get_backend("python") is _kernels_py
    assert kernels.get_backend("compiled") is compiled
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


SCRIPT = """
import json, numpy as np
from hilbertsep import geometry as geo, svm, kernels
sq = geo.validate_domain([((1, 0), 0), ((-1, 0), 1), ((0, 1), 0), ((0, -1), 1)])
data = svm.make_dataset(sq, [(0.3, 0.7), (0.6, 0.8), (0.4, 0.2), (0.7, 0.35)], [1, 1, -1, -1])
m = svm.train_hard(sq, data, 1e-3)
print(json.dumps({"backend": kernels.BACKEND, "model": m.to_dict()}))
"""


def _run(env_extra):
    env = dict(os.environ, **env_extra)
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout)


def test_training_identical_across_backends():
    fast = _run({"HILBERTSEP_PURE_PYTHON": "0"})
    slow = _run({"HILBERTSEP_PURE_PYTHON": "1"})
    assert (fast["backend"], slow["backend"]) == ("compiled", "python")
    assert fast["model"]["margin"] == slow["model"]["margin"]
    assert fast["model"]["w"] == pytest.approx(slow["model"]["w"], abs=1e-12)
