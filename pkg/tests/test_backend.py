import os
import subprocess
import sys

import numpy as np
import pytest

from heisplane import _backend, _kernels_py
from heisplane.kernels import C_GAMMA

ck = pytest.importorskip("heisplane._ckernels")


@pytest.fixture
def points(rng):
    Y = rng.normal(size=(2000, 4)) * 1.5
    Y[:, 0] += 2.0
    return np.ascontiguousarray(Y)


def test_compiled_backend_selected():
    assert _backend.NAME == ("python" if os.environ.get("HEIS_PLANE_BACKEND") == "python" else "cython")


@pytest.mark.parametrize("z1", [0.0, 0.7, 2.0])
def test_axis_kernels_agree(points, z1):
    a = ck.axis_kernels(points, z1, C_GAMMA)
    b = _kernels_py.axis_kernels(points, z1, C_GAMMA)
    assert a.shape == b.shape == (len(points), _backend.N_KERNEL_COLS)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


def test_bump_terms_and_sums_agree(points, rng):
    args = (1.3, C_GAMMA, np.array([2.0, 0.1, 0.0, -0.2]), 1.0, 0.8)
    a = ck.bump_terms(points, *args)
    b = _kernels_py.bump_terms(points, *args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)
    w = np.ascontiguousarray(rng.uniform(size=len(points)))
    np.testing.assert_allclose(ck.bump_sums(points, w, *args), w @ b, rtol=1e-11)
    np.testing.assert_allclose(_kernels_py.bump_sums(points, w, *args), w @ b, rtol=1e-12)


def test_env_forces_python_fallback():
    code = "from heisplane import _backend; print(_backend.NAME)"
    env = dict(os.environ, HEIS_PLANE_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
