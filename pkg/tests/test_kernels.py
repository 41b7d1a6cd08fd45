import os
import subprocess
import sys

import numpy as np
import pytest

from icsfds import _kernels, matlin, scatter
from conftest import BACKENDS, random_spd


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 40])
def test_jacobi_matches_lapack(backend, rng, n):
    a = np.stack([random_spd(rng, n, cond=1e4) - 2.0 * np.eye(n) for _ in range(5)])
    w, v, ok = backend.jacobi_eigh_batch(a, 100)
    assert ok.all()
    for i in range(len(a)):
        ref = np.linalg.eigvalsh(a[i])
        np.testing.assert_allclose(np.sort(w[i]), ref, atol=1e-12 * np.abs(ref).max())
        np.testing.assert_allclose(a[i] @ v[i], v[i] * w[i], atol=1e-10 * np.abs(ref).max())
        np.testing.assert_allclose(v[i].T @ v[i], np.eye(n), atol=1e-12)


def test_jacobi_reports_non_convergence(backend, rng):
    a = random_spd(rng, 8)[None]
    _, _, ok = backend.jacobi_eigh_batch(a, 1)
    assert not ok[0]


def test_jacobi_backends_agree(rng):
    if len(BACKENDS) < 2:
        pytest.skip("numba not installed")
    a = np.stack([random_spd(rng, 6) for _ in range(50)])
    w0, _, _ = BACKENDS[0].jacobi_eigh_batch(a, 100)
    w1, _, _ = BACKENDS[1].jacobi_eigh_batch(a, 100)
    np.testing.assert_allclose(np.sort(w0, axis=1), np.sort(w1, axis=1), rtol=1e-13)


def test_pair_weights(backend, rng):
    z = rng.normal(size=(40, 3))
    w = backend.pair_weights(z, 2.0)
    d2 = ((z[:, None, :] - z[None, :, :]) ** 2).sum(-1)
    ref = np.exp(-d2)
    np.fill_diagonal(ref, 0.0)
    np.testing.assert_allclose(w, ref, rtol=1e-14, atol=1e-300)


def test_estimators_identical_across_backends(backend, rng):
    x = rng.normal(size=(120, 4))
    t = scatter.tcov(x).scatter
    np.testing.assert_allclose(t, t.T)
    rho = matlin.gen_eig(scatter.mean_cov(x).scatter, t).eigenvalues
    assert np.all(np.diff(rho) <= 0)


def test_env_flag_forces_numpy():
    env = dict(os.environ, ICSFDS_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from icsfds import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_active_backend_default():
    if _kernels.NUMBA_KERNELS is not None and os.environ.get("ICSFDS_NUMBA", "1") != "0":
        assert _kernels.BACKEND.startswith("numba")
