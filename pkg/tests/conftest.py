import numpy as np
import pytest

from icsfds import _kernels

BACKENDS = [_kernels.NUMPY_KERNELS] + ([_kernels.NUMBA_KERNELS] if _kernels.NUMBA_KERNELS else [])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=BACKENDS, ids=lambda b: b.name)
def backend(request, monkeypatch):
    """Run a test once per kernel backend by swapping the active one."""
    monkeypatch.setattr(_kernels, "ACTIVE", request.param)
    return request.param


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = np.exp(rng.uniform(0, np.log(cond), size=n))
    return (q * w) @ q.T


def random_nonsingular(rng, n):
    while True:
        a = rng.normal(size=(n, n))
        if abs(np.linalg.det(a)) > 0.1:
            return a


ACCEPTANCE = {}  # criterion number -> (passed, description), filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {desc}")
