"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``ICSFDS_NUMBA=0`` in the
environment to force the numpy implementations even when numba is installed.
Both backends stay importable as ``NUMPY_KERNELS`` and ``NUMBA_KERNELS`` so the
test-suite and the benchmark can compare them directly.

Kernels
-------
jacobi_eigh_batch(a, max_sweeps) -> (w, v, converged)
    Cyclic Jacobi eigendecomposition of a stack of symmetric matrices,
    shape (N, n, n). Eigenvalues are returned unsorted, eigenvectors as
    columns of ``v``. ``converged`` is a boolean array of length N.
pair_weights(z, beta) -> (n, n) array
    Gaussian-kernel weights exp(-beta * |z_i - z_j|^2 / 2) for all pairs of
    rows of ``z`` with a zero diagonal.
"""

import os
from types import SimpleNamespace

import numpy as np


def _jacobi_numpy(a, max_sweeps=100):
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), (nb, n, n)).copy()
    converged = np.zeros(nb, dtype=bool)
    if n == 1:
        converged[:] = True
        return a[:, 0, :].copy(), v, converged

    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        done = np.all(a[:, iu[0], iu[1]] == 0.0, axis=1)
        converged |= done
        if converged.all():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = a[:, p, p].copy()
                aqq = a[:, q, q].copy()
                g = 100.0 * np.abs(a[:, p, q])
                negligible = (np.abs(app) + g == np.abs(app)) & (np.abs(aqq) + g == np.abs(aqq))
                a[negligible, p, q] = 0.0
                a[negligible, q, p] = 0.0
                apq = a[:, p, q].copy()
                rot = (apq != 0.0) & ~negligible
                if not rot.any():
                    continue
                h = aqq - app
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    small_angle = np.abs(h) + g == np.abs(h)
                    theta = np.where(rot, 0.5 * h / np.where(rot, apq, 1.0), 0.0)
                    t_general = np.sign(theta) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
                    t_general = np.where(theta == 0.0, 1.0, t_general)
                    t = np.where(small_angle, apq / np.where(h == 0.0, 1.0, h), t_general)
                t = np.where(rot, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                cc = c[:, None]
                ss = s[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = cc * colp - ss * colq
                a[:, :, q] = ss * colp + cc * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = cc * rowp - ss * rowq
                a[:, q, :] = ss * rowp + cc * rowq
                a[rot, p, p] = (app - t * apq)[rot]
                a[rot, q, q] = (aqq + t * apq)[rot]
                a[rot, p, q] = 0.0
                a[rot, q, p] = 0.0

                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = cc * vp - ss * vq
                v[:, :, q] = ss * vp + cc * vq
    else:
        done = np.all(a[:, iu[0], iu[1]] == 0.0, axis=1)
        converged |= done

    w = np.diagonal(a, axis1=1, axis2=2).copy()
    return w, v, converged


def _pair_weights_numpy(z, beta, chunk=256):
    z = np.ascontiguousarray(z, dtype=np.float64)
    n = z.shape[0]
    w = np.empty((n, n))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = z[start:stop, None, :] - z[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        w[start:stop] = np.exp(-0.5 * beta * d2)
    np.fill_diagonal(w, 0.0)
    return w


NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    jacobi_eigh_batch=_jacobi_numpy,
    pair_weights=_pair_weights_numpy,
)


def _build_numba_kernels():
    import numba
    from numba import njit, prange

    # the default probe order tries TBB first and warns on old installs
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"

    @njit(cache=True)
    def _jacobi_one(a, v, max_sweeps):
        n = a.shape[0]
        for i in range(n):
            for j in range(n):
                v[i, j] = 1.0 if i == j else 0.0
        for _sweep in range(max_sweeps):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += abs(a[p, q])
            if off == 0.0:
                return True
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    app = a[p, p]
                    aqq = a[q, q]
                    g = 100.0 * abs(apq)
                    if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        continue
                    if apq == 0.0:
                        continue
                    h = aqq - app
                    if abs(h) + g == abs(h):
                        t = apq / h
                    else:
                        theta = 0.5 * h / apq
                        if theta == 0.0:
                            t = 1.0
                        else:
                            t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                            if theta < 0.0:
                                t = -t
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for r in range(n):
                        arp = a[r, p]
                        arq = a[r, q]
                        a[r, p] = c * arp - s * arq
                        a[r, q] = s * arp + c * arq
                    for r in range(n):
                        apr = a[p, r]
                        aqr = a[q, r]
                        a[p, r] = c * apr - s * aqr
                        a[q, r] = s * apr + c * aqr
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for r in range(n):
                        vrp = v[r, p]
                        vrq = v[r, q]
                        v[r, p] = c * vrp - s * vrq
                        v[r, q] = s * vrp + c * vrq
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q])
        return off == 0.0

    @njit(parallel=True, cache=True)
    def _jacobi_batch(a, max_sweeps):
        nb, n, _ = a.shape
        v = np.empty_like(a)
        w = np.empty((nb, n))
        converged = np.empty(nb, dtype=np.bool_)
        for b in prange(nb):
            converged[b] = _jacobi_one(a[b], v[b], max_sweeps)
            for i in range(n):
                w[b, i] = a[b, i, i]
        return w, v, converged

    @njit(parallel=True, cache=True)
    def _pair_weights(z, beta):
        n, p = z.shape
        w = np.zeros((n, n))
        for i in prange(n):
            for j in range(i + 1, n):
                d2 = 0.0
                for k in range(p):
                    diff = z[i, k] - z[j, k]
                    d2 += diff * diff
                val = np.exp(-0.5 * beta * d2)
                w[i, j] = val
                w[j, i] = val
        return w

    def jacobi_eigh_batch(a, max_sweeps=100):
        a = np.array(a, dtype=np.float64, copy=True)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
        return _jacobi_batch(a, max_sweeps)

    def pair_weights(z, beta):
        return _pair_weights(np.ascontiguousarray(z, dtype=np.float64), float(beta))

    return SimpleNamespace(
        name=f"numba-{numba.__version__}",
        jacobi_eigh_batch=jacobi_eigh_batch,
        pair_weights=pair_weights,
    )


def _numba_requested():
    return os.environ.get("ICSFDS_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}


try:
    NUMBA_KERNELS = _build_numba_kernels()
except ImportError:
    NUMBA_KERNELS = None

ACTIVE = NUMBA_KERNELS if (NUMBA_KERNELS is not None and _numba_requested()) else NUMPY_KERNELS
BACKEND = ACTIVE.name


def jacobi_eigh_batch(a, max_sweeps=100):
    return ACTIVE.jacobi_eigh_batch(a, max_sweeps)


def pair_weights(z, beta):
    return ACTIVE.pair_weights(z, beta)
