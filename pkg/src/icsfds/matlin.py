"""Dense symmetric linear algebra used throughout the package.

Everything here works on plain ``numpy.ndarray`` values. Eigendecompositions
go through the cyclic Jacobi kernel in :mod:`icsfds._kernels`; Cholesky and
triangular solves are column-vectorised loops. No LAPACK routine is called, so
results are reproducible across numpy builds.
"""

from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite

EPS = np.finfo(float).eps
DEFAULT_SWEEPS = 100


class SymEig(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


class GenEig(NamedTuple):
    eigenvalues: np.ndarray  # descending
    h: np.ndarray  # columns h_1..h_p with h.T @ v1 @ h = I


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _symmetric(a, name="matrix"):
    a = _square(a, name)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    if np.abs(a - a.T).max() > 1e-8 * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def cholesky(a):
    """Lower-triangular L with L @ L.T == a.

    Raises NotPositiveDefinite when a pivot falls to ``dim * eps * ||a||_F`` or below.
    """
    a = _symmetric(a)
    n = a.shape[0]
    tol = n * EPS * np.linalg.norm(a)
    low = np.zeros_like(a)
    for j in range(n):
        row = low[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > tol:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at position {j} is not above {tol:.3e}")
        ljj = np.sqrt(pivot)
        low[j, j] = ljj
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ row) / ljj
    return low


def lower_inverse(low):
    """Inverse of a nonsingular lower-triangular matrix by forward substitution."""
    low = _square(low)
    n = low.shape[0]
    inv = np.zeros_like(low)
    for i in range(n):
        inv[i, i] = 1.0 / low[i, i]
        if i > 0:
            inv[i, :i] = -(low[i, :i] @ inv[:i, :i]) / low[i, i]
    return inv


def log_det_spd(a):
    return 2.0 * float(np.sum(np.log(np.diag(cholesky(a)))))


def log_det_spd_batch(a):
    """Log-determinants of a stack of symmetric matrices by batched Cholesky.

    Entries whose matrix is not positive definite come back as ``-inf``.
    """
    a = np.asarray(a, dtype=float)
    nb, n, _ = a.shape
    tol = n * EPS * np.linalg.norm(a, axis=(1, 2))
    low = np.zeros_like(a)
    ok = np.ones(nb, dtype=bool)
    for j in range(n):
        row = low[:, j, :j]
        pivot = a[:, j, j] - np.einsum("bi,bi->b", row, row)
        ok &= pivot > tol
        ljj = np.sqrt(np.where(ok, pivot, 1.0))
        low[:, j, j] = ljj
        if j + 1 < n:
            low[:, j + 1:, j] = (a[:, j + 1:, j] - np.einsum("bki,bi->bk", low[:, j + 1:, :j], row)) / ljj[:, None]
    out = 2.0 * np.sum(np.log(np.diagonal(low, axis1=1, axis2=2)), axis=1)
    out[~ok] = -np.inf
    return out


def spd_inverse(a):
    linv = lower_inverse(cholesky(a))
    inv = linv.T @ linv
    return 0.5 * (inv + inv.T)


def _sort_and_sign(w, v):
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    # largest-magnitude entry of each column made positive; first one wins ties
    lead = np.argmax(np.abs(v), axis=-2)
    signs = np.sign(np.take_along_axis(v, lead[..., None, :], axis=-2))
    signs[signs == 0] = 1.0
    return w, v * signs


def sym_eig_batch(a, max_sweeps=DEFAULT_SWEEPS):
    """Eigendecomposition of a stack (N, n, n) of symmetric matrices.

    Returns eigenvalues (N, n) in descending order and eigenvector columns (N, n, n).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionMismatch(f"expected shape (N, n, n), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries in eigenproblem input")
    a = 0.5 * (a + np.swapaxes(a, 1, 2))
    w, v, converged = _kernels.jacobi_eigh_batch(a, max_sweeps)
    if not np.all(converged):
        bad = int(np.flatnonzero(~converged)[0])
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (matrix {bad})")
    return _sort_and_sign(w, v)


def sym_eig(a, max_sweeps=DEFAULT_SWEEPS):
    a = _symmetric(a)
    w, v = sym_eig_batch(a[None], max_sweeps)
    return SymEig(w[0], v[0])


def spd_inv_sqrt(a):
    """Symmetric inverse square root; ``W @ a @ W`` is the identity."""
    cholesky(a)  # positive-definiteness gate
    w, q = sym_eig(a)
    return (q / np.sqrt(w)) @ q.T


def spd_inv_sqrt_batch(a):
    w, q = sym_eig_batch(a)
    n = a.shape[-1]
    norms = np.linalg.norm(a, axis=(1, 2))
    bad = ~(w[:, -1] > n * EPS * norms)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NotPositiveDefinite(f"matrix {i} in batch has smallest eigenvalue {w[i, -1]:.3e}")
    return np.einsum("bij,bj,bkj->bik", q, 1.0 / np.sqrt(w), q)


def gen_eig(v1, v2):
    """Simultaneous diagonalisation of the pair (v1, v2).

    The returned ``h`` satisfies ``h.T @ v1 @ h == I`` and ``h.T @ v2 @ h ==
    diag(eigenvalues)``, eigenvalues sorted in descending order. v1 must be
    positive definite; v2 only needs to be symmetric.
    """
    v1 = _symmetric(v1, "v1")
    v2 = _symmetric(v2, "v2")
    if v1.shape != v2.shape:
        raise DimensionMismatch(f"scatter shapes differ: {v1.shape} vs {v2.shape}")
    w = spd_inv_sqrt(v1)
    rho, q = sym_eig(w @ v2 @ w)
    return GenEig(rho, w @ q)


def gen_eig_batch(v1, v2):
    """Batched :func:`gen_eig` over stacks of shape (N, p, p)."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape or v1.ndim != 3:
        raise DimensionMismatch(f"batch shapes differ or are not 3-d: {v1.shape} vs {v2.shape}")
    v1 = 0.5 * (v1 + np.swapaxes(v1, 1, 2))
    w = spd_inv_sqrt_batch(v1)
    rho, q = sym_eig_batch(w @ v2 @ w)
    return GenEig(rho, w @ q)


def symmetric_rank(a, rtol=1e-10):
    """Number of eigenvalues of a PSD matrix above ``rtol`` times the largest."""
    w = sym_eig(a).eigenvalues
    top = max(abs(w[0]), abs(w[-1]))
    if top == 0:
        return 0
    return int(np.sum(w > rtol * top))
