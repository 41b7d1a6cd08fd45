"""Sample scatter estimators: Cov, Cov4, CovAxis, Tcov and raw MCD.

Every estimator returns a :class:`LocationScatter` whose scatter is positive
definite and affine equivariant: ``E(x @ A.T + b) == A @ E(x) @ A.T``.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import ceil, comb

import numpy as np

from . import _kernels, matlin
from .errors import DimensionMismatch, NotPositiveDefinite, Singular, SubsetTooSmall, ZeroDistance

EXHAUSTIVE_LIMIT = 200_000


@dataclass(frozen=True)
class ScatterKind:
    """Estimator identity. ``param`` is beta for tcov and tau for mcd."""

    name: str
    param: float | None = None

    _NAMES = ("cov", "cov4", "covaxis", "tcov", "mcd")

    def __post_init__(self):
        if self.name not in self._NAMES:
            raise ValueError(f"unknown scatter {self.name!r}; expected one of {self._NAMES}")
        if self.name == "tcov" and self.param is None:
            object.__setattr__(self, "param", 2.0)
        if self.name == "mcd":
            if self.param is None or not 0.0 < self.param <= 1.0:
                raise ValueError(f"mcd needs tau in (0, 1], got {self.param}")
        if self.name == "tcov" and not self.param > 0:
            raise ValueError(f"tcov needs beta > 0, got {self.param}")

    @property
    def label(self):
        if self.name == "mcd":
            return f"mcd{round(100 * self.param)}"
        if self.name == "tcov" and self.param != 2.0:
            return f"tcov{self.param:g}"
        return self.name

    @classmethod
    def parse(cls, token):
        """Parse CLI names such as ``cov4``, ``tcov`` or ``mcd25``."""
        token = token.strip().lower()
        if token in ("cov", "cov4", "covaxis", "tcov"):
            return cls(token)
        if token.startswith("mcd") and token[3:].isdigit():
            return cls("mcd", int(token[3:]) / 100.0)
        if token.startswith("tcov") and token != "tcov":
            try:
                beta = float(token[4:])
            except ValueError:
                beta = -1.0
            if beta > 0 and np.isfinite(beta):
                return cls("tcov", beta)
        raise ValueError(f"cannot parse scatter name {token!r}")


COV = ScatterKind("cov")
COV4 = ScatterKind("cov4")
COVAXIS = ScatterKind("covaxis")
TCOV = ScatterKind("tcov")


@dataclass
class LocationScatter:
    location: np.ndarray
    scatter: np.ndarray
    kind: ScatterKind
    support: np.ndarray | None = field(default=None, repr=False)  # MCD h-subset, sorted indices


def as_data(x, min_rows=2):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch(f"data must be 2-d (n, p), got shape {x.shape}")
    if x.shape[0] < min_rows:
        raise DimensionMismatch(f"need at least {min_rows} observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contain non-finite values")
    return x


def _checked(scatter, what):
    scatter = 0.5 * (scatter + scatter.T)
    try:
        matlin.cholesky(scatter)
    except NotPositiveDefinite as exc:
        raise Singular(f"{what} is singular: {exc}") from None
    return scatter


def _whitener(cov):
    """Upper factor R with d^2 = |(x - m) @ R|^2 under the metric cov^-1."""
    return matlin.lower_inverse(matlin.cholesky(cov)).T


def mahalanobis_sq(x, location, scatter):
    z = (np.asarray(x, dtype=float) - location) @ _whitener(scatter)
    return np.einsum("ij,ij->i", z, z)


def mean_cov(x):
    x = as_data(x)
    m = x.mean(axis=0)
    xc = x - m
    cov = xc.T @ xc / x.shape[0]
    return LocationScatter(m, _checked(cov, "covariance"), COV)


def cov4(x):
    x = as_data(x)
    n, p = x.shape
    base = mean_cov(x)
    xc = x - base.location
    d2 = mahalanobis_sq(x, base.location, base.scatter)
    s = (xc * d2[:, None]).T @ xc / (n * (p + 2))
    return LocationScatter(base.location, _checked(s, "cov4"), COV4)


def cov_axis(x):
    x = as_data(x)
    n, p = x.shape
    base = mean_cov(x)
    xc = x - base.location
    d2 = mahalanobis_sq(x, base.location, base.scatter)
    if np.any(d2 < 1e-12):
        i = int(np.argmin(d2))
        raise ZeroDistance(f"observation {i + 1} lies on the mean (d^2 = {d2[i]:.2e})")
    s = p * (xc / d2[:, None]).T @ xc / n
    return LocationScatter(base.location, _checked(s, "covaxis"), COVAXIS)


def tcov(x, beta=2.0):
    """Pairwise one-step M-estimator with weights exp(-beta * d_ij^2 / 2).

    d_ij^2 is the squared Mahalanobis distance between observations i and j
    under the sample covariance. The weighted sum over pairs is assembled as
    the graph Laplacian form ``X^T (D - W) X``.
    """
    x = as_data(x, min_rows=3)
    base = mean_cov(x)
    xc = x - base.location
    z = xc @ _whitener(base.scatter)
    w = _kernels.pair_weights(z, beta)
    total = w.sum()  # == 2 * sum over i < j
    if not total > 0:
        raise Singular("all pairwise tcov weights underflowed to zero")
    lap = (xc * w.sum(axis=1)[:, None]).T @ xc - xc.T @ (w @ xc)
    return LocationScatter(base.location, _checked(lap / total, "tcov"), ScatterKind("tcov", beta))


# ----------------------------------------------------------------------------
# raw MCD


def _subset_fit(x, idx):
    sub = x[idx]
    m = sub.mean(axis=0)
    sc = sub - m
    return m, sc.T @ sc / len(idx)


def c_step(x, subset, h):
    """One concentration step: refit on ``subset`` and keep the h closest points.

    Returns (new_subset, log_det) where log_det belongs to the covariance of
    the refitted input subset.
    """
    m, c = _subset_fit(x, subset)
    try:
        low = matlin.cholesky(c)
    except NotPositiveDefinite:
        return np.sort(subset), -np.inf
    logdet = 2.0 * float(np.sum(np.log(np.diag(low))))
    z = (x - m) @ matlin.lower_inverse(low).T
    d2 = np.einsum("ij,ij->i", z, z)
    return np.sort(np.argsort(d2, kind="stable")[:h]), logdet


def c_steps(x, subset, h, max_steps=100):
    """Iterate :func:`c_step` until the subset repeats.

    Returns (subset, trace) where ``trace`` lists the log-determinant of every
    visited subset; it is non-increasing.
    """
    x = as_data(x)
    subset = np.sort(np.asarray(subset))
    trace = []
    for _ in range(max_steps):
        new, logdet = c_step(x, subset, h)
        trace.append(logdet)
        if logdet == -np.inf or np.array_equal(new, subset):
            return subset, trace
        subset = new
    _, c = _subset_fit(x, subset)
    trace.append(matlin.log_det_spd(c))
    return subset, trace


def _exhaustive(x, h, chunk=4096):
    n = x.shape[0]
    best_val, best_idx = np.inf, None
    it = combinations(range(n), h)
    while True:
        block = np.array([c for _, c in zip(range(chunk), it)], dtype=np.intp)
        if block.size == 0:
            break
        sub = x[block]  # (B, h, p)
        sc = sub - sub.mean(axis=1, keepdims=True)
        covs = np.einsum("bij,bik->bjk", sc, sc) / h
        logdets = matlin.log_det_spd_batch(covs)
        if np.any(logdets == -np.inf):
            raise Singular("an h-subset has singular covariance (exact fit); raw MCD undefined")
        i = int(np.argmin(logdets))
        if logdets[i] < best_val:
            best_val, best_idx = logdets[i], block[i]
    return best_idx


def _elemental_start(x, rng):
    n, p = x.shape
    perm = rng.permutation(n)
    size = p + 1
    while size <= n:
        idx = perm[:size]
        m, c = _subset_fit(x, idx)
        try:
            low = matlin.cholesky(c)
            return m, low
        except NotPositiveDefinite:
            size += 1
    raise Singular("data do not span p dimensions")


def _fast_mcd(x, h, rng, n_starts, n_best, max_steps):
    n = x.shape[0]
    candidates = {}
    for _ in range(n_starts):
        m, low = _elemental_start(x, rng)
        z = (x - m) @ matlin.lower_inverse(low).T
        subset = np.sort(np.argsort(np.einsum("ij,ij->i", z, z), kind="stable")[:h])
        for _step in range(2):
            subset, logdet = c_step(x, subset, h)
        _, logdet = c_step(x, subset, h)
        key = subset.tobytes()
        if key not in candidates:
            candidates[key] = (logdet, subset)
    ranked = sorted(candidates.values(), key=lambda t: t[0])[:n_best]
    best = None
    for _, subset in ranked:
        final, trace = c_steps(x, subset, h, max_steps)
        if best is None or trace[-1] < best[0]:
            best = (trace[-1], final)
    if best[0] == -np.inf:
        raise Singular("FAST-MCD converged to an exact-fit subset")
    return best[1]


def mcd_raw(x, tau, rng=None, n_starts=500, n_best=10, max_steps=100, exhaustive_limit=EXHAUSTIVE_LIMIT):
    """Raw minimum covariance determinant estimate on ``h = ceil(tau * n)`` points.

    Exact (exhaustive) when ``comb(n, h) <= exhaustive_limit``, otherwise
    FAST-MCD from ``n_starts`` elemental subsets drawn from ``rng``. No
    consistency factor and no reweighting are applied; the covariance divisor
    is h.
    """
    x = as_data(x)
    n, p = x.shape
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    h = ceil(round(tau * n, 9))
    kind = ScatterKind("mcd", tau)
    if h <= p:
        raise SubsetTooSmall(f"h = {h} must exceed p = {p}")
    if h >= n:
        full = mean_cov(x)
        return LocationScatter(full.location, full.scatter, kind, np.arange(n))
    if comb(n, h) <= exhaustive_limit:
        subset = _exhaustive(x, h)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        subset = _fast_mcd(x, h, rng, n_starts, n_best, max_steps)
    m, c = _subset_fit(x, subset)
    return LocationScatter(m, _checked(c, "mcd"), kind, np.asarray(subset))


def estimate(x, kind, rng=None):
    """Dispatch to the estimator named by ``kind``."""
    if kind.name == "cov":
        return mean_cov(x)
    if kind.name == "cov4":
        return cov4(x)
    if kind.name == "covaxis":
        return cov_axis(x)
    if kind.name == "tcov":
        return tcov(x, kind.param)
    if kind.name == "mcd":
        return mcd_raw(x, kind.param, rng=rng)
    raise ValueError(f"unhandled scatter kind {kind}")
