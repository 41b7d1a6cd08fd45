"""Exact population Cov / Cov4 and their ICS spectra for two mixture families.

Gaussian family: ``sum_j alpha_j N_p(t_j, I_p)`` with centers confined to the
first q coordinates, so that Cov = [beta, 0; 0, I] and Cov4 = [Psi, 0; 0, I].
Dirac family: ``sum_j alpha_j delta_{t_j}`` in p = q dimensions, no
within-group spread; Cov4 is normalised by q + 2.

The three-group aligned-centers model ``alpha_1 N(t_1) + alpha_2 N(t_2) +
alpha_3 N(0)`` with t_1, t_2 on the first axis gets its own helpers: the
quartic whose roots in t11/t21 are exactly the center ratios where every
Cov-Cov4 eigenvalue equals one.
"""

from dataclasses import dataclass
from itertools import product
from math import sqrt

import numpy as np

from . import matlin, quartic
from .errors import InvalidCenters, InvalidSpec, Singular

GAUSSIAN = "gaussian"
DIRAC = "dirac"

PROPORTION_TOL = 1e-12
ALL_ONE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Proportions, p x k centers matrix and component family.

    For the Gaussian family the centered centers must vanish outside the
    first ``q`` coordinates; :func:`canonical_centers` brings any centers
    matrix into that layout. Proportions within 1e-12 of summing to one are
    renormalised.
    """

    proportions: np.ndarray
    centers: np.ndarray
    family: str = GAUSSIAN
    q: int = None

    def __post_init__(self):
        a = np.asarray(self.proportions, dtype=float).ravel()
        t = np.asarray(self.centers, dtype=float)
        if t.ndim == 1:
            t = t[None, :]
        if self.family not in (GAUSSIAN, DIRAC):
            raise InvalidSpec(f"family must be {GAUSSIAN!r} or {DIRAC!r}, got {self.family!r}")
        if a.size < 2:
            raise InvalidSpec("a mixture needs at least two components")
        if t.ndim != 2 or t.shape[1] != a.size:
            raise InvalidSpec(f"centers must be p x k with k = {a.size}, got shape {t.shape}")
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(t)):
            raise InvalidSpec("non-finite proportions or centers")
        if np.any(a <= 0):
            raise InvalidSpec(f"proportions must be positive, got {a}")
        total = a.sum()
        if abs(total - 1.0) > PROPORTION_TOL:
            raise InvalidSpec(f"proportions sum to {total!r}, not 1")
        a = a / total
        rel = t - t[:, -1:]
        rank = matlin.symmetric_rank(rel @ rel.T) if np.any(rel) else 0
        if rank > 0:
            for i in range(a.size):
                for j in range(i + 1, a.size):
                    if np.array_equal(t[:, i], t[:, j]):
                        raise InvalidSpec(f"centers {i + 1} and {j + 1} coincide")
        if self.family == DIRAC:
            q = t.shape[0] if self.q is None else int(self.q)
            if q != t.shape[0]:
                raise InvalidSpec(f"Dirac mixtures need q = p, got q = {q}, p = {t.shape[0]}")
            if rank < q:
                raise Singular(f"Dirac centers span {rank} dimensions, need q = {q}")
        else:
            q = rank if self.q is None else int(self.q)
            if rank != q:
                raise InvalidSpec(f"centers have rank {rank}, declared q = {q}")
            if np.any(t[q:, :] != 0.0):
                raise InvalidSpec("Gaussian centers must vanish outside the first q coordinates; "
                                  "use canonical_centers()")
        object.__setattr__(self, "proportions", a)
        object.__setattr__(self, "centers", t)
        object.__setattr__(self, "q", q)

    @property
    def k(self):
        return self.proportions.size

    @property
    def p(self):
        return self.centers.shape[0]

    @classmethod
    def gaussian(cls, proportions, centers, p=None):
        """Gaussian spec from a q x k centers block, padded with zero rows to p."""
        t = np.atleast_2d(np.asarray(centers, dtype=float))
        p = t.shape[0] if p is None else int(p)
        if p < t.shape[0]:
            raise InvalidSpec(f"p = {p} is smaller than the {t.shape[0]} center rows")
        full = np.zeros((p, t.shape[1]))
        full[: t.shape[0]] = t
        return cls(proportions, full, GAUSSIAN)

    @classmethod
    def dirac(cls, proportions, centers):
        return cls(proportions, np.atleast_2d(np.asarray(centers, dtype=float)), DIRAC, None)

    def centered(self):
        """Centers minus the mixture mean, p x k."""
        return self.centers - (self.centers @ self.proportions)[:, None]


def canonical_centers(means):
    """Rotate a p x k matrix of group means into the triangular layout.

    Subtracts the last mean and applies the Q factor of a Householder QR so
    that t_k = 0 and t_j has non-zero entries only in its first j coordinates.
    Within-group scatter is taken to be the identity.
    """
    m = np.asarray(means, dtype=float)
    rel = m - m[:, -1:]
    p, k = rel.shape
    r = rel.copy()
    for j in range(min(p - 1, k - 1)):
        v = r[j:, j].copy()
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        v[0] += np.copysign(norm, v[0]) if v[0] != 0 else norm
        v /= np.linalg.norm(v)
        r[j:, :] -= 2.0 * np.outer(v, v @ r[j:, :])
    r[np.abs(r) < 1e-12 * max(1.0, np.abs(rel).max())] = 0.0
    return r


# ----------------------------------------------------------------------------
# Gaussian family


def gauss_moment(order, mu, sigma=1.0):
    """Raw moment E[X^order] of N(mu, sigma^2) for order 1..4."""
    s2 = sigma * sigma
    if order == 0:
        return 1.0
    if order == 1:
        return mu
    if order == 2:
        return mu * mu + s2
    if order == 3:
        return mu ** 3 + 3.0 * mu * s2
    if order == 4:
        return mu ** 4 + 6.0 * mu * mu * s2 + 3.0 * s2 * s2
    raise ValueError(f"order must be in 1..4, got {order}")


def _require(spec, family):
    if spec.family != family:
        raise InvalidSpec(f"expected a {family} spec, got {spec.family}")


def gauss_cross_moment(spec, idx):
    """E[prod_{i in idx} x^c_i] for the centered Gaussian mixture.

    Components have independent unit-variance coordinates, so the moment
    factorises per distinct coordinate into :func:`gauss_moment` terms.
    """
    tc = spec.centered()
    counts = {}
    for i in idx:
        counts[i] = counts.get(i, 0) + 1
    total = 0.0
    for j, a in enumerate(spec.proportions):
        term = a
        for coord, mult in counts.items():
            term *= gauss_moment(mult, tc[coord, j], 1.0)
        total += term
    return total


def gauss_pop_cov(spec):
    _require(spec, GAUSSIAN)
    tc = spec.centered()
    return np.eye(spec.p) + (tc * spec.proportions) @ tc.T


def gauss_pop_cov4(spec):
    """Population Cov4 assembled from the fourth-order cross moments.

    Only the q x q block Psi is computed; the complement block is I_{p-q}.
    """
    _require(spec, GAUSSIAN)
    p, q = spec.p, spec.q
    out = np.eye(p)
    if q == 0:
        return out
    beta = gauss_pop_cov(spec)[:q, :q]
    b = matlin.spd_inverse(beta)
    cache = {}

    def moment(*idx):
        key = tuple(sorted(idx))
        if key not in cache:
            cache[key] = gauss_cross_moment(spec, key)
        return cache[key]

    psi = np.zeros((q, q))
    for m in range(q):
        for s in range(m, q):
            acc = 0.0
            for i, j in product(range(q), repeat=2):
                acc += b[i, j] * moment(m, s, i, j)
            acc += (p - q) * moment(m, s)
            psi[m, s] = psi[s, m] = acc / (p + 2)
    out[:q, :q] = psi
    return out


def gauss_pop_ics(spec):
    """Descending Cov-Cov4 ICS eigenvalues of a Gaussian mixture."""
    return matlin.gen_eig(gauss_pop_cov(spec), gauss_pop_cov4(spec)).eigenvalues


# ----------------------------------------------------------------------------
# Dirac family


def dirac_pop_cov(spec):
    _require(spec, DIRAC)
    tc = spec.centered()
    cov = (tc * spec.proportions) @ tc.T
    if matlin.symmetric_rank(cov) < spec.q:
        raise Singular(f"Dirac centers do not span q = {spec.q} dimensions")
    return cov


def dirac_pop_cov4(spec):
    _require(spec, DIRAC)
    tc = spec.centered()
    b = matlin.spd_inverse(dirac_pop_cov(spec))
    d2 = np.einsum("ij,ik,kj->j", tc, b, tc)
    return (tc * (spec.proportions * d2)) @ tc.T / (spec.q + 2)


def dirac_pop_ics(spec):
    """Descending Cov-Cov4 ICS eigenvalues of a Dirac mixture."""
    return matlin.gen_eig(dirac_pop_cov(spec), dirac_pop_cov4(spec)).eigenvalues


def dirac_pop_ics_batch(proportions, centers):
    """Dirac Cov-Cov4 spectra for many proportion vectors sharing one centers matrix.

    ``proportions`` has shape (N, k), ``centers`` shape (q, k). Works in
    Cov-whitened coordinates z = Cov^{-1/2} t^c, where the whitened Cov4 is
    ``sum_l alpha_l |z_l|^2 z_l z_l^T / (q + 2)``. Returns (N, q), descending.
    """
    a = np.atleast_2d(np.asarray(proportions, dtype=float))
    t = np.atleast_2d(np.asarray(centers, dtype=float))
    q, k = t.shape
    if a.shape[1] != k:
        raise InvalidSpec(f"proportion rows have {a.shape[1]} entries, centers have {k} columns")
    if np.any(a <= 0) or np.any(np.abs(a.sum(axis=1) - 1.0) > PROPORTION_TOL):
        raise InvalidSpec("every proportion row must be positive and sum to one")
    tc = t[None, :, :] - np.einsum("qk,nk->nq", t, a)[:, :, None]  # (N, q, k)
    cov = np.einsum("nik,nk,njk->nij", tc, a, tc)
    try:
        w = matlin.spd_inv_sqrt_batch(cov)
    except Exception as exc:  # NotPositiveDefinite
        raise Singular(f"Dirac centers do not span q = {q} dimensions: {exc}") from None
    z = w @ tc
    d2 = np.einsum("nik,nik->nk", z, z)
    m = np.einsum("nik,nk,njk->nij", z, a * d2, z) / (q + 2)
    return matlin.sym_eig_batch(m)[0]


def dirac_two_group_rho(alpha1):
    """Closed-form Cov-Cov4 eigenvalue of a two-point mixture."""
    if not 0.0 < alpha1 < 1.0:
        raise ValueError(f"alpha1 must lie in (0, 1), got {alpha1}")
    a2 = 1.0 - alpha1
    return (alpha1 ** 3 + a2 ** 3) / (3.0 * alpha1 * a2)


TWO_GROUP_THRESHOLD = (3.0 - sqrt(3.0)) / 6.0


# ----------------------------------------------------------------------------
# three aligned Gaussian groups


@dataclass(frozen=True)
class QuarticPoly:
    """Coefficients c4..c0, highest degree first."""

    coeffs: tuple

    def __call__(self, x):
        return quartic.horner(self.coeffs, x)

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))


def quartic_r(alpha1, alpha2):
    """The degree-4 polynomial in x = t11 / t21 that vanishes exactly when every
    Cov-Cov4 eigenvalue of the aligned three-group Gaussian mixture equals one."""
    a1, a2 = float(alpha1), float(alpha2)
    if not (a1 > 0 and a2 > 0 and a1 + a2 < 1):
        raise InvalidSpec(f"need alpha1, alpha2 > 0 with alpha1 + alpha2 < 1, got {a1}, {a2}")
    return QuarticPoly((
        a1 * (-1 + 7 * a1 - 12 * a1 ** 2 + 6 * a1 ** 3),
        4 * a1 * a2 * (1 - 6 * a1 + 6 * a1 ** 2),
        6 * a1 * a2 * (1 - 2 * a2 + a1 * (-2 + 6 * a2)),
        4 * a1 * a2 * (1 - 6 * a2 + 6 * a2 ** 2),
        a2 * (-1 + 7 * a2 - 12 * a2 ** 2 + 6 * a2 ** 3),
    ))


def quartic_real_roots(poly):
    return quartic.real_roots(poly.coeffs)


def critical_ratios(alpha1, alpha2):
    """Admissible real ratios t11/t21 at which every eigenvalue equals one.

    Roots at 0 and 1 are dropped: they would put t_1 on t_3 = 0 or on t_2.
    """
    return [x for x in quartic_real_roots(quartic_r(alpha1, alpha2))
            if abs(x) > 1e-7 and abs(x - 1.0) > 1e-7]


def aligned_spec(alpha1, alpha2, t11, t21, p):
    """Gaussian mixture alpha1 N(t11 e1, I) + alpha2 N(t21 e1, I) + alpha3 N(0, I)."""
    _check_aligned(t11, t21)
    a3 = 1.0 - alpha1 - alpha2
    return MixtureSpec.gaussian([alpha1, alpha2, a3], [[t11, t21, 0.0]], p=p)


def _check_aligned(t11, t21):
    if t11 == 0 or t21 == 0 or t11 == t21:
        raise InvalidCenters(f"need t11 != 0, t21 != 0 and t11 != t21, got t11={t11}, t21={t21}")


def all_eigen_one_spectral(alpha1, alpha2, t11, t21, p, tol=ALL_ONE_TOL):
    rho = gauss_pop_ics(aligned_spec(alpha1, alpha2, t11, t21, p))
    return bool(np.all(np.abs(rho - 1.0) <= tol))


def prop2_all_eigen_one(alpha1, alpha2, t11, t21, p, tol=1e-9):
    """True when |r(t11 / t21)| <= tol, i.e. the whole Cov-Cov4 spectrum is flat at one.

    The spectral counterpart is :func:`all_eigen_one_spectral`.
    """
    _check_aligned(t11, t21)
    if p < 1:
        raise InvalidSpec(f"p must be positive, got {p}")
    return bool(abs(quartic_r(alpha1, alpha2)(t11 / t21)) <= tol)
