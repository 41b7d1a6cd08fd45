from itertools import product
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from icsfds import mixture as M
from icsfds.errors import InvalidCenters, InvalidSpec, Singular
from conftest import random_nonsingular

R1, R2 = (7 - 2 * sqrt(6)) / 5, (7 + 2 * sqrt(6)) / 5


# ---------------------------------------------------------------- oracles

def _isserlis_moment(mu, idx):
    """E[prod (mu_i + z_i)] for z ~ N(0, I) by expanding and pairing (Isserlis)."""
    idx = list(idx)
    total = 0.0
    for mask in product((0, 1), repeat=len(idx)):
        fixed = [i for i, m in zip(idx, mask) if m == 0]
        noise = [i for i, m in zip(idx, mask) if m == 1]
        total += np.prod([mu[i] for i in fixed]) * _pairings(noise)
    return total


def _pairings(idx):
    if not idx:
        return 1.0
    if len(idx) % 2:
        return 0.0
    first, rest = idx[0], idx[1:]
    return sum(_pairings(rest[:j] + rest[j + 1:]) for j, other in enumerate(rest) if other == first)


def _cov4_oracle(spec):
    tc = spec.centered()
    p, q = spec.p, spec.q
    beta = np.eye(p) + (tc * spec.proportions) @ tc.T
    b = np.linalg.inv(beta)
    mom = lambda *ix: sum(a * _isserlis_moment(tc[:, j], ix) for j, a in enumerate(spec.proportions))
    psi = np.zeros((p, p))
    for m, s in product(range(p), repeat=2):
        psi[m, s] = sum(b[i, j] * mom(m, s, i, j) for i, j in product(range(p), repeat=2)) / (p + 2)
    return psi


def _two_group_quadrature(alpha, delta, p):
    mu = (1 - alpha) * delta  # centered position of group 1; group 2 at -alpha * delta
    dens = lambda x: (alpha * np.exp(-0.5 * (x - mu) ** 2) + (1 - alpha) * np.exp(-0.5 * (x + alpha * delta) ** 2)) / sqrt(2 * np.pi)
    e2 = integrate.quad(lambda x: x ** 2 * dens(x), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    e4 = integrate.quad(lambda x: x ** 4 * dens(x), -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    return (e4 / e2 ** 2 + p - 1) / (p + 2)


# ---------------------------------------------------------------- spec

def test_spec_validation():
    with pytest.raises(InvalidSpec):
        M.MixtureSpec.gaussian([0.5, 0.6], [[0, 1]])
    with pytest.raises(InvalidSpec):
        M.MixtureSpec.gaussian([1.2, -0.2], [[0, 1]])
    with pytest.raises(InvalidSpec):
        M.MixtureSpec.gaussian([0.5, 0.5], [[0, 1, 2]])
    with pytest.raises(InvalidSpec):
        M.MixtureSpec.gaussian([0.3, 0.3, 0.4], [[0, 1, 1], [0, 2, 2]])
    with pytest.raises(InvalidSpec):
        M.MixtureSpec([0.5, 0.5], [[0, 0], [0, 1]], "gaussian")  # not in the leading coordinates
    with pytest.raises(InvalidSpec):
        M.MixtureSpec([0.5, 0.5], [[0, 1]], "student")
    with pytest.raises(InvalidSpec):
        M.MixtureSpec([0.5, 0.5], [[0, 1]], "gaussian", q=2)
    with pytest.raises(Singular):
        M.MixtureSpec.dirac([0.3, 0.3, 0.4], [[0, 1, 2], [0, 1, 2]])
    s = M.MixtureSpec.gaussian([0.5, 0.5 + 1e-13], [[0, 1]])
    assert s.proportions.sum() == pytest.approx(1.0, abs=1e-15)
    assert (s.k, s.p, s.q) == (2, 1, 1)


def test_canonical_centers(rng):
    means = rng.normal(size=(5, 3))
    t = M.canonical_centers(means)
    assert np.allclose(t[:, -1], 0) and np.allclose(t[2:, :], 0) and abs(t[1, 0]) < 1e-12
    d0 = np.linalg.norm(means[:, :, None] - means[:, None, :], axis=0)
    d1 = np.linalg.norm(t[:, :, None] - t[:, None, :], axis=0)
    np.testing.assert_allclose(d0, d1, atol=1e-12)
    spec = M.MixtureSpec.gaussian([0.2, 0.3, 0.5], t)
    assert spec.q == 2


# ---------------------------------------------------------------- gaussian engine

def test_gauss_moment():
    assert M.gauss_moment(2, 0, 1) == 1
    assert M.gauss_moment(4, 0, 1) == 3
    assert M.gauss_moment(3, 2, 1) == 14
    assert M.gauss_moment(1, 2.5) == 2.5
    with pytest.raises(ValueError):
        M.gauss_moment(5, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.floats(-3, 3), st.floats(0.1, 3))
def test_gauss_moment_vs_quadrature(order, mu, sigma):
    f = lambda x: x ** order * np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * sqrt(2 * np.pi))
    ref = integrate.quad(f, mu - 12 * sigma, mu + 12 * sigma, epsabs=1e-12)[0]
    assert M.gauss_moment(order, mu, sigma) == pytest.approx(ref, rel=1e-8, abs=1e-9)


def test_gauss_pop_cov_examples():
    spec = M.MixtureSpec.gaussian([0.5, 0.5], [[0, 0]], p=3)
    np.testing.assert_array_equal(M.gauss_pop_cov(spec), np.eye(3))
    np.testing.assert_array_equal(M.gauss_pop_cov4(spec), np.eye(3))
    delta = 3.0
    spec = M.MixtureSpec.gaussian([0.5, 0.5], [[delta, 0]], p=4)
    cov = M.gauss_pop_cov(spec)
    assert cov[0, 0] == pytest.approx(1 + delta ** 2 / 4)
    np.testing.assert_array_equal(cov[1:, 1:], np.eye(3))
    np.testing.assert_array_equal(M.gauss_pop_cov4(spec)[1:, 1:], np.eye(3))


def test_gauss_cov4_vs_isserlis(rng):
    for q, k, p in ((1, 2, 3), (2, 3, 4), (2, 4, 2), (3, 4, 5)):
        t = np.zeros((p, k))
        t[:q, :-1] = rng.normal(scale=2, size=(q, k - 1))
        a = rng.dirichlet(np.ones(k) * 2)
        spec = M.MixtureSpec.gaussian(a, t)
        psi = M.gauss_pop_cov4(spec)
        # the oracle sums over all p coordinates, noise ones included
        np.testing.assert_allclose(psi, _cov4_oracle(spec), atol=1e-10)


@pytest.mark.parametrize("alpha,delta,p", [(0.5, 3.0, 4), (0.2, 5.0, 6), (0.1, 1.0, 2), (0.35, 10.0, 10)])
def test_gauss_two_group_quadrature(alpha, delta, p):
    spec = M.MixtureSpec.gaussian([alpha, 1 - alpha], [[delta, 0.0]], p=p)
    rho = M.gauss_pop_ics(spec)
    ref = _two_group_quadrature(alpha, delta, p)
    fds = rho[np.argmax(np.abs(rho - 1))]
    assert fds == pytest.approx(ref, abs=1e-6)


def test_gauss_threshold_all_one():
    a = (3 - sqrt(3)) / 6
    for delta in (0.5, 3.0, 20.0):
        rho = M.gauss_pop_ics(M.MixtureSpec.gaussian([a, 1 - a], [[delta, 0]], p=5))
        np.testing.assert_allclose(rho, 1.0, atol=1e-9)


def test_gauss_balanced_three_groups():
    spec = M.MixtureSpec.gaussian([1 / 3] * 3, [[4, 0, 0], [0, 4, 0]], p=6)
    rho = M.gauss_pop_ics(spec)
    assert np.sum(np.abs(rho - 1) < 1e-10) == 4
    assert np.sum(rho < 1 - 1e-6) == 2


def test_gauss_p_equals_q_block():
    t = np.array([[1.0, -2.0, 0.0], [3.0, 1.0, 0.0]])
    small = M.gauss_pop_ics(M.MixtureSpec.gaussian([0.2, 0.3, 0.5], t))
    big = M.gauss_pop_ics(M.MixtureSpec.gaussian([0.2, 0.3, 0.5], t, p=5))
    assert len(small) == 2
    # with p > q the block spectrum changes through the (p - q) term, but 1 appears p - q times
    assert np.sum(np.abs(big - 1) < 1e-10) >= 3


# ---------------------------------------------------------------- dirac engine

def test_dirac_examples():
    spec = M.MixtureSpec.dirac([0.5, 0.5], [[0.0, 1.0]])
    assert M.dirac_pop_cov(spec)[0, 0] == pytest.approx(0.25)
    assert M.dirac_pop_cov4(spec)[0, 0] == pytest.approx(1 / 12)
    assert M.dirac_pop_ics(spec)[0] == pytest.approx(1 / 3)
    rho = M.dirac_pop_ics(M.MixtureSpec.dirac([0.6, 0.2, 0.2], [[200, 400, 0], [0, 100, 0]]))
    assert abs(rho[0] - 1) < 1e-8


def test_dirac_monte_carlo(rng):
    a = np.array([0.2, 0.5, 0.3])
    t = np.array([[0.0, 1.0, -0.5], [0.5, -0.5, 0.0]])
    spec = M.MixtureSpec.dirac(a, t)
    draws = t[:, rng.choice(3, size=1_000_000, p=a)]
    c = draws - draws.mean(axis=1, keepdims=True)
    cov = c @ c.T / c.shape[1]
    d2 = np.einsum("in,ij,jn->n", c, np.linalg.inv(cov), c)
    cov4 = (c * d2) @ c.T / (c.shape[1] * 4)
    np.testing.assert_allclose(M.dirac_pop_cov(spec), cov, atol=1e-3)
    np.testing.assert_allclose(M.dirac_pop_cov4(spec), cov4, atol=1e-3)


def test_dirac_batch_matches_single(rng):
    t = rng.normal(size=(3, 4))
    props = rng.dirichlet(np.ones(4), size=20)
    props /= props.sum(axis=1, keepdims=True)
    batch = M.dirac_pop_ics_batch(props, t)
    for i in range(20):
        np.testing.assert_allclose(batch[i], M.dirac_pop_ics(M.MixtureSpec.dirac(props[i], t)), rtol=1e-10)
    with pytest.raises(InvalidSpec):
        M.dirac_pop_ics_batch([[0.5, 0.6, -0.1, 0.0]], t)
    with pytest.raises(Singular):
        M.dirac_pop_ics_batch([[0.25] * 4], np.ones((3, 4)))


@pytest.mark.parametrize("alpha", [0.01, 0.1, 0.3, 0.5, 0.77])
def test_two_group_closed_form(alpha):
    rho = M.dirac_pop_ics(M.MixtureSpec.dirac([alpha, 1 - alpha], [[3.0, -1.0]]))[0]
    assert rho == pytest.approx(M.dirac_two_group_rho(alpha), abs=1e-12)
    assert M.dirac_two_group_rho(alpha) == pytest.approx(M.dirac_two_group_rho(1 - alpha), abs=1e-12)


def test_two_group_values():
    assert M.dirac_two_group_rho(0.5) == pytest.approx(1 / 3)
    assert M.dirac_two_group_rho(0.1) == pytest.approx((0.001 + 0.729) / 0.27)
    assert M.dirac_two_group_rho(M.TWO_GROUP_THRESHOLD) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        M.dirac_two_group_rho(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(0, 2 ** 32 - 1))
def test_proposition1_center_free(k, seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(k))
    a = np.clip(a, 0.01, None)
    a /= a.sum()
    t = np.hstack([rng.normal(size=(k - 1, k - 1)), np.zeros((k - 1, 1))])
    m = random_nonsingular(rng, k - 1)
    r0 = M.dirac_pop_ics(M.MixtureSpec.dirac(a, t))
    r1 = M.dirac_pop_ics(M.MixtureSpec.dirac(a, m @ t))
    np.testing.assert_allclose(r0, r1, atol=1e-9)


def test_gaussian_limit_is_dirac():
    t = np.array([[1.0, -1.0, 2.0, 0.0], [0.5, 1.0, -1.0, 0.0], [0.0, 2.0, 1.0, 0.0]])
    a = [0.1, 0.2, 0.3, 0.4]
    d = M.dirac_pop_ics(M.MixtureSpec.dirac(a, t))
    g = M.gauss_pop_ics(M.MixtureSpec.gaussian(a, 1e3 * t))
    np.testing.assert_allclose(g, d, atol=1e-3)


# ---------------------------------------------------------------- quartic condition

def test_quartic_r_roots():
    poly = M.quartic_r(1 / 6, 1 / 6)
    np.testing.assert_allclose(M.quartic_real_roots(poly), [-1, R1, R2], atol=1e-9)
    assert M.quartic_real_roots(M.quartic_r(1 / 3, 1 / 3)) == []
    assert M.quartic_real_roots(M.quartic_r(1 / 4, 1 / 4)) == []
    for a in (0.05, 0.1, (3 - sqrt(3)) / 12 - 1e-6):
        assert M.critical_ratios(a, a) == []
    with pytest.raises(InvalidSpec):
        M.quartic_r(0.6, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.49), st.floats(0.01, 0.49), st.floats(-5, 5))
def test_quartic_r_symmetry_and_evaluation(a1, a2, x):
    poly = M.quartic_r(a1, a2)
    c = poly.coeffs
    assert poly(x) == pytest.approx(sum(ci * x ** (4 - i) for i, ci in enumerate(c)), abs=1e-12)
    same = M.quartic_r(a1, a1).coeffs
    assert same[0] == pytest.approx(same[4]) and same[1] == pytest.approx(same[3])


def test_quartic_matches_fourth_moment_condition():
    # with t21 = 1, r(x) is 3 (E t^2)^2 - E t^4 of the centered 1-D mixture of centers (x, 1, 0)
    for a1, a2 in ((1 / 6, 1 / 6), (0.2, 0.3), (0.1, 0.25)):
        for x in (-2.0, 0.3, 1.7, 4.0):
            a = np.array([a1, a2, 1 - a1 - a2])
            t = np.array([x, 1.0, 0.0])
            tc = t - a @ t
            excess = a @ tc ** 4 - 3 * (a @ tc ** 2) ** 2
            r = M.quartic_r(a1, a2)(x)
            assert r == pytest.approx(-excess, abs=1e-12)


def test_prop2_examples():
    assert M.prop2_all_eigen_one(1 / 6, 1 / 6, 1, -1, 4)
    assert not M.prop2_all_eigen_one(1 / 3, 1 / 3, 1, 2, 4)
    assert M.prop2_all_eigen_one(1 / 6, 1 / 6, 1, 5 / (7 - 2 * sqrt(6)), 4)
    for bad in ((0, 1), (1, 0), (2, 2)):
        with pytest.raises(InvalidCenters):
            M.prop2_all_eigen_one(1 / 6, 1 / 6, *bad, 4)


def test_prop2_spectral_equivalence():
    for a1, a2 in ((1 / 6, 1 / 6), (0.15, 0.2), (1 / 3, 1 / 3)):
        roots = M.critical_ratios(a1, a2)
        for x in list(np.linspace(-4, 4, 37)) + roots:
            if abs(x) < 1e-9 or abs(x - 1) < 1e-9:
                continue
            assert M.prop2_all_eigen_one(a1, a2, x, 1.0, 4) == M.all_eigen_one_spectral(a1, a2, x, 1.0, 4)
