"""Real roots of polynomials up to degree four by closed-form resolvents.

The quartic goes through Ferrari's resolvent cubic; candidate roots are then
polished with a few guarded Newton steps on the original polynomial. Double
roots come out of the closed form as conjugate pairs with imaginary parts of
order sqrt(eps), so candidates are accepted on residual, not on exact realness.
"""

import cmath
import math

import numpy as np

from .errors import DegeneratePolynomial


def horner(coeffs, x):
    """Evaluate a polynomial given highest-degree coefficient first."""
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def derivative(coeffs):
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def _cubic_real_root(b, c, d):
    """Largest real root of x^3 + b x^2 + c x + d."""
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        root = u + v + shift
    elif p == 0.0:
        root = shift
    else:
        r = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, -q / (2.0 * r ** 3)))
        phi = math.acos(arg)
        root = 2.0 * r * math.cos(phi / 3.0) + shift
    # Newton polish on the cubic itself
    for _ in range(4):
        f = ((root + b) * root + c) * root + d
        fp = (3.0 * root + 2.0 * b) * root + c
        if fp == 0.0:
            break
        step = f / fp
        root -= step
        if abs(step) <= 1e-16 * max(1.0, abs(root)):
            break
    return root


def _quadratic_complex(a, b, c):
    disc = cmath.sqrt(b * b - 4.0 * a * c)
    # avoid cancellation
    t = -0.5 * (b + (disc if (b.real if isinstance(b, complex) else b) >= 0 else -disc))
    if t == 0:
        return [0j, 0j]
    return [t / a, c / t]


def _quartic_candidates(c4, c3, c2, c1, c0):
    b, c, d, e = c3 / c4, c2 / c4, c1 / c4, c0 / c4
    # depressed quartic y^4 + p y^2 + q y + r with x = y - b/4
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b ** 3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b ** 4 / 256.0
    shift = -b / 4.0
    scale = max(1.0, abs(p), abs(q), abs(r))
    if abs(q) <= 1e-14 * scale:
        zs = []
        for z2 in _quadratic_complex(1.0, p, r):
            s = cmath.sqrt(z2)
            zs.extend([s, -s])
        return [z + shift for z in zs]
    # resolvent: 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0, take its largest root (> 0)
    m = _cubic_real_root(p, (p * p - 4.0 * r) / 4.0, -q * q / 8.0)
    m = max(m, 1e-300)
    s = math.sqrt(2.0 * m)
    zs = _quadratic_complex(1.0, -s, p / 2.0 + m + q / (2.0 * s))
    zs += _quadratic_complex(1.0, s, p / 2.0 + m - q / (2.0 * s))
    return [z + shift for z in zs]


def _polish(coeffs, x, steps=60):
    dcoeffs = derivative(coeffs)
    fx = abs(horner(coeffs, x))
    for _ in range(steps):
        fp = horner(dcoeffs, x)
        if fp == 0.0 or fx == 0.0:
            break
        cand = x - horner(coeffs, x) / fp
        fc = abs(horner(coeffs, cand))
        if not fc < fx:
            break
        x, fx = cand, fc
    return x


def _lower_degree(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[0] == 0.0:
        coeffs.pop(0)
    deg = len(coeffs) - 1
    if deg < 0:
        raise DegeneratePolynomial("all coefficients are zero")
    if deg == 0:
        return []
    if deg == 1:
        return [complex(-coeffs[1] / coeffs[0])]
    if deg == 2:
        return _quadratic_complex(*coeffs)
    a, b, c, d = coeffs
    x0 = _cubic_real_root(b / a, c / a, d / a)
    # deflate: a x^3 + b x^2 + c x + d = (x - x0)(a x^2 + b1 x + c1)
    b1 = b + a * x0
    c1 = c + b1 * x0
    return [complex(x0)] + _quadratic_complex(a, b1, c1)


def real_roots(coeffs, imag_tol=1e-6, residual_tol=1e-9, merge_tol=1e-6):
    """Sorted distinct real roots of a polynomial of degree <= 4.

    ``coeffs`` lists the coefficients from the highest degree down. A root is
    kept when, after polishing, ``|f(x)| <= residual_tol * ||coeffs||_2 *
    max(1, |x|)^4``; the growth factor only matters for roots outside [-1, 1].
    Roots closer than ``merge_tol`` (relative) are merged, so a double root is
    reported once.
    """
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) > 5:
        raise ValueError("degree above four is not supported")
    if all(c == 0.0 for c in coeffs):
        raise DegeneratePolynomial("all coefficients are zero")
    norm = math.sqrt(sum(c * c for c in coeffs))
    while len(coeffs) < 5:
        coeffs.insert(0, 0.0)
    try:
        cands = _lower_degree(coeffs) if coeffs[0] == 0.0 else _quartic_candidates(*coeffs)
    except (OverflowError, ZeroDivisionError):
        # negligible leading term: the huge roots come back through the reversed polynomial
        cands = _lower_degree(coeffs[1:])
    if abs(coeffs[-1]) > 1e-100 * norm:
        # the reversed polynomial has roots 1/x and resolves small roots that
        # the shift in Ferrari's reduction swamps when root magnitudes differ wildly
        rev = coeffs[::-1]
        try:
            back = _lower_degree(rev) if rev[0] == 0.0 else _quartic_candidates(*rev)
            cands += [1.0 / z for z in back if z != 0]
        except (OverflowError, ZeroDivisionError):
            pass
    found = []
    for z in cands:
        if abs(z.imag) > imag_tol * max(1.0, abs(z)):
            continue
        x = _polish(coeffs, z.real)
        if abs(horner(coeffs, x)) <= residual_tol * norm * max(1.0, abs(x)) ** 4:
            found.append(x)
    found.sort()
    merged = []
    for x in found:
        if merged and abs(x - merged[-1][-1]) <= merge_tol * max(1.0, abs(x)):
            merged[-1].append(x)
        else:
            merged.append([x])
    out = []
    for group in merged:
        best = min(group, key=lambda v: abs(horner(coeffs, v)))
        out.append(best)
    return out


def multiplicity(coeffs, x, tol=1e-6):
    """1 for a simple root, 2 or more when the derivative also vanishes at x."""
    coeffs = [float(c) for c in coeffs]
    norm = float(np.linalg.norm(coeffs))
    mult = 1
    d = derivative(coeffs)
    while len(d) > 1 and abs(horner(d, x)) <= tol * norm:
        mult += 1
        d = derivative(d)
    return mult
