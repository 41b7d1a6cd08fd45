"""Fit a scatter pair, compute invariant coordinates and select components."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import matlin
from .errors import BadCount, DimensionMismatch
from .scatter import ScatterKind, as_data, estimate


class DegenerateSpectrumWarning(UserWarning):
    """All eigenvalues are (numerically) equal, so any selection is arbitrary."""


@dataclass(frozen=True)
class ScatterPair:
    v1: ScatterKind
    v2: ScatterKind

    def __post_init__(self):
        if self.v1 == self.v2:
            raise ValueError(f"scatter pair needs two distinct estimators, got {self.v1.label} twice")

    @property
    def label(self):
        return f"{self.v1.label}-{self.v2.label}"

    @classmethod
    def parse(cls, spec):
        """``"cov-cov4"`` -> ScatterPair(COV, COV4); first name is V1."""
        parts = spec.strip().lower().split("-")
        if len(parts) != 2:
            raise ValueError(f"pair spec must look like <v1>-<v2>, got {spec!r}")
        return cls(ScatterKind.parse(parts[0]), ScatterKind.parse(parts[1]))

    def __str__(self):
        return self.label


@dataclass
class IcsResult:
    eigenvalues: np.ndarray
    h: np.ndarray
    pair: ScatterPair
    center: np.ndarray

    @property
    def p(self):
        return len(self.eigenvalues)


@dataclass(frozen=True)
class Selection:
    indices: tuple  # 1-based, ascending
    d: int
    criterion: str = "med"
    degenerate: bool = False


def ics_fit(x, pair, rng=None):
    """Simultaneously diagonalise ``pair.v1`` and ``pair.v2`` estimated on x.

    ``rng`` is only consumed by randomised estimators (FAST-MCD).
    """
    x = as_data(x)
    s1 = estimate(x, pair.v1, rng=rng)
    s2 = estimate(x, pair.v2, rng=rng)
    rho, h = matlin.gen_eig(s1.scatter, s2.scatter)
    return IcsResult(rho, h, pair, s1.location)


def transform(x, result):
    """Invariant coordinates ``(x_i - center) @ H`` for every row of x."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != result.h.shape[0]:
        raise DimensionMismatch(f"data have {x.shape[1]} columns, ICS basis has {result.h.shape[0]}")
    return (x - result.center) @ result.h


def select_med(eigenvalues, d):
    """Pick the d components whose eigenvalues lie farthest from the median.

    Ties prefer the larger eigenvalue, then the smaller index. Returned
    indices are 1-based and sorted.
    """
    rho = np.asarray(eigenvalues, dtype=float)
    p = rho.size
    if not 1 <= d < p:
        raise BadCount(f"d must satisfy 1 <= d < p = {p}, got {d}")
    dev = np.abs(rho - np.median(rho))
    degenerate = bool(dev.max() < 1e-10)
    if degenerate:
        warnings.warn("eigenvalues are all equal; med selection falls back to tie-breaking",
                      DegenerateSpectrumWarning, stacklevel=2)
    order = sorted(range(p), key=lambda i: (-dev[i], -rho[i], i))
    return Selection(tuple(sorted(i + 1 for i in order[:d])), d, "med", degenerate)
