"""Grid searches for the group proportion at which a Dirac-mixture ICS
eigenvalue reaches the reference value one.

Three setups, all scanning the first proportion downward in steps of 0.001
from 1/k:

1. every other group keeps 1/k and the last group takes the remainder;
2. as 1, but the second group is pinned at (setup-1 threshold + 0.02);
3. as 1, but the second group is pinned at 0.05.

Setups 1 and 2 stop at the first grid value where one eigenvalue reaches 1,
setup 3 where two do. Center placement is irrelevant for q = k - 1, so the
simplex vertices e_1, ..., e_{k-1}, 0 are used.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidSetup, NoCrossing, NonMonotoneCrossing
from .mixture import dirac_pop_ics_batch

CROSS_TOL = 1e-9
SETUP2_OFFSET = Fraction(20, 1000)
SETUP3_SECOND = Fraction(5, 100)


@dataclass(frozen=True)
class ThresholdSetup:
    id: int
    k: int
    step: float = 0.001

    def __post_init__(self):
        if self.id not in (1, 2, 3):
            raise InvalidSetup(f"setup id must be 1, 2 or 3, got {self.id}")
        if self.k < 2:
            raise InvalidSetup(f"need k >= 2 groups, got {self.k}")
        if self.id in (2, 3) and self.k < 3:
            raise InvalidSetup(f"setup {self.id} requires at least three groups (k = {self.k})")
        if not 0 < self.step < 1.0 / self.k:
            raise InvalidSetup(f"step must lie in (0, 1/k), got {self.step}")
        if abs(1.0 / self.step - round(1.0 / self.step)) > 1e-9:
            raise InvalidSetup(f"step must divide 1, got {self.step}")

    @property
    def n_steps(self):
        """Grid cells per unit proportion."""
        return round(1.0 / self.step)

    @property
    def crossings_needed(self):
        return 2 if self.id == 3 else 1


@dataclass(frozen=True)
class ThresholdResult:
    k: int
    setup: int
    threshold: float
    crossing_index: int  # 1-based index of the eigenvalue that reached one last


def default_centers(k):
    """q x k simplex vertices e_1, ..., e_{k-1}, 0 with q = k - 1."""
    return np.hstack([np.eye(k - 1), np.zeros((k - 1, 1))])


def _fixed_second(setup, cache):
    if setup.id == 2:
        base = find_threshold(ThresholdSetup(1, setup.k, setup.step), _cache=cache)
        return Fraction(round(base.threshold * setup.n_steps), setup.n_steps) + SETUP2_OFFSET
    if setup.id == 3:
        return SETUP3_SECOND
    return None


def _grid_fractions(setup, cache=None):
    k, m = setup.k, setup.n_steps
    even = Fraction(1, k)
    second = _fixed_second(setup, cache if cache is not None else {})
    firsts = [even] + [Fraction(i, m) for i in range(int(even * m), 0, -1) if Fraction(i, m) != even]
    rows = []
    for a1 in firsts:
        row = [a1] + [even] * (k - 2)
        if second is not None:
            row[1] = second
        last = 1 - sum(row)
        if last <= 0:
            raise InvalidSetup(f"grid row {a1} leaves no mass for the last group")
        rows.append(row + [last])
    return rows


def build_grid(setup):
    """Proportion rows (N, k) scanned by ``setup``; row sums are 1 up to rounding.

    Row 0 is the balanced start (first proportion 1/k), followed by first
    proportions floor(m/k)/m, ..., 1/m with m = 1/step.
    """
    return np.array([[float(v) for v in row] for row in _grid_fractions(setup)])


def _scan(setup, grid, centers):
    rho = dirac_pop_ics_batch(grid, centers)
    needed = setup.crossings_needed
    reached = (rho >= 1.0 - CROSS_TOL).sum(axis=1)
    hit = np.flatnonzero(reached >= needed)
    if hit.size == 0:
        raise NoCrossing(f"setup {setup.id}, k = {setup.k}: no grid row reaches {needed} eigenvalue(s) of one")
    first = int(hit[0])
    if np.any(np.diff(reached[first:]) < 0):
        bad = first + int(np.flatnonzero(np.diff(reached[first:]) < 0)[0]) + 1
        raise NonMonotoneCrossing(
            f"setup {setup.id}, k = {setup.k}: eigenvalue count at one drops at alpha1 = {grid[bad, 0]}")
    return first, needed


def find_threshold(setup, centers=None, _cache=None):
    """First grid value of the first proportion at which the setup's criterion holds.

    An eigenvalue "reaches" one when it is at least ``1 - 1e-9``, so exact
    ties (for instance (0.2, 0.2, 0.6) with k = 3) count as crossings.
    """
    cache = {} if _cache is None else _cache
    key = (setup, None if centers is None else np.asarray(centers, dtype=float).tobytes())
    if key in cache:
        return cache[key]
    centers = default_centers(setup.k) if centers is None else np.asarray(centers, dtype=float)
    if centers.shape != (setup.k - 1, setup.k):
        raise InvalidSetup(f"centers must be (k-1) x k = ({setup.k - 1}, {setup.k}), got {centers.shape}")
    rows = _grid_fractions(setup, cache)
    grid = np.array([[float(v) for v in row] for row in rows])
    first, needed = _scan(setup, grid, centers)
    result = ThresholdResult(setup.k, setup.id, float(rows[first][0]), needed)
    cache[key] = result
    return result


def reproduce_table1(k_min=2, k_max=10, step=0.001, setups=(1, 2, 3)):
    """Threshold table: every requested setup for each k (setups 2 and 3 from k = 3)."""
    if not 2 <= k_min <= k_max:
        raise InvalidSetup(f"need 2 <= k_min <= k_max, got {k_min}, {k_max}")
    cache = {}
    out = []
    for k in range(k_min, k_max + 1):
        for sid in setups:
            if sid != 1 and k < 3:
                continue
            out.append(find_threshold(ThresholdSetup(sid, k, step), _cache=cache))
    return out
