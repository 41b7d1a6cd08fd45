"""Invariant coordinate selection toolkit.

Sample scatter estimators and ICS fitting, exact population spectra for
Gaussian and Dirac mixtures, proportion-threshold searches and a seeded
simulation harness.
"""

__version__ = "0.1.0"

from .errors import IcsError
from .ics import IcsResult, ScatterPair, Selection, ics_fit, select_med, transform
from .matlin import gen_eig, sym_eig
from .mixture import (
    MixtureSpec,
    dirac_pop_ics,
    dirac_two_group_rho,
    gauss_pop_ics,
    prop2_all_eigen_one,
    quartic_r,
    quartic_real_roots,
)
from .scatter import ScatterKind, cov4, cov_axis, mcd_raw, mean_cov, tcov
from .thresholds import ThresholdSetup, find_threshold, reproduce_table1

__all__ = [
    "IcsError", "IcsResult", "MixtureSpec", "ScatterKind", "ScatterPair", "Selection", "ThresholdSetup",
    "cov4", "cov_axis", "dirac_pop_ics", "dirac_two_group_rho", "find_threshold", "gauss_pop_ics",
    "gen_eig", "ics_fit", "mcd_raw", "mean_cov", "prop2_all_eigen_one", "quartic_r", "quartic_real_roots",
    "reproduce_table1", "select_med", "sym_eig", "tcov", "transform",
]
