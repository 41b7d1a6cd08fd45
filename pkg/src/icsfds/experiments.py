"""Simulation scenarios, a reproducible Gaussian-mixture sampler and the
aggregations behind the eigenvalue boxplots, ternary diagrams and selection
heatmaps.

Every replicate draws from its own counter-based stream keyed by
``(master_seed, replicate_index)``, so results do not depend on the order in
which replicates run or on how they are spread over processes.
"""

import re
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import EmptyInput, IcsError, InvalidSpec, UnknownConfig, UnknownPreset
from .ics import ScatterPair, ics_fit, select_med
from .mixture import MixtureSpec, dirac_pop_ics, dirac_pop_ics_batch, gauss_pop_ics

DEFAULT_PAIR = "cov-cov4"
PAPER_PAIRS = ("cov-cov4", "covaxis-cov", "tcov-cov", "mcd25-cov", "mcd50-cov", "mcd75-cov")
DELTAS = (1.0, 5.0, 10.0, 50.0, 100.0)
TERNARY_CENTERS = np.array([[200.0, 400.0, 0.0], [0.0, 100.0, 0.0]])
BOUNDARY_TOL = 1e-8

# group proportions in percent, per number of groups
PRESET_PROPORTIONS = {
    2: ((50, 50), (40, 60), (30, 70), (21, 79), (10, 90)),
    3: ((33, 33, 34), (18, 35, 50), (10, 40, 50), (10, 30, 60), (10, 80, 10)),
    5: ((20, 20, 20, 20, 20), (14, 20, 20, 20, 26), (10, 20, 20, 20, 30), (10, 10, 20, 20, 40)),
    10: ((10,) * 10, (8,) + (10,) * 8 + (12,), (5,) * 7 + (15, 20, 30)),
}


@dataclass(frozen=True)
class Scenario:
    """One simulation setting. ``p`` defaults to 5k."""

    k: int
    proportions: tuple
    delta: float = 10.0
    n: int = 1000
    p: int = None
    pairs: tuple = (DEFAULT_PAIR,)
    replications: int = 50
    master_seed: int = 2025
    name: str = None

    def __post_init__(self):
        props = tuple(float(a) for a in self.proportions)
        if len(props) != self.k or self.k < 2:
            raise InvalidSpec(f"need k >= 2 proportions, got k = {self.k} and {len(props)} values")
        if any(a <= 0 for a in props) or abs(sum(props) - 1.0) > 1e-9:
            raise InvalidSpec(f"proportions must be positive and sum to one, got {props}")
        p = 5 * self.k if self.p is None else int(self.p)
        if p <= self.k - 1:
            raise InvalidSpec(f"need p > k - 1, got p = {p}, k = {self.k}")
        if not self.delta >= 0:
            raise InvalidSpec(f"delta must be non-negative, got {self.delta}")
        if self.n <= p or self.replications < 1:
            raise InvalidSpec(f"need n > p and at least one replication (n = {self.n}, p = {p})")
        pairs = tuple(str(ScatterPair.parse(s)) if isinstance(s, str) else str(s) for s in self.pairs)
        object.__setattr__(self, "proportions", props)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "pairs", pairs)
        if self.name is None:
            object.__setattr__(self, "name", _default_name(props))

    def centers(self):
        """p x k matrix: group 1 at the origin, group l + 1 at delta * e_l."""
        t = np.zeros((self.p, self.k))
        t[np.arange(self.k - 1), np.arange(1, self.k)] = self.delta
        return t

    def with_(self, **changes):
        fields = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if "proportions" in changes and "name" not in changes:
            fields["name"] = None
        fields.update(changes)
        return Scenario(**fields)


def _default_name(props):
    pct = [round(100 * a) for a in props]
    if abs(sum(pct) - 100) == 0 and all(abs(100 * a - c) < 1e-9 for a, c in zip(props, pct)):
        return f"k{len(props)}-" + "-".join(str(c) for c in pct)
    return f"k{len(props)}-" + "-".join(f"{a:g}" for a in props)


def _preset_key(name):
    m = re.fullmatch(r"k(\d+)[-_:]?([\d\-_]+)", name.strip().lower())
    if not m:
        return None
    return int(m.group(1)), re.sub(r"[-_]", "", m.group(2))


def preset_proportions(props):
    """Fractions for a percent label; the last group takes the remainder.

    Only matters for 18-35-50, whose printed percentages add up to 103.
    """
    head = [c / 100 for c in props[:-1]]
    return tuple(head) + (1.0 - sum(head),)


def _preset_name(props):
    return f"k{len(props)}-" + "-".join(str(c) for c in props)


def presets():
    """All registered scenario names, in registry order."""
    return [_preset_name(props) for k in PRESET_PROPORTIONS for props in PRESET_PROPORTIONS[k]]


def get_preset(name, **overrides):
    """Scenario for a registered name such as ``k3-10-40-50`` (``k2-5050`` also works)."""
    key = _preset_key(name)
    if key is not None:
        k, digits = key
        for props in PRESET_PROPORTIONS.get(k, ()):
            if "".join(str(c) for c in props) == digits:
                overrides.setdefault("name", _preset_name(props))
                return Scenario(k, preset_proportions(props), **overrides)
    raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(presets())}")


# ----------------------------------------------------------------------------
# sampling


def replicate_stream(master_seed, replicate_index, lane=0):
    """Philox generator keyed by (master_seed, replicate_index).

    ``lane`` selects a disjoint block of the counter space, so the data and any
    estimator randomness of one replicate never share draws.
    """
    if master_seed < 0 or replicate_index < 0:
        raise ValueError("seed and replicate index must be non-negative")
    bitgen = np.random.Philox(key=[int(master_seed), int(replicate_index)], counter=[0, 0, 0, int(lane)])
    return np.random.Generator(bitgen)


def box_muller(gen, size):
    """Standard normal variates from pairs of uniforms."""
    m = ceil(size / 2)
    u1 = 1.0 - gen.random(m)  # (0, 1]
    u2 = gen.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:size]


def sample_mixture(scenario, replicate_index, return_labels=False):
    """n x p draw from ``sum_j alpha_j N(t_j, I_p)`` for one replicate."""
    gen = replicate_stream(scenario.master_seed, replicate_index)
    cum = np.cumsum(scenario.proportions)
    cum[-1] = 1.0
    labels = np.searchsorted(cum, gen.random(scenario.n), side="right")
    noise = box_muller(gen, scenario.n * scenario.p).reshape(scenario.n, scenario.p)
    x = noise + scenario.centers().T[labels]
    return (x, labels) if return_labels else x


# ----------------------------------------------------------------------------
# replications


@dataclass
class ReplicationRecord:
    scenario: str
    replicate: int
    pair: str
    k: int
    p: int
    eigenvalues: np.ndarray = None
    selected: tuple = ()
    error: str = None

    @property
    def ok(self):
        return self.error is None


def _run_one(scenario, rep):
    x = sample_mixture(scenario, rep)
    out = []
    for lane, label in enumerate(scenario.pairs, start=1):
        rec = ReplicationRecord(scenario.name, rep, label, scenario.k, scenario.p)
        try:
            res = ics_fit(x, ScatterPair.parse(label), rng=replicate_stream(scenario.master_seed, rep, lane))
            rec.eigenvalues = res.eigenvalues
            rec.selected = select_med(res.eigenvalues, scenario.k - 1).indices
        except IcsError as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
        out.append(rec)
    return out


def run_replications(scenario, workers=None, replicates=None):
    """ICS fit and med selection (d = k - 1) for every replicate and pair.

    Estimator failures are kept as records with ``error`` set. With
    ``workers > 1`` replicates run in a process pool; output order and values
    are the same either way.
    """
    reps = range(scenario.replications) if replicates is None else list(replicates)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn")) as pool:
            chunks = list(pool.map(_run_one, [scenario] * len(reps), reps))
    else:
        chunks = [_run_one(scenario, r) for r in reps]
    return [rec for chunk in chunks for rec in chunk]


def reported_indices(k, p):
    """IC indices shown in a heatmap row: the first and the last k - 1."""
    return sorted(set(range(1, k)) | set(range(p - k + 2, p + 1)))


def aggregate_heatmap(records):
    """Selection percentage per (scenario, pair, IC index) over successful replicates.

    Returns dict rows with keys scenario, pair, ic, percent, n_ok, n_failed.
    """
    if not records:
        raise EmptyInput("no replication records to aggregate")
    groups = {}
    for rec in records:
        groups.setdefault((rec.scenario, rec.pair), []).append(rec)
    rows = []
    for (scen, pair), recs in groups.items():
        ok = [r for r in recs if r.ok]
        k, p = recs[0].k, recs[0].p
        for ic in reported_indices(k, p):
            hits = sum(ic in r.selected for r in ok)
            pct = 100.0 * hits / len(ok) if ok else float("nan")
            rows.append(dict(scenario=scen, pair=pair, ic=ic, percent=pct,
                             n_ok=len(ok), n_failed=len(recs) - len(ok)))
    return rows


def eigenvalue_rows(records):
    """Long format: one row per (scenario, pair, replicate, index)."""
    rows = []
    for r in records:
        if not r.ok:
            continue
        for i, v in enumerate(r.eigenvalues, start=1):
            rows.append(dict(scenario=r.scenario, pair=r.pair, replicate=r.replicate, index=i, value=float(v)))
    return rows


# ----------------------------------------------------------------------------
# ternary diagram


def classify(rho1, rho2, tol=BOUNDARY_TOL):
    """Region label for a k = 3 Dirac spectrum."""
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    out = np.full(rho1.shape, "split", dtype=object)
    out[(rho1 < 1 - tol) & (rho2 < 1 - tol)] = "both_below"
    out[(rho1 > 1 + tol) & (rho2 > 1 + tol)] = "both_above"
    out[(np.abs(rho1 - 1) <= tol) | (np.abs(rho2 - 1) <= tol)] = "on_boundary"
    return out


def ternary_compositions(step=0.001):
    """Integer compositions (i, j, l) >= 1 with i + j + l = 1/step, as an (N, 3) int array."""
    m = round(1.0 / step)
    if m < 3 or abs(m * step - 1.0) > 1e-9:
        raise InvalidSpec(f"step must divide 1 into at least 3 parts, got {step}")
    i, j = np.meshgrid(np.arange(1, m - 1), np.arange(1, m - 1), indexing="ij")
    keep = i + j <= m - 1
    i, j = i[keep], j[keep]
    return np.column_stack([i, j, m - i - j]), m


def ternary_grid(step=0.001, centers=None, chunk=100_000):
    """Eigenvalues and region class on every positive composition of the step grid.

    Returns a dict of column arrays: alpha1, alpha2, alpha3, rho1, rho2,
    log_rho1, log_rho2, class.
    """
    comp, m = ternary_compositions(step)
    centers = TERNARY_CENTERS if centers is None else np.asarray(centers, dtype=float)
    alphas = comp / m
    rho = np.empty((len(alphas), 2))
    for s in range(0, len(alphas), chunk):
        rho[s:s + chunk] = dirac_pop_ics_batch(alphas[s:s + chunk], centers)
    return {
        "alpha1": alphas[:, 0], "alpha2": alphas[:, 1], "alpha3": alphas[:, 2],
        "rho1": rho[:, 0], "rho2": rho[:, 1],
        "log_rho1": np.log(rho[:, 0]), "log_rho2": np.log(rho[:, 1]),
        "class": classify(rho[:, 0], rho[:, 1]),
    }


def ternary_cell(alpha, centers=None):
    """(rho1, rho2, class) for a single composition."""
    centers = TERNARY_CENTERS if centers is None else np.asarray(centers, dtype=float)
    rho = dirac_pop_ics(MixtureSpec.dirac(alpha, centers))
    return float(rho[0]), float(rho[1]), str(classify(rho[0], rho[1]))


# ----------------------------------------------------------------------------
# eigenvalue profiles


CENTER_LOW, CENTER_HIGH = -2000, 15000
N_CENTER_CONFIGS = 20
PROFILE_SEED = 20240101


def center_configs(q, k, count=N_CENTER_CONFIGS, seed=PROFILE_SEED):
    """Deterministic full-rank integer q x k center sets, last column at the origin."""
    gen = np.random.Generator(np.random.Philox(key=[seed, 1000 * q + k]))
    out = []
    while len(out) < count:
        t = np.zeros((q, k))
        t[:, :-1] = gen.integers(CENTER_LOW, CENTER_HIGH + 1, size=(q, k - 1))
        rel = t[:, :-1]
        if np.linalg.matrix_rank(rel) == q and len({tuple(c) for c in t.T}) == k:
            out.append(t)
    return out


# panels as (k, q); proportions in percent
GAUSSIAN_PANELS = ((2, 1), (3, 1), (3, 2), (5, 4))
DIRAC_FULL_PANELS = ((2, 1), (3, 2), (5, 4), (10, 9))
DIRAC_LOW_PANELS = ((3, 1), (5, 1), (5, 2), (5, 3))
PROFILE_P = 6
EXTRA_PROPORTIONS = {
    2: ((21, 79),),
    3: ((18, 41, 41), (10, 10, 80), (60, 20, 20)),
    5: ((14, 21, 21, 22, 22), (10, 10, 10, 35, 35)),
    10: ((8, 10, 10, 10, 10, 10, 10, 10, 10, 12), (5, 5, 10, 10, 10, 10, 10, 10, 10, 20)),
}


def profile_proportions(k):
    seen = []
    for props in PRESET_PROPORTIONS.get(k, ()) + EXTRA_PROPORTIONS.get(k, ()):
        if props not in seen:
            seen.append(props)
    return seen


def _label(props):
    return "-".join(str(c) for c in props)


def _population_rows(config, panels, family):
    rows = []
    for k, q in panels:
        configs = center_configs(q, k)
        for props in profile_proportions(k):
            alpha = np.array(preset_proportions(props))
            for c, t in enumerate(configs, start=1):
                if family == "gaussian":
                    rho = gauss_pop_ics(MixtureSpec.gaussian(alpha, t, p=PROFILE_P))
                else:
                    rho = dirac_pop_ics(MixtureSpec.dirac(alpha, t))
                for i, v in enumerate(rho, start=1):
                    rows.append(dict(config=config, panel=f"k{k}-q{q}", scenario=_label(props),
                                     member=c, index=i, value=float(v)))
    return rows


def _sampled_rows(replications, seed, ks, deltas, workers):
    rows = []
    for k in ks:
        for props in PRESET_PROPORTIONS[k]:
            for delta in deltas:
                scen = Scenario(k, preset_proportions(props), delta=delta, replications=replications,
                                master_seed=seed, name=_preset_name(props))
                for rec in run_replications(scen, workers=workers):
                    if not rec.ok:
                        continue
                    for i, v in enumerate(rec.eigenvalues, start=1):
                        rows.append(dict(config="sampled", panel=f"k{k}-delta{delta:g}",
                                         scenario=_label(props), member=rec.replicate + 1,
                                         index=i, value=float(v)))
    return rows


PROFILE_CONFIGS = ("gaussian", "dirac", "dirac-low", "sampled")


def eigen_profile(config, replications=50, seed=2025, ks=(2, 3, 5, 10), deltas=DELTAS, workers=None):
    """Long-format eigenvalue table for a registered grid.

    ``gaussian``: population spectra, p = 6, 20 center sets per panel.
    ``dirac``: population spectra with q = k - 1 (center-free by construction).
    ``dirac-low``: population spectra with q < k - 1.
    ``sampled``: Cov-Cov4 on simulated data for each preset and delta.
    """
    if config == "gaussian":
        return _population_rows(config, GAUSSIAN_PANELS, "gaussian")
    if config == "dirac":
        return _population_rows(config, DIRAC_FULL_PANELS, "dirac")
    if config == "dirac-low":
        return _population_rows(config, DIRAC_LOW_PANELS, "dirac")
    if config == "sampled":
        return _sampled_rows(replications, seed, ks, deltas, workers)
    raise UnknownConfig(f"unknown profile config {config!r}; expected one of {PROFILE_CONFIGS}")
