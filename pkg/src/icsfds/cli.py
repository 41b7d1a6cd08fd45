"""Command-line front end.

Subcommands: ``ics``, ``theory {dirac,gaussian,two-group,quartic}``,
``thresholds``, ``ternary`` and ``simulate``. Exit status is 0 on success,
1 on a runtime error (or failed replicates) and 2 on a usage error.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, experiments, io, mixture, thresholds
from .errors import ConfigParse, IcsError, UnknownPreset
from .ics import ScatterPair, ics_fit, select_med, transform
from .quartic import multiplicity

DEFAULT_SEED = 2025


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# argument helpers


def parse_number(text):
    """Float from a decimal or an exact fraction such as ``1/6``."""
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_list(text):
    return [parse_number(t) for t in text.split(",") if t.strip()]


def parse_centers(text, k):
    """``default`` or rows separated by ``;`` with comma-separated entries."""
    if text is None or text.strip().lower() == "default":
        return thresholds.default_centers(k)
    rows = [parse_list(r) for r in text.split(";") if r.strip()]
    if not rows or any(len(r) != k for r in rows):
        raise UsageError(f"centers need {k} comma-separated values per ';'-separated row")
    return np.array(rows)


def parse_pair(text):
    try:
        return ScatterPair.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_config(path):
    """Flat ``key = value`` scenario file; ``#`` starts a comment."""
    allowed = {"k", "n", "p", "delta", "proportions", "pairs", "replications", "seed", "name"}
    values = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParse(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in allowed:
            raise ConfigParse(f"{path}:{lineno}: unknown key {key!r}; allowed: {', '.join(sorted(allowed))}")
        if key in values:
            raise ConfigParse(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = (lineno, value)
    if "proportions" not in values:
        raise ConfigParse(f"{path}: 'proportions' is required")
    try:
        props = [float(Fraction(v.strip())) for v in values["proportions"][1].replace("-", ",").split(",") if v.strip()]
        if abs(sum(props) - 100.0) < 1e-9:
            props = [v / 100.0 for v in props]
        kw = {}
        for key, conv in (("n", int), ("p", int), ("delta", float), ("replications", int), ("seed", int)):
            if key in values:
                kw["master_seed" if key == "seed" else key] = conv(values[key][1])
        if "pairs" in values:
            kw["pairs"] = tuple(s.strip() for s in values["pairs"][1].split(",") if s.strip())
        if "name" in values:
            kw["name"] = values["name"][1]
        k = int(values["k"][1]) if "k" in values else len(props)
        return experiments.Scenario(k, tuple(props), **kw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigParse(f"{path}: {exc}") from None


# ----------------------------------------------------------------------------
# output helpers


def _emit(args, payload, rows=None, columns=None):
    """JSON payload, or CSV rows when --format csv."""
    if args.format == "csv":
        io.write_csv(rows if rows is not None else _flatten(payload), args.output, columns)
    else:
        io.write_json(payload, args.output)


def _flatten(payload):
    rows = []
    for key, val in payload.items():
        if isinstance(val, (list, tuple, np.ndarray)):
            for i, v in enumerate(val, start=1):
                rows.append(dict(quantity=key, index=i, value=v))
        else:
            rows.append(dict(quantity=key, index="", value=val))
    return rows


# ----------------------------------------------------------------------------
# subcommands


def cmd_ics(args):
    header, x = io.read_numeric_csv(args.input)
    n, p = x.shape
    if n < p + 1:
        raise UsageError(f"need at least p + 1 = {p + 1} data rows, got {n}")
    d = args.d if args.d is not None else 1
    res = ics_fit(x, args.pair, rng=np.random.default_rng(args.seed))
    sel = select_med(res.eigenvalues, d)
    scores = transform(x, res)
    score_path = args.scores
    if score_path is None and args.output not in (None, "-"):
        out = Path(args.output)
        score_path = str(out.with_name(out.stem + "_scores.csv"))
    if score_path:
        io.write_matrix_csv(scores, [f"IC{i}" for i in range(1, p + 1)], score_path)
    payload = dict(pair=res.pair.label, variables=header, eigenvalues=res.eigenvalues,
                   selected=list(sel.indices), center=res.center, degenerate=sel.degenerate)
    rows = [dict(index=i, eigenvalue=v, selected=i in sel.indices)
            for i, v in enumerate(res.eigenvalues, start=1)]
    _emit(args, payload, rows)
    return 0


def cmd_theory(args):
    q = args.query
    if q == "two-group":
        rho = mixture.dirac_two_group_rho(args.alpha1)
        payload = dict(query=q, alpha1=args.alpha1, alpha2=1.0 - args.alpha1, eigenvalue=rho,
                       threshold=mixture.TWO_GROUP_THRESHOLD)
    elif q == "quartic":
        poly = mixture.quartic_r(args.alpha1, args.alpha2)
        roots = mixture.quartic_real_roots(poly)
        payload = dict(query=q, alpha1=args.alpha1, alpha2=args.alpha2, coefficients=list(poly.coeffs),
                       roots=roots, multiplicities=[multiplicity(poly.coeffs, r) for r in roots],
                       admissible_ratios=mixture.critical_ratios(args.alpha1, args.alpha2))
    elif q in ("dirac", "gaussian"):
        props = args.props
        if props is None:
            raise UsageError("--props is required")
        centers = parse_centers(args.centers, len(props))
        if q == "dirac":
            spec = mixture.MixtureSpec.dirac(props, centers)
            rho = mixture.dirac_pop_ics(spec)
        else:
            spec = mixture.MixtureSpec.gaussian(props, centers, p=args.p)
            rho = mixture.gauss_pop_ics(spec)
        payload = dict(query=q, proportions=spec.proportions, p=spec.p, q=spec.q, eigenvalues=rho)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown theory query {q}")
    _emit(args, payload)
    return 0


def cmd_thresholds(args):
    setups = tuple(args.setups) if args.setups else (1, 2, 3)
    if args.setups and args.k_min < 3 and any(s in (2, 3) for s in setups):
        raise UsageError("setups 2 and 3 require at least three groups (use --k-min 3)")
    if args.k_min < 2 or args.k_max < args.k_min:
        raise UsageError(f"need 2 <= k-min <= k-max, got {args.k_min}, {args.k_max}")
    table = thresholds.reproduce_table1(args.k_min, args.k_max, step=args.step, setups=setups)
    rows = [dict(k=r.k, setup=r.setup, threshold=r.threshold, crossing_index=r.crossing_index) for r in table]
    if args.format == "json":
        io.write_json(rows, args.output)
    else:
        io.write_csv(rows, args.output, ["k", "setup", "threshold", "crossing_index"])
    return 0


TERNARY_COLUMNS = ["alpha1", "alpha2", "alpha3", "rho1", "rho2", "log_rho1", "log_rho2", "class"]


def cmd_ternary(args):
    grid = experiments.ternary_grid(args.step)
    if args.format == "json":
        io.write_json({c: grid[c] for c in TERNARY_COLUMNS}, args.output)
    else:
        io.write_csv(grid, args.output, TERNARY_COLUMNS)
    return 0


def _scenario_from_args(args):
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.pairs:
        overrides["pairs"] = tuple(p.label for p in args.pairs)
    if args.n is not None:
        overrides["n"] = args.n
    if args.delta is not None:
        overrides["delta"] = args.delta
    if args.config:
        scen = parse_config(args.config)
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        return scen.with_(**overrides) if overrides else scen
    overrides["master_seed"] = DEFAULT_SEED if args.seed is None else args.seed
    return experiments.get_preset(args.preset, **overrides)


def cmd_simulate(args):
    outdir = Path(args.output if args.output not in (None, "-") else ".")
    ext = "json" if args.format == "json" else "csv"
    if args.profile:
        rows = experiments.eigen_profile(args.profile, replications=args.replications or 50,
                                         seed=DEFAULT_SEED if args.seed is None else args.seed,
                                         workers=args.workers)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_rows(rows, outdir / f"profile_{args.profile}.{ext}", ext,
                    ["config", "panel", "scenario", "member", "index", "value"])
        return 0
    if not (args.preset or args.config):
        raise UsageError("simulate needs --preset, --config or --profile")
    scen = _scenario_from_args(args)
    records = experiments.run_replications(scen, workers=args.workers)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_rows(experiments.eigenvalue_rows(records), outdir / f"eigenvalues.{ext}", ext,
                ["scenario", "pair", "replicate", "index", "value"])
    _write_rows(experiments.aggregate_heatmap(records), outdir / f"selection.{ext}", ext,
                ["scenario", "pair", "ic", "percent", "n_ok", "n_failed"])
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"icsfds: replicate {r.replicate} pair {r.pair}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def _write_rows(rows, path, ext, columns):
    if ext == "json":
        io.write_json(rows, str(path))
    else:
        io.write_csv(rows, str(path), columns)


# ----------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS,
                        help="output file ('-' for stdout); directory for simulate")
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master random seed")

    parser = argparse.ArgumentParser(prog="icsfds", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"icsfds {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ics", parents=[common], help="fit ICS on a CSV dataset")
    p.add_argument("input", help="CSV with a header row ('-' for stdin)")
    p.add_argument("--pair", type=parse_pair, default=ScatterPair.parse("cov-cov4"),
                   help="scatter pair <v1>-<v2>, names cov, cov4, covaxis, tcov, mcd25, mcd50, mcd75")
    p.add_argument("-d", type=int, default=None, help="number of components to select (default 1)")
    p.add_argument("--scores", help="scores CSV path (default <output>_scores.csv)")
    p.set_defaults(func=cmd_ics, default_format="json")

    p = sub.add_parser("theory", parents=[common], help="population spectra and the quartic condition")
    p.add_argument("query", choices=("dirac", "gaussian", "two-group", "quartic"))
    p.add_argument("--alpha1", type=parse_number)
    p.add_argument("--alpha2", type=parse_number)
    p.add_argument("--props", type=parse_list, help="comma-separated proportions")
    p.add_argument("--centers", help="'default' or rows 'a,b,c;d,e,f' (one column per group)")
    p.add_argument("--p", type=int, default=None, help="ambient dimension for the gaussian query")
    p.set_defaults(func=cmd_theory, default_format="json")

    p = sub.add_parser("thresholds", parents=[common], help="proportion threshold table")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--setups", type=lambda s: [int(v) for v in s.split(",")], default=None)
    p.add_argument("--step", type=parse_number, default=0.001)
    p.set_defaults(func=cmd_thresholds, default_format="csv")

    p = sub.add_parser("ternary", parents=[common], help="three-group ternary grid")
    p.add_argument("--step", type=parse_number, default=0.001)
    p.set_defaults(func=cmd_ternary, default_format="csv")

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo replications or eigenvalue profiles")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help=f"scenario name, e.g. {experiments.presets()[0]}")
    src.add_argument("--config", help="key = value scenario file")
    src.add_argument("--profile", choices=experiments.PROFILE_CONFIGS)
    p.add_argument("--replications", type=int)
    p.add_argument("--pairs", type=lambda s: [parse_pair(t) for t in s.split(",")])
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate, default_format="csv")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("output", None), ("seed", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if not hasattr(args, "format"):
        args.format = args.default_format
    if args.command == "ics" and args.seed is None:
        args.seed = DEFAULT_SEED
    try:
        if args.command == "theory":
            need = {"two-group": ("alpha1",), "quartic": ("alpha1", "alpha2")}.get(args.query, ())
            missing = [f"--{n}" for n in need if getattr(args, n) is None]
            if missing:
                raise UsageError(f"theory {args.query} requires {' '.join(missing)}")
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except UnknownPreset as exc:
        print(f"icsfds: error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (IcsError, ValueError, OSError) as exc:
        print(f"icsfds: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
