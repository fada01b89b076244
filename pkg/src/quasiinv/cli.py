"""Command-line front end: canonical labels, sections, convergence tables, checks.

Every command writes deterministic output.  CSV files start with a
``# config: {...}`` comment echoing the run configuration, then a header row.
Exit codes: 0 success, 2 precondition violation, 3 numeric failure; errors
are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fixtures
from .approx import (
    blockmap_distance,
    closure_composer,
    constraint_residual,
    discretize_gms,
    schedule,
    split_points,
)
from .cosets import CanonicalLabel, canonical_form, invariants_from_label, same_double_coset
from .errors import NumericError, PreconditionError, ValidationError
from .measure import DEFAULT_GRID, RMeasure, StripGrid, bin_discretize, measure_distance
from .topology import (
    GmsMetricConfig,
    GridFunction,
    doubling_closure_demo,
    gms_distance,
    isometry_defect,
    matrix_element,
    weak_not_strong_demo,
)
from .transform import IntervalSet, PwMap, compose, convex_section, kappa_full, random_interval_exchange

FIXTURE_MAPS = {
    "identity": fixtures.identity,
    "g0": fixtures.g0,
    "psi_u": fixtures.psi_u,
    "h2": fixtures.h2,
    "swap": fixtures.swap,
}
NAMED_MEASURES = {
    "uniform": fixtures.uniform_law,
    "delta1": lambda: RMeasure.atom(1),
}


# -- input / output helpers --------------------------------------------------------


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def _with_context(path, build, data):
    try:
        return build(data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}", residuals=exc.residuals) from None
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed document ({exc!r})") from None


def load_map(source):
    if source in FIXTURE_MAPS:
        return FIXTURE_MAPS[source]()
    return _with_context(source, PwMap.from_dict, _load_json(source))


def load_measure(source):
    if source in NAMED_MEASURES:
        return NAMED_MEASURES[source]()
    return _with_context(source, RMeasure.from_dict, _load_json(source))


def _strip_grid(n):
    return StripGrid(DEFAULT_GRID.re, tuple(0.5 * k for k in range(-n, n + 1)))


def _metric(args):
    return GmsMetricConfig(depth=args.depth, grid=_strip_grid(args.strip_n))


def _config(args):
    out = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return json.dumps(out, sort_keys=True)


def _csv_text(args, header, rows):
    buf = io.StringIO()
    buf.write(f"# config: {_config(args)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, Fraction):
        return repr(float(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _emit(args, text, suffix=""):
    if args.out:
        path = Path(str(args.out) + suffix)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -------------------------------------------------------------------------


def cmd_canon(args):
    lbl = canonical_form(load_map(args.map))
    inv = invariants_from_label(lbl)
    ys, rows = inv.table(args.samples)
    header = ["y"] + [f"F{k + 1}" for k in range(inv.K)] + ["F"]
    table = [dict(zip(header, [y] + list(col))) for y, col in zip(ys, rows.T)]
    label_text = _dump(lbl.to_dict())
    csv_text = _csv_text(args, header, table)
    if args.out:
        _emit(args, label_text, ".label.json")
        _emit(args, csv_text, ".invariants.csv")
    else:
        sys.stdout.write(label_text)


def cmd_section(args):
    psi = convex_section(load_measure(args.measure))
    _emit(args, _dump(psi.to_dict()))


def _engine_rows(args):
    cfg = _metric(args)
    if args.engine in ("split", "spread"):
        nu = load_measure(args.nu)
        half = nu.scale(Fraction(1, 2))
        target = (CanonicalLabel((half, half), RMeasure()) if args.engine == "split"
                  else CanonicalLabel((), nu))
        rows = []
        for n in range(2 if args.engine == "split" else 1, args.n_max + 1):
            # split: theta_n at level n; spread: composer stage n at level schedule(n)
            k, level = (1, n) if args.engine == "split" else (n, schedule(n))
            bm = closure_composer(nu, target, k, level=level)
            rows.append({
                "n": n,
                "distance": blockmap_distance(bm, target, cfg.depth, cfg.grid),
                "constraint_residual": constraint_residual(bm, nu),
                "support_violations": len(bm.support_violations()),
                "blocks": len(split_points(level).cuts) + 1,
            })
        return ["n", "distance", "constraint_residual", "support_violations", "blocks"], rows
    if args.engine == "discretize":
        g = load_map(args.map)
        rows = []
        for N in range(1, args.bins_N + 1):
            gN = discretize_gms(g, N)
            rows.append({
                "N": N,
                "gms_distance": gms_distance(gN, g, cfg),
                "exact_bins": kappa_full(gN) == bin_discretize(kappa_full(g), N),
                "segments": len(gN.segments),
            })
        return ["N", "gms_distance", "exact_bins", "segments"], rows
    if args.engine == "oscillation":
        rows = weak_not_strong_demo(args.j_max, cfg=cfg)
        return ["j", "matrix_element_error", "strong_defect_L1", "gms_distance_to_identity"], rows
    if args.engine == "doubling":
        f = GridFunction.from_callable(lambda x: np.sin(2 * np.pi * x), args.grid_n, args.p)
        rows = doubling_closure_demo(args.n_max, f, args.p)
        return ["n", "norm_T_minus_R", "sup_map_gap", "measure_preserving"], rows
    raise PreconditionError(f"unknown engine {args.engine!r}")


def cmd_converge(args):
    header, rows = _engine_rows(args)
    _emit(args, _csv_text(args, header, rows))


def _phi_gap(g, h, grid):
    return measure_distance(kappa_full(g), kappa_full(h), grid)


def cmd_quotient_check(args):
    grid = _strip_grid(args.strip_n)
    rng = random.Random(args.seed)
    deviations = {}
    for name in args.maps:
        g = load_map(name)
        base = kappa_full(g)
        worst = 0.0
        exact = True
        for _ in range(args.pairs):
            u = random_interval_exchange(rng.randrange(2 ** 31), rng.randint(1, 6))
            v = random_interval_exchange(rng.randrange(2 ** 31), rng.randint(1, 6))
            k = kappa_full(compose(u, compose(g, v)))
            exact = exact and k == base
            worst = max(worst, measure_distance(k, base, grid))
        deviations[name] = {"max_functional_deviation": worst, "laws_identical": exact}
    psi, h2 = fixtures.psi_u(), fixtures.h2()
    phi_gap = _phi_gap(psi, h2, grid)
    same = same_double_coset(psi, h2)
    report = {
        "biinvariance": deviations,
        "psi_u_vs_h2": {
            "phi_distance": phi_gap,
            "same_double_coset": same,
            "quotient_identifies_distinct_cosets": phi_gap <= 1e-10 and not same,
        },
        "g0_vs_identity": {"phi_distance": _phi_gap(fixtures.g0(), fixtures.identity(), grid)},
    }
    _emit(args, _dump(report))


def cmd_operator_check(args):
    f = GridFunction.from_callable(lambda x: 2 + np.exp(x) * np.cos(3 * x), args.grid_n)
    ps = args.p_list or [1.0, 2.0, 3.0]
    ss = args.s_list or [0.0, 0.7]
    A = IntervalSet.of(Fraction(1, 8), Fraction(5, 8))
    B = IntervalSet.of(Fraction(1, 4), Fraction(3, 4))
    rows = []
    for name in args.maps:
        g = load_map(name)
        for p in ps:
            for s in ss:
                a = matrix_element(g, A, B, p, s)
                b = matrix_element(g, A, B, p, s, method="quadrature", n=args.grid_n)
                rows.append({
                    "map": name,
                    "p": p,
                    "s": s,
                    "isometry_defect": isometry_defect(g, f, p, s),
                    "matrix_element_re": a.real,
                    "matrix_element_im": a.imag,
                    "dual_gap": abs(a - b),
                })
    header = ["map", "p", "s", "isometry_defect", "matrix_element_re", "matrix_element_im", "dual_gap"]
    _emit(args, _csv_text(args, header, rows))


# -- parser -----------------------------------------------------------------------------


def _positive(v):
    n = int(v)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=_positive, default=6, help="dyadic partition levels")
    common.add_argument("--strip-n", type=_positive, default=10,
                        help="imaginary grid points per side (step 0.5)")
    common.add_argument("--grid-n", type=_positive, default=2 ** 16, help="grid size for L^p sums")
    common.add_argument("--n-max", type=_positive, default=10)
    common.add_argument("--j-max", type=_positive, default=64)
    common.add_argument("--bins-N", type=_positive, default=8)
    common.add_argument("--p", type=float, default=2.0)
    common.add_argument("--s", type=float, default=0.0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")

    parser = argparse.ArgumentParser(prog="quasiinv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", parents=[common], help="canonical double-coset label of a map")
    p.add_argument("map", help="map JSON file or fixture name")
    p.add_argument("--samples", type=_positive, default=1000)
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("section", parents=[common], help="convex map with a given derivative law")
    p.add_argument("measure", help="measure JSON file or 'uniform' / 'delta1'")
    p.set_defaults(func=cmd_section)

    p = sub.add_parser("converge", parents=[common], help="convergence table of an engine")
    p.add_argument("--engine", required=True,
                   choices=["split", "spread", "discretize", "oscillation", "doubling"])
    p.add_argument("--nu", default="uniform")
    p.add_argument("--map", default="psi_u")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("quotient-check", parents=[common],
                       help="biinvariant functionals on double cosets")
    p.add_argument("--maps", nargs="+", default=["g0", "psi_u", "h2"])
    p.add_argument("--pairs", type=_positive, default=100)
    p.set_defaults(func=cmd_quotient_check)

    p = sub.add_parser("operator-check", parents=[common],
                       help="isometry and matrix-element tables")
    p.add_argument("--maps", nargs="+", default=["g0", "psi_u", "h2"])
    p.add_argument("--p-list", type=float, nargs="+")
    p.add_argument("--s-list", type=float, nargs="+")
    p.set_defaults(func=cmd_operator_check)
    return parser


def _fail(code, exc):
    err = {"error": type(exc).__name__, "message": str(exc)}
    res = getattr(exc, "residuals", None)
    if res:
        err["residuals"] = {k: float(v) for k, v in res.items()}
    achieved = getattr(exc, "achieved", None)
    if achieved is not None:
        err["achieved"] = achieved
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PreconditionError as exc:
        return _fail(2, exc)
    except NumericError as exc:
        return _fail(3, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
