"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 method/model mismatch,
4 numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from . import approx, geometry, mcsim, pickands, specs
from . import covariance as cm
from .errors import InvalidModelError, MethodMismatchError, NumericalFailure

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MISMATCH = 3
EXIT_NUMERIC = 4

log = logging.getLogger("sphere_excursion")


def _levels(text):
    try:
        levels = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidModelError(f"bad --levels: {exc}") from exc
    if not levels:
        raise InvalidModelError("--levels must list at least one level")
    return levels


def _emit(envelope, args, table=None):
    if args.format == "csv":
        if table is None:
            raise InvalidModelError("this command has no CSV form")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(table)
        text = buf.getvalue()
    else:
        text = json.dumps(envelope, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pickands_constant(args, alpha, N):
    if args.pickands_constant is not None:
        return args.pickands_constant
    known = pickands.pickands_known(alpha, N)
    if known is not None:
        return known
    if args.estimate_pickands:
        if N != 1:
            raise InvalidModelError("Pickands constants can only be estimated for N = 1; pass --pickands-constant")
        est = pickands.estimate_pickands(alpha, seed=args.seed)
        log.info("estimated H_%g = %.5f +/- %.5f", alpha, est.estimate, est.std_error)
        return est.estimate
    raise InvalidModelError(f"no closed form for H_{alpha:g}; pass --pickands-constant or --estimate-pickands")


def _route(model, N, domain, method):
    if isinstance(model, cm.StandardizedSFBM):
        if method not in ("auto", "sfbm"):
            raise MethodMismatchError("the standardized SFBM is handled by the sfbm method only")
        return "sfbm"
    if method == "sfbm":
        raise MethodMismatchError("the sfbm method needs an sfbm model")
    report = cm.cprime(model, N)
    if method == "auto":
        if report.smooth:
            try:
                geometry.lk_domain(domain)
                return "eec"
            except MethodMismatchError:
                return "pickands"
        return "pickands"
    if method == "eec" and not report.smooth:
        raise MethodMismatchError("model is not smooth (C' infinite); use --method pickands")
    return method


def analytic_results(model, N, domain, levels, method, args):
    """ApproxResults for each level along the routed method, plus the route."""
    route = _route(model, N, domain, method)
    results = []
    if route == "eec":
        cprime = cm.cprime(model, N).cprime
        lk = geometry.lk_domain(domain)
        results = [approx.eec_domain(cprime, lk, u) for u in levels]
    elif route == "pickands":
        local = cm.local_expansion(model, N)
        H = _pickands_constant(args, local.alpha, N)
        results = [approx.pickands_sphere(local, domain, N, u, H) for u in levels]
    elif route == "sfbm":
        if not isinstance(domain, geometry.CoordinateBox):
            raise MethodMismatchError("the SFBM approximation needs a coordinate box domain")
        H = _pickands_constant(args, 2.0 * model.beta, N)
        results = [approx.sfbm_pickands(model.beta, domain, N, u, H) for u in levels]
    else:
        raise InvalidModelError(f"unknown method {method!r}")
    return route, results


def _annotated(result):
    out = result.to_dict()
    if not result.in_validity_range:
        out["annotation"] = "level below the validity threshold; asymptotic value only"
    return out


def cmd_approx(args):
    model, N = specs.parse_model(args.model)
    domain = specs.parse_domain(args.domain, N)
    levels = _levels(args.levels)
    route, results = analytic_results(model, N, domain, levels, args.method, args)
    config = {
        "model": specs.model_to_spec(model, N),
        "domain": specs.domain_to_spec(domain),
        "levels": levels,
        "method": args.method,
        "route": route,
        "pickands_constant": args.pickands_constant,
    }
    envelope = specs.make_envelope("approx", config, [_annotated(r) for r in results])
    table = [["u", "value", "method"]] + [[r.u, r.value, r.method] for r in results]
    _emit(envelope, args, table)


def _point_set(args, N):
    scheme = args.scheme or ("fibonacci" if N == 2 else "latlong")
    return mcsim.make_point_set(scheme, args.points, N, seed=args.seed)


def _check_replicates(n):
    if n < 1:
        raise InvalidModelError("--replicates must be at least 1")


def cmd_simulate(args):
    model, N = specs.parse_model(args.model)
    levels = _levels(args.levels)
    _check_replicates(args.replicates)
    rows = []
    if args.kind == "euler":
        if N != 2:
            raise MethodMismatchError("Euler characteristics are computed on S^2 only")
        tri = mcsim.triangulate_sphere(args.points)
        chis = mcsim.replicate_euler(model, tri, levels, args.replicates, args.seed)
        estimates = mcsim.mean_euler_characteristic(model, tri, levels, args.replicates, args.seed)
        for k, u in enumerate(levels):
            rows += [[i, args.seed, "chi", int(c), u] for i, c in enumerate(chis[k])]
        n_points = len(tri.vertices)
    else:
        pts = _point_set(args, N)
        maxima = mcsim.replicate_maxima(model, pts, args.replicates, args.seed)
        estimates = [mcsim.excursion_from_maxima(maxima, u, len(pts)) for u in levels]
        rows = [[i, args.seed, "sup", repr(float(m)), ""] for i, m in enumerate(maxima)]
        n_points = len(pts)
    if args.csv:
        mcsim.write_replicate_csv(args.csv, rows)
    config = {
        "model": specs.model_to_spec(model, N),
        "levels": levels,
        "replicates": args.replicates,
        "points": n_points,
        "scheme": "fibonacci-hull" if args.kind == "euler" else (args.scheme or "default"),
        "kind": args.kind,
    }
    envelope = specs.make_envelope("simulate", config, [e.to_dict() for e in estimates], seed=args.seed)
    table = [["u", "estimate", "std_error", "replicates"]] + [
        [e.u, e.estimate, e.std_error, e.replicates] for e in estimates
    ]
    _emit(envelope, args, table)
    return envelope


def cmd_validate(args):
    model, N = specs.parse_model(args.model)
    domain = specs.parse_domain(args.domain, N)
    levels = _levels(args.levels)
    _check_replicates(args.replicates)
    if not isinstance(domain, geometry.FullSphere):
        raise MethodMismatchError("Monte Carlo validation covers the full sphere only")
    route, analytic = analytic_results(model, N, domain, levels, "auto", args)
    smooth = route == "eec"
    rows = []

    pts = _point_set(args, N)
    maxima = mcsim.replicate_maxima(model, pts, args.replicates, args.seed)
    for res in analytic:
        est = mcsim.excursion_from_maxima(maxima, res.u, len(pts))
        rows.append(_comparison_row("sup-probability", res, est, trend_only=not smooth))

    if smooth and N == 2:
        tri = mcsim.triangulate_sphere(args.points)
        ecs = mcsim.mean_euler_characteristic(model, tri, levels, args.replicates, args.seed)
        for res, est in zip(analytic, ecs):
            rows.append(_comparison_row("mean-euler-characteristic", res, est, trend_only=False))

    if args.plot_csv:
        with open(args.plot_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["comparison", "u", "analytic", "empirical", "ci_lo", "ci_hi"])
            for r in rows:
                writer.writerow([r["comparison"], r["u"], r["analytic"], r["empirical"], r["ci_lo"], r["ci_hi"]])
    config = {
        "model": specs.model_to_spec(model, N),
        "domain": specs.domain_to_spec(domain),
        "levels": levels,
        "replicates": args.replicates,
        "points": args.points,
        "route": route,
    }
    envelope = specs.make_envelope("validate", config, rows, seed=args.seed)
    table = [["comparison", "u", "analytic", "empirical", "std_error", "z"]] + [
        [r["comparison"], r["u"], r["analytic"], r["empirical"], r["std_error"], r["z"]] for r in rows
    ]
    _emit(envelope, args, table)
    return envelope


def _comparison_row(kind, analytic, estimate, trend_only):
    se = estimate.std_error
    z = (estimate.estimate - analytic.value) / se if se > 0 else math.nan
    lo, hi = estimate.ci if estimate.ci is not None else (estimate.estimate - 1.96 * se, estimate.estimate + 1.96 * se)
    note = estimate.note
    if trend_only:
        note += "; non-smooth model: comparison is trend-only (grid maxima are strongly biased low)"
    return {
        "comparison": kind,
        "u": analytic.u,
        "analytic": analytic.value,
        "method": analytic.method,
        "empirical": estimate.estimate,
        "std_error": se,
        "z": z,
        "ci_lo": lo,
        "ci_hi": hi,
        "trend_only": trend_only,
        "note": note,
    }


def cmd_pickands(args):
    if not 0 < args.alpha <= 2:
        raise InvalidModelError("alpha must lie in (0, 2]")
    if args.exact:
        value = pickands.pickands_known(args.alpha, args.dimension)
        if value is None:
            raise MethodMismatchError(f"no closed form for H_{args.alpha:g}")
        result = {"alpha": args.alpha, "N": args.dimension, "estimate": value, "std_error": 0.0, "method": "exact"}
    else:
        est = pickands.estimate_pickands(
            args.alpha, args.K, args.step, args.replicates, args.seed, N=args.dimension, method=args.method
        )
        result = est.to_dict()
    config = {
        "alpha": args.alpha,
        "N": args.dimension,
        "K": args.K,
        "step": args.step,
        "replicates": args.replicates,
        "exact": args.exact,
        "method": args.method,
    }
    envelope = specs.make_envelope("pickands", config, [result], seed=args.seed)
    table = [["alpha", "estimate", "std_error"], [result["alpha"], result["estimate"], result["std_error"]]]
    _emit(envelope, args, table)


def cmd_curvatures(args):
    domain = specs.parse_domain(args.domain, args.dimension)
    lk = geometry.lk_domain(domain)
    config = {"domain": specs.domain_to_spec(domain)}
    envelope = specs.make_envelope("curvatures", config, [float(v) for v in lk])
    table = [["j", "L_j"]] + [[j, float(v)] for j, v in enumerate(lk)]
    _emit(envelope, args, table)


def build_parser():
    parser = argparse.ArgumentParser(prog="sphere-excursion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    def constants(p):
        p.add_argument("--pickands-constant", type=float, help="H_alpha for alpha != 2")
        p.add_argument("--estimate-pickands", action="store_true", help="estimate H_alpha by simulation (N = 1)")

    p = sub.add_parser("approx", help="analytic excursion-probability approximations")
    p.add_argument("--model", required=True)
    p.add_argument("--domain", default="sphere")
    p.add_argument("--levels", required=True)
    p.add_argument("--method", choices=("auto", "pickands", "eec", "sfbm"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    constants(p)
    common(p)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("simulate", help="Monte Carlo excursion probabilities or mean Euler characteristics")
    p.add_argument("--model", required=True)
    p.add_argument("--levels", required=True)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--scheme", choices=("fibonacci", "latlong", "uniform"))
    p.add_argument("--kind", choices=("sup", "euler"), default="sup")
    p.add_argument("--csv", help="write replicate-level rows to this CSV file")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="compare analytic values with Monte Carlo estimates")
    p.add_argument("--model", required=True)
    p.add_argument("--domain", default="sphere")
    p.add_argument("--levels", required=True)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--scheme", choices=("fibonacci", "latlong", "uniform"))
    p.add_argument("--plot-csv", help="write plot data (u, analytic, empirical, ci) to this CSV file")
    constants(p)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pickands", help="Pickands' constant H_alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dimension", type=int, default=1)
    p.add_argument("--K", type=float, default=pickands.DEFAULT_K)
    p.add_argument("--step", type=float, default=pickands.DEFAULT_STEP)
    p.add_argument("--replicates", type=int, default=pickands.DEFAULT_REPLICATES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("importance", "plain"), default="importance")
    p.add_argument("--exact", action="store_true", help="closed form only, no simulation")
    common(p)
    p.set_defaults(func=cmd_pickands)

    p = sub.add_parser("curvatures", help="Lipschitz-Killing curvatures of a domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--dimension", type=int)
    common(p)
    p.set_defaults(func=cmd_curvatures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    np.seterr(over="ignore", under="ignore")
    try:
        args.func(args)
    except MethodMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidModelError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
