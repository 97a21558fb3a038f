"""Command line interface: ``ancred {analyse,extrinsic,prior,simulate,figure-data}``.

Every command prints a human-readable report (or CSV, for the data
commands) by default and a versioned JSON envelope with ``--json``.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import credibility as cred
from . import nulldist
from .effects import (
    ConfidenceInterval,
    EffectEstimate,
    TwoByTwoTable,
    ci_to_estimate,
    estimate_to_ci,
    from_two_by_two,
    p_to_statistic,
    p_value,
)
from .errors import DegenerateTableError, DomainError, NoSolutionError, NotSignificantError
from .numerics import two_sided_p, z_half

SCHEMA_VERSION = "1"
SEED_ENV = "ANCRED_SEED"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NOT_SIGNIFICANT = 4

FIGURES = ("thresholds", "calibration", "null-density", "null-histograms", "pe-contours")


class UsageError(Exception):
    pass


def _pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number pair: {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _default_seed():
    return int(os.environ.get(SEED_ENV, "20180101"))


def _add_study_options(parser, prefix="", label="internal study"):
    group = parser.add_argument_group(label)
    dash = f"--{prefix}" if prefix else "--"
    if not prefix:
        group.add_argument("--p", type=float, help="two-sided p-value only")
    group.add_argument(f"{dash}ci", type=_pair, metavar="L,U", help="confidence interval limits")
    group.add_argument(f"{dash}ci-level", type=float, default=0.95, help="level of the interval (default 0.95)")
    group.add_argument(f"{dash}estimate", type=float, help="estimate on the additive scale")
    group.add_argument(f"{dash}se", type=float, help="standard error of the estimate")
    group.add_argument(f"{dash}events", type=int, help="events in the treatment group")
    group.add_argument(f"{dash}n1", type=int, help="size of the treatment group")
    group.add_argument(f"{dash}events0", type=int, help="events in the control group")
    group.add_argument(f"{dash}n2", type=int, help="size of the control group")


def _add_common(parser, level=True):
    if level:
        parser.add_argument("--level", type=float, default=0.95, help="working confidence level 1 - alpha (default 0.95)")
        parser.add_argument("--scale", choices=("ratio", "additive"), default="ratio",
                            help="scale of --ci limits; ratio limits are log-transformed (default ratio)")
        parser.add_argument("--exp", action="store_true", help="also show exp-transformed (ratio scale) values")
    parser.add_argument("--json", action="store_true", help="emit the JSON envelope")


def read_study(args, prefix="", allow_p=True):
    """Turn the parsed flags of one study into ``(EffectEstimate or None, t, echo)``."""
    def get(name):
        return getattr(args, prefix + name, None)

    table = [get(n) for n in ("events", "n1", "events0", "n2")]
    forms = {
        "p": allow_p and not prefix and get("p") is not None,
        "ci": get("ci") is not None,
        "estimate": get("estimate") is not None or get("se") is not None,
        "table": any(v is not None for v in table),
    }
    chosen = [k for k, v in forms.items() if v]
    what = "external study" if prefix else "study"
    if not allow_p and not prefix and get("p") is not None:
        raise UsageError(f"{what}: a p-value alone is not enough here; give a CI, estimate+SE or counts")
    if len(chosen) != 1:
        raise UsageError(
            f"{what}: supply exactly one of p-value, CI, estimate+SE or 2x2 counts"
            + (f" (got {', '.join(chosen)})" if chosen else "")
        )
    form = chosen[0]
    if form == "p":
        p = get("p")
        return None, p_to_statistic(p), {"form": "p", "p": p}
    if form == "ci":
        lo, hi = get("ci")
        level = get("ci_level")
        echo = {"form": "ci", "lower": lo, "upper": hi, "ci_level": level, "scale": args.scale}
        if args.scale == "ratio":
            if lo <= 0 or hi <= 0:
                raise DomainError("ratio-scale interval limits must be positive")
            lo, hi = math.log(lo), math.log(hi)
        est = ci_to_estimate(ConfidenceInterval(lo, hi, level))
        return est, est.t, echo
    if form == "estimate":
        if get("estimate") is None or get("se") is None:
            raise UsageError(f"{what}: --estimate and --se must be given together")
        est = EffectEstimate(get("estimate"), get("se"))
        return est, est.t, {"form": "estimate", "estimate": est.theta_hat, "se": est.se}
    if any(v is None for v in table):
        raise UsageError(f"{what}: 2x2 input needs events, n1, events0 and n2")
    est = from_two_by_two(TwoByTwoTable(*table))
    return est, est.t, dict(zip(("form", "events", "n1", "events0", "n2"), ["table", *table]))


def envelope(command, inputs, results):
    return {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs, "results": results}


def _check_level(level):
    if not 0 < level < 1:
        raise DomainError(f"--level must lie in (0, 1), got {level!r}")


def analyse(est, t, level):
    """Intrinsic analysis of one study; fields that do not exist are ``None`` with a reason."""
    alpha = 1.0 - level
    z = z_half(alpha)
    t = abs(t)
    p = p_value(est) if est is not None else two_sided_p(t)
    significant = t > z
    threshold = cred.intrinsic_threshold(alpha)
    res = {
        "theta_hat": est.theta_hat if est else None,
        "se": est.se if est else None,
        "t": t,
        "p": p,
        "p_intrinsic": cred.intrinsic_p(p),
        "level": level,
        "significant": bool(significant),
        "ci": None,
        "intrinsic_threshold": threshold,
        "matthews_intrinsic_threshold": cred.matthews_intrinsic_threshold(alpha),
        "intrinsically_credible": bool(p <= threshold),
        "sceptical_limit": None,
        "tau": None,
        "tau2": None,
        "tau2_over_sigma2": None,
        "tau2_le_sigma2": None,
        "credibility_ratio": None,
        "ratio_credible": None,
        "reasons": {},
    }
    if est is not None:
        ci = estimate_to_ci(est, level)
        res["ci"] = {"lower": ci.lower, "upper": ci.upper}
    if not significant:
        res["reasons"]["sceptical_prior"] = f"not significant at level {level:g}"
        return res
    res["tau2_over_sigma2"] = 1.0 / ((t / z) ** 2 - 1.0)
    res["tau2_le_sigma2"] = bool(res["tau2_over_sigma2"] <= 1.0)
    res["credibility_ratio"] = (t + z) / (t - z)
    res["ratio_credible"] = bool(res["credibility_ratio"] <= cred.CREDIBILITY_RATIO_BOUND)
    if est is None:
        res["reasons"]["sceptical_prior"] = "standard error unknown for p-value input"
        return res
    prior = cred.sceptical_prior(est, alpha)
    ratio, ratio_ok = cred.credibility_ratio_credible(ci)
    res.update(
        sceptical_limit=cred.sceptical_limit(ci),
        tau=prior.sd,
        tau2=prior.variance,
        tau2_le_sigma2=cred.intrinsically_credible_by_variance(est, alpha),
        credibility_ratio=ratio,
        ratio_credible=ratio_ok,
    )
    return res


def extrinsic(est, est0, level):
    alpha = 1.0 - level
    t, t0 = est.t, est0.t
    c = est.se ** 2 / est0.se ** 2
    stat, tail = cred.compatibility_test(est, est0)
    res = {
        "t": t,
        "t0": t0,
        "c": c,
        "p": p_value(est),
        "p0": p_value(est0),
        "p_intrinsic": cred.intrinsic_p(p_value(est)),
        "p_extrinsic": None,
        "level": level,
        "t_box": None,
        "p_box": None,
        "matthews_credible": None,
        "compatibility": {"statistic": stat, "tail": tail},
        "reasons": {},
    }
    try:
        res["p_extrinsic"] = cred.extrinsic_p(t, t0, c)
    except NoSolutionError:
        res["reasons"]["p_extrinsic"] = "no solution below 1"
    try:
        prior = cred.sceptical_prior(est, alpha)
    except NotSignificantError:
        why = f"internal study not significant at level {level:g}"
        res["reasons"]["p_box"] = res["reasons"]["matthews_credible"] = why
        return res
    res["t_box"], res["p_box"] = cred.box_test(est0, prior)
    res["matthews_credible"] = cred.matthews_extrinsic_credible(abs(t), abs(t0), c, alpha)
    return res


def prior_summary(est, level):
    alpha = 1.0 - level
    ci = estimate_to_ci(est, level)
    prior = cred.sceptical_prior(est, alpha)
    return {
        "level": level,
        "sceptical_limit": prior.sceptical_limit,
        "sceptical_limit_from_ci": cred.sceptical_limit(ci),
        "tau": prior.sd,
        "tau2": prior.variance,
        "sigma": est.se,
        "critical_prior_interval": list(prior.critical_interval),
    }


def _exp_block(res, keys):
    out = {}
    for key in keys:
        val = res.get(key)
        if isinstance(val, dict):
            out[key] = {k: math.exp(v) for k, v in val.items()}
        elif isinstance(val, list):
            out[key] = [math.exp(v) for v in val]
        elif val is not None:
            out[key] = math.exp(val)
    return out


def _fmt(value):
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, dict):
        return "(" + ", ".join(_fmt(v) for v in value.values()) + ")"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def _human(res, labels):
    lines = []
    for key, label in labels:
        if key in res:
            lines.append(f"{label:<34}{_fmt(res[key])}")
    for key, why in res.get("reasons", {}).items():
        lines.append(f"{'note (' + key + ')':<34}{why}")
    for key, val in res.get("exp", {}).items():
        lines.append(f"{'exp(' + key + ')':<34}{_fmt(val)}")
    return "\n".join(lines)


ANALYSE_LABELS = [
    ("theta_hat", "estimate"), ("se", "standard error"), ("ci", "confidence interval"),
    ("t", "test statistic |t|"), ("p", "p (significance)"), ("p_intrinsic", "p_I (intrinsic credibility)"),
    ("intrinsic_threshold", "intrinsic threshold alpha_I"),
    ("matthews_intrinsic_threshold", "Matthews threshold"),
    ("intrinsically_credible", "intrinsically credible"), ("sceptical_limit", "sceptical limit S"),
    ("tau", "prior sd tau"), ("tau2_le_sigma2", "tau^2 <= sigma^2"),
    ("credibility_ratio", "credibility ratio"), ("ratio_credible", "ratio <= 3 + 2 sqrt(2)"),
]

EXTRINSIC_LABELS = [
    ("t", "internal t"), ("t0", "external t0"), ("c", "variance ratio c"), ("p", "p (internal)"),
    ("p0", "p0 (external)"), ("p_intrinsic", "p_I"), ("p_extrinsic", "p_E (extrinsic credibility)"),
    ("t_box", "t_Box"), ("p_box", "p_Box"), ("matthews_credible", "Matthews extrinsic check"),
    ("compatibility", "compatibility (stat, tail)"),
]

PRIOR_LABELS = [
    ("sceptical_limit", "sceptical limit S"), ("tau", "prior sd tau"), ("tau2", "prior variance tau^2"),
    ("sigma", "standard error sigma"), ("critical_prior_interval", "critical prior interval"),
]


def cmd_analyse(args):
    _check_level(args.level)
    est, t, echo = read_study(args)
    res = analyse(est, t, args.level)
    if args.exp and est is not None:
        res["exp"] = _exp_block(res, ("theta_hat", "ci", "sceptical_limit"))
    return envelope("analyse", {"study": echo, "level": args.level}, res), ANALYSE_LABELS


def cmd_extrinsic(args):
    _check_level(args.level)
    est, _, echo = read_study(args, allow_p=False)
    est0, _, echo0 = read_study(args, prefix="ext_", allow_p=False)
    res = extrinsic(est, est0, args.level)
    return envelope("extrinsic", {"study": echo, "external": echo0, "level": args.level}, res), EXTRINSIC_LABELS


def cmd_prior(args):
    _check_level(args.level)
    est, _, echo = read_study(args, allow_p=False)
    res = prior_summary(est, args.level)
    if args.exp:
        res["exp"] = _exp_block(res, ("sceptical_limit", "critical_prior_interval"))
    return envelope("prior", {"study": echo, "level": args.level}, res), PRIOR_LABELS


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def histogram_rows(hist, c=None):
    dens = hist.density
    for lo, hi, n, d in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, dens):
        yield ([c] if c is not None else []) + [float(lo), float(hi), int(n), float(d)]


def cmd_simulate(args):
    if args.c < 0:
        raise DomainError(f"--c must be nonnegative, got {args.c!r}")
    config = nulldist.SimulationConfig(args.n, args.c, args.seed, args.shards)
    samples = nulldist.simulate_p_e_null(config, workers=args.workers)
    hist = nulldist.histogram(samples.p_e, args.bins)
    tails = nulldist.empirical_tail(samples.p_e)
    results = {
        "c": args.c,
        "n": args.n,
        "tail_probabilities": {repr(a): v for a, v in tails.items()},
        "tail_bounds": {repr(a): nulldist.tail_bound(a) for a in tails},
        "ks_distance_beta21": nulldist.ks_distance(samples.p_e, nulldist.limiting_cdf_c0),
        "histogram": {
            "bin_edges": hist.bin_edges.tolist(),
            "counts": hist.counts.tolist(),
            "total": hist.total,
        },
    }
    inputs = {"c": args.c, "n": args.n, "seed": args.seed, "shards": args.shards, "bins": args.bins}
    csv_text = _csv_text(["bin_lower", "bin_upper", "count", "density"], histogram_rows(hist))
    return envelope("simulate", inputs, results), csv_text


def figure_thresholds(args):
    alpha = np.arange(1, args.points + 1) / (args.points * 10.0)
    rows = zip(alpha, cred.intrinsic_threshold(alpha), cred.matthews_intrinsic_threshold(alpha))
    return ["alpha", "alpha_i", "matthews_alpha_i"], rows


def figure_calibration(args):
    p = np.arange(1, args.points + 1) / args.points
    return ["p", "p_i"], zip(p, cred.intrinsic_p(p))


def figure_null_density(args):
    x = np.arange(0, args.points + 1) / args.points
    inner = x[1:-1]
    f_pi = np.concatenate([[0.0], nulldist.p_i_null_density(inner), [math.sqrt(2.0)]])
    return ["x", "f_p", "f_p_i"], zip(x, np.ones_like(x), f_pi)


def figure_null_histograms(args):
    rows = []
    for c in args.c:
        config = nulldist.SimulationConfig(args.n, c, args.seed, args.shards)
        hist = nulldist.histogram(nulldist.simulate_p_e_null(config).p_e, args.bins)
        mid = hist.midpoints
        overlays = zip(nulldist.limiting_density_c0(mid), nulldist.p_i_null_density(mid))
        for base, m, (beta, fpi) in zip(histogram_rows(hist, c), mid, overlays):
            rows.append(base + [float(m), float(beta), float(fpi), 1.0])
    header = ["c", "bin_lower", "bin_upper", "count", "density", "bin_mid",
              "beta21_density", "p_i_density", "uniform_density"]
    return header, rows


def figure_pe_contours(args):
    grid = np.arange(1, args.points + 1) / args.points * args.p_max
    rows = []
    for c in args.c:
        p, p0 = np.meshgrid(grid, grid, indexing="ij")
        p_e = cred.extrinsic_p(z_half(p.ravel()), z_half(p0.ravel()), c)
        rows.extend(zip(np.full(p.size, c), p.ravel(), p0.ravel(), p_e))
    return ["c", "p", "p0", "p_e"], rows


FIGURE_BUILDERS = {
    "thresholds": figure_thresholds,
    "calibration": figure_calibration,
    "null-density": figure_null_density,
    "null-histograms": figure_null_histograms,
    "pe-contours": figure_pe_contours,
}

FIGURE_POINTS = {"thresholds": 100, "calibration": 1000, "null-density": 1000,
                 "null-histograms": 0, "pe-contours": 20}


def cmd_figure_data(args):
    if args.points is None:
        args.points = FIGURE_POINTS[args.figure]
    if args.figure != "null-histograms" and args.points < 2:
        raise DomainError("--points must be at least 2")
    if any(c <= 0 for c in args.c):
        raise DomainError("every --c value must be positive")
    header, rows = FIGURE_BUILDERS[args.figure](args)
    rows = [list(r) for r in rows]
    inputs = {"figure": args.figure, "points": args.points, "c": args.c, "n": args.n,
              "seed": args.seed, "bins": args.bins}
    env = envelope("figure-data", inputs, {"columns": header, "rows": [
        [float(v) if isinstance(v, (float, np.floating)) else v for v in row] for row in rows]})
    return env, _csv_text(header, rows)


def build_parser():
    parser = argparse.ArgumentParser(prog="ancred", description="Reverse-Bayes analysis of credibility.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyse", help="p-value for intrinsic credibility, sceptical prior, credibility ratio")
    _add_study_options(p)
    _add_common(p)

    p = sub.add_parser("extrinsic", help="p-value for extrinsic credibility against external evidence")
    _add_study_options(p)
    _add_study_options(p, prefix="ext-", label="external study")
    _add_common(p)

    p = sub.add_parser("prior", help="sceptical prior and critical prior interval")
    _add_study_options(p)
    _add_common(p)

    p = sub.add_parser("simulate", help="null distribution of p_E by simulation")
    p.add_argument("--c", type=float, default=1.0, help="variance ratio (default 1)")
    p.add_argument("--n", type=int, default=50_000, help="number of samples (default 50000)")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or a fixed value)")
    p.add_argument("--bins", type=int, default=nulldist.DEFAULT_BINS)
    p.add_argument("--shards", type=int, default=1, help="independent random substreams")
    p.add_argument("--workers", type=int, default=1, help="threads used to process shards")
    p.add_argument("--csv", metavar="PATH", help="also write the histogram CSV to PATH")
    _add_common(p, level=False)

    p = sub.add_parser("figure-data", help="CSV data behind the figures")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--points", type=int, default=None, help="grid size")
    p.add_argument("--p-max", type=float, default=0.2, help="largest p and p0 on the pe-contours grid")
    p.add_argument("--c", type=_float_list, default=list(nulldist.DEFAULT_C_GRID),
                   help="comma-separated variance ratios (default 0.001,0.5,1,2)")
    p.add_argument("--n", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bins", type=int, default=nulldist.DEFAULT_BINS)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--output", metavar="PATH", help="write CSV to PATH instead of stdout")
    _add_common(p, level=False)
    return parser


COMMANDS = {
    "analyse": cmd_analyse,
    "extrinsic": cmd_extrinsic,
    "prior": cmd_prior,
    "simulate": cmd_simulate,
    "figure-data": cmd_figure_data,
}


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if getattr(args, "seed", 0) is None:
        args.seed = _default_seed()
    try:
        env, extra = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ancred {args.command}: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except NotSignificantError as exc:
        print(f"ancred {args.command}: not significant: {exc}", file=stderr)
        return EXIT_NOT_SIGNIFICANT
    except DegenerateTableError as exc:
        print(f"ancred {args.command}: {exc}", file=stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        print(f"ancred {args.command}: domain error: {exc}", file=stderr)
        return EXIT_DOMAIN

    if args.command == "simulate" and args.csv:
        _write(args.csv, extra)
    if args.command == "figure-data" and args.output:
        _write(args.output, extra)

    if args.json:
        stdout.write(json.dumps(env, indent=2) + "\n")
    elif args.command == "simulate":
        res = env["results"]
        for a, v in res["tail_probabilities"].items():
            print(f"Pr(p_E < {a}) = {v:.4g}  (bound {res['tail_bounds'][a]:.4g})", file=stderr)
        stdout.write(extra)
    elif args.command == "figure-data":
        if not args.output:
            stdout.write(extra)
    else:
        stdout.write(_human(env["results"], extra) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
