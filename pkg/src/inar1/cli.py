"""Command-line interface.

Subcommands: simulate, transition, estimate, utest, limit, experiment.
All randomness is seeded explicitly, so every invocation is reproducible
from its flags alone. Numeric output is printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import montecarlo
from .dist import spec_from_flag
from .errors import ConfigError, DegeneratePathError, InvalidSpecError, ParameterError
from .inference import (
    df_statistic,
    df_test,
    efficient_estimate,
    efficient_test,
    ols_estimates,
    plugin_estimates,
    semiparam_estimate,
)
from .likelihood import transition_prob, transition_split
from .limitexp import exact_tv_vs_poisson, limit_experiment, limit_lr, limit_test_power
from .process import load_path, save_path, simulate_path


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _parse_pair(text, name, types):
    parts = text.split(",")
    if len(parts) != len(types):
        raise ParameterError(f"--{name} expects {len(types)} comma-separated values, got {text!r}")
    return tuple(t(p) for t, p in zip(types, parts))


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="simulate a path and write it to a file or stdout")
    p.add_argument("--dist", required=True, help="innovation distribution, kind:params")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float, help="autoregression parameter in [0, 1]")
    g.add_argument("--local", help="h,n: use theta = 1 - h/n^2 and n transitions")
    p.add_argument("--n", type=int, help="number of transitions (required with --theta)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("txt", "csv"), default="txt")


def _cmd_simulate(args):
    spec = spec_from_flag(args.dist)
    if args.local is not None:
        h, n = _parse_pair(args.local, "local", (float, int))
        if args.n is not None and args.n != n:
            raise ParameterError(f"--n {args.n} conflicts with --local n={n}")
        theta = 1.0 - h / float(n * n)
    else:
        if args.n is None:
            raise ParameterError("--n is required with --theta")
        theta, n = args.theta, args.n
    path = simulate_path(spec, theta, n, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            save_path(path, f, fmt=args.format)
    else:
        save_path(path, sys.stdout, fmt=args.format)
    return 0


def _add_transition(sub):
    p = sub.add_parser("transition", help="one-step transition probability (and its split)")
    p.add_argument("--dist", required=True)
    p.add_argument("--theta", type=float, help="evaluate at this autoregression parameter")
    p.add_argument("--split", help="h,n: evaluate at theta = 1 - h/n^2 and print leading/remainder")
    p.add_argument("--from", dest="x_from", type=int, required=True)
    p.add_argument("--to", dest="x_to", type=int, required=True)


def _cmd_transition(args):
    spec = spec_from_flag(args.dist)
    if args.split is not None:
        h, n = _parse_pair(args.split, "split", (float, int))
        theta = 1.0 - h / float(n * n)
        if args.theta is not None and args.theta != theta:
            raise ParameterError(f"--theta {args.theta} conflicts with --split (theta={theta!r})")
        lead, rem = transition_split(spec, h, n, args.x_from, args.x_to)
        print(json.dumps({
            "theta": float(f"{theta:.12g}"),
            "probability": float(f"{lead + rem:.12g}"),
            "leading": float(f"{lead:.12g}"),
            "remainder": float(f"{rem:.12g}"),
        }))
    else:
        if args.theta is None:
            raise ParameterError("provide --theta or --split h,n")
        print(_fmt(transition_prob(spec, args.theta, args.x_from, args.x_to)))
    return 0


def _add_estimate(sub):
    p = sub.add_parser("estimate", help="estimate the local parameter h from a path file")
    p.add_argument("--path", required=True)
    p.add_argument("--mode", choices=("efficient", "semiparam", "ols"), required=True)
    p.add_argument("--g0", type=float, help="innovation mass at 0 (efficient mode)")
    p.add_argument("--mu", type=float, help="innovation mean (efficient and ols modes)")


def _cmd_estimate(args):
    with open(args.path, "r", encoding="utf-8") as f:
        path = load_path(f)
    out = {"mode": args.mode, "n": path.n}
    if args.mode == "efficient":
        if args.g0 is None or args.mu is None:
            raise ParameterError("efficient mode needs --g0 and --mu")
        out["estimate"] = efficient_estimate(path, args.g0, args.mu)
    elif args.mode == "semiparam":
        g0_hat, mu_hat = plugin_estimates(path)
        out["estimate"] = semiparam_estimate(path)
        out["g0_hat"] = g0_hat
        out["mu_hat"] = mu_hat
    else:
        if args.mu is None:
            raise ParameterError("ols mode needs --mu")
        theta_hat, h_ols = ols_estimates(path, args.mu)
        out["estimate"] = h_ols
        out["theta_hat"] = theta_hat
    print(json.dumps({k: (float(_fmt(v)) if isinstance(v, float) else v) for k, v in out.items()}))
    return 0


def _add_utest(sub):
    p = sub.add_parser("utest", help="unit-root test on a path file")
    p.add_argument("--path", required=True)
    p.add_argument("--test", choices=("df", "efficient"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mu", type=float, help="innovation mean (df test)")
    p.add_argument("--sigma2", type=float, help="innovation variance (df test)")


def _cmd_utest(args):
    with open(args.path, "r", encoding="utf-8") as f:
        path = load_path(f)
    if args.test == "df":
        if args.mu is None or args.sigma2 is None:
            raise ParameterError("the df test needs --mu and --sigma2")
        tau = df_statistic(path, args.mu, args.sigma2)
        outcome = df_test(tau, args.alpha)
    else:
        outcome = efficient_test(path, args.alpha)
    print(json.dumps({
        "test": outcome.test,
        "statistic": float(_fmt(outcome.statistic)),
        "rejection_probability": float(_fmt(outcome.rejection_probability)),
        "alpha": outcome.alpha,
    }))
    return 0


def _add_limit(sub):
    p = sub.add_parser("limit", help="limit-experiment quantities for a distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--h0", type=float)
    p.add_argument("--z", type=int)
    p.add_argument("--power", help="h,alpha: power of the efficient limit test")
    p.add_argument("--tv", type=float, metavar="LAM",
                   help="exact TV between a finite table distribution and Poisson(LAM)")


def _cmd_limit(args):
    spec = spec_from_flag(args.dist)
    if args.power is not None:
        h, alpha = _parse_pair(args.power, "power", (float, float))
        print(_fmt(limit_test_power(limit_experiment(spec), h, alpha)))
    elif args.tv is not None:
        if spec.kind != "table":
            raise ParameterError("--tv needs a finite table distribution (table:w0,w1,...)")
        print(_fmt(exact_tv_vs_poisson(spec.weights, args.tv)))
    else:
        if args.h is None or args.h0 is None or args.z is None:
            raise ParameterError("provide --h, --h0 and --z (or --power / --tv)")
        print(_fmt(limit_lr(limit_experiment(spec), args.z, args.h, args.h0)))
    return 0


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run a Monte Carlo experiment config")
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--out", required=True, help="output directory for CSV/JSON summaries")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel workers (capped by INAR1_MAX_WORKERS)")


def _cmd_experiment(args):
    config = montecarlo.load_config(args.config)
    rows = montecarlo.run_replications(config, workers=args.workers)
    csv_path, json_path = montecarlo.write_outputs(rows, args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    breaches = montecarlo.check_thresholds(rows, config.thresholds)
    for msg in breaches:
        print(f"THRESHOLD BREACH: {msg}", file=sys.stderr)
    return 1 if breaches else 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "transition": _cmd_transition,
    "estimate": _cmd_estimate,
    "utest": _cmd_utest,
    "limit": _cmd_limit,
    "experiment": _cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inar1",
        description="Nearly unstable integer-valued AR(1): simulation, likelihoods, tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_transition(sub)
    _add_estimate(sub)
    _add_utest(sub)
    _add_limit(sub)
    _add_experiment(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParameterError, InvalidSpecError, DegeneratePathError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
