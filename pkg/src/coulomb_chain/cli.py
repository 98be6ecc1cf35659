"""Command-line front end: `coulomb-chain <command> [flags]`.

Commands
--------
theory     closed-form predictions (decay ratio, calibration, covariance law)
invert     first row of the inverse ring Hessian for explicit (c, b, n)
minimize   Newton minimization of the tilted energy, with decay diagnostics
sample     Metropolis Monte Carlo runs with covariance estimates
verify     the acceptance suite (fast or full)

All data-emitting commands share one row schema -- columns
``record,index,value,se`` -- written as CSV (header, unix line endings,
15 significant digits) or as a JSON mirror of exactly the same rows.
Without ``--out`` rows go to stdout; with ``--out PATH`` they go to PATH and
a deterministic manifest (full resolved config, seed, package version) is
written next to it as ``PATH.manifest.json``.  A bare ``--out`` filename is
placed in ``$COULOMB_CHAIN_OUTDIR`` when that variable is set.

``--config FILE`` reads a flat ``key=value`` file (one per line, ``#``
comments) holding any long flag names; explicit flags override it.
"""

import argparse
import json
import math
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from coulomb_chain import __version__
from coulomb_chain.circulant import (
    SymTriCirculant,
    circulant_inverse_row,
    inverse_row_asymptotic,
)
from coulomb_chain.energy import ModelParams
from coulomb_chain.estimate import correlation_estimates
from coulomb_chain.minimize import (
    NewtonError,
    boundary_decay_fit,
    calibrate_lambda,
    minimize_chain,
    minimize_circular,
)
from coulomb_chain.sampler import SamplerConfig, run
from coulomb_chain.theory import (
    a_star,
    delta,
    eta,
    lambda_unbiased,
    predicted_cov,
    uniform_hessian,
)
from coulomb_chain import verification

OUTDIR_ENV = "COULOMB_CHAIN_OUTDIR"

Row = Tuple[str, int, float, float]


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(sub: argparse.ArgumentParser, *names: str):
    """Register the shared flags (all default to None so that config-file
    values can fill unset ones before hard defaults apply)."""
    f = sub.add_argument
    if "beta" in names:
        f("--beta", type=float, default=None, help="near-neighbour coupling (default 1)")
    if "gamma" in names:
        f("--gamma", type=float, default=None, help="next-neighbour coupling (default 1)")
    if "n" in names:
        f("--n", type=int, default=None, help="number of spacings (default 64)")
    if "lambda" in names:
        f("--lambda", dest="lam", type=float, default=None,
          help="tilt multiplier (default: calibrated so the mean total is 1)")
    if "seed" in names:
        f("--seed", type=int, default=None, help="master RNG seed (default 0)")
    if "sweeps" in names:
        f("--sweeps", type=int, default=None, help="measurement sweeps (default 100000)")
    if "burnin" in names:
        f("--burnin", type=int, default=None, help="burn-in sweeps (default 1000)")
    if "thin" in names:
        f("--thin", type=int, default=None, help="record every thin-th sweep (default 1)")
    if "chains" in names:
        f("--chains", type=int, default=None, help="independent replica chains (default 1)")
    if "step" in names:
        f("--step", type=float, default=None, help="initial proposal half-width (default 0.5/n)")
    if "ensemble" in names:
        f("--ensemble", choices=("chain", "ring"), default=None,
          help="open chain or periodic ring (default ring)")
    if "constrained" in names:
        f("--constrained", choices=("true", "false"), default=None,
          help="fix the total length to 1 (default true)")
    if "lags" in names:
        f("--lags", type=int, default=None, help="covariance lags to report (default 5)")
    sub.add_argument("--config", default=None, metavar="FILE",
                     help="flat key=value file supplying defaults for any flag")
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="write rows to PATH (and PATH.manifest.json) instead of stdout")
    sub.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None,
                     help="output format (default csv)")


def read_config_file(path: str) -> dict:
    """Parse a flat key=value config file; '#' starts a comment."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


_CONFIG_KEYS = {
    # config-file key -> (args attribute, converter)
    "beta": ("beta", float),
    "gamma": ("gamma", float),
    "n": ("n", int),
    "lambda": ("lam", float),
    "seed": ("seed", int),
    "sweeps": ("sweeps", int),
    "burnin": ("burnin", int),
    "thin": ("thin", int),
    "chains": ("chains", int),
    "step": ("step", float),
    "ensemble": ("ensemble", str),
    "constrained": ("constrained", str),
    "lags": ("lags", int),
    "c": ("c", float),
    "b": ("b", float),
    "suite": ("suite", str),
    "out": ("out", str),
    "format": ("fmt", str),
}


def apply_config(args: argparse.Namespace):
    """Fill flags that were not given on the command line from the config
    file; then apply hard defaults."""
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            attr, conv = _CONFIG_KEYS[key]
            if hasattr(args, attr) and getattr(args, attr) is None:
                setattr(args, attr, conv(value))
    defaults = {
        "beta": 1.0, "gamma": 1.0, "n": 64, "seed": 0, "sweeps": 100_000,
        "burnin": 1_000, "thin": 1, "chains": 1, "ensemble": "ring",
        "constrained": "true", "lags": 5, "fmt": "csv", "suite": "fast",
    }
    for attr, value in defaults.items():
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _params(args) -> ModelParams:
    return ModelParams(args.beta, args.gamma, args.n)


# ---------------------------------------------------------------------------
# output plumbing


def resolve_out(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not os.path.dirname(path):
        return os.path.join(outdir, path)
    return path


def _fmt_value(x: float) -> str:
    return format(float(x), ".15g")


def rows_to_csv(rows: Sequence[Row]) -> str:
    lines = ["record,index,value,se"]
    for record, index, value, se in rows:
        lines.append(f"{record},{index},{_fmt_value(value)},{_fmt_value(se)}")
    return "\n".join(lines) + "\n"


def rows_to_json(command: str, rows: Sequence[Row]) -> str:
    payload = {
        "command": command,
        "rows": [
            {"record": r, "index": i, "value": float(v), "se": float(s)}
            for r, i, v, s in rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def manifest_json(command: str, config: dict) -> str:
    payload = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(command: str, rows: Sequence[Row], args, config: dict) -> None:
    """Write rows as CSV or JSON to --out (plus manifest) or stdout."""
    text = rows_to_csv(rows) if args.fmt == "csv" else rows_to_json(command, rows)
    out = resolve_out(args.out)
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    with open(out + ".manifest.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest_json(command, config))
    print(f"wrote {out} and {out}.manifest.json")


# ---------------------------------------------------------------------------
# commands


def cmd_theory(args) -> int:
    p = _params(args)
    lam = args.lam if args.lam is not None else lambda_unbiased(p)
    lags = min(args.lags, p.n // 2)
    hess = uniform_hessian(p, lam)
    rows: List[Row] = [
        ("delta", 0, delta(p), 0.0),
        ("eta", 0, eta(p), 0.0),
        ("lambda_unbiased", 0, lambda_unbiased(p), 0.0),
        ("a_star", 0, a_star(p, lam), 0.0),
        ("hessian_diag", 0, hess.c, 0.0),
        ("hessian_band", 0, hess.b, 0.0),
    ]
    for lag in range(lags + 1):
        rows.append(("cov_free", lag, predicted_cov(p, lag), 0.0))
    for lag in range(lags + 1):
        rows.append(("cov_conditional", lag, predicted_cov(p, lag, conditional=True), 0.0))
    config = {"beta": p.beta, "gamma": p.gamma, "n": p.n, "lambda": lam,
              "lags": lags, "seed": None}
    emit("theory", rows, args, config)
    return 0


def cmd_invert(args) -> int:
    m = SymTriCirculant(args.c, args.b, args.n)
    row = circulant_inverse_row(m)
    limit, ratio = inverse_row_asymptotic(m)
    rows: List[Row] = [("inverse_row", k + 1, row[k], 0.0) for k in range(args.n)]
    rows.append(("limit_corner", 0, limit, 0.0))
    rows.append(("limit_ratio", 0, ratio, 0.0))
    config = {"c": args.c, "b": args.b, "n": args.n, "seed": None}
    emit("invert", rows, args, config)
    return 0


def cmd_minimize(args) -> int:
    p = _params(args)
    circular = args.ensemble == "ring"
    lam = args.lam if args.lam is not None else calibrate_lambda(p, circular=circular)
    profile = minimize_circular(p, lam) if circular else minimize_chain(p, lam)
    rows: List[Row] = [
        ("lambda", 0, lam, 0.0),
        ("iterations", 0, profile.iterations, 0.0),
        ("residual_norm", 0, profile.residual_norm, 0.0),
        ("total_length", 0, float(np.sum(profile.a_vec)), 0.0),
    ]
    if not circular and p.gamma > 0.0:
        fit = boundary_decay_fit(profile, p)
        rows.append(("decay_rate", 0, fit.rate, 0.0))
        rows.append(("decay_r2", 0, fit.r2, 0.0))
    rows.extend(("spacing", k + 1, profile.a_vec[k], 0.0) for k in range(p.n))
    config = {"beta": p.beta, "gamma": p.gamma, "n": p.n, "lambda": lam,
              "ensemble": args.ensemble, "seed": None}
    emit("minimize", rows, args, config)
    return 0


def cmd_sample(args) -> int:
    p = _params(args)
    circular = args.ensemble == "ring"
    constrained = args.constrained == "true"
    if constrained:
        lam = 0.0
        if args.lam not in (None, 0.0):
            raise ValueError("--lambda only applies to --constrained false runs")
    else:
        lam = args.lam if args.lam is not None else lambda_unbiased(p)
    config = SamplerConfig(
        params=p,
        circular=circular,
        constrained=constrained,
        lam=lam,
        sweeps=args.sweeps,
        burnin_sweeps=args.burnin,
        thin=args.thin,
        step_size=args.step,
        seed=args.seed,
        chains=args.chains,
    )
    max_lag = min(args.lags, p.n // 2)
    result = run(config, max_lag=max_lag)
    rows: List[Row] = [
        ("acceptance_rate", 0, result.acceptance_rate, 0.0),
        ("ess", 0, result.ess_estimate, 0.0),
    ]
    rows.extend(
        ("lag_cov", est.lag, est.value, est.se) for est in result.lag_cov
    )
    corr = correlation_estimates(
        result.samples, max_lag, circular=circular, n_chains=args.chains
    )
    rows.extend(("lag_corr", est.lag, est.value, est.se) for est in corr)
    rows.extend(
        ("mean_spacing", k + 1, result.mean_spacing[k], result.mean_spacing_se[k])
        for k in range(p.n)
    )
    rows.extend(
        ("chain_acceptance", st.chain_id, st.acceptance_rate, 0.0)
        for st in result.chain_stats
    )
    if result.flags:
        print("diagnostic flags: " + "; ".join(result.flags), file=sys.stderr)
    conf_echo = {
        "beta": p.beta, "gamma": p.gamma, "n": p.n, "lambda": lam,
        "ensemble": args.ensemble, "constrained": constrained,
        "sweeps": args.sweeps, "burnin": args.burnin, "thin": args.thin,
        "chains": args.chains, "step": args.step, "lags": max_lag,
        "seed": args.seed, "flags": sorted(result.flags),
    }
    emit("sample", rows, args, conf_echo)
    return 0


def cmd_verify(args) -> int:
    results = verification.run_suite(args.suite, report=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed ({args.suite} suite)")
    if args.out is not None:
        rows: List[Row] = [
            (res.key, 0, 1.0 if res.passed else 0.0, 0.0) for res in results
        ]
        emit("verify", rows, args, {"suite": args.suite, "seed": None})
    return 0 if passed == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulomb-chain",
        description="Spacing statistics of the 1-d Coulomb chain: exact "
        "formulas, Newton minimization, and Metropolis sampling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("theory", help="closed-form predictions for (beta, gamma, n)")
    _add_common(s, "beta", "gamma", "n", "lambda", "lags")
    s.set_defaults(fn=cmd_theory)

    s = subs.add_parser("invert", help="inverse row of an explicit ring matrix")
    s.add_argument("--c", type=float, default=None, help="diagonal entry")
    s.add_argument("--b", type=float, default=None, help="off-diagonal band entry")
    _add_common(s, "n")
    s.set_defaults(fn=cmd_invert)

    s = subs.add_parser("minimize", help="Newton minimization of the tilted energy")
    _add_common(s, "beta", "gamma", "n", "lambda", "ensemble")
    s.set_defaults(fn=cmd_minimize)

    s = subs.add_parser("sample", help="Metropolis Monte Carlo run")
    _add_common(s, "beta", "gamma", "n", "lambda", "seed", "sweeps", "burnin",
                "thin", "chains", "step", "ensemble", "constrained", "lags")
    s.set_defaults(fn=cmd_sample)

    s = subs.add_parser("verify", help="run the acceptance suite")
    s.add_argument("--suite", choices=tuple(verification.SUITES), default=None,
                   help="fast: exact algebra + quick MCMC; full: everything")
    _add_common(s)
    s.set_defaults(fn=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(args)
        if args.command == "invert":
            if args.c is None or args.b is None:
                raise ValueError("invert requires --c and --b (flags or config file)")
        return args.fn(args)
    except (ValueError, KeyError, OSError, NewtonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
