"""Command-line interface.

Subcommands: ``simulate`` (write a path CSV + provenance sidecar),
``estimate`` (MLE of theta from a path CSV), ``norms`` (operator norm /
distance tables), and ``experiment`` (Monte Carlo reports).

Exit codes: 0 success; 2 invalid flags or configuration; 3 grid mismatch or
unreadable input; 4 estimator denominator vanished; 5 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, GridMismatch, ZeroDenominator
from .experiments import (
    lil_coverage,
    run_band_coverage,
    run_emse,
    run_predictor_bound,
    standardized_errors,
)
from .functional import k0, operator_distance_b, operator_distance_h, rho_norm_b, rho_norm_h
from .mle import theta_endpoint_from_values, theta_ito_from_values
from .ou_process import OuParams, TimeGrid, sample_euler, sample_exact
from .reporting import (
    SCHEMA_VERSION,
    estimated_steps,
    fmt,
    read_path_csv,
    report_csv_text,
    resolve_cli_config,
    write_path_csv,
    write_report,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_INPUT = 3
EXIT_ZERO_DENOMINATOR = 4
EXIT_UNWRITABLE = 5

# beyond this many simulation steps the experiment command requires --yes
_COST_GUARD_STEPS = 5 * 10**9


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oufar", description=__doc__)
    parser.add_argument("--version", action="version", version=f"oufar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate one path and write a CSV")
    p_sim.add_argument("--theta", type=float, required=True)
    p_sim.add_argument("--mu", type=float, default=0.0)
    p_sim.add_argument("--sigma", type=float, default=1.0)
    p_sim.add_argument("--t-end", type=float, required=True)
    p_sim.add_argument("--dt", type=float, required=True)
    p_sim.add_argument("--scheme", choices=("euler", "exact"), default="euler")
    init = p_sim.add_mutually_exclusive_group()
    init.add_argument("--x0", type=float, default=0.0)
    init.add_argument(
        "--stationary",
        action="store_true",
        help="draw the initial state from the stationary law (exact scheme only)",
    )
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", required=True)

    p_est = sub.add_parser("estimate", help="estimate theta from a path CSV")
    p_est.add_argument("--input", required=True)
    p_est.add_argument("--form", choices=("ito", "endpoint", "both"), default="ito")
    p_est.add_argument("--out", help="write JSON here instead of stdout")

    p_norms = sub.add_parser("norms", help="operator norms, contraction power, distances")
    p_norms.add_argument("--theta", type=float, required=True)
    p_norms.add_argument("--h", type=float, required=True)
    p_norms.add_argument("--k-max", type=int, default=10)
    p_norms.add_argument("--theta-hat", type=float)
    p_norms.add_argument("--format", choices=("json", "csv"), default="json")
    p_norms.add_argument("--out", help="write here instead of stdout")

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    p_exp.add_argument(
        "kind", choices=("band-coverage", "emse", "predictor-bound", "normality")
    )
    src = p_exp.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON config file (keys mirror ExperimentConfig)")
    src.add_argument("--profile", choices=("desk", "full"))
    p_exp.add_argument("--out", help="output directory (overrides the config out_dir)")
    p_exp.add_argument("--threads", type=int, default=1)
    p_exp.add_argument("--master-seed", type=int, help="override the config master seed")
    p_exp.add_argument("--replicates", type=int, help="override the replicate count")
    p_exp.add_argument("--yes", action="store_true", help="confirm an expensive run")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _cmd_simulate(args) -> int:
    if args.stationary and args.scheme != "exact":
        print("error: --stationary requires --scheme exact", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = OuParams(theta=args.theta, mu=args.mu, sigma=args.sigma)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        grid = TimeGrid(t_end=args.t_end, dt=args.dt)
    except GridMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    rng = np.random.default_rng(args.seed)
    if args.scheme == "euler":
        path = sample_euler(params, grid, rng, x0=args.x0)
        init_doc = {"x0": args.x0}
    elif args.stationary:
        path = sample_exact(params, grid, rng, stationary=True)
        init_doc = {"init": "stationary"}
    else:
        path = sample_exact(params, grid, rng, x0=args.x0)
        init_doc = {"x0": args.x0}
    try:
        write_path_csv(path, args.out, seed=args.seed, extra=init_doc)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return EXIT_OK


def _estimate_doc(values, dt, form: str) -> dict:
    est = (theta_ito_from_values if form == "ito" else theta_endpoint_from_values)(values, dt)
    return {
        "theta_hat": est.theta_hat,
        "form": est.form,
        "numerator": est.numerator,
        "denominator": est.denominator,
        "T": est.t_end,
        "dt": est.dt,
        "nonpositive": est.nonpositive,
    }


def _cmd_estimate(args) -> int:
    try:
        values, dt = read_path_csv(args.input)
    except (OSError, GridMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        if args.form == "both":
            ito = _estimate_doc(values, dt, "ito")
            endpoint = _estimate_doc(values, dt, "endpoint")
            doc = {
                "ito": ito,
                "endpoint": endpoint,
                "difference": ito["theta_hat"] - endpoint["theta_hat"],
            }
        else:
            doc = _estimate_doc(values, dt, args.form)
    except ZeroDenominator as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_DENOMINATOR
    doc["schema_version"] = SCHEMA_VERSION
    try:
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return EXIT_OK


def _cmd_norms(args) -> int:
    if args.theta <= 0.0 or args.h <= 0.0 or args.k_max < 1:
        print("error: need theta > 0, h > 0, k-max >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.theta_hat is not None and args.theta_hat <= 0.0:
        print("error: theta-hat must be positive", file=sys.stderr)
        return EXIT_USAGE
    rows = [
        {
            "k": k,
            "rho_norm_H": rho_norm_h(args.theta, k, args.h),
            "rho_norm_B": rho_norm_b(args.theta, k, args.h),
        }
        for k in range(1, args.k_max + 1)
    ]
    doc = {
        "theta": args.theta,
        "h": args.h,
        "k0": k0(args.theta),
        "norms": rows,
        "schema_version": SCHEMA_VERSION,
    }
    if args.theta_hat is not None:
        doc["theta_hat"] = args.theta_hat
        doc["operator_distance_H"] = operator_distance_h(args.theta, args.theta_hat, args.h)
        doc["operator_distance_B"] = operator_distance_b(args.theta, args.theta_hat, args.h)
    if args.format == "json":
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        lines = ["theta,h,k,k0,rho_norm_H,rho_norm_B"]
        lines.extend(
            ",".join(
                (fmt(args.theta), fmt(args.h), str(row["k"]), str(doc["k0"]),
                 fmt(row["rho_norm_H"]), fmt(row["rho_norm_B"]))
            )
            for row in rows
        )
        text = "\n".join(lines) + "\n"
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return EXIT_OK


_RUNNERS = {
    "band-coverage": run_band_coverage,
    "emse": run_emse,
    "predictor-bound": run_predictor_bound,
    "normality": standardized_errors,
}


def _cmd_experiment(args) -> int:
    overrides = {"master_seed": args.master_seed, "replicates": args.replicates}
    try:
        if args.config is not None:
            try:
                doc = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
                return EXIT_USAGE
        else:
            doc = {"profile": args.profile}
        config, out_dir, formats, profile = resolve_cli_config(args.kind, doc, overrides)
    except (ValueError, DomainError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = args.out or out_dir
    if out_dir is None:
        print("error: no output directory (set --out or out_dir in the config)", file=sys.stderr)
        return EXIT_USAGE

    steps = estimated_steps(config)
    if profile == "full" or steps > _COST_GUARD_STEPS:
        print(
            f"planned work: {steps:.3e} simulation steps "
            f"({len(config.thetas)} thetas x {len(config.horizons)} horizons "
            f"x {config.replicates} replicates)",
            file=sys.stderr,
        )
        if not args.yes:
            print("this is expensive; re-run with --yes to confirm", file=sys.stderr)
            return EXIT_USAGE

    report = _RUNNERS[args.kind](config, n_workers=max(args.threads, 1))
    try:
        paths = write_report(report, out_dir, formats=formats)
        if args.kind == "normality":
            lil = lil_coverage(config, n_workers=max(args.threads, 1))
            write_report(lil, out_dir, basename="lil_coverage", formats=formats)
            if "csv" in formats:
                # the z CSV carries its spec name alongside normality.csv
                (Path(out_dir) / "standardized_errors.csv").write_text(report_csv_text(report))
    except OSError as exc:
        print(f"error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    written = paths.get("json") or paths.get("csv")
    print(
        f"wrote {written} ({report.failures_total} failed replicates, "
        f"{report.wall_time_s:.2f}s)",
        file=sys.stderr,
    )
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "estimate":
        return _cmd_estimate(args)
    if args.command == "norms":
        return _cmd_norms(args)
    return _cmd_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
