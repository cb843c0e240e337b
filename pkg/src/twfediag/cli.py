"""Command-line interface: panel ingestion, estimation, diagnostics,
robustness sweeps, and synthetic-panel generation.

Data goes to files or standard output; diagnostics go to standard error.
Exit codes: 0 success, 1 data/validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import TwfeDiagError
from .diagnostics import (
    DEFAULT_BANDWIDTH,
    DEFAULT_BINS,
    DEFAULT_GRID_POINTS,
    homogeneity_test,
    residual_scatter,
    weight_grid,
    weight_report,
)
from .panel import (
    AdoptionSchedule,
    PanelDataset,
    apply_adoption_schedule,
    load_panel_csv,
    load_schedule_csv,
    schedule_from_data,
    validate,
    write_panel_csv,
)
from .robustness import leave_one_unit_out, sweep_end_year, sweep_post_horizon
from .synth import generate_panel, spec_from_json
from .twfe import fit_twfe

SWEEP_HEADER = [
    "label", "beta", "ci_low", "ci_high",
    "share_negative_treated", "n_obs", "n_treated",
]


def _add_data_args(p: argparse.ArgumentParser, need_outcome: bool = True):
    p.add_argument("--data", required=True, help="panel CSV (long format, header row)")
    p.add_argument("--unit", required=True, help="unit-identifier column")
    p.add_argument("--time", required=True, help="integer period column")
    p.add_argument("--outcome", required=need_outcome, help="outcome column")
    p.add_argument("--treatment", help="0/1 treatment column (omit when using --adoption)")
    p.add_argument("--adoption", help="adoption-schedule CSV (unit,adoption_period)")
    p.add_argument(
        "--treat-from",
        choices=["adoption-year", "next-year"],
        default="adoption-year",
        help="whether the adoption period itself counts as treated",
    )


def _add_inference_arg(p: argparse.ArgumentParser):
    p.add_argument(
        "--cluster",
        choices=["unit", "none"],
        default="unit",
        help="cluster standard errors by unit, or use classical errors",
    )


def _inference(args) -> str:
    return "cluster_by_unit" if args.cluster == "unit" else "classical"


def _digest(*paths: Optional[str]) -> str:
    h = hashlib.sha256()
    for path in paths:
        if path:
            h.update(Path(path).read_bytes())
    return h.hexdigest()


def _load(args) -> tuple[PanelDataset, Optional[AdoptionSchedule], str]:
    if args.treatment is None and args.adoption is None:
        raise TwfeDiagError("provide --treatment and/or --adoption")
    dataset = load_panel_csv(
        args.data, args.unit, args.time, args.outcome, args.treatment
    )
    schedule = None
    if args.adoption:
        schedule = load_schedule_csv(args.adoption)
        dataset = apply_adoption_schedule(
            dataset, schedule, include_adoption_period=args.treat_from == "adoption-year"
        )
    return dataset, schedule, _digest(args.data, args.adoption)


def _write_rows(path: str, header: list[str], rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _sweep_csv(path: str, sweep) -> None:
    _write_rows(
        path,
        SWEEP_HEADER,
        (
            [p.label, repr(p.beta), repr(p.ci_low), repr(p.ci_high),
             repr(p.share_negative_treated), p.n_obs, p.n_treated]
            for p in sweep.points
        ),
    )
    for label, reason in sweep.skipped:
        print(f"skipped {label}: {reason}", file=sys.stderr)


def _coef_dict(row) -> dict:
    return {
        "estimate": row.estimate,
        "se": row.se,
        "t_stat": row.t_stat,
        "p_value": row.p_value,
    }


def cmd_estimate(args) -> int:
    dataset, _, digest = _load(args)
    inference = _inference(args)
    fit = fit_twfe(dataset, inference)
    report = weight_report(fit)
    homog = homogeneity_test(fit, inference="classical")
    doc = {
        "config": {
            "data": args.data,
            "unit": args.unit,
            "time": args.time,
            "outcome": args.outcome,
            "treatment": args.treatment,
            "adoption": args.adoption,
            "treat_from": args.treat_from,
            "cluster": args.cluster,
        },
        "fit": {
            "beta": fit.beta,
            "se": fit.se,
            "p_value": fit.p_value,
            "dof": fit.dof,
            "n_obs": fit.n_obs,
            "n_treated": fit.n_treated,
            "inference": fit.inference,
        },
        "weights": {
            "n_treated": report.n_treated,
            "n_treated_negative": report.n_treated_negative,
            "share_treated_negative": report.share_treated_negative,
            "n_control_positive": report.n_control_positive,
        },
        "homogeneity": {
            "resid_treatment": _coef_dict(homog.b_resid_treatment),
            "treat_group": _coef_dict(homog.b_treat_group),
            "interaction": _coef_dict(homog.b_interaction),
            "n_obs": homog.n_obs,
            "inference": homog.inference,
        },
        "version": __version__,
        "input_digest": digest,
    }
    if not args.no_timestamp:
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(
            f"beta={fit.beta:.2f} se={fit.se:.2f} p={fit.p_value:.2f} "
            f"n={fit.n_obs} treated={fit.n_treated} "
            f"negative_treated={report.n_treated_negative}"
        )
    else:
        sys.stdout.write(text)
    return 0


def cmd_weights(args) -> int:
    dataset, schedule, _ = _load(args)
    fit = fit_twfe(dataset, _inference(args))
    report = weight_report(fit, bins=args.bins)
    if args.out_hist:
        _write_rows(
            args.out_hist,
            ["bin_low", "bin_high", "treated_count", "control_count"],
            ([repr(lo), repr(hi), t, c] for lo, hi, t, c in report.histogram),
        )
    if args.out_grid:
        if schedule is None:
            schedule = schedule_from_data(dataset)
        grid = weight_grid(fit, schedule)
        _write_rows(
            args.out_grid,
            ["unit", "period", "status", "weight"],
            (
                [u, p, grid.cells[(u, p)][0],
                 "" if grid.cells[(u, p)][0] == "missing" else repr(grid.cells[(u, p)][1])]
                for u in grid.units
                for p in grid.periods
            ),
        )
    print(
        f"treated={report.n_treated} negative_treated={report.n_treated_negative} "
        f"share={report.share_treated_negative:.2f}",
        file=sys.stderr,
    )
    return 0


def cmd_scatter(args) -> int:
    dataset, _, _ = _load(args)
    fit = fit_twfe(dataset, _inference(args))
    scatter = residual_scatter(fit, bandwidth=args.bandwidth, grid_points=args.grid_points)
    prefix = args.out_prefix
    _write_rows(
        f"{prefix}_points.csv",
        ["resid_treatment", "resid_outcome", "treated"],
        ([repr(x), repr(y), t] for x, y, t in scatter.points),
    )
    _write_rows(
        f"{prefix}_lines.csv",
        ["group", "slope", "intercept"],
        [
            ["control", repr(scatter.control.slope), repr(scatter.control.intercept)],
            ["treated", repr(scatter.treated.slope), repr(scatter.treated.intercept)],
        ],
    )
    _write_rows(
        f"{prefix}_smooth.csv",
        ["group", "x", "y"],
        (
            [group, repr(x), repr(y)]
            for group, curve in (("control", scatter.control), ("treated", scatter.treated))
            for x, y in curve.smoothed
        ),
    )
    return 0


def cmd_sweep_endyear(args) -> int:
    dataset, _, _ = _load(args)
    first = args.first_end if args.first_end is not None else dataset.periods[0]
    last = args.last_end if args.last_end is not None else dataset.periods[-1]
    sweep = sweep_end_year(dataset, first, last, _inference(args), level=args.level)
    _sweep_csv(args.out, sweep)
    return 0


def cmd_sweep_horizon(args) -> int:
    dataset, schedule, _ = _load(args)
    if schedule is None:
        schedule = schedule_from_data(dataset)
    horizons = [int(h) for h in args.horizons.split(",") if h.strip() != ""]
    sweep = sweep_post_horizon(dataset, schedule, horizons, _inference(args), level=args.level)
    _sweep_csv(args.out, sweep)
    return 0


def cmd_jackknife(args) -> int:
    dataset, _, _ = _load(args)
    sweep = leave_one_unit_out(dataset, _inference(args), level=args.level)
    _sweep_csv(args.out, sweep)
    return 0


def cmd_simulate(args) -> int:
    spec = spec_from_json(args.spec, seed=args.seed)
    dataset = generate_panel(spec)
    write_panel_csv(dataset, args.out)
    print(f"wrote {len(dataset)} observations to {args.out}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    dataset, _, _ = _load(args)
    report = validate(dataset)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if report.is_valid else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twfediag",
        description="Two-way fixed-effects estimation and diagnostics for "
                    "staggered-adoption panels",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit, weight summary, homogeneity test -> JSON")
    _add_data_args(p)
    _add_inference_arg(p)
    p.add_argument("--out", help="report JSON path (default: standard output)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("weights", help="weight histogram and unit-by-period grid CSVs")
    _add_data_args(p)
    _add_inference_arg(p)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--out-hist", help="histogram CSV path")
    p.add_argument("--out-grid", help="grid CSV path")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("scatter", help="residual scatter, fit lines, smoothed curves CSVs")
    _add_data_args(p)
    _add_inference_arg(p)
    p.add_argument("--bandwidth", type=float, default=DEFAULT_BANDWIDTH)
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>_points.csv, <prefix>_lines.csv, <prefix>_smooth.csv")
    p.set_defaults(func=cmd_scatter)

    for name, func in (("sweep-endyear", cmd_sweep_endyear),
                       ("sweep-horizon", cmd_sweep_horizon),
                       ("jackknife", cmd_jackknife)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} robustness sweep CSV")
        _add_data_args(p)
        _add_inference_arg(p)
        p.add_argument("--level", type=float, default=0.95, help="confidence level")
        p.add_argument("--out", required=True, help="sweep CSV path")
        if name == "sweep-endyear":
            p.add_argument("--first-end", type=int)
            p.add_argument("--last-end", type=int)
        if name == "sweep-horizon":
            p.add_argument("--horizons", required=True,
                           help="comma-separated non-negative horizons, e.g. 0,1,2,5")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="generate a synthetic panel CSV from a JSON spec")
    p.add_argument("--spec", required=True, help="generator spec JSON")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out", required=True, help="panel CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="structural validation report JSON")
    _add_data_args(p)
    p.add_argument("--out", help="report JSON path (default: standard output)")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TwfeDiagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
