"""Command line interface.

Subcommands:

* breakdown -- Fisher information decomposition at one theta
* bounds    -- conditional and unconditional MSE lower bounds at one theta
* curves    -- both of the above over a theta grid, one row per theta
* simulate  -- seeded Monte Carlo check of the analytic branch quantities
* verify    -- the self-verification battery (exit code 1 on any failure)
* tables    -- reference tables for the canonical one-threshold design

Output goes to stdout or --out as a fixed-width text table (4 decimals) or
CSV (full precision, shortest round-trip floats). Commands that report on a
single design accept --svg PATH to render a figure next to the delimited
output. Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from .bounds import MseBoundReport, mse_bound_report
from .design import (
    CoinFlipRule,
    TwoStageDesign,
    coinflip_design,
    gsd_design,
    parse_design_config,
)
from .errors import SeqinfoError
from .information import InformationBreakdown, information_breakdown
from .montecarlo import SimConfig, SimResult, simulate

__all__ = ["main"]

_DEFAULT_SEED = 12345
_ENV_SEED = "SEQINFO_SEED"


def _fmt(value: object, csv: bool) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value) if csv else f"{value:.4f}"
    return str(value)


def _render(headers: Sequence[str], rows: Sequence[Sequence[object]], csv: bool) -> str:
    cells = [[_fmt(v, csv) for v in row] for row in rows]
    if csv:
        lines = [",".join(headers)] + [",".join(row) for row in cells]
        return "\n".join(lines) + "\n"
    widths = [
        max(len(h), *(len(row[i]) for row in cells)) if cells else len(h)
        for i, h in enumerate(headers)
    ]
    header = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    rule = "-" * len(header)
    body = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join([header, rule, *body]) + "\n"


def _describe_design(design: TwoStageDesign) -> str:
    if isinstance(design.rule, CoinFlipRule):
        rule = (
            f"coin flip: stop with p={design.rule.p_stop:g}, "
            f"else continue with n2={design.rule.n2}"
        )
    else:
        parts = []
        for cell in design.rule.cells:
            action = "stop" if cell.stop else f"continue n2={cell.n2}"
            parts.append(f"[{cell.z_region.lo:g}, {cell.z_region.hi:g}) -> {action}")
        rule = "; ".join(parts)
    return f"design: n1={design.n1}, sigma={design.sigma:g}, z1 cells: {rule}"


def _add_design_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("design")
    group.add_argument("--n1", type=int, default=None, help="stage-1 sample size (default 1)")
    group.add_argument(
        "--n2", type=int, default=None, help="second-stage sample size (default 1)"
    )
    group.add_argument(
        "--sigma", type=float, default=None, help="known standard deviation (default 1.0)"
    )
    rule = parser.add_argument_group("interim rule (choose at most one)")
    rule.add_argument(
        "--c1", type=float, default=None, help="stop iff z1 >= c1 (default rule, c1=1.96)"
    )
    rule.add_argument("--design", metavar="FILE", default=None, help="design config file")
    rule.add_argument(
        "--split",
        type=float,
        default=None,
        metavar="P",
        help="coin-flip rule: stop with probability P, ignoring the data",
    )


def _add_output_options(parser: argparse.ArgumentParser, svg: bool = True) -> None:
    group = parser.add_argument_group("output")
    group.add_argument(
        "--format",
        choices=("text-table", "csv"),
        default="text-table",
        help="delimited output style (default text-table)",
    )
    group.add_argument("--out", metavar="FILE", default=None, help="write output to FILE")
    if svg:
        group.add_argument(
            "--svg", metavar="FILE", default=None, help="also render a figure to FILE"
        )


def _design_from_args(args: argparse.Namespace) -> TwoStageDesign:
    chosen = [
        name
        for name, value in (("--c1", args.c1), ("--design", args.design), ("--split", args.split))
        if value is not None
    ]
    if len(chosen) > 1:
        raise ValueError(f"{' and '.join(chosen)} are mutually exclusive")
    if args.design is not None:
        for name, value in (("--n1", args.n1), ("--n2", args.n2), ("--sigma", args.sigma)):
            if value is not None:
                raise ValueError(f"{name} conflicts with --design; set it in the file")
        with open(args.design, "r", encoding="utf-8") as fh:
            return parse_design_config(fh.read())
    n1 = args.n1 if args.n1 is not None else 1
    n2 = args.n2 if args.n2 is not None else 1
    sigma = args.sigma if args.sigma is not None else 1.0
    if args.split is not None:
        return coinflip_design(n1=n1, n2=n2, sigma=sigma, p_stop=args.split)
    c1 = args.c1 if args.c1 is not None else 1.96
    return gsd_design(n1=n1, n2=n2, sigma=sigma, c1=c1)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _kind(stop: bool) -> str:
    return "stop" if stop else "continue"


def _breakdown_rows(b: InformationBreakdown) -> list[list[object]]:
    return [
        [
            b.theta,
            b.total_information,
            b.design_information,
            b.conditional_total,
            row.d,
            _kind(row.stop),
            row.n_total,
            row.probability,
            row.probability_dtheta,
            row.stage1_information,
            row.stage2_information,
            row.total_information,
            row.degenerate,
        ]
        for row in b.per_decision
    ]


_BREAKDOWN_HEADERS = [
    "theta",
    "I_total",
    "I_design",
    "I_cond_D",
    "d",
    "kind",
    "n_total",
    "P_d",
    "dP_d",
    "I1_d",
    "I2_d",
    "IT_d",
    "degenerate",
]


def _cmd_breakdown(args: argparse.Namespace) -> int:
    design = _design_from_args(args)
    b = information_breakdown(design, args.theta)
    csv = args.format == "csv"
    text = _render(_BREAKDOWN_HEADERS, _breakdown_rows(b), csv)
    if not csv:
        summary = [
            _describe_design(design),
            f"theta = {b.theta:.4f}",
            "",
            text.rstrip("\n"),
            "",
            f"I_design (decision)        = {b.design_information:.4f}",
            f"I_stage1 given decision    = {b.conditional_stage1:.4f}",
            f"I_pooled given decision    = {b.conditional_total:.4f}",
            f"I_total                    = {b.total_information:.4f}",
            f"dropped decisions          = {list(b.dropped) if b.dropped else 'none'}",
        ]
        text = "\n".join(summary) + "\n"
    _emit(text, args.out)
    if args.svg:
        from .figures import save_breakdown_figure

        save_breakdown_figure(args.svg, b)
    return 0


_BOUNDS_HEADERS = [
    "theta",
    "uncond_bound",
    "d",
    "kind",
    "n_total",
    "P_d",
    "bias_d",
    "bias_slope_d",
    "I_d",
    "bound_d",
    "degenerate",
]


def _bounds_rows(report: MseBoundReport) -> list[list[object]]:
    return [
        [
            report.theta,
            report.unconditional_bound,
            row.d,
            _kind(row.stop),
            row.n_total,
            row.probability,
            row.bias,
            row.bias_dtheta,
            row.information,
            row.bound,
            row.degenerate,
        ]
        for row in report.per_decision
    ]


def _cmd_bounds(args: argparse.Namespace) -> int:
    design = _design_from_args(args)
    report = mse_bound_report(design, args.theta)
    csv = args.format == "csv"
    text = _render(_BOUNDS_HEADERS, _bounds_rows(report), csv)
    if not csv:
        summary = [
            _describe_design(design),
            f"theta = {report.theta:.4f}",
            "",
            text.rstrip("\n"),
            "",
            f"unconditional MSE bound = {report.unconditional_bound:.4f}",
            f"dropped decisions       = {list(report.dropped) if report.dropped else 'none'}",
        ]
        text = "\n".join(summary) + "\n"
    _emit(text, args.out)
    if args.svg:
        from .figures import save_bounds_figure

        save_bounds_figure(args.svg, report)
    return 0


def _theta_grid(args: argparse.Namespace) -> list[float]:
    if not (math.isfinite(args.theta_min) and math.isfinite(args.theta_max)):
        raise ValueError("theta bounds must be finite")
    if args.theta_step <= 0:
        raise ValueError(f"--theta-step must be positive, got {args.theta_step}")
    if args.theta_max < args.theta_min:
        raise ValueError("--theta-max must not be below --theta-min")
    count = int(math.floor((args.theta_max - args.theta_min) / args.theta_step + 1e-9)) + 1
    return [args.theta_min + i * args.theta_step for i in range(count)]


def _cmd_curves(args: argparse.Namespace) -> int:
    design = _design_from_args(args)
    thetas = _theta_grid(args)
    headers = ["theta", "I_total", "I_design", "I_cond_D"]
    for d in design.decision_indices():
        headers += [f"P_{d}", f"I1_{d}", f"I2_{d}", f"bias_{d}", f"bound_{d}"]
    headers.append("uncond_bound")
    rows: list[list[object]] = []
    for theta in thetas:
        b = information_breakdown(design, theta)
        report = mse_bound_report(design, theta)
        row: list[object] = [
            theta,
            b.total_information,
            b.design_information,
            b.conditional_total,
        ]
        for info_row, bound_row in zip(b.per_decision, report.per_decision):
            row += [
                info_row.probability,
                info_row.stage1_information,
                info_row.stage2_information,
                bound_row.bias,
                bound_row.bound,
            ]
        row.append(report.unconditional_bound)
        rows.append(row)
    text = _render(headers, rows, args.format == "csv")
    _emit(text, args.out)
    if args.svg:
        from .figures import save_curves_figure

        save_curves_figure(
            args.svg,
            thetas,
            [r[1] for r in rows],
            [r[2] for r in rows],
            [r[3] for r in rows],
            [r[-1] for r in rows],
        )
    return 0


_SIM_HEADERS = [
    "d",
    "kind",
    "n_total",
    "count",
    "P_hat",
    "P_se",
    "P_d",
    "bias_hat",
    "bias_se",
    "bias_d",
    "bias_flag",
    "mse_hat",
    "mse_se",
    "mse_bound_d",
    "mse_flag",
]


def _sim_rows(result: SimResult) -> list[list[object]]:
    return [
        [
            row.d,
            _kind(row.stop),
            row.n_total,
            row.count,
            row.probability_hat,
            row.probability_se,
            row.analytic_probability,
            row.bias_hat,
            row.bias_se,
            row.analytic_bias,
            row.bias_flag,
            row.mse_hat,
            row.mse_se,
            row.analytic_mse,
            row.mse_flag,
        ]
        for row in result.per_decision
    ]


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(_ENV_SEED)
    if raw is None:
        return _DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_SEED} must be an integer, got {raw!r}") from None


def _cmd_simulate(args: argparse.Namespace) -> int:
    design = _design_from_args(args)
    seed = _resolve_seed(args)
    config = SimConfig(
        design=design,
        theta=args.theta,
        reps=args.reps,
        seed=seed,
        bins=args.bins,
        dump=args.dump is not None,
    )
    result = simulate(config)
    csv = args.format == "csv"
    text = _render(_SIM_HEADERS, _sim_rows(result), csv)
    if not csv:
        summary = [
            _describe_design(design),
            f"theta = {args.theta:.4f}, reps = {args.reps}, seed = {seed}",
            "",
            text.rstrip("\n"),
            "",
            f"mean n: empirical = {result.mean_n_hat:.4f}, analytic = {result.analytic_mean_n:.4f}",
            f"flags raised = {'yes' if result.flagged else 'no'}",
        ]
        text = "\n".join(summary) + "\n"
    _emit(text, args.out)
    if args.dump is not None:
        assert result.dump is not None
        lines = ["rep,decision,z1,mle"]
        for rep, dec, z1, mle in zip(
            result.dump.rep, result.dump.decision, result.dump.z1, result.dump.mle
        ):
            lines.append(f"{int(rep)},{int(dec)},{float(z1)!r},{float(mle)!r}")
        _emit("\n".join(lines) + "\n", args.dump)
    if args.svg:
        from .figures import save_simulation_figure

        save_simulation_figure(args.svg, result)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .verify import run_checks

    results = run_checks(quick=args.quick, inject_fault=args.inject_fault)
    failed = 0
    for res in results:
        status = "ok  " if res.passed else "FAIL"
        sys.stdout.write(f"{status}  {res.name}: {res.detail}\n")
        failed += 0 if res.passed else 1
    sys.stdout.write(f"{len(results)} checks, {failed} failed\n")
    return 1 if failed else 0


def _cmd_tables(args: argparse.Namespace) -> int:
    thresholds = [0.0, 0.5, 1.0, 1.5, 1.96, 2.5]
    info_headers = [
        "c1",
        "P_stop",
        "I_design",
        "I1_stop",
        "I1_cont",
        "I_stage1_cond",
        "I_pooled_cond",
        "I_total",
    ]
    bound_headers = [
        "c1",
        "bias_stop",
        "bias_cont",
        "slope_stop",
        "slope_cont",
        "bound_stop",
        "bound_cont",
        "uncond_bound",
    ]
    info_rows: list[list[object]] = []
    bound_rows: list[list[object]] = []
    for c1 in thresholds:
        design = gsd_design(n1=1, n2=1, sigma=1.0, c1=c1)
        b = information_breakdown(design, 0.0)
        report = mse_bound_report(design, 0.0)
        stop_i, cont_i = b.per_decision
        stop_b, cont_b = report.per_decision
        info_rows.append(
            [
                c1,
                stop_i.probability,
                b.design_information,
                stop_i.stage1_information,
                cont_i.stage1_information,
                b.conditional_stage1,
                b.conditional_total,
                b.total_information,
            ]
        )
        bound_rows.append(
            [
                c1,
                stop_b.bias,
                cont_b.bias,
                stop_b.bias_dtheta,
                cont_b.bias_dtheta,
                stop_b.bound,
                cont_b.bound,
                report.unconditional_bound,
            ]
        )
    csv = args.format == "csv"
    info_table = _render(info_headers, info_rows, csv)
    bound_table = _render(bound_headers, bound_rows, csv)
    if csv:
        text = info_table + bound_table
    else:
        text = (
            "information decomposition at theta = 0 (n1 = n2 = 1, sigma = 1)\n\n"
            + info_table
            + "\nMLE conditional bias and MSE bounds at theta = 0\n\n"
            + bound_table
        )
    _emit(text, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqinfo",
        description=(
            "Fisher information, MSE lower bounds, and estimator densities "
            "for two-stage adaptive normal experiments"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_breakdown = sub.add_parser(
        "breakdown", help="information decomposition at one theta"
    )
    _add_design_options(p_breakdown)
    p_breakdown.add_argument("--theta", type=float, default=0.0)
    _add_output_options(p_breakdown)
    p_breakdown.set_defaults(func=_cmd_breakdown)

    p_bounds = sub.add_parser("bounds", help="MSE lower bounds at one theta")
    _add_design_options(p_bounds)
    p_bounds.add_argument("--theta", type=float, default=0.0)
    _add_output_options(p_bounds)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_curves = sub.add_parser("curves", help="information and bounds over a theta grid")
    _add_design_options(p_curves)
    p_curves.add_argument("--theta-min", type=float, default=-2.0)
    p_curves.add_argument("--theta-max", type=float, default=6.0)
    p_curves.add_argument("--theta-step", type=float, default=0.1)
    _add_output_options(p_curves)
    p_curves.set_defaults(func=_cmd_curves)

    p_sim = sub.add_parser("simulate", help="seeded Monte Carlo cross-check")
    _add_design_options(p_sim)
    p_sim.add_argument("--theta", type=float, default=0.0)
    p_sim.add_argument("--reps", type=int, default=10_000)
    p_sim.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"RNG seed (default: ${_ENV_SEED} or {_DEFAULT_SEED})",
    )
    p_sim.add_argument("--bins", type=int, default=40, help="histogram bins per decision")
    p_sim.add_argument(
        "--dump", metavar="FILE", default=None, help="write per-replication CSV to FILE"
    )
    _add_output_options(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_verify = sub.add_parser("verify", help="run the self-verification battery")
    p_verify.add_argument("--quick", action="store_true", help="smaller grids, same checks")
    p_verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p_verify.set_defaults(func=_cmd_verify)

    p_tables = sub.add_parser(
        "tables", help="reference tables for the canonical one-threshold design"
    )
    _add_output_options(p_tables, svg=False)
    p_tables.set_defaults(func=_cmd_tables)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SeqinfoError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 3
