"""Command-line front door.

Exit codes: 0 success, 1 usage or input error, 2 refused because an
exhaustive search would exceed its cap, 3 a campaign detected a
guarantee violation.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import core, data_io, equilibria, experiments, solvers


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        params[key] = _parse_value(value)
    return params


def _resolve_instance(args) -> core.Instance:
    if bool(args.instance) == bool(args.family):
        raise UsageError("exactly one of --instance or --family is required")
    if args.instance:
        return core.load_instance(args.instance)
    params = _parse_params(args.param)
    if args.alpha is not None:
        params.setdefault("alpha", args.alpha)
    if args.family == "random":
        alphabet = (0, 1, params.pop("alpha")) if "alpha" in params else (0, 1)
        dist = params.pop("dist", ["uniform", 0.1, 1.0])
        return experiments.gen_random_instance(
            seed=args.seed if args.seed is not None else 0,
            n=int(params.pop("n", 4)),
            m=int(params.pop("m", 1)),
            alphabet=tuple(params.pop("alphabet", alphabet)),
            skill_distribution=tuple(dist),
            budget=float(params.pop("budget", 1.0)),
            time_horizon=float(params.pop("time_horizon", 1.0)),
        )
    return experiments.gen_paper_instance(args.family, **params)


def _emit(text: str, args) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, args) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", args)


def build_parser() -> _Parser:
    parser = _Parser(prog="revgame", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--instance", help="instance JSON file")
    source.add_argument("--family", help="generator family name, or 'random'")
    source.add_argument("--param", action="append", metavar="KEY=VALUE",
                        help="generator parameter, repeatable")
    source.add_argument("--seed", type=int, default=None)
    source.add_argument("--alpha", type=float, default=None,
                        help="excellent review weight for generators")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--cap", type=int, default=core.DEFAULT_CAP,
                        help="exhaustive search node cap")

    p = sub.add_parser("solve-quality", parents=[source, common],
                       help="greedy quality optimum and its closed-form bound")
    p.add_argument("--no-time-limit", action="store_true",
                   help="ignore the per-agent time horizon")

    sub.add_parser("solve-coverage", parents=[source, common],
                   help="exact coverage optimum")

    p = sub.add_parser("equilibrate", parents=[source, common],
                       help="best-response dynamics from the empty profile")
    p.add_argument("--schedule", choices=("round_robin", "random"),
                   default="round_robin")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv emits the move trace only")

    sub.add_parser("enumerate", parents=[source, common],
                   help="all pure Nash equilibria")

    sub.add_parser("fixpoint", parents=[source, common],
                   help="constructive single-proposal equilibrium")

    p = sub.add_parser("poa", parents=[source, common],
                       help="optimum versus worst equilibrium")
    p.add_argument("--objective", choices=("quality", "coverage"),
                   required=True)
    p.add_argument("--k", type=float, default=1.0,
                   help="budget augmentation factor for the mechanism")

    p = sub.add_parser("campaign", parents=[common],
                       help="run a JSON-configured validation campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("ingest", parents=[common],
                       help="parse and normalize a review CSV")
    p.add_argument("--data", required=True)

    p = sub.add_parser("payouts", parents=[common],
                       help="proportional payouts for a review CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--alpha", type=float, default=3)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("report", parents=[common],
                       help="render a campaign report as a table or plot")
    p.add_argument("--report", required=True, dest="report_path")
    p.add_argument("--format", choices=("csv", "svg"), required=True)

    return parser


def _cmd_solve_quality(args) -> int:
    instance = _resolve_instance(args)
    result = solvers.greedy_quality_opt(
        instance, enforce_time_horizon=not args.no_time_limit)
    doc = result.to_dict()
    if instance.levels == 3:
        doc["upper_bound"] = solvers.opt_upper_bound(instance)
    _emit_json(doc, args)
    return 0


def _cmd_solve_coverage(args) -> int:
    instance = _resolve_instance(args)
    _emit_json(solvers.coverage_opt(instance, cap=args.cap).to_dict(), args)
    return 0


def _cmd_equilibrate(args) -> int:
    instance = _resolve_instance(args)
    report, trace = equilibria.best_response_dynamics(
        instance, core.zero_profile(instance),
        schedule=args.schedule, seed=args.seed)
    if args.format == "csv":
        _emit(equilibria.trace_to_csv(trace), args)
    else:
        _emit_json({
            "report": report.to_dict(),
            "trace": [{
                "iteration": s.iteration,
                "agent": s.agent,
                "move": list(s.new_row),
                "delta_u": s.utility_gain,
                "potential": s.potential_value,
            } for s in trace],
        }, args)
    return 0


def _cmd_enumerate(args) -> int:
    instance = _resolve_instance(args)
    reports = equilibria.enumerate_pne(instance, cap=args.cap)
    _emit_json([r.to_dict() for r in reports], args)
    return 0


def _cmd_fixpoint(args) -> int:
    instance = _resolve_instance(args)
    state, profile = equilibria.fixpoint_construct(instance)
    report = equilibria.verify_pne(instance, profile)
    _emit_json({
        "excellent": sorted(state.excellent),
        "good": sorted(state.good),
        "idle": sorted(state.idle),
        "profile": core.profile_to_lists(profile),
        "is_pne": report.is_pne,
        "qual": report.qual,
    }, args)
    return 0


def _cmd_poa(args) -> int:
    instance = _resolve_instance(args)
    exp = experiments.measure_poa(instance, args.objective, k=args.k,
                                  cap=args.cap)
    _emit_json(exp.to_dict(), args)
    return 0


def _cmd_campaign(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    config.setdefault("cap", args.cap)
    report = experiments.run_campaign(config, jobs=args.jobs)
    _emit(experiments.report_to_json(report), args)
    return 3 if report["violations"] else 0


def _cmd_ingest(args) -> int:
    records = data_io.ingest_reviews(args.data)
    _emit(data_io.records_to_csv(records), args)
    return 0


def _cmd_payouts(args) -> int:
    records = data_io.ingest_reviews(args.data)
    alpha = args.alpha if args.alpha != int(args.alpha) else int(args.alpha)
    summary = data_io.compute_payouts(records, args.budget, alpha=alpha)
    if args.format == "csv":
        _emit(data_io.payouts_to_csv(summary), args)
    else:
        _emit_json(summary.to_dict(), args)
    return 0


def _cmd_report(args) -> int:
    with open(args.report_path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    if args.format == "csv":
        _emit(experiments.campaign_csv(report), args)
    else:
        _emit(experiments.ratio_histogram_svg(report), args)
    return 0


_COMMANDS = {
    "solve-quality": _cmd_solve_quality,
    "solve-coverage": _cmd_solve_coverage,
    "equilibrate": _cmd_equilibrate,
    "enumerate": _cmd_enumerate,
    "fixpoint": _cmd_fixpoint,
    "poa": _cmd_poa,
    "campaign": _cmd_campaign,
    "ingest": _cmd_ingest,
    "payouts": _cmd_payouts,
    "report": _cmd_report,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except core.CapExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
