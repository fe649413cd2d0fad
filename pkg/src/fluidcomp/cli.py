"""Command-line entry point: ``fluidcomp <subcommand> ...``.

Subcommands read and write the JSON/CSV documents used by the library:
scenarios, generator configs, experiment specs, plans and metrics rows.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .composer import ALGORITHMS, HeuristicConfig, compose, evaluate_plan, plan_to_dict, report_to_dict
from .harness import load_experiment_spec, read_rows, report, run_experiment
from .mobility import provision_map
from .model import load_scenario, save_scenario, validate_scenario
from .selection import filter_composable
from .workload import (
    build_scenario_from_datasets,
    generate_scenario,
    ingest_checkins,
    ingest_energy,
    load_generator_config,
    perturb_disconnections,
)


def _checked_scenario(path):
    s = load_scenario(path)
    problems = validate_scenario(s)
    if problems:
        raise ValueError(f"{path}: " + "; ".join(problems))
    return s


def _format_for(path: str, explicit) -> str:
    if explicit:
        return explicit
    return "csv" if str(path).lower().endswith(".csv") else "json"


def cmd_gen(args) -> None:
    save_scenario(generate_scenario(load_generator_config(args.config)), args.out)


def cmd_ingest(args) -> None:
    cfg = load_generator_config(args.config)
    s = build_scenario_from_datasets(ingest_checkins(args.checkins), ingest_energy(args.energy), cfg)
    save_scenario(s, args.out)


def cmd_perturb(args) -> None:
    s = _checked_scenario(args.input)
    save_scenario(perturb_disconnections(s, args.freq, args.len_min, args.len_max, args.seed), args.out)


def cmd_compose(args) -> None:
    s = _checked_scenario(args.scenario)
    cfg = HeuristicConfig(args.mu, args.dmax, args.gmin)
    out = {}
    for req in s.requests:
        series = provision_map(s.services, req)
        composable = filter_composable(s.services, req, series)
        plan = compose(
            args.algo, composable, req, cfg,
            switch_cost_mah=s.switch_cost_mah, selector=args.selector,
        )
        rep = evaluate_plan(plan, s, req)
        out[req.rid] = {"plan": plan_to_dict(plan), "report": report_to_dict(rep)}
    Path(args.out).write_text(json.dumps(out, indent=1))


def cmd_bench(args) -> None:
    rows = run_experiment(load_experiment_spec(args.spec))
    report(rows, args.out, _format_for(args.out, args.format))


def cmd_report(args) -> None:
    report(read_rows(args.input), args.out, args.format)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fluidcomp", description="Compose intermittent crowdsourced energy services."
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic scenario")
    g.add_argument("--config", required=True, help="generator config JSON")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    g = sub.add_parser("ingest", help="build a scenario from check-in and energy CSVs")
    g.add_argument("--checkins", required=True)
    g.add_argument("--energy", required=True)
    g.add_argument("--config", required=True, help="generator config JSON")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_ingest)

    g = sub.add_parser("perturb", help="inject random disconnections")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--freq", type=float, required=True, help="mean disconnections per service")
    g.add_argument("--len-min", type=int, default=1)
    g.add_argument("--len-max", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_perturb)

    g = sub.add_parser("compose", help="compose and evaluate every request of a scenario")
    g.add_argument("--scenario", required=True)
    g.add_argument("--algo", choices=ALGORITHMS, default="fluid")
    g.add_argument("--mu", type=float, default=HeuristicConfig.mu)
    g.add_argument("--dmax", type=float, default=HeuristicConfig.d_max)
    g.add_argument("--gmin", type=int, default=HeuristicConfig.g_min)
    g.add_argument("--selector", choices=("knapsack", "greedy"), default="knapsack")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_compose)

    g = sub.add_parser("bench", help="run an experiment spec")
    g.add_argument("--spec", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=("csv", "json"), help="default: from the file extension")
    g.set_defaults(func=cmd_bench)

    g = sub.add_parser("report", help="convert metrics rows between CSV and JSON")
    g.add_argument("--in", dest="input", required=True)
    g.add_argument("--format", choices=("csv", "json"), required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"fluidcomp {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
