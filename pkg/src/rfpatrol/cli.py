"""Command-line front end: plan, run, analyze, plot, all."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import plots
from .campaign import (
    CampaignConfig,
    all_scenarios,
    campaign_runtime,
    plan_routes,
    read_records,
    run_campaign,
    scenario_by_id,
    summarize,
    write_heatmap_csv,
    write_records,
    write_summary,
)

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfpatrol",
        description="Patrol route planning and Monte Carlo emitter localization campaigns.",
    )
    parser.add_argument("--config", type=Path, help="campaign config JSON (defaults used if omitted)")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
    parser.add_argument(
        "--scenario",
        default="all",
        help="scenario id (e.g. triangle_omni) or 'all'",
    )
    parser.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    parser.add_argument("--no-plots", action="store_true", help="skip SVG emission")
    parser.add_argument(
        "command",
        choices=["plan", "run", "analyze", "plot", "all"],
        help="pipeline stage to execute",
    )
    return parser


def _load_config(args) -> CampaignConfig:
    config = CampaignConfig.load(args.config) if args.config else CampaignConfig()
    if args.seed is not None:
        config.master_seed = args.seed
    return config


def _selected_scenarios(args):
    if args.scenario == "all":
        return all_scenarios()
    return [scenario_by_id(args.scenario)]


def _do_plan(args, config, scenarios, plans_dir):
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            map_fn = partial(pool.map, chunksize=4)
            for scenario in scenarios:
                routes = plan_routes(scenario, config, plans_dir=plans_dir, map_fn=map_fn)
                print(f"planned {scenario.id}: {len(routes)} routes -> {plans_dir}")
        return
    for scenario in scenarios:
        routes = plan_routes(scenario, config, plans_dir=plans_dir)
        print(f"planned {scenario.id}: {len(routes)} routes -> {plans_dir}")


def _do_run(args, config, scenarios, plans_dir, out_dir):
    records, elapsed = campaign_runtime(
        run_campaign, config, scenarios, plans_dir=plans_dir, workers=args.workers
    )
    write_records(records, out_dir / "records.csv")
    summary = summarize(records, config)
    write_summary(summary, out_dir / "summary.json")
    write_heatmap_csv(np.array(summary["failure_heatmap"]["counts"]), out_dir / "heatmap.csv")
    n_ok = sum(r.success for r in records)
    print(
        f"ran {len(records)} trials in {elapsed:.1f}s "
        f"({100.0 * n_ok / max(len(records), 1):.1f}% success) -> {out_dir}"
    )


def _do_analyze(args, config, out_dir):
    records = read_records(out_dir / "records.csv")
    summary = summarize(records, config)
    write_summary(summary, out_dir / "summary.json")
    write_heatmap_csv(np.array(summary["failure_heatmap"]["counts"]), out_dir / "heatmap.csv")
    print(f"analyzed {len(records)} records -> {out_dir / 'summary.json'}")


def _do_plot(args, config, scenarios, plans_dir, out_dir):
    records = read_records(out_dir / "records.csv")
    summary = summarize(records, config)
    routes_by_scenario = {
        s.id: plan_routes(s, config, plans_dir=plans_dir) for s in scenarios
    }
    paths = plots.emit_all_plots(records, summary, routes_by_scenario, config, out_dir / "plots")
    print(f"wrote {len(paths)} figures -> {out_dir / 'plots'}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _load_config(args)
    scenarios = _selected_scenarios(args)
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    plans_dir = out_dir / "plans"

    if args.command in ("plan", "all"):
        _do_plan(args, config, scenarios, plans_dir)
    if args.command in ("run", "all"):
        _do_run(args, config, scenarios, plans_dir, out_dir)
    if args.command == "analyze":
        _do_analyze(args, config, out_dir)
    if args.command == "plot" or (args.command == "all" and not args.no_plots):
        _do_plot(args, config, scenarios, plans_dir, out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
