"""Command-line front end.

Four subcommands mirror the library layers: ``solve`` runs a privacy
pipeline on one instance and writes the broadcast plan (plus optional
message trace and per-agent private sidecars), ``ppfpp`` refines a solved
plan inside safe zones, ``audit`` checks a plan file for conflicts and
belief privacy, and ``bench`` sweeps a YAML-configured suite into a CSV.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .audit import audit, metrics, real_sum_of_costs
from .bench import format_summary, load_config, resolve_map, run_suite, summarize, write_records
from .dispatch import read_private_sidecars, write_private_sidecars
from .grid import load_map, load_scenario, scenario_pairs
from .instances import random_spaced_pairs
from .pipeline import compute_beliefs, check_k_privacy, fpp_solve, kpp_solve, write_trace
from .plans import JointPlan, read_plan_file, write_plan_file, write_real_plan_file
from .safezone import ppfpp, write_zones


def _instance_pairs(args, world):
    if args.scen:
        entries = load_scenario(args.scen)[: args.agents]
        if len(entries) < args.agents:
            raise SystemExit(f"scenario has only {len(entries)} entries")
        return scenario_pairs(world, entries)
    return random_spaced_pairs(
        world, args.agents, seed=args.seed, min_separation=args.separation
    )


def _cmd_solve(args) -> int:
    world = load_map(resolve_map(args.map))
    pairs = _instance_pairs(args, world)
    if args.pipeline == "kpp":
        out = kpp_solve(
            world, pairs, args.k, args.seed, solver=args.solver,
            budget_expansions=args.budget_expansions,
        )
    else:
        out = fpp_solve(
            world, pairs, args.k, args.radius, args.seed, solver=args.solver,
            budget_expansions=args.budget_expansions,
        )
    if args.trace:
        write_trace(out.trace, world, args.trace)
    if not out.solved:
        print(f"unsolved: {out.reason}")
        return 1
    m = metrics(out.plan.paths, out.problem.goals)
    print(f"solved: soc={m.soc} makespan={m.makespan} rsoc={real_sum_of_costs(out.real_paths, [p[1] for p in pairs])}")
    if args.out:
        write_plan_file(out.plan, args.k, args.out)
        print(f"plan written to {args.out}")
    if args.private_dir:
        Path(args.private_dir).mkdir(parents=True, exist_ok=True)
        write_private_sidecars(out.groups, args.private_dir)
        print(f"private sidecars written to {args.private_dir}")
    return 0


def _cmd_ppfpp(args) -> int:
    world = load_map(resolve_map(args.map))
    plan, group_of = read_plan_file(args.plan)
    private = read_private_sidecars(args.private_dir)
    k = len(group_of) // (max(group_of) + 1)
    real_paths = [
        plan.paths[g * k + private[g]] for g in range(max(group_of) + 1)
    ]
    result = ppfpp(world, plan, group_of, real_paths, args.radius, args.seed)
    print(
        f"rsoc {result.rsoc_before} -> {result.rsoc_after} "
        f"({result.improvement_pct:.2f}% improvement, {len(result.picks)} zone picks)"
    )
    if args.out:
        write_real_plan_file(result.refined_paths, args.out)
        print(f"refined real paths written to {args.out}")
    if args.zones:
        write_zones(result.zones, result.radius, world, args.zones)
        print(f"zones written to {args.zones}")
    return 0


def _cmd_audit(args) -> int:
    world = load_map(resolve_map(args.map))
    plan, group_of = read_plan_file(args.plan)
    report = audit(
        world, plan, group_of=group_of,
        fov_radius=args.radius, check_fov=args.radius > 0,
    )
    print(
        f"vertex conflicts: {len(report.vertex_conflicts)}  "
        f"swap conflicts: {len(report.swap_conflicts)}  "
        f"fov conflicts: {len(report.fov_conflicts)}"
    )
    ok = report.ok
    if args.k > 1:
        privacy = check_k_privacy(compute_beliefs(plan, group_of), args.k)
        print(f"belief {args.k}-privacy: {'ok' if privacy['ok'] else 'VIOLATED'}")
        ok = ok and privacy["ok"]
    print("clean" if ok else "violations found")
    return 0 if ok else 1


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    records = run_suite(cfg, threads=args.threads)
    if args.out:
        write_records(records, args.out)
        print(f"{len(records)} records written to {args.out}")
    print(format_summary(summarize(records)))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="privmapf")
    parser.add_argument("--version", action="version", version=f"privmapf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a privacy pipeline on one instance")
    p.add_argument("--map", required=True, help="map file or bundled map name")
    p.add_argument("--scen", help="take the first N pairs from a scenario file")
    p.add_argument("--agents", type=int, default=4)
    p.add_argument("--separation", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--radius", type=int, default=0)
    p.add_argument("--pipeline", choices=("kpp", "fpp"), default="kpp")
    p.add_argument("--solver", choices=("pibt", "lacam"), default="lacam")
    p.add_argument("--budget-expansions", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="broadcast plan file")
    p.add_argument("--trace", help="message trace JSON")
    p.add_argument("--private-dir", help="directory for per-agent sidecars")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("ppfpp", help="refine a solved plan inside safe zones")
    p.add_argument("--map", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--private-dir", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="refined real-path plan file")
    p.add_argument("--zones", help="zones JSON output")
    p.set_defaults(func=_cmd_ppfpp)

    p = sub.add_parser("audit", help="check a plan file for conflicts")
    p.add_argument("--map", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--radius", type=int, default=0)
    p.add_argument("--k", type=int, default=1, help="also check belief k-privacy")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("bench", help="run a YAML-configured suite")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
