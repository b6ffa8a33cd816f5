"""Benchmark harness: sweep instance grids, collect one CSV row per run.

A suite is a YAML config describing the cross product of maps, agent
counts, group sizes, fov radii and seeds. Rows come out in exactly the
config order (maps outermost, seeds innermost), so two runs of the same
config produce byte-identical CSVs -- provided the solver budget is given
in expansions, in which case wall-clock columns are forced to 0.0 rather
than recording noise.

Set PRIVMAPF_THREADS=<n> to fan instances out over a process pool; the
row order is unaffected.
"""

from __future__ import annotations

import csv
import io
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .dispatch import DispatchExhaustedError
from .grid import GridWorld, load_map
from .instances import random_spaced_pairs
from .pipeline import fpp_solve, kpp_solve
from .safezone import ppfpp

SCHEMA_VERSION = 1

_ASSET_MAPS = Path(__file__).parent / "assets" / "maps"


class ConfigError(Exception):
    pass


def resolve_map(name: str) -> Path:
    """A bare name means a bundled map; anything path-like is used as is."""
    p = Path(name)
    if p.suffix == ".map" and p.exists():
        return p
    bundled = _ASSET_MAPS / f"{name}.map"
    if bundled.exists():
        return bundled
    raise ConfigError(f"unknown map {name!r} (no file and no bundled asset)")


def default_separation(world: GridWorld) -> int:
    return 3 if world.width <= 16 else 5


@dataclass(frozen=True)
class BenchConfig:
    name: str
    maps: tuple[str, ...]
    agents: tuple[int, ...]
    ks: tuple[int, ...]
    radii: tuple[int, ...]
    seeds: tuple[int, ...]
    pipeline: str = "fpp"
    solver: str = "lacam"
    budget_expansions: int | None = 1500
    budget_seconds: float | None = None
    run_ppfpp: bool = True
    min_separation: int | None = None

    def __post_init__(self) -> None:
        if self.pipeline not in ("kpp", "fpp"):
            raise ConfigError(f"pipeline must be kpp or fpp, got {self.pipeline!r}")
        if self.solver not in ("pibt", "lacam"):
            raise ConfigError(f"solver must be pibt or lacam, got {self.solver!r}")
        if self.budget_seconds is not None and self.solver != "lacam":
            raise ConfigError("a wall-clock budget needs the lacam solver")
        if not all(k >= 1 for k in self.ks):
            raise ConfigError("group sizes must be >= 1")
        if not all(r >= 0 for r in self.radii):
            raise ConfigError("fov radii must be >= 0")
        if self.pipeline == "kpp" and any(r > 0 for r in self.radii):
            raise ConfigError("the kpp pipeline ignores fov; use radius 0")

    @property
    def deterministic_times(self) -> bool:
        return self.budget_seconds is None


_CONFIG_KEYS = {f.name for f in fields(BenchConfig)} | {"k", "radius"}


def load_config(path: str | Path) -> BenchConfig:
    obj = yaml.safe_load(Path(path).read_text())
    if not isinstance(obj, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(obj) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    seeds = obj.get("seeds", 5)
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    try:
        return BenchConfig(
            name=obj.get("name", Path(path).stem),
            maps=tuple(obj["maps"]),
            agents=tuple(obj["agents"]),
            ks=tuple(obj.get("k", obj.get("ks", [1]))),
            radii=tuple(obj.get("radius", obj.get("radii", [0]))),
            seeds=tuple(seeds),
            pipeline=obj.get("pipeline", "fpp"),
            solver=obj.get("solver", "lacam"),
            budget_expansions=obj.get("budget_expansions", 1500),
            budget_seconds=obj.get("budget_seconds"),
            run_ppfpp=bool(obj.get("run_ppfpp", True)),
            min_separation=obj.get("min_separation"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc.args[0]}") from None


@dataclass(frozen=True)
class TaskSpec:
    map_name: str
    map_path: str
    n_agents: int
    k: int
    radius: int
    seed: int
    pipeline: str
    solver: str
    budget_expansions: int | None
    budget_seconds: float | None
    run_ppfpp: bool
    min_separation: int | None
    zero_times: bool


@dataclass(frozen=True)
class RunRecord:
    map: str
    n_agents: int
    k: int
    radius: int
    solver: str
    seed: int
    solved: bool
    soc: int
    makespan: int
    rsoc_before: int
    rsoc_after: int
    improvement_pct: float
    solve_time: float
    ppfpp_time: float

    def to_row(self) -> list[str]:
        return [
            self.map,
            str(self.n_agents),
            str(self.k),
            str(self.radius),
            self.solver,
            str(self.seed),
            "1" if self.solved else "0",
            str(self.soc),
            str(self.makespan),
            str(self.rsoc_before),
            str(self.rsoc_after),
            f"{self.improvement_pct:.6f}",
            f"{self.solve_time:.6f}",
            f"{self.ppfpp_time:.6f}",
        ]

    @staticmethod
    def from_row(row: list[str]) -> "RunRecord":
        return RunRecord(
            row[0], int(row[1]), int(row[2]), int(row[3]), row[4], int(row[5]),
            row[6] == "1", int(row[7]), int(row[8]), int(row[9]), int(row[10]),
            float(row[11]), float(row[12]), float(row[13]),
        )


CSV_HEADER = [
    "map", "n_agents", "k", "radius", "solver", "seed", "solved", "soc",
    "makespan", "rsoc_before", "rsoc_after", "improvement_pct",
    "solve_time", "ppfpp_time",
]


def iter_tasks(cfg: BenchConfig) -> list[TaskSpec]:
    tasks = []
    for map_name in cfg.maps:
        map_path = str(resolve_map(map_name))
        for n in cfg.agents:
            for k in cfg.ks:
                for r in cfg.radii:
                    for seed in cfg.seeds:
                        tasks.append(TaskSpec(
                            map_name, map_path, n, k, r, seed,
                            cfg.pipeline, cfg.solver,
                            cfg.budget_expansions, cfg.budget_seconds,
                            cfg.run_ppfpp, cfg.min_separation,
                            cfg.deterministic_times,
                        ))
    return tasks


_WORLD_CACHE: dict[str, GridWorld] = {}


def _world(map_path: str) -> GridWorld:
    if map_path not in _WORLD_CACHE:
        _WORLD_CACHE[map_path] = load_map(map_path)
    return _WORLD_CACHE[map_path]


def run_one(task: TaskSpec) -> RunRecord:
    world = _world(task.map_path)
    sep = task.min_separation or default_separation(world)
    pairs = random_spaced_pairs(world, task.n_agents, seed=task.seed, min_separation=sep)

    t0 = time.perf_counter()
    try:
        if task.pipeline == "kpp":
            out = kpp_solve(
                world, pairs, task.k, task.seed, solver=task.solver,
                budget_expansions=task.budget_expansions or 10_000,
                wall_clock_s=task.budget_seconds,
            )
        else:
            out = fpp_solve(
                world, pairs, task.k, task.radius, task.seed, solver=task.solver,
                budget_expansions=task.budget_expansions or 10_000,
                wall_clock_s=task.budget_seconds,
            )
        solved = out.solved
    except DispatchExhaustedError:
        out = None
        solved = False
    solve_time = time.perf_counter() - t0

    soc = makespan = rsoc_before = rsoc_after = -1
    improvement = 0.0
    ppfpp_time = 0.0
    if solved:
        from .audit import metrics

        m = metrics(out.plan.paths, out.problem.goals)
        soc, makespan = m.soc, m.makespan
        if task.run_ppfpp and task.pipeline == "fpp" and task.radius >= 1:
            t1 = time.perf_counter()
            refined = ppfpp(
                world, out.plan, out.problem.group_of, out.real_paths,
                task.radius, task.seed,
            )
            ppfpp_time = time.perf_counter() - t1
            rsoc_before = refined.rsoc_before
            rsoc_after = refined.rsoc_after
            improvement = refined.improvement_pct

    if task.zero_times:
        solve_time = ppfpp_time = 0.0
    return RunRecord(
        task.map_name, task.n_agents, task.k, task.radius, task.solver, task.seed,
        solved, soc, makespan, rsoc_before, rsoc_after, improvement,
        solve_time, ppfpp_time,
    )


def run_suite(cfg: BenchConfig, threads: int | None = None) -> list[RunRecord]:
    tasks = iter_tasks(cfg)
    if threads is None:
        threads = int(os.environ.get("PRIVMAPF_THREADS", "1"))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_one, tasks, chunksize=1))
    return [run_one(t) for t in tasks]


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def write_records(records: list[RunRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records(path: str | Path) -> list[RunRecord]:
    lines = Path(path).read_text().splitlines()
    rows = [l for l in lines if l and not l.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    if header != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header: {header}")
    return [RunRecord.from_row(row) for row in reader]


@dataclass(frozen=True)
class SummaryRow:
    map: str
    k: int
    runs: int
    solved: int
    mean_improvement: float
    std_improvement: float
    max_improvement: float
    median_improvement: float


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Improvement statistics per (map, k), over runs that were refined."""
    cells: dict[tuple[str, int], list[RunRecord]] = {}
    for rec in records:
        cells.setdefault((rec.map, rec.k), []).append(rec)
    rows = []
    for (map_name, k) in sorted(cells):
        recs = cells[(map_name, k)]
        vals = [r.improvement_pct for r in recs if r.rsoc_before >= 0]
        mean = statistics.mean(vals) if vals else 0.0
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        rows.append(SummaryRow(
            map_name, k, len(recs), sum(r.solved for r in recs),
            mean, std, max(vals, default=0.0),
            statistics.median(vals) if vals else 0.0,
        ))
    return rows


def format_summary(rows: list[SummaryRow]) -> str:
    out = [
        f"{'map':<20} {'k':>2} {'runs':>5} {'solved':>6} "
        f"{'mean%':>8} {'std%':>8} {'max%':>8} {'med%':>8}"
    ]
    for r in rows:
        out.append(
            f"{r.map:<20} {r.k:>2} {r.runs:>5} {r.solved:>6} "
            f"{r.mean_improvement:>8.2f} {r.std_improvement:>8.2f} "
            f"{r.max_improvement:>8.2f} {r.median_improvement:>8.2f}"
        )
    return "\n".join(out)


def cactus_data(records: list[RunRecord]) -> dict[str, list[int]]:
    """Sorted per-run real costs, the usual cactus-plot input."""
    refined = [r for r in records if r.rsoc_before >= 0]
    return {
        "before": sorted(r.rsoc_before for r in refined),
        "after": sorted(r.rsoc_after for r in refined),
    }
