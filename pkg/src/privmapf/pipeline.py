"""End-to-end privacy pipeline: dispatch, publish once, solve, extract.

Flow: the dispatcher builds one k-pair group per agent and the groups are
broadcast exactly once; a designated planning agent (always group 0 here)
solves the joint k*N instance over all published pairs and broadcasts the
full plan; each agent privately extracts the single path matching its real
pair. Everything observable by other agents lives in the MessageTrace, and
nothing derived from a private real index may ever appear in it.

An observer's belief about agent i at time t is the set of vertices where
group i's sub-plans place any member at t (goal positions pad past each
path's end). The plan is k-private when every belief set keeps size >= k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import dispatch as dsp
from .grid import GridWorld
from .lacam import lacam_solve
from .pibt import SolveResult, SolverProblem, pibt_solve
from .plans import JointPlan


@dataclass(frozen=True)
class MessageTrace:
    """Everything broadcast during one pipeline run (and nothing more)."""

    published_groups: tuple[dsp.AgentGroup, ...]  # broadcast views, no real_index
    planner_group: int
    k: int
    fov_radius: int
    broadcast_plan: JointPlan | None

    def to_json(self, world: GridWorld) -> str:
        obj = {
            "planner_group": self.planner_group,
            "k": self.k,
            "fov_radius": self.fov_radius,
            "groups": [
                {
                    "group_id": g.group_id,
                    "pairs": [
                        list(world.coords(s)) + list(world.coords(t))
                        for s, t in g.pairs
                    ],
                }
                for g in self.published_groups
            ],
            "plan": None
            if self.broadcast_plan is None
            else [list(p) for p in self.broadcast_plan.paths],
        }
        return json.dumps(obj, indent=0, sort_keys=True)

    @staticmethod
    def from_json(world: GridWorld, text: str) -> "MessageTrace":
        obj = json.loads(text)
        groups = tuple(
            dsp.AgentGroup(
                g["group_id"],
                tuple(
                    (world.vertex_at(sx, sy), world.vertex_at(gx, gy))
                    for sx, sy, gx, gy in g["pairs"]
                ),
                None,
            )
            for g in obj["groups"]
        )
        plan = (
            None
            if obj["plan"] is None
            else JointPlan(tuple(tuple(p) for p in obj["plan"]))
        )
        return MessageTrace(groups, obj["planner_group"], obj["k"], obj["fov_radius"], plan)


@dataclass
class PipelineResult:
    solved: bool
    trace: MessageTrace
    groups: list[dsp.AgentGroup]  # private views, real_index present
    problem: SolverProblem
    solve: SolveResult
    plan: JointPlan | None
    real_paths: list[tuple[int, ...]] | None

    @property
    def reason(self) -> str | None:
        return self.solve.reason


def extract_real_path(plan: JointPlan, k: int, group: dsp.AgentGroup) -> tuple[int, ...]:
    """The path of the group's real pair, cross-checked by endpoint scan."""
    base = group.group_id * k
    path = plan.paths[base + group.real_index]
    matches = [
        j
        for j in range(base, base + k)
        if (plan.paths[j][0], plan.paths[j][-1]) == group.real_pair
    ]
    if matches != [base + group.real_index]:
        raise RuntimeError(
            f"group {group.group_id}: real pair does not map to exactly one path"
        )
    return path


def _run(
    world: GridWorld,
    real_pairs: list[tuple[int, int]],
    k: int,
    fov_radius: int,
    seed: int | str,
    solver: str,
    fov_mode: bool,
    rule: dsp.CollisionRule,
    budget_expansions: int,
    horizon: int | None,
    max_retries: int,
    require_reachable: bool,
    wall_clock_s: float | None,
) -> PipelineResult:
    groups = dsp.dispatch_groups(
        world,
        real_pairs,
        k,
        rule,
        seed,
        max_retries=max_retries,
        require_reachable=require_reachable,
    )
    published = tuple(g.broadcast_view() for g in groups)
    problem = SolverProblem(world, list(published), fov_radius)
    if solver == "pibt":
        if wall_clock_s is not None:
            raise ValueError("wall-clock budgets need the lacam solver")
        result = pibt_solve(problem, seed, horizon=horizon, fov_mode=fov_mode)
    elif solver == "lacam":
        result = lacam_solve(
            problem,
            seed,
            budget_expansions=budget_expansions,
            fov_mode=fov_mode,
            wall_clock_s=wall_clock_s,
        )
    else:
        raise ValueError(f"unknown solver {solver!r}")

    # groups are published before the solver runs: a failed solve still
    # leaks exactly the same messages, so the trace must carry them.
    trace = MessageTrace(published, 0, k, fov_radius, result.plan)
    real_paths = None
    if result.solved:
        real_paths = [extract_real_path(result.plan, k, g) for g in groups]
    return PipelineResult(
        result.solved, trace, groups, problem, result, result.plan, real_paths
    )


def kpp_solve(
    world: GridWorld,
    real_pairs: list[tuple[int, int]],
    k: int,
    seed: int | str,
    solver: str = "pibt",
    fov_radius: int = 0,  # accepted for interface parity; ignored (treated as 0)
    budget_expansions: int = 10_000,
    horizon: int | None = None,
    max_retries: int = 1000,
    require_reachable: bool = True,
    wall_clock_s: float | None = None,
) -> PipelineResult:
    """k-anonymity pipeline: equality collision rule, fov-blind solver."""
    return _run(
        world,
        real_pairs,
        k,
        0,
        seed,
        solver,
        fov_mode=False,
        rule=dsp.CollisionRule.start_goal_equality(),
        budget_expansions=budget_expansions,
        horizon=horizon,
        max_retries=max_retries,
        require_reachable=require_reachable,
        wall_clock_s=wall_clock_s,
    )


def fpp_solve(
    world: GridWorld,
    real_pairs: list[tuple[int, int]],
    k: int,
    fov_radius: int,
    seed: int | str,
    solver: str = "pibt",
    budget_expansions: int = 10_000,
    horizon: int | None = None,
    max_retries: int = 1000,
    require_reachable: bool = True,
    wall_clock_s: float | None = None,
) -> PipelineResult:
    """Fov-aware pipeline: fov collision rule at dispatch, fov-clearing solver."""
    return _run(
        world,
        real_pairs,
        k,
        fov_radius,
        seed,
        solver,
        fov_mode=True,
        rule=dsp.CollisionRule.fov_aware(fov_radius),
        budget_expansions=budget_expansions,
        horizon=horizon,
        max_retries=max_retries,
        require_reachable=require_reachable,
        wall_clock_s=wall_clock_s,
    )


def compute_beliefs(plan: JointPlan, group_of: list[int]) -> list[list[frozenset[int]]]:
    """beliefs[i][t]: where agent i might be at t, judging from the broadcast."""
    n_groups = max(group_of) + 1
    horizon = plan.horizon
    beliefs = []
    for i in range(n_groups):
        members = [j for j, g in enumerate(group_of) if g == i]
        beliefs.append(
            [
                frozenset(plan.position(j, t) for j in members)
                for t in range(horizon + 1)
            ]
        )
    return beliefs


def check_k_privacy(beliefs: list[list[frozenset[int]]], k: int) -> dict:
    """Every belief set must keep at least k candidate locations."""
    violations = [
        (i, t, len(b))
        for i, per_t in enumerate(beliefs)
        for t, b in enumerate(per_t)
        if len(b) < k
    ]
    return {"ok": not violations, "violations": violations}


def write_trace(trace: MessageTrace, world: GridWorld, path: str | Path) -> None:
    Path(path).write_text(trace.to_json(world) + "\n")


def read_trace(world: GridWorld, path: str | Path) -> MessageTrace:
    return MessageTrace.from_json(world, Path(path).read_text())
