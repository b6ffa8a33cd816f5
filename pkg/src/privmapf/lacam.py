"""Lazy-constraints anytime search over joint configurations.

Two-level scheme: the high level is a depth-first search over configuration
nodes, each carrying a lazily grown constraint tree; the low level walks
that tree in BFS order, pinning one agent per depth to a concrete vertex.
Successor configurations come from the priority-inheritance step builder,
which honours the pinned agents as forced assignments. Because the root
constraint is empty, the first depth-first dive reproduces the plain
one-shot run of the step builder (same RNG stream), and everything after
the first goal hit is anytime improvement: known configurations are rewired
Dijkstra-style whenever a cheaper path to them appears.

There is no swap operation on top of the step builder; escaping local
minima is left to the constraint tree.

The edge cost charges 1 per agent not resting at its goal across the move,
which matches sum-of-costs as long as no agent leaves its goal again; the
incumbent plan is therefore re-scored with the exact path-cost metric and
only replaced when that true cost improves.
"""

from __future__ import annotations

import random
import time
from collections import deque

from .audit import metrics
from .pibt import SolveResult, SolverProblem, build_step, priority_order, update_etas
from .plans import JointPlan


class _Constraint:
    __slots__ = ("who", "where")

    def __init__(self, who: tuple[int, ...] = (), where: tuple[int, ...] = ()):
        self.who = who
        self.where = where

    def extend(self, agent: int, vertex: int) -> "_Constraint":
        return _Constraint(self.who + (agent,), self.where + (vertex,))

    @property
    def depth(self) -> int:
        return len(self.who)


class _Node:
    __slots__ = ("config", "g", "h", "parent", "tree", "order", "etas", "edges")

    def __init__(self, config, g, h, parent, order, etas):
        self.config = config
        self.g = g
        self.h = h
        self.parent = parent
        self.tree = deque([_Constraint()])
        self.order = order
        self.etas = etas  # off-goal counters frozen at first discovery
        self.edges: dict[_Node, int] = {}

    @property
    def f(self) -> int:
        return self.g + self.h


def _edge_cost(goals: list[int], q_from: tuple[int, ...], q_to: tuple[int, ...]) -> int:
    return sum(
        1 for a, g in enumerate(goals) if not (q_from[a] == g and q_to[a] == g)
    )


def _extract(node: _Node) -> JointPlan:
    configs = []
    while node is not None:
        configs.append(list(node.config))
        node = node.parent
    configs.reverse()
    return JointPlan.from_configs(configs)


def lacam_solve(
    problem: SolverProblem,
    seed: int | str,
    budget_expansions: int = 10_000,
    fov_mode: bool = False,
    wall_clock_s: float | None = None,
) -> SolveResult:
    """Anytime joint-configuration search; deterministic for a given seed
    when budgeted in expansions (wall_clock_s is for interactive use only).
    """
    world = problem.world
    goals = problem.goals
    goal_cfg = tuple(goals)
    rng = random.Random(f"pibt:{seed}")

    def heuristic(cfg: tuple[int, ...]) -> int:
        return sum(problem.dists[a][cfg[a]] for a in range(problem.num_agents))

    start_cfg = tuple(problem.starts)
    if start_cfg == goal_cfg:
        plan = JointPlan.from_configs([list(start_cfg)])
        return SolveResult(True, plan, None, steps=0, expansions=0)
    start_etas = update_etas(problem, list(start_cfg), [0] * problem.num_agents)
    init = _Node(
        start_cfg,
        0,
        heuristic(start_cfg),
        None,
        priority_order(problem, list(start_cfg), start_etas),
        start_etas,
    )
    open_stack: list[_Node] = [init]
    explored: dict[tuple[int, ...], _Node] = {start_cfg: init}
    goal_node: _Node | None = None
    best_plan: JointPlan | None = None
    best_soc: int | None = None
    expansions = 0
    deadline = time.monotonic() + wall_clock_s if wall_clock_s is not None else None

    def consider_incumbent():
        nonlocal best_plan, best_soc
        if goal_node is None:
            return
        plan = _extract(goal_node)
        soc = metrics(plan.paths, goals).soc
        if best_soc is None or soc < best_soc:
            best_plan, best_soc = plan, soc

    while open_stack:
        if deadline is not None and time.monotonic() > deadline:
            break
        node = open_stack[-1]
        if node.config == goal_cfg:
            open_stack.pop()
            continue
        if goal_node is not None and goal_node.g <= node.f:
            open_stack.pop()
            continue
        if not node.tree:
            open_stack.pop()
            continue
        if expansions >= budget_expansions:
            break
        expansions += 1

        constraint = node.tree.popleft()
        if constraint.depth < problem.num_agents:
            agent = node.order[constraint.depth]
            cur = node.config[agent]
            cands = sorted(
                (cur, *world.neighbors(cur)),
                key=lambda v: (problem.dists[agent][v], v),
            )
            for u in cands:
                node.tree.append(constraint.extend(agent, u))

        forced = list(zip(constraint.who, constraint.where))
        q_new = build_step(
            problem, list(node.config), rng, fov_mode, forced=forced, order=node.order
        )
        if q_new is None:
            continue
        q_new = tuple(q_new)
        cost = _edge_cost(goals, node.config, q_new)
        known = explored.get(q_new)
        if known is None:
            child_etas = update_etas(problem, list(q_new), node.etas)
            child = _Node(
                q_new,
                node.g + cost,
                heuristic(q_new),
                node,
                priority_order(problem, list(q_new), child_etas),
                child_etas,
            )
            node.edges[child] = cost
            explored[q_new] = child
            open_stack.append(child)
            if q_new == goal_cfg:
                goal_node = child
                consider_incumbent()
        else:
            if known is not node:  # self-loops cannot improve anything
                node.edges[known] = min(cost, node.edges.get(known, cost))
            open_stack.append(known)
            if node.g + cost < known.g:
                known.g = node.g + cost
                known.parent = node
                queue = deque([known])
                while queue:
                    x = queue.popleft()
                    for y, c in x.edges.items():
                        if x.g + c < y.g:
                            y.g = x.g + c
                            y.parent = x
                            queue.append(y)
                consider_incumbent()

    if best_plan is not None:
        return SolveResult(True, best_plan, None, steps=best_plan.horizon, expansions=expansions)
    reason = "timeout" if open_stack else "exhausted"
    return SolveResult(False, None, reason, expansions=expansions)
