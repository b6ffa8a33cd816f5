"""Exhaustive plan auditing: conflicts, privacy checks, and cost metrics.

The auditor never samples; it scans every timestep and every agent pair, so
a clean report is a proof over the padded horizon. Padding positions (agents
resting at their goals after arrival) participate in vertex and fov checks
like any other position.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import GridWorld
from .plans import JointPlan


class AuditError(ValueError):
    """Plan shape makes an exhaustive audit meaningless (e.g. ragged paths)."""


class MetricsError(ValueError):
    """Cost metrics requested for a path that does not end at its goal."""


@dataclass
class ConflictReport:
    """Every conflict found, as (agent_a, agent_b, t, vertices) tuples."""

    vertex_conflicts: list[tuple[int, int, int, tuple[int]]] = field(default_factory=list)
    swap_conflicts: list[tuple[int, int, int, tuple[int, int]]] = field(default_factory=list)
    fov_conflicts: list[tuple[int, int, int, tuple[int, int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.vertex_conflicts or self.swap_conflicts or self.fov_conflicts)

    def total(self) -> int:
        return len(self.vertex_conflicts) + len(self.swap_conflicts) + len(self.fov_conflicts)


def audit(
    world: GridWorld,
    plan: JointPlan,
    group_of: list[int] | None = None,
    fov_radius: int = 0,
    check_fov: bool = False,
) -> ConflictReport:
    """Scan all timesteps and agent pairs for vertex, swap and fov conflicts.

    Vertex and swap conflicts are checked between all sub-agents. Fov
    conflicts (positions of two agents within Chebyshev fov_radius) are only
    a conflict between agents of *different* groups; same-group overlap is
    exempt by definition.
    """
    if not plan.is_padded():
        raise AuditError("ragged plan: pad paths to a common horizon before auditing")
    if check_fov and group_of is None:
        raise AuditError("fov check needs the group_of mapping")
    n = plan.num_agents
    horizon = plan.horizon
    report = ConflictReport()
    for t in range(horizon + 1):
        pos = [plan.paths[a][t] for a in range(n)]
        prev = [plan.paths[a][t - 1] for a in range(n)] if t > 0 else None
        for a in range(n):
            for b in range(a + 1, n):
                if pos[a] == pos[b]:
                    report.vertex_conflicts.append((a, b, t, (pos[a],)))
                if prev is not None and pos[a] == prev[b] and pos[b] == prev[a] and pos[a] != pos[b]:
                    report.swap_conflicts.append((a, b, t, (prev[a], prev[b])))
                if (
                    check_fov
                    and group_of[a] != group_of[b]
                    and pos[b] in world.fov(pos[a], fov_radius)
                ):
                    report.fov_conflicts.append((a, b, t, (pos[a], pos[b])))
    return report


def path_cost(path: list[int] | tuple[int, ...], goal: int) -> int:
    """Actions until the path reaches its goal *and stays there*.

    Trailing stays at the goal are free; leaving and coming back re-counts
    the intermediate rest. A path that never leaves its goal costs 0.
    """
    if path[-1] != goal:
        raise MetricsError(f"path ends at {path[-1]}, not its goal {goal}")
    last_off = -1
    for t, v in enumerate(path):
        if v != goal:
            last_off = t
    return last_off + 1


@dataclass(frozen=True)
class Metrics:
    path_costs: tuple[int, ...]
    soc: int
    makespan: int


def metrics(paths: list[list[int]] | tuple, goals: list[int]) -> Metrics:
    costs = tuple(path_cost(p, g) for p, g in zip(paths, goals))
    return Metrics(costs, sum(costs), max(costs))


def real_sum_of_costs(real_paths: list[list[int]], real_goals: list[int]) -> int:
    """Sum of path costs over the real agents only."""
    return metrics(real_paths, real_goals).soc


def check_separated(
    world: GridWorld, zones: dict[int, list[set[int]]] | list[list[set[int]]], fov_radius: int
) -> list[tuple[int, int, int, int, int]]:
    """Violations of pairwise zone separation: (t, i, j, v, u) with v in
    zone_i^t, u in zone_j^t and the two within fov of each other.

    Empty list means the zones are separated. Accepts any mapping/sequence
    of per-group, per-timestep vertex sets.
    """
    if isinstance(zones, dict):
        items = sorted(zones.items())
    else:
        items = list(enumerate(zones))
    violations = []
    horizon = len(items[0][1]) - 1
    for t in range(horizon + 1):
        # dilating one zone turns the pairwise fov test into a set
        # intersection; fov is symmetric over passable cells, so u lies in
        # the dilation of zone_i exactly when some v in zone_i sees u
        dilated = [
            set().union(*(world.fov(v, fov_radius) for v in zi[t]))
            if zi[t]
            else set()
            for _, zi in items
        ]
        for ai in range(len(items)):
            i, zi = items[ai]
            for aj in range(ai + 1, len(items)):
                j, zj = items[aj]
                hits = dilated[ai] & zj[t]
                if not hits:
                    continue
                pair = [
                    (t, i, j, v, u)
                    for u in hits
                    for v in world.fov(u, fov_radius) & zi[t]
                ]
                pair.sort(key=lambda x: (x[3], x[4]))
                violations.extend(pair)
    return violations


def check_runtime_k_privacy(
    world: GridWorld,
    plan: JointPlan,
    group_of: list[int],
    k: int,
    fov_radius: int,
) -> dict:
    """k-anonymous beliefs at every timestep AND zero inter-group fov overlap."""
    from .pipeline import compute_beliefs, check_k_privacy  # local: avoids cycle

    beliefs = compute_beliefs(plan, group_of)
    privacy = check_k_privacy(beliefs, k)
    fov_report = audit(world, plan, group_of, fov_radius=fov_radius, check_fov=True)
    return {
        "ok": privacy["ok"] and not fov_report.fov_conflicts,
        "privacy": privacy,
        "fov_conflicts": fov_report.fov_conflicts,
    }
