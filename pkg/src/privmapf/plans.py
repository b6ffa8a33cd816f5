"""Joint plans over sub-agents and their on-disk format.

A joint plan is one path per sub-agent, all padded to a common horizon.
Sub-agents are ordered group-major: sub-agent j belongs to group j // k.

Plan files are plain text, one line per sub-agent:

    <group> <index-in-group> <v0> <v1> ... <vT>

with vertices as dense vertex ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class JointPlan:
    paths: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.paths:
            raise ValueError("empty plan")

    @property
    def num_agents(self) -> int:
        return len(self.paths)

    @property
    def horizon(self) -> int:
        """Padded plan length in timesteps (T); positions exist for 0..T."""
        return len(self.paths[0]) - 1

    def position(self, agent: int, t: int) -> int:
        path = self.paths[agent]
        return path[t] if t < len(path) else path[-1]

    def is_padded(self) -> bool:
        return len({len(p) for p in self.paths}) == 1

    @staticmethod
    def from_configs(configs: list[list[int]]) -> "JointPlan":
        """Transpose a per-timestep configuration sequence into per-agent paths."""
        n = len(configs[0])
        return JointPlan(tuple(tuple(c[i] for c in configs) for i in range(n)))


def pad_paths(paths: list[list[int]], horizon: int | None = None) -> JointPlan:
    """Extend every path with trailing stays to a common horizon."""
    target = max(len(p) for p in paths) - 1
    if horizon is not None:
        if horizon < target:
            raise ValueError(f"horizon {horizon} shorter than longest path {target}")
        target = horizon
    return JointPlan(
        tuple(tuple(p) + (p[-1],) * (target + 1 - len(p)) for p in paths)
    )


def write_plan_file(plan: JointPlan, k: int, path: str | Path) -> None:
    lines = []
    for j, p in enumerate(plan.paths):
        lines.append(f"{j // k} {j % k} " + " ".join(str(v) for v in p))
    Path(path).write_text("\n".join(lines) + "\n")


def read_plan_file(path: str | Path) -> tuple[JointPlan, list[int]]:
    """Returns (plan, group_of) with sub-agents in file order."""
    paths, group_of = [], []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        parts = line.split()
        group_of.append(int(parts[0]))
        paths.append(tuple(int(v) for v in parts[2:]))
    return JointPlan(tuple(paths)), group_of


def write_real_plan_file(real_paths: list[tuple[int, ...]], path: str | Path) -> None:
    """One line per agent: ``<group> real v0 v1 ...`` (private, not broadcast)."""
    lines = [
        f"{g} real " + " ".join(str(v) for v in p) for g, p in enumerate(real_paths)
    ]
    Path(path).write_text("\n".join(lines) + "\n")
