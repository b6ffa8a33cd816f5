"""Grid worlds parsed from MovingAI benchmark files.

A grid world is an undirected graph whose vertices are the passable cells of
a rectangular map and whose edges connect 4-neighbouring passable cells.
Coordinates are zero-based with ``x`` the column and ``y`` the row; vertex
ids are dense integers assigned in row-major order over passable cells only.

The square field of view ``fov(v, r)`` is the set of passable vertices whose
Chebyshev distance to ``v`` is at most ``r``, clipped to the map bounds.
Obstacles do *not* occlude it: a vertex on the far side of a wall is still
inside the square. This is deliberate (the privacy machinery treats the
field of view as a plain distance band, not a line-of-sight computation).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


PASSABLE_CHARS = frozenset(".GS")
BLOCKED_CHARS = frozenset("@OTW")


class ParseError(ValueError):
    """Malformed .map/.scen content. Carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyMapError(ValueError):
    """Map contains no passable cell."""


class ScenarioError(ValueError):
    """Scenario entry that cannot be realised on the given world."""


class GridWorld:
    """Immutable 4-connected grid graph over the passable cells of a map.

    Attributes:
        width, height: map dimensions in cells.
        num_vertices: number of passable cells.
    """

    __slots__ = (
        "width",
        "height",
        "num_vertices",
        "_passable",
        "_vertex_of_cell",
        "_cell_of_vertex",
        "_neighbors",
        "_fov_cache",
        "_component",
    )

    def __init__(self, rows: list[str]):
        if not rows:
            raise EmptyMapError("map has no rows")
        self.height = len(rows)
        self.width = len(rows[0])
        passable = []
        for row in rows:
            if len(row) != self.width:
                raise ParseError("ragged map row")
            for ch in row:
                passable.append(ch in PASSABLE_CHARS)
        self._passable = passable

        vertex_of_cell = [-1] * (self.width * self.height)
        cell_of_vertex = []
        for cell, ok in enumerate(passable):
            if ok:
                vertex_of_cell[cell] = len(cell_of_vertex)
                cell_of_vertex.append(cell)
        self._vertex_of_cell = vertex_of_cell
        self._cell_of_vertex = cell_of_vertex
        self.num_vertices = len(cell_of_vertex)
        if self.num_vertices == 0:
            raise EmptyMapError("map has no passable cell")

        neighbors = []
        for v in range(self.num_vertices):
            x, y = self.coords(v)
            adj = []
            for dx, dy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < self.width and 0 <= ny < self.height:
                    u = vertex_of_cell[ny * self.width + nx]
                    if u >= 0:
                        adj.append(u)
            neighbors.append(tuple(adj))
        self._neighbors = tuple(neighbors)
        self._fov_cache: dict[int, tuple[frozenset[int], ...]] = {}
        self._component: list[int] | None = None

    # -- geometry ---------------------------------------------------------

    def coords(self, v: int) -> tuple[int, int]:
        """Vertex id -> (x, y)."""
        cell = self._cell_of_vertex[v]
        return cell % self.width, cell // self.width

    def vertex_at(self, x: int, y: int) -> int:
        """(x, y) -> vertex id; raises ValueError off-map or on a blocked cell."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValueError(f"({x},{y}) outside {self.width}x{self.height} map")
        v = self._vertex_of_cell[y * self.width + x]
        if v < 0:
            raise ValueError(f"({x},{y}) is blocked")
        return v

    def is_passable(self, x: int, y: int) -> bool:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return self._passable[y * self.width + x]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._neighbors[v]

    def fov(self, v: int, radius: int) -> frozenset[int]:
        """Square field of view: passable vertices within Chebyshev ``radius``."""
        if radius < 0:
            raise ValueError("fov radius must be >= 0")
        table = self._fov_cache.get(radius)
        if table is None:
            table = tuple(self._fov_uncached(v2, radius) for v2 in range(self.num_vertices))
            self._fov_cache[radius] = table
        return table[v]

    def _fov_uncached(self, v: int, radius: int) -> frozenset[int]:
        x, y = self.coords(v)
        out = []
        for ny in range(max(0, y - radius), min(self.height, y + radius + 1)):
            base = ny * self.width
            for nx in range(max(0, x - radius), min(self.width, x + radius + 1)):
                u = self._vertex_of_cell[base + nx]
                if u >= 0:
                    out.append(u)
        return frozenset(out)

    def chebyshev(self, v: int, u: int) -> int:
        vx, vy = self.coords(v)
        ux, uy = self.coords(u)
        return max(abs(vx - ux), abs(vy - uy))

    # -- connectivity -----------------------------------------------------

    def component_of(self, v: int) -> int:
        if self._component is None:
            comp = [-1] * self.num_vertices
            label = 0
            for seed in range(self.num_vertices):
                if comp[seed] >= 0:
                    continue
                comp[seed] = label
                stack = [seed]
                while stack:
                    w = stack.pop()
                    for u in self._neighbors[w]:
                        if comp[u] < 0:
                            comp[u] = label
                            stack.append(u)
                label += 1
            self._component = comp
        return self._component[v]

    def same_component(self, v: int, u: int) -> bool:
        return self.component_of(v) == self.component_of(u)

    # -- serialization ----------------------------------------------------

    def to_map_text(self) -> str:
        lines = ["type octile", f"height {self.height}", f"width {self.width}", "map"]
        for y in range(self.height):
            row = "".join(
                "." if self._passable[y * self.width + x] else "@"
                for x in range(self.width)
            )
            lines.append(row)
        return "\n".join(lines) + "\n"


def parse_map_text(text: str) -> GridWorld:
    """Parse MovingAI .map content. Unknown terrain characters are rejected."""
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty map file", line=1)

    height = width = None
    idx = 0
    seen_map = False
    while idx < len(lines):
        line = lines[idx].strip()
        idx += 1
        if not line:
            continue
        key = line.split()[0].lower()
        if key == "type":
            continue
        if key == "height":
            try:
                height = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("bad height header", line=idx) from None
        elif key == "width":
            try:
                width = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("bad width header", line=idx) from None
        elif key == "map":
            seen_map = True
            break
        else:
            raise ParseError(f"unexpected header {line.split()[0]!r}", line=idx)
    if not seen_map:
        raise ParseError("missing 'map' header", line=idx)
    if height is None or width is None:
        raise ParseError("missing height/width header", line=idx)

    rows = []
    for y in range(height):
        if idx + y >= len(lines):
            raise ParseError(f"expected {height} map rows, got {y}", line=idx + y)
        row = lines[idx + y]
        if len(row) != width:
            raise ParseError(
                f"row has {len(row)} cells, expected {width}", line=idx + y + 1
            )
        for x, ch in enumerate(row):
            if ch not in PASSABLE_CHARS and ch not in BLOCKED_CHARS:
                raise ParseError(f"unknown terrain {ch!r} at column {x}", line=idx + y + 1)
        rows.append(row)
    return GridWorld(rows)


def load_map(path: str | Path) -> GridWorld:
    return parse_map_text(Path(path).read_text())


@dataclass(frozen=True)
class ScenarioEntry:
    """One line of a MovingAI .scen file (coordinates, not vertex ids)."""

    bucket: int
    map_name: str
    map_width: int
    map_height: int
    start_x: int
    start_y: int
    goal_x: int
    goal_y: int
    optimal_length: float


def parse_scenario_text(text: str) -> list[ScenarioEntry]:
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("version"):
        raise ParseError("missing 'version' header", line=1)
    entries = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 9:
            raise ParseError(f"expected 9 fields, got {len(parts)}", line=i)
        try:
            entries.append(
                ScenarioEntry(
                    bucket=int(parts[0]),
                    map_name=parts[1],
                    map_width=int(parts[2]),
                    map_height=int(parts[3]),
                    start_x=int(parts[4]),
                    start_y=int(parts[5]),
                    goal_x=int(parts[6]),
                    goal_y=int(parts[7]),
                    optimal_length=float(parts[8]),
                )
            )
        except ValueError:
            raise ParseError("non-numeric field", line=i) from None
    return entries


def load_scenario(path: str | Path) -> list[ScenarioEntry]:
    return parse_scenario_text(Path(path).read_text())


def scenario_pairs(world: GridWorld, entries: list[ScenarioEntry]) -> list[tuple[int, int]]:
    """Realise scenario entries on a world as (start, goal) vertex pairs.

    Raises ScenarioError naming the entry index when dimensions disagree or
    an endpoint sits on a blocked cell.
    """
    pairs = []
    for i, e in enumerate(entries):
        if (e.map_width, e.map_height) != (world.width, world.height):
            raise ScenarioError(
                f"entry {i}: scenario is for a {e.map_width}x{e.map_height} map, "
                f"world is {world.width}x{world.height}"
            )
        try:
            s = world.vertex_at(e.start_x, e.start_y)
            g = world.vertex_at(e.goal_x, e.goal_y)
        except ValueError as err:
            raise ScenarioError(f"entry {i}: {err}") from None
        pairs.append((s, g))
    return pairs


def scenario_text(world: GridWorld, map_name: str, pairs: list[tuple[int, int]]) -> str:
    """Render (start, goal) vertex pairs as a .scen file body."""
    lines = ["version 1"]
    for bucket, (s, g) in enumerate(pairs):
        sx, sy = world.coords(s)
        gx, gy = world.coords(g)
        dist = abs(sx - gx) + abs(sy - gy)
        lines.append(
            f"{bucket}\t{map_name}\t{world.width}\t{world.height}"
            f"\t{sx}\t{sy}\t{gx}\t{gy}\t{float(dist):.8f}"
        )
    return "\n".join(lines) + "\n"
