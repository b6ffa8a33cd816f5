import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privmapf.grid import (
    EmptyMapError,
    ParseError,
    ScenarioError,
    load_scenario,
    parse_map_text,
    parse_scenario_text,
    scenario_pairs,
    scenario_text,
)

DOORWAY = """type octile
height 3
width 5
map
..@..
.....
..@..
"""


def test_parse_counts_and_coords(open4):
    assert open4.width == 4
    assert open4.height == 4
    assert open4.num_vertices == 16
    assert open4.coords(0) == (0, 0)
    assert open4.coords(15) == (3, 3)
    assert open4.vertex_at(3, 3) == 15


def test_blocked_cells_are_not_vertices():
    w = parse_map_text(DOORWAY)
    assert w.num_vertices == 13
    with pytest.raises(ValueError):
        w.vertex_at(2, 0)
    with pytest.raises(ValueError):
        w.vertex_at(5, 0)


def test_bundled_random_map_has_exact_vertex_count(random32):
    # 32*32 minus 20% blocked
    assert random32.num_vertices == 819
    assert all(
        random32.same_component(0, v) for v in range(random32.num_vertices)
    )


def test_neighbor_order_skips_blocked():
    w = parse_map_text(DOORWAY)
    got = [w.coords(v) for v in w.neighbors(w.vertex_at(2, 1))]
    assert got == [(1, 1), (3, 1)]  # up and down are '@'


def test_neighbors_full_cross(open4):
    got = [open4.coords(v) for v in open4.neighbors(open4.vertex_at(1, 1))]
    assert got == [(1, 0), (0, 1), (2, 1), (1, 2)]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as e:
        parse_map_text("type octile\nheight 2\nwidth 2\nmap\n..\n.x\n")
    assert e.value.line == 6
    with pytest.raises(ParseError) as e:
        parse_map_text("type octile\nheight 2\nwidth 3\nmap\n...\n..\n")
    assert e.value.line == 6
    with pytest.raises(ParseError):
        parse_map_text("type octile\nheight 3\nwidth 2\nmap\n..\n..\n")


def test_all_blocked_map_is_empty():
    with pytest.raises(EmptyMapError):
        parse_map_text("type octile\nheight 1\nwidth 2\nmap\n@@\n")


def test_fov_zero_is_self(open4):
    v = open4.vertex_at(2, 2)
    assert open4.fov(v, 0) == frozenset({v})


def test_fov_clips_at_boundary(open4):
    corner = open4.vertex_at(0, 0)
    got = {open4.coords(v) for v in open4.fov(corner, 1)}
    assert got == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_fov_skips_blocked_but_sees_past_them():
    # sight is not occluded by walls; blocked cells are merely not part of
    # the region (nothing can stand there)
    w = parse_map_text(DOORWAY)
    c = w.vertex_at(2, 1)
    got = {w.coords(v) for v in w.fov(c, 1)}
    assert got == {(1, 0), (3, 0), (1, 1), (2, 1), (3, 1), (1, 2), (3, 2)}
    far = {w.coords(v) for v in w.fov(w.vertex_at(0, 1), 2)}
    assert (2, 1) in far  # the wall at (2,0) does not shadow (2,1)


coord = st.integers(min_value=0, max_value=7)


@given(x1=coord, y1=coord, x2=coord, y2=coord, r=st.integers(0, 3))
@settings(max_examples=200)
def test_fov_symmetry_and_radius(x1, y1, x2, y2, r):
    w = parse_map_text(
        "type octile\nheight 8\nwidth 8\nmap\n" + "\n".join(["." * 8] * 8) + "\n"
    )
    a, b = w.vertex_at(x1, y1), w.vertex_at(x2, y2)
    assert (b in w.fov(a, r)) == (w.chebyshev(a, b) <= r)
    assert (b in w.fov(a, r)) == (a in w.fov(b, r))
    if r > 0:
        assert w.fov(a, r - 1) <= w.fov(a, r)


def test_components():
    w = parse_map_text("type octile\nheight 1\nwidth 5\nmap\n..@..\n")
    a, b = w.vertex_at(0, 0), w.vertex_at(1, 0)
    c = w.vertex_at(3, 0)
    assert w.same_component(a, b)
    assert not w.same_component(a, c)


def test_scenario_round_trip(open16):
    entries = load_scenario("src/privmapf/assets/scens/open16.scen")
    assert len(entries) == 12
    pairs = scenario_pairs(open16, entries)
    assert len(pairs) == 12
    assert all(0 <= s < open16.num_vertices for s, _ in pairs)
    again = scenario_pairs(open16, parse_scenario_text(scenario_text(open16, "open16.map", pairs)))
    assert again == pairs


def test_scenario_rejects_wrong_dimensions(open4):
    entries = load_scenario("src/privmapf/assets/scens/open16.scen")
    with pytest.raises(ScenarioError):
        scenario_pairs(open4, entries)


def test_scenario_requires_version_header():
    with pytest.raises(ParseError):
        parse_scenario_text("0\tfoo.map\t8\t8\t0\t0\t1\t1\t2.0\n")


def test_to_map_text_round_trips(random32):
    from privmapf.grid import parse_map_text as reparse

    again = reparse(random32.to_map_text())
    assert again.num_vertices == random32.num_vertices
    assert again.to_map_text() == random32.to_map_text()
