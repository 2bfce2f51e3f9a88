"""Scenario model and its on-disk format.

A scenario file is TOML (conventionally with a `.scenario` extension): floor
polygons, prism obstacles, start/goal root poses, the exploration sampling
bounds, and optionally a robot section overriding the default biped. All
lengths are meters, all angles radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .geometry import Box, ConvexPolygon2, ObstaclePrism, Pose4, World, rectangle
from .robot import RobotSpec, default_robot, nominal_stance, state_feasible


class InvalidScenario(Exception):
    """Raised when a scenario file violates its invariants; lists every failed check."""


@dataclass(frozen=True)
class Scenario:
    name: str
    world: World
    robot: RobotSpec
    start: Pose4
    goal: Pose4
    bounds: tuple[float, float, float, float]  # x_lo, x_hi, y_lo, y_hi


def validate_scenario(sc: Scenario) -> list[str]:
    """All invariant violations (empty list when the scenario is well-formed)."""
    problems = []
    x_lo, x_hi, y_lo, y_hi = sc.bounds
    if not (x_lo < x_hi and y_lo < y_hi):
        problems.append(f"bounds must be non-empty, got {sc.bounds}")
    for tag, pose in (("start", sc.start), ("goal", sc.goal)):
        if not (x_lo <= pose.x <= x_hi and y_lo <= pose.y <= y_hi):
            problems.append(f"{tag} pose ({pose.x}, {pose.y}) outside bounds {sc.bounds}")
        if not state_feasible(nominal_stance(pose, sc.robot), sc.world, sc.robot):
            problems.append(f"nominal stance at {tag} pose is not feasible")
    return problems


def _check(sc: Scenario) -> Scenario:
    problems = validate_scenario(sc)
    if problems:
        raise InvalidScenario(f"scenario '{sc.name}':\n  " + "\n  ".join(problems))
    return sc


def _pose(values, where: str) -> Pose4:
    if len(values) != 4:
        raise InvalidScenario(f"{where}: pose needs [x, y, z, yaw], got {values}")
    return Pose4(*map(float, values))


def _polygon(vertices, where: str) -> ConvexPolygon2:
    try:
        return ConvexPolygon2(tuple((float(x), float(y)) for x, y in vertices))
    except (ValueError, TypeError) as err:
        raise InvalidScenario(f"{where}: {err}") from err


def _robot_from_table(tbl: dict) -> RobotSpec:
    base = default_robot()
    if "foot_polygon" in tbl:
        foot = _polygon(tbl["foot_polygon"], "robot.foot_polygon")
    elif "foot_half_extents" in tbl:
        hx, hy = tbl["foot_half_extents"]
        foot = rectangle(0.0, 0.0, float(hx), float(hy))
    else:
        foot = base.foot_polygon

    def boxes(key: str, fallback):
        if key not in tbl:
            return fallback
        out = []
        for i, b in enumerate(tbl[key]):
            try:
                out.append(Box(tuple(map(float, b["center"])), tuple(map(float, b["half"]))))
            except (KeyError, ValueError) as err:
                raise InvalidScenario(f"robot.{key}[{i}]: {err}") from err
        return tuple(out)

    try:
        return RobotSpec(
            bounding_geom=boxes("bounding_box", base.bounding_geom),
            minimal_geom=boxes("minimal_box", base.minimal_geom),
            foot_polygon=foot,
            nominal_stance_half_width=float(tbl.get("nominal_stance_half_width", base.nominal_stance_half_width)),
            nominal_root_z=float(tbl.get("nominal_root_z", base.nominal_root_z)),
            root_z_range=tuple(map(float, tbl.get("root_z_range", base.root_z_range))),
            leg_reach=float(tbl.get("leg_reach", base.leg_reach)),
            max_step_length=float(tbl.get("max_step_length", base.max_step_length)),
            stride=float(tbl.get("stride", base.stride)),
        )
    except ValueError as err:
        raise InvalidScenario(f"robot: {err}") from err


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise InvalidScenario(f"{name_hint}: parse error: {err}") from err

    name = doc.get("name", name_hint)
    floor_tables = doc.get("floor", [])
    if not floor_tables:
        raise InvalidScenario(f"{name}: scenario has no floor polygons")
    floor = tuple(
        _polygon(t["vertices"], f"floor[{i}]") for i, t in enumerate(floor_tables)
    )
    obstacles = []
    for i, t in enumerate(doc.get("obstacle", [])):
        fp = _polygon(t["vertices"], f"obstacle[{i}]")
        z = t.get("z")
        if not z or len(z) != 2:
            raise InvalidScenario(f"obstacle[{i}]: needs z = [z_lo, z_hi]")
        try:
            obstacles.append(ObstaclePrism(fp, float(z[0]), float(z[1])))
        except ValueError as err:
            raise InvalidScenario(f"obstacle[{i}]: {err}") from err
    try:
        world = World(floor, tuple(obstacles))
    except ValueError as err:
        raise InvalidScenario(f"{name}: {err}") from err

    robot = _robot_from_table(doc.get("robot", {}))
    if "bounds" not in doc or "x" not in doc["bounds"] or "y" not in doc["bounds"]:
        raise InvalidScenario(f"{name}: needs [bounds] with x = [lo, hi] and y = [lo, hi]")
    bx, by = doc["bounds"]["x"], doc["bounds"]["y"]
    bounds = (float(bx[0]), float(bx[1]), float(by[0]), float(by[1]))
    if "start" not in doc or "goal" not in doc:
        raise InvalidScenario(f"{name}: needs [start] and [goal] tables with pose")
    start = _pose(doc["start"]["pose"], "start")
    goal = _pose(doc["goal"]["pose"], "goal")
    return _check(Scenario(name, world, robot, start, goal, bounds))


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), name_hint=path.stem)


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"


def _fmt_vertices(poly: ConvexPolygon2) -> str:
    return "[" + ", ".join(f"[{_fmt(x)}, {_fmt(y)}]" for x, y in poly.vertices) + "]"


def scenario_text(sc: Scenario) -> str:
    """Serialize a scenario; load(scenario_text(sc)) reproduces it exactly."""
    lines = [f'name = "{sc.name}"', ""]
    lines += ["[bounds]", f"x = {_fmt_list(sc.bounds[:2])}", f"y = {_fmt_list(sc.bounds[2:])}", ""]
    lines += ["[start]", f"pose = {_fmt_list((sc.start.x, sc.start.y, sc.start.z, sc.start.yaw))}", ""]
    lines += ["[goal]", f"pose = {_fmt_list((sc.goal.x, sc.goal.y, sc.goal.z, sc.goal.yaw))}", ""]
    r = sc.robot
    lines += [
        "[robot]",
        f"nominal_stance_half_width = {_fmt(r.nominal_stance_half_width)}",
        f"nominal_root_z = {_fmt(r.nominal_root_z)}",
        f"root_z_range = {_fmt_list(r.root_z_range)}",
        f"leg_reach = {_fmt(r.leg_reach)}",
        f"max_step_length = {_fmt(r.max_step_length)}",
        f"stride = {_fmt(r.stride)}",
        f"foot_polygon = {_fmt_vertices(r.foot_polygon)}",
    ]
    for b in r.bounding_geom:
        lines += ["", "[[robot.bounding_box]]", f"center = {_fmt_list(b.center)}", f"half = {_fmt_list(b.half)}"]
    for b in r.minimal_geom:
        lines += ["", "[[robot.minimal_box]]", f"center = {_fmt_list(b.center)}", f"half = {_fmt_list(b.half)}"]
    for poly in sc.world.floor:
        lines += ["", "[[floor]]", f"vertices = {_fmt_vertices(poly)}"]
    for ob in sc.world.obstacles:
        lines += [
            "",
            "[[obstacle]]",
            f"vertices = {_fmt_vertices(ob.footprint)}",
            f"z = {_fmt_list((ob.z_lo, ob.z_hi))}",
        ]
    return "\n".join(lines) + "\n"


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(scenario_text(sc))


BUNDLED_NAMES = (
    "open_floor",
    "walled",
    "limbo",
    "four_routes",
    "four_routes_west_blocked",
    "four_routes_east_blocked",
    "four_routes_no_bars",
)


def bundled_scenario(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package."""
    ref = resources.files("bipedplan").joinpath(f"scenarios/{name}.scenario")
    with resources.as_file(ref) as path:
        if not path.exists():
            raise InvalidScenario(f"no bundled scenario named '{name}' (have: {', '.join(BUNDLED_NAMES)})")
        return load_scenario(path)
