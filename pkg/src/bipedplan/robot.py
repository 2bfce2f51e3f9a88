"""Simplified biped model: spec, stances, full states, and the kinematic feasibility check.

The robot is not articulated. Whole-body feasibility is a closed-form surrogate:
a small rigid core that no joint motion can move (used by the necessary
conditions), a torso volume that rides up and down with the root (so lowering
the root buys overhead clearance), horizontal leg reach, and foot support.
All body dimensions are stand-ins chosen to produce step-over and duck-under
behavior at desk scale; nothing here is calibrated to a physical platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    Box,
    ConvexPolygon2,
    Pose4,
    World,
    collide_at,
    convex_polygons_overlap,
    make_boxset,
    poses_collide,
    rectangle,
    supported,
    transform_polygon,
    wrap_angle,
    yaw_difference,
)

# Torso half-height: the state-dependent body volume spans
# [root.z - TORSO_HALF_HEIGHT, root.z + TORSO_HALF_HEIGHT].
TORSO_HALF_HEIGHT = 0.3

# Planted feet occupy [0, FOOT_CLEAR_HEIGHT] above the floor; placements
# overlapping an obstacle in that band are invalid (you cannot stand on a brick).
FOOT_CLEAR_HEIGHT = 0.05

# In-place turns are decomposed into increments no larger than this.
MAX_TURN_INCREMENT = math.pi / 4

_REACH_EPS = 1e-9


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True)
class FootPlacement:
    """A planted foot: which side, and its planar pose."""

    side: Side
    x: float
    y: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class RobotSpec:
    """Dimensions and limits of the simplified biped.

    bounding_geom must enclose every motion of the canonical gait (it backs the
    sufficient conditions); minimal_geom is the rigid core unaffected by any
    joint motion (it backs the necessary conditions).
    """

    bounding_geom: tuple[Box, ...]
    minimal_geom: tuple[Box, ...]
    foot_polygon: ConvexPolygon2
    nominal_stance_half_width: float
    nominal_root_z: float
    root_z_range: tuple[float, float]
    leg_reach: float
    max_step_length: float
    stride: float

    def __post_init__(self):
        object.__setattr__(self, "bounding_geom", make_boxset(self.bounding_geom))
        object.__setattr__(self, "minimal_geom", make_boxset(self.minimal_geom))
        object.__setattr__(self, "root_z_range", (float(self.root_z_range[0]), float(self.root_z_range[1])))
        z_min, z_max = self.root_z_range
        if not z_min <= self.nominal_root_z <= z_max:
            raise ValueError("nominal_root_z must lie within root_z_range")
        if not 0.0 < self.stride <= self.max_step_length <= self.leg_reach:
            raise ValueError("need 0 < stride <= max_step_length <= leg_reach")
        for small in self.minimal_geom:
            if not any(_box_inside(small, big) for big in self.bounding_geom):
                # Checked per enclosing box, which is stricter than union
                # containment but holds for every geometry used here.
                raise ValueError("each minimal box must fit inside a bounding box")

    def torso_boxes(self) -> tuple[Box, ...]:
        """Body volume that tracks the root: minimal footprints, fixed half-height."""
        return tuple(
            Box((b.center[0], b.center[1], 0.0), (b.half[0], b.half[1], TORSO_HALF_HEIGHT))
            for b in self.minimal_geom
        )


def _box_inside(inner: Box, outer: Box) -> bool:
    return all(
        outer.center[i] - outer.half[i] <= inner.center[i] - inner.half[i] + 1e-12
        and inner.center[i] + inner.half[i] <= outer.center[i] + outer.half[i] + 1e-12
        for i in range(3)
    )


def default_robot() -> RobotSpec:
    """Desk-scale biped defaults.

    Bounding geometry: 0.8 x 0.8 x 1.6 m box based at the floor (root at
    nominal height 0.9 m sits inside it). Minimal geometry: 0.3 x 0.3 x 0.4 m
    box centered on the root. Ducking range lets the torso top drop from
    1.2 m to 0.9 m.
    """
    return RobotSpec(
        bounding_geom=(Box((0.0, 0.0, -0.1), (0.4, 0.4, 0.8)),),
        minimal_geom=(Box((0.0, 0.0, 0.0), (0.15, 0.15, 0.2)),),
        foot_polygon=rectangle(0.0, 0.0, 0.1, 0.05),
        nominal_stance_half_width=0.15,
        nominal_root_z=0.9,
        root_z_range=(0.6, 1.0),
        leg_reach=0.5,
        max_step_length=0.4,
        stride=0.3,
    )


@dataclass(frozen=True)
class RobotState:
    """Full planner state: root pose plus the set of planted feet (1 or 2, distinct sides)."""

    root: Pose4
    stance: tuple[FootPlacement, ...]

    def __post_init__(self):
        feet = tuple(sorted(self.stance, key=lambda f: f.side.value))
        sides = [f.side for f in feet]
        if not 1 <= len(feet) <= 2 or len(set(sides)) != len(sides):
            raise ValueError("stance needs 1 or 2 feet with distinct sides")
        object.__setattr__(self, "stance", feet)

    def foot(self, side: Side) -> Optional[FootPlacement]:
        for f in self.stance:
            if f.side is side:
                return f
        return None


@dataclass(frozen=True)
class Mode:
    """A contact set: which feet are planted and where."""

    contacts: tuple[FootPlacement, ...]

    def __post_init__(self):
        feet = tuple(sorted(self.contacts, key=lambda f: f.side.value))
        sides = [f.side for f in feet]
        if not 1 <= len(feet) <= 2 or len(set(sides)) != len(sides):
            raise ValueError("mode needs 1 or 2 contacts with distinct sides")
        object.__setattr__(self, "contacts", feet)

    @classmethod
    def of(cls, state: RobotState) -> "Mode":
        return cls(state.stance)

    def contact(self, side: Side) -> Optional[FootPlacement]:
        for f in self.contacts:
            if f.side is side:
                return f
        return None

    def centroid(self) -> np.ndarray:
        pts = np.array([[f.x, f.y] for f in self.contacts])
        return pts.mean(axis=0)


def stance_feet(x: float, y: float, yaw: float, spec: RobotSpec) -> tuple[FootPlacement, FootPlacement]:
    """Both feet of the nominal stance centered at (x, y) with heading yaw."""
    hw = spec.nominal_stance_half_width
    c, s = math.cos(yaw), math.sin(yaw)
    left = FootPlacement(Side.LEFT, x - s * hw, y + c * hw, yaw)
    right = FootPlacement(Side.RIGHT, x + s * hw, y - c * hw, yaw)
    return left, right


def nominal_stance(at: Pose4, spec: RobotSpec) -> RobotState:
    """Standing state at `at`: root forced to nominal height, feet at lateral offsets."""
    root = Pose4(at.x, at.y, spec.nominal_root_z, at.yaw)
    return RobotState(root, stance_feet(at.x, at.y, at.yaw, spec))


def project_state(s: RobotState) -> Pose4:
    """Projection of a full state into the exploration space: the root pose."""
    return s.root


def foot_obstructed(f: FootPlacement, world: World, spec: RobotSpec) -> bool:
    """True iff the planted foot volume overlaps any obstacle near floor level."""
    pts = transform_polygon(spec.foot_polygon, f.x, f.y, f.yaw)
    for prism in world.obstacles:
        if prism.z_lo < FOOT_CLEAR_HEIGHT and prism.z_hi > 0.0:
            if convex_polygons_overlap(pts, prism.footprint.array()):
                return True
    return False


def foot_placement_valid(f: FootPlacement, world: World, spec: RobotSpec) -> bool:
    pose = Pose4(f.x, f.y, 0.0, f.yaw)
    return supported(spec.foot_polygon, pose, world) and not foot_obstructed(f, world, spec)


def state_feasible(s: RobotState, world: World, spec: RobotSpec) -> bool:
    """Closed-form whole-body feasibility surrogate.

    Requires: root height within the ducking range, every planted foot within
    horizontal leg reach, the rigid core and the root-tracking torso volume
    collision-free, and every planted foot supported by floor and clear of
    obstacles.
    """
    z_min, z_max = spec.root_z_range
    if not z_min - _REACH_EPS <= s.root.z <= z_max + _REACH_EPS:
        return False
    for f in s.stance:
        if math.hypot(f.x - s.root.x, f.y - s.root.y) > spec.leg_reach + _REACH_EPS:
            return False
    if collide_at(spec.minimal_geom, s.root, world):
        return False
    if collide_at(spec.torso_boxes(), s.root, world):
        return False
    for f in s.stance:
        if not foot_placement_valid(f, world, spec):
            return False
    return True


def roots_feasible(
    xs: np.ndarray,
    ys: np.ndarray,
    zs: np.ndarray,
    yaws: np.ndarray,
    stance: Sequence[FootPlacement],
    world: World,
    spec: RobotSpec,
) -> bool:
    """Vectorized state_feasible over many root poses with a fixed stance.

    Foot support/obstruction is stance-only and checked once; reach, height
    range, and body collisions are checked per root pose.
    """
    z_min, z_max = spec.root_z_range
    if np.any(zs < z_min - _REACH_EPS) or np.any(zs > z_max + _REACH_EPS):
        return False
    for f in stance:
        d2 = (xs - f.x) ** 2 + (ys - f.y) ** 2
        if np.any(d2 > (spec.leg_reach + _REACH_EPS) ** 2):
            return False
    for f in stance:
        if not foot_placement_valid(f, world, spec):
            return False
    if poses_collide(spec.minimal_geom, xs, ys, zs, yaws, world).any():
        return False
    if poses_collide(spec.torso_boxes(), xs, ys, zs, yaws, world).any():
        return False
    return True


@dataclass(frozen=True)
class FootStep:
    """One step of the canonical gait: move `side` to `placement`, then shift the root.

    root_after is None when the root stays put after the step (first half of a
    turn increment).
    """

    side: Side
    placement: FootPlacement
    root_after: Optional[Pose4]


def _turn_steps(x: float, y: float, yaw_from: float, yaw_to: float, spec: RobotSpec) -> list[FootStep]:
    d = yaw_difference(yaw_from, yaw_to)
    if abs(d) < 1e-12:
        return []
    n = max(1, int(math.ceil(abs(d) / MAX_TURN_INCREMENT - 1e-12)))
    steps: list[FootStep] = []
    for i in range(1, n + 1):
        yaw_i = yaw_to if i == n else wrap_angle(yaw_from + d * i / n)
        left, right = stance_feet(x, y, yaw_i, spec)
        steps.append(FootStep(Side.LEFT, left, None))
        steps.append(FootStep(Side.RIGHT, right, Pose4(x, y, spec.nominal_root_z, yaw_i)))
    return steps


def walk_steps(a: Pose4, b: Pose4, spec: RobotSpec) -> list[FootStep]:
    """Deterministic step plan for the canonical gait along edge (a, b).

    Turn in place at a to face b, walk the straight segment with alternating
    half-stride leading steps, then turn in place at b to the final heading.
    Everything happens at nominal root height. The placements this returns are
    exactly what the gait generator will execute, so checking their support is
    a sufficient condition for the gait to succeed (together with a clear
    bounding-geometry sweep).
    """
    znom = spec.nominal_root_z
    dx, dy = b.x - a.x, b.y - a.y
    length = math.hypot(dx, dy)
    if length < 1e-12:
        return _turn_steps(a.x, a.y, a.yaw, b.yaw, spec)

    heading = math.atan2(dy, dx)
    steps = _turn_steps(a.x, a.y, a.yaw, heading, spec)

    ux, uy = dx / length, dy / length
    half = spec.stride / 2.0

    def placement(side: Side, t: float) -> FootPlacement:
        if t >= length:
            left, right = stance_feet(b.x, b.y, heading, spec)
            return left if side is Side.LEFT else right
        left, right = stance_feet(a.x + ux * t, a.y + uy * t, heading, spec)
        return left if side is Side.LEFT else right

    t_foot = {Side.LEFT: 0.0, Side.RIGHT: 0.0}
    swing = Side.RIGHT
    while min(t_foot.values()) < length:
        support = swing.other()
        t_new = min(t_foot[support] + half, length)
        t_foot[swing] = t_new
        mid = (t_foot[Side.LEFT] + t_foot[Side.RIGHT]) / 2.0
        if mid >= length:
            root = Pose4(b.x, b.y, znom, heading)
        else:
            root = Pose4(a.x + ux * mid, a.y + uy * mid, znom, heading)
        steps.append(FootStep(swing, placement(swing, t_new), root))
        swing = support

    steps.extend(_turn_steps(b.x, b.y, heading, b.yaw, spec))
    return steps


def gait_placements(a: Pose4, b: Pose4, spec: RobotSpec) -> list[FootPlacement]:
    """Every foot placement the canonical gait uses on edge (a, b), endpoints included."""
    start = nominal_stance(a, spec)
    return list(start.stance) + [s.placement for s in walk_steps(a, b, spec)]
