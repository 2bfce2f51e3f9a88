"""Multi-modal footstep planner: a tree over contact modes with sampled transitions.

Modes alternate between double and single support. A transition keeps the
persisting contact bitwise fixed, moves the root along a densely checked
straight-line interpolation, and plants the swing foot at a sampled placement;
the state entering each mode therefore satisfies both adjacent modes at once.

Two flavors share the machinery: the uninformed one samples modes uniformly
over the whole domain, the guided one samples near a guide edge (normally
distributed around it), which is what turns an exhaustive search into a
focused one. Neither flavor is guaranteed to return a solution; an empty
trajectory signals budget exhaustion. Whether the focused variant retains the
uninformed variant's probabilistic completeness is an open question and is
not claimed here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .clock import COST_MMP_EXTEND, COST_MMP_ITER, Budget
from .gait import FAILED_TRAJECTORY, StateTrajectory
from .geometry import Pose4, World, boxset_radius, interpolate_poses, wrap_angle, yaw_difference
from .possibility import PossibilityEdge
from .robot import (
    Mode,
    RobotSpec,
    RobotState,
    foot_placement_valid,
    roots_feasible,
    stance_feet,
    state_feasible,
)


class MmpFlavor(enum.Enum):
    UNINFORMED = "uninformed"
    GUIDED = "guided"


@dataclass
class MmpConfig:
    """Sampling parameters for the multi-modal planner."""

    flavor: MmpFlavor = MmpFlavor.GUIDED
    sigma_xy: float = 0.3
    sigma_z: float = 0.15
    sigma_yaw: float = 0.3
    max_iterations: int = 200_000
    seed: int = 0
    goal_bias: float = 0.15
    root_step: float = 0.05  # interpolation density for transition feasibility
    reach_factor: float = 1.8  # max new-foot distance from support, in leg reaches

    def __post_init__(self):
        if min(self.sigma_xy, self.sigma_z, self.sigma_yaw) <= 0.0:
            raise ValueError("sigmas must be > 0")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be > 0")


@dataclass(frozen=True)
class ModeTreeNode:
    """A mode plus the state at which it was entered.

    path_from_parent holds the connecting states (exclusive of the parent's
    transition state, inclusive of this node's), so trajectories concatenate
    without duplicates.
    """

    mode: Mode
    transition_state: RobotState
    parent: Optional[int]
    path_from_parent: tuple[RobotState, ...]


@dataclass
class MmpTrace:
    """Sampled modes with accept/reject flags, for diagnostics and rendering."""

    samples: list[tuple[float, float, bool]] = field(default_factory=list)
    iterations: int = 0
    nodes_added: int = 0

    def accepted_centroids(self) -> np.ndarray:
        pts = [(x, y) for x, y, ok in self.samples if ok]
        return np.array(pts) if pts else np.empty((0, 2))


class MmpTree:
    """Search tree rooted at the sub-start state."""

    def __init__(self, root_state: RobotState):
        self.nodes: list[ModeTreeNode] = [ModeTreeNode(Mode.of(root_state), root_state, None, ())]
        self._centroids: list[tuple[float, float, int]] = [self._key(self.nodes[0].mode)]

    @staticmethod
    def _key(mode: Mode) -> tuple[float, float, int]:
        c = mode.centroid()
        return (float(c[0]), float(c[1]), len(mode.contacts))

    def add(self, node: ModeTreeNode) -> int:
        self.nodes.append(node)
        self._centroids.append(self._key(node.mode))
        return len(self.nodes) - 1

    def nearest(self, mode: Mode) -> int:
        """Closest node by contact-centroid distance, plus 0.5 m per differing contact count."""
        arr = np.asarray(self._centroids)
        c = mode.centroid()
        d = np.hypot(arr[:, 0] - c[0], arr[:, 1] - c[1]) + 0.5 * np.abs(arr[:, 2] - len(mode.contacts))
        return int(np.argmin(d))


def _guide_point(guide: PossibilityEdge, t: float) -> Pose4:
    a, b = guide.from_pose, guide.to_pose
    return Pose4(
        a.x + t * (b.x - a.x),
        a.y + t * (b.y - a.y),
        a.z + t * (b.z - a.z),
        a.yaw + t * yaw_difference(a.yaw, b.yaw),
    )


def _nearest_guide_point(guide: PossibilityEdge, x: float, y: float) -> Pose4:
    a, b = guide.from_pose, guide.to_pose
    dx, dy = b.x - a.x, b.y - a.y
    den = dx * dx + dy * dy
    t = 0.0 if den == 0.0 else min(1.0, max(0.0, ((x - a.x) * dx + (y - a.y) * dy) / den))
    return _guide_point(guide, t)


def sample_mode(
    cfg: MmpConfig,
    guide: Optional[PossibilityEdge],
    bounds: tuple[float, float, float, float],
    world: World,
    spec: RobotSpec,
    rng: np.random.Generator,
) -> Optional[Mode]:
    """Draw a candidate contact set; None when no drawn placement is valid.

    Uninformed: stance center uniform over the bounds, heading uniform.
    Guided: stance center normally distributed around a uniformly chosen point
    of the guide segment, heading normally distributed around its heading.
    """
    if cfg.flavor is MmpFlavor.GUIDED:
        if guide is None:
            raise ValueError("guided sampling requires a guide edge")
        base = _guide_point(guide, rng.uniform(0.0, 1.0))
        cx = rng.normal(base.x, cfg.sigma_xy)
        cy = rng.normal(base.y, cfg.sigma_xy)
        yaw = wrap_angle(rng.normal(base.yaw, cfg.sigma_yaw))
    else:
        x_lo, x_hi, y_lo, y_hi = bounds
        cx = rng.uniform(x_lo, x_hi)
        cy = rng.uniform(y_lo, y_hi)
        yaw = rng.uniform(-math.pi, math.pi)
    feet = [f for f in stance_feet(cx, cy, yaw, spec) if foot_placement_valid(f, world, spec)]
    if not feet:
        return None
    return Mode(tuple(feet))


def _sample_root_z(
    cfg: MmpConfig,
    guide: Optional[PossibilityEdge],
    x: float,
    y: float,
    spec: RobotSpec,
    rng: np.random.Generator,
) -> float:
    z_lo, z_hi = spec.root_z_range
    if cfg.flavor is MmpFlavor.GUIDED and guide is not None:
        base = _nearest_guide_point(guide, x, y)
        return float(min(z_hi, max(z_lo, rng.normal(base.z, cfg.sigma_z))))
    return float(rng.uniform(z_lo, z_hi))


def _body_radius(spec: RobotSpec) -> float:
    return max(boxset_radius(spec.minimal_geom), boxset_radius(spec.torso_boxes()))


def _root_path(
    r0: Pose4,
    r1: Pose4,
    stance: Sequence,
    world: World,
    spec: RobotSpec,
    step: float,
) -> Optional[list[RobotState]]:
    """Densely checked straight-line root motion with the stance fixed.

    Returns the interpolated states exclusive of r0, inclusive of r1, or None
    if any sample is infeasible.
    """
    xs, ys, zs, yaws = interpolate_poses(r0, r1, step, _body_radius(spec))
    if not roots_feasible(xs, ys, zs, yaws, stance, world, spec):
        return None
    stance_t = tuple(stance)
    return [
        RobotState(Pose4(float(x), float(y), float(z), float(w)), stance_t)
        for x, y, z, w in zip(xs[1:], ys[1:], zs[1:], yaws[1:])
    ]


def _extend(
    tree: MmpTree,
    target: Mode,
    cfg: MmpConfig,
    guide: Optional[PossibilityEdge],
    world: World,
    spec: RobotSpec,
    rng: np.random.Generator,
) -> list[int]:
    """Grow the tree toward a target mode; returns the ids of any nodes added.

    From a double-support node this inserts the intermediate single-support
    mode (lift) and then the new double-support mode (land); from a
    single-support node it lands the free foot directly.
    """
    near_id = tree.nearest(target)
    node = tree.nodes[near_id]

    candidates = []
    for f in target.contacts:
        cur = node.mode.contact(f.side)
        if cur is None or cur != f:
            candidates.append(f)
    if len(node.mode.contacts) == 1:
        free = node.mode.contacts[0].side.other()
        candidates = [f for f in candidates if f.side is free]
    if not candidates:
        return []
    new_fp = candidates[int(rng.integers(len(candidates)))] if len(candidates) > 1 else candidates[0]

    added: list[int] = []
    if len(node.mode.contacts) == 2:
        support = node.mode.contact(new_fp.side.other())
        if math.hypot(new_fp.x - support.x, new_fp.y - support.y) > cfg.reach_factor * spec.leg_reach:
            return []
        old = node.mode.centroid()
        pre_x = 0.5 * (old[0] + support.x)
        pre_y = 0.5 * (old[1] + support.y)
        r_pre = Pose4(
            pre_x,
            pre_y,
            _sample_root_z(cfg, guide, pre_x, pre_y, spec, rng),
            node.transition_state.root.yaw,
        )
        path1 = _root_path(node.transition_state.root, r_pre, node.mode.contacts, world, spec, cfg.root_step)
        if path1 is None:
            return []
        s_lift = RobotState(r_pre, (support,))
        lift_id = tree.add(ModeTreeNode(Mode((support,)), s_lift, near_id, tuple(path1) + (s_lift,)))
        added.append(lift_id)
        base_id, base_state = lift_id, s_lift
    else:
        support = node.mode.contacts[0]
        if math.hypot(new_fp.x - support.x, new_fp.y - support.y) > cfg.reach_factor * spec.leg_reach:
            return []
        base_id, base_state = near_id, node.transition_state

    land_x = 0.5 * (support.x + new_fp.x)
    land_y = 0.5 * (support.y + new_fp.y)
    r_land = Pose4(
        land_x,
        land_y,
        _sample_root_z(cfg, guide, land_x, land_y, spec, rng),
        wrap_angle(support.yaw + 0.5 * yaw_difference(support.yaw, new_fp.yaw)),
    )
    path2 = _root_path(base_state.root, r_land, (support,), world, spec, cfg.root_step)
    if path2 is None:
        return added
    s_land = RobotState(r_land, (support, new_fp))
    if not state_feasible(s_land, world, spec):
        return added
    land_id = tree.add(ModeTreeNode(Mode(s_land.stance), s_land, base_id, tuple(path2) + (s_land,)))
    added.append(land_id)
    return added


def expand(
    tree: MmpTree,
    cfg: MmpConfig,
    guide: Optional[PossibilityEdge],
    bounds: tuple[float, float, float, float],
    world: World,
    spec: RobotSpec,
    rng: np.random.Generator,
    trace: Optional[MmpTrace] = None,
) -> list[int]:
    """One sampling iteration: draw a mode, try to grow toward it. Failures are no-ops."""
    target = sample_mode(cfg, guide, bounds, world, spec, rng)
    if target is None:
        return []
    new_ids = _extend(tree, target, cfg, guide, world, spec, rng)
    if trace is not None:
        c = target.centroid()
        trace.samples.append((float(c[0]), float(c[1]), bool(new_ids)))
        trace.nodes_added += len(new_ids)
    return new_ids


def _assemble(tree: MmpTree, node_id: int, tail: list[RobotState], xf: RobotState) -> StateTrajectory:
    chain: list[tuple[RobotState, ...]] = []
    nid: Optional[int] = node_id
    while nid is not None:
        node = tree.nodes[nid]
        if node.parent is not None:
            chain.append(node.path_from_parent)
        else:
            chain.append((node.transition_state,))
        nid = node.parent
    states: list[RobotState] = []
    for part in reversed(chain):
        states.extend(part)
    states.extend(tail)
    states[-1] = xf  # interpolation lands on xf.root up to rounding; pin it exactly
    return StateTrajectory(tuple(states))


def plan_mmp(
    x0: RobotState,
    e: Optional[PossibilityEdge],
    xf: RobotState,
    cfg: MmpConfig,
    bounds: tuple[float, float, float, float],
    world: World,
    spec: RobotSpec,
    rng: Optional[np.random.Generator] = None,
    budget: Optional[Budget] = None,
    trace: Optional[MmpTrace] = None,
) -> StateTrajectory:
    """Plan from x0 to xf; empty trajectory on budget exhaustion.

    The guided flavor requires a guide edge and focuses every sample near it.
    Success requires reaching the exact goal mode (goal-biased samples carry
    the goal placements) and connecting the root to xf.
    """
    guide = e if cfg.flavor is MmpFlavor.GUIDED else None
    if cfg.flavor is MmpFlavor.GUIDED and e is None:
        raise ValueError("guided planning requires a guide edge")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if x0 == xf:
        return StateTrajectory((x0,))

    goal_mode = Mode(xf.stance)
    tree = MmpTree(x0)

    def finish(nid: int) -> Optional[StateTrajectory]:
        node = tree.nodes[nid]
        if node.mode != goal_mode:
            return None
        tail = _root_path(node.transition_state.root, xf.root, xf.stance, world, spec, cfg.root_step)
        if tail is None:
            return None
        return _assemble(tree, nid, tail, xf)

    done = finish(0)
    if done is not None:
        return done

    for _ in range(cfg.max_iterations):
        if budget is not None:
            budget.charge(COST_MMP_ITER)
            if budget.exceeded():
                break
        if trace is not None:
            trace.iterations += 1
        if rng.random() < cfg.goal_bias:
            new_ids = _extend(tree, goal_mode, cfg, guide, world, spec, rng)
            if budget is not None and new_ids:
                budget.charge(COST_MMP_EXTEND)
        else:
            new_ids = expand(tree, cfg, guide, bounds, world, spec, rng, trace)
            if budget is not None and new_ids:
                budget.charge(COST_MMP_EXTEND)
        for nid in new_ids:
            done = finish(nid)
            if done is not None:
                return done
    return FAILED_TRAJECTORY
