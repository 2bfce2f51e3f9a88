"""Deterministic gait generator for edges that satisfy the sufficient conditions.

This is the cheap sub-planner: it never searches. It expands the canonical
step plan (turn in place, walk straight with alternating steps, turn in place)
into a discretized state trajectory. On any edge labeled possible it is
guaranteed to succeed, which is what makes the possible label meaningful.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .geometry import Pose4, World
from .possibility import PossibilityEdge, PossibilityLabel
from .robot import RobotSpec, RobotState, Side, nominal_stance, walk_steps


@dataclass(frozen=True)
class StateTrajectory:
    """Discretized state path; an empty tuple encodes planner failure."""

    states: tuple[RobotState, ...]

    @property
    def failed(self) -> bool:
        return len(self.states) == 0

    def __len__(self) -> int:
        return len(self.states)

    def path_length(self) -> float:
        total = 0.0
        for a, b in zip(self.states, self.states[1:]):
            dx, dy = b.root.x - a.root.x, b.root.y - a.root.y
            total += (dx * dx + dy * dy) ** 0.5
        return total


FAILED_TRAJECTORY = StateTrajectory(())


class EdgeEnd(enum.Enum):
    START = "start"
    GOAL = "goal"


def gait_endpoints(e: PossibilityEdge, end: EdgeEnd, spec: RobotSpec) -> set[RobotState]:
    """Admissible sub-start/sub-goal states for the gait on edge e.

    A singleton by design: the nominal stance at the corresponding vertex.
    Consecutive possible edges therefore always share a junction state.
    """
    if e.label is not PossibilityLabel.POSSIBLE:
        raise ValueError("gait endpoints are only defined for possible edges")
    pose = e.from_pose if end is EdgeEnd.START else e.to_pose
    return {nominal_stance(pose, spec)}


def plan_gait(
    x0: RobotState,
    e: PossibilityEdge,
    xf: RobotState,
    world: World,
    spec: RobotSpec,
) -> StateTrajectory:
    """Execute the canonical gait along a possible edge.

    Each step expands to a lift state (swing foot removed), a land state
    (swing foot planted at its new placement), and, when the root advances, a
    root-shift state with the stance fixed. Guaranteed to return at least one
    state when the preconditions hold; an edge that is not possible is a
    contract violation, not a planning failure.
    """
    if e.label is not PossibilityLabel.POSSIBLE:
        raise ValueError("plan_gait requires a possible edge")
    if x0 not in gait_endpoints(e, EdgeEnd.START, spec):
        raise ValueError("x0 is not an admissible sub-start for this edge")
    if xf not in gait_endpoints(e, EdgeEnd.GOAL, spec):
        raise ValueError("xf is not an admissible sub-goal for this edge")
    del world  # feasibility is implied by the sufficient conditions

    states = [x0]
    stance = {f.side: f for f in x0.stance}
    root = x0.root
    for step in walk_steps(e.from_pose, e.to_pose, spec):
        keep = stance[step.side.other()]
        states.append(RobotState(root, (keep,)))
        stance[step.side] = step.placement
        planted = (stance[Side.LEFT], stance[Side.RIGHT])
        states.append(RobotState(root, planted))
        if step.root_after is not None and step.root_after != root:
            root = step.root_after
            states.append(RobotState(root, planted))

    if states[-1] != xf:
        raise RuntimeError("gait did not terminate at the requested sub-goal")
    states[-1] = xf
    return StateTrajectory(tuple(states))
