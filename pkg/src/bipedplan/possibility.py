"""Possibility exploration graph: cheap edge labeling, randomized growth, guide routes.

Every candidate action (an edge between two root poses) gets a three-way
verdict. Failing the necessary conditions proves the edge infeasible, so it is
never stored; passing the sufficient conditions proves the canonical gait can
execute it; everything in between is stored as indeterminate and left for the
expensive multi-modal planner. The grower treats the necessary conditions as a
hard constraint and the sufficient conditions as a soft preference.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .geometry import Pose4, World, sweep_collides, transform_polygon, wrap_angle, yaw_difference
from .robot import RobotSpec, RobotState, gait_placements, project_state

DEFAULT_SWEEP_STEP = 0.02

# Candidate foothold directions for the necessary-condition reach test. The
# ring radius equals the nominal stance half-width and 16 divides evenly by 4,
# so the two nominal stance feet are always among the candidates; that makes
# the sufficient conditions imply the necessary ones by construction.
_FOOTHOLD_RING_CANDIDATES = 16


class PossibilityLabel(enum.Enum):
    POSSIBLE = "possible"
    INDETERMINATE = "indeterminate"
    IMPOSSIBLE = "impossible"


@dataclass(frozen=True)
class PossibilityEdge:
    """Directed view of a stored edge, carrying its endpoint poses and label."""

    from_id: int
    to_id: int
    from_pose: Pose4
    to_pose: Pose4
    label: PossibilityLabel

    def __post_init__(self):
        if self.from_id == self.to_id:
            raise ValueError("edge endpoints must differ")
        if self.label is PossibilityLabel.IMPOSSIBLE:
            raise ValueError("impossible edges are never stored")

    def reversed(self) -> "PossibilityEdge":
        return PossibilityEdge(self.to_id, self.from_id, self.to_pose, self.from_pose, self.label)


@dataclass(frozen=True)
class GuideRoute:
    """Ordered chain of edges from a start vertex to a goal vertex."""

    edges: tuple[PossibilityEdge, ...]

    def __post_init__(self):
        for e, nxt in zip(self.edges, self.edges[1:]):
            if e.to_id != nxt.from_id:
                raise ValueError("guide route edges must chain")

    def vertex_ids(self) -> list[int]:
        ids = [self.edges[0].from_id]
        ids.extend(e.to_id for e in self.edges)
        return ids


def pose_distance(a: Pose4, b: Pose4, yaw_weight: float = 0.5) -> float:
    """Exploration-space metric: Euclidean position plus weighted yaw arc."""
    d = math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)
    return d + yaw_weight * abs(yaw_difference(a.yaw, b.yaw))


def check_sufficient(
    a: Pose4, b: Pose4, world: World, spec: RobotSpec, step: float = DEFAULT_SWEEP_STEP
) -> bool:
    """Cheap conditions that guarantee the canonical gait succeeds on (a, b).

    Height is clamped to the nominal root height (the gait walks upright), the
    bounding geometry must sweep the edge without collision, and every foot
    placement of the deterministic step plan, endpoints included, must be
    supported. The swept bounding volume leaves enough margin around the body
    and feet that clearing it at the sampling density implies every gait state
    is collision-free, so no separate per-state collision check is needed.
    """
    a_nom = Pose4(a.x, a.y, spec.nominal_root_z, a.yaw)
    b_nom = Pose4(b.x, b.y, spec.nominal_root_z, b.yaw)
    if sweep_collides(spec.bounding_geom, a_nom, b_nom, step, world):
        return False
    corners = [
        transform_polygon(spec.foot_polygon, f.x, f.y, f.yaw)
        for f in gait_placements(a_nom, b_nom, spec)
    ]
    return bool(world.contains_floor_points(np.concatenate(corners)).all())


def _foothold_within_reach(p: Pose4, world: World, spec: RobotSpec) -> bool:
    radius = spec.nominal_stance_half_width
    angles = p.yaw + np.arange(_FOOTHOLD_RING_CANDIDATES) * (2.0 * math.pi / _FOOTHOLD_RING_CANDIDATES)
    foot = spec.foot_polygon.array()
    c, s = np.cos(p.yaw), np.sin(p.yaw)
    rot = np.array([[c, -s], [s, c]])
    oriented = foot @ rot.T  # candidate feet keep the root heading
    centers = np.stack([p.x + radius * np.cos(angles), p.y + radius * np.sin(angles)], axis=1)
    pts = (centers[:, None, :] + oriented[None, :, :]).reshape(-1, 2)
    ok = world.contains_floor_points(pts).reshape(_FOOTHOLD_RING_CANDIDATES, len(foot))
    return bool(ok.all(axis=1).any())


def check_necessary(
    a: Pose4, b: Pose4, world: World, spec: RobotSpec, step: float = DEFAULT_SWEEP_STEP
) -> bool:
    """Cheap conditions whose failure proves the edge infeasible.

    The rigid core (unaffected by any joint motion) must sweep the edge
    without collision, and at each endpoint at least one candidate foothold on
    a ring around the root projection must be supported.
    """
    if sweep_collides(spec.minimal_geom, a, b, step, world):
        return False
    return _foothold_within_reach(a, world, spec) and _foothold_within_reach(b, world, spec)


def label_edge(
    a: Pose4, b: Pose4, world: World, spec: RobotSpec, step: float = DEFAULT_SWEEP_STEP
) -> PossibilityLabel:
    """Three-way verdict: impossible if necessity fails, possible if sufficiency holds."""
    if not check_necessary(a, b, world, spec, step):
        return PossibilityLabel.IMPOSSIBLE
    if check_sufficient(a, b, world, spec, step):
        return PossibilityLabel.POSSIBLE
    return PossibilityLabel.INDETERMINATE


class PossibilityGraph:
    """Single-writer graph over exploration-space vertices with labeled edges.

    Edges are stored once and treated as symmetric (both checkers are
    symmetric in their endpoints); directed views are materialized on demand.
    """

    def __init__(self):
        self.vertices: dict[int, Pose4] = {}
        self.start_ids: set[int] = set()
        self.goal_ids: set[int] = set()
        self._adj: dict[int, dict[int, PossibilityLabel]] = {}
        self._next_id = 0
        self._coords: list[tuple[float, float, float, float]] = []

    @classmethod
    def from_endpoints(cls, starts: Sequence[Pose4], goals: Sequence[Pose4]) -> "PossibilityGraph":
        g = cls()
        for p in starts:
            g.start_ids.add(g.add_vertex(p))
        for p in goals:
            g.goal_ids.add(g.add_vertex(p))
        return g

    def add_vertex(self, pose: Pose4) -> int:
        vid = self._next_id
        self._next_id += 1
        self.vertices[vid] = pose
        self._adj[vid] = {}
        self._coords.append((pose.x, pose.y, pose.z, pose.yaw))
        return vid

    def add_edge(self, u: int, v: int, label: PossibilityLabel) -> None:
        if u == v:
            raise ValueError("self-loop edges are not allowed")
        if label is PossibilityLabel.IMPOSSIBLE:
            raise ValueError("impossible edges are never stored")
        prior = self._adj[u].get(v)
        if prior is PossibilityLabel.POSSIBLE:
            return  # never downgrade a verified-possible edge
        self._adj[u][v] = label
        self._adj[v][u] = label

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, {})

    def remove_edge(self, u: int, v: int) -> None:
        del self._adj[u][v]
        del self._adj[v][u]

    def edge(self, u: int, v: int) -> PossibilityEdge:
        return PossibilityEdge(u, v, self.vertices[u], self.vertices[v], self._adj[u][v])

    def edges(self) -> Iterator[PossibilityEdge]:
        for u, nbrs in self._adj.items():
            for v, label in nbrs.items():
                if u < v:
                    yield PossibilityEdge(u, v, self.vertices[u], self.vertices[v], label)

    def neighbors(self, u: int) -> dict[int, PossibilityLabel]:
        return self._adj[u]

    @property
    def edge_count(self) -> int:
        return sum(len(n) for n in self._adj.values()) // 2

    def nearest(self, pose: Pose4, yaw_weight: float = 0.5) -> int:
        coords = np.asarray(self._coords)
        d = np.sqrt(
            (coords[:, 0] - pose.x) ** 2
            + (coords[:, 1] - pose.y) ** 2
            + (coords[:, 2] - pose.z) ** 2
        )
        dyaw = np.abs(np.remainder(coords[:, 3] - pose.yaw + math.pi, 2.0 * math.pi) - math.pi)
        return int(np.argmin(d + yaw_weight * dyaw))

    def vertex_near(self, pose: Pose4, radius: float, yaw_weight: float = 0.5) -> Optional[int]:
        vid = self.nearest(pose, yaw_weight)
        if pose_distance(self.vertices[vid], pose, yaw_weight) <= radius:
            return vid
        return None


@dataclass
class GrowParams:
    """Configuration for one randomized growth iteration."""

    bounds: Optional[tuple[float, float, float, float]] = None  # x_lo, x_hi, y_lo, y_hi
    extend_step: float = 0.4
    goal_bias: float = 0.1
    soft_weight: float = 0.7
    yaw_weight: float = 0.5
    merge_radius: float = 0.06
    sweep_step: float = DEFAULT_SWEEP_STEP
    soft_probe_angles: tuple[float, ...] = (math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2)


def _steer(near: Pose4, target: Pose4, step: float, yaw_weight: float) -> Pose4:
    d = pose_distance(near, target, yaw_weight)
    if d <= step:
        return target
    t = step / d
    return Pose4(
        near.x + t * (target.x - near.x),
        near.y + t * (target.y - near.y),
        near.z + t * (target.z - near.z),
        near.yaw + t * yaw_difference(near.yaw, target.yaw),
    )


def _possible_probe_exists(
    near: Pose4, new: Pose4, world: World, spec: RobotSpec, params: GrowParams
) -> bool:
    """Is some same-length extension from `near` fully sufficient (hence possible)?"""
    ox, oy = new.x - near.x, new.y - near.y
    if math.hypot(ox, oy) < 1e-9:
        return False
    for ang in params.soft_probe_angles:
        c, s = math.cos(ang), math.sin(ang)
        probe = Pose4(near.x + c * ox - s * oy, near.y + s * ox + c * oy, new.z, new.yaw)
        if check_sufficient(near, probe, world, spec, params.sweep_step):
            return True
    return False


def grow(
    g: PossibilityGraph,
    world: World,
    spec: RobotSpec,
    rng: np.random.Generator,
    params: GrowParams,
) -> PossibilityGraph:
    """One randomized growth iteration; rejected samples leave the graph unchanged.

    Samples a target pose (uniform over the bounds and the ducking range, with
    goal bias), extends the nearest vertex toward it by at most the extension
    step, and keeps the new edge unless it is impossible. Indeterminate
    extensions are probabilistically rejected when a sufficient extension of
    the same vertex exists among a few probe directions.
    """
    if params.bounds is None:
        raise ValueError("grow requires sampling bounds")
    x_lo, x_hi, y_lo, y_hi = params.bounds
    z_lo, z_hi = spec.root_z_range
    if rng.random() < params.goal_bias and g.goal_ids:
        goal_ids = sorted(g.goal_ids)
        target = g.vertices[goal_ids[int(rng.integers(len(goal_ids)))]]
    else:
        target = Pose4(
            rng.uniform(x_lo, x_hi),
            rng.uniform(y_lo, y_hi),
            rng.uniform(z_lo, z_hi),
            rng.uniform(-math.pi, math.pi),
        )

    near_id = g.nearest(target, params.yaw_weight)
    near = g.vertices[near_id]
    new_pose = _steer(near, target, params.extend_step, params.yaw_weight)

    existing = g.vertex_near(new_pose, params.merge_radius, params.yaw_weight)
    if existing == near_id or (existing is not None and g.has_edge(near_id, existing)):
        return g

    end_pose = g.vertices[existing] if existing is not None else new_pose
    label = label_edge(near, end_pose, world, spec, params.sweep_step)
    if label is PossibilityLabel.IMPOSSIBLE:
        return g
    if label is PossibilityLabel.INDETERMINATE and rng.random() < params.soft_weight:
        if _possible_probe_exists(near, end_pose, world, spec, params):
            return g

    vid = existing if existing is not None else g.add_vertex(new_pose)
    g.add_edge(near_id, vid, label)
    return g


def find_guide_route(
    g: PossibilityGraph,
    indeterminate_penalty: float = 5.0,
    yaw_weight: float = 0.5,
) -> Optional[GuideRoute]:
    """Cheapest start-to-goal route; indeterminate edges cost extra.

    Cost is edge length times a label penalty (1 for possible edges,
    `indeterminate_penalty` >= 1 otherwise), so the search favors regions
    where the gait is already known to work.
    """
    if indeterminate_penalty < 1.0:
        raise ValueError("indeterminate penalty must be >= 1")
    dist: dict[int, float] = {}
    prev: dict[int, int] = {}
    heap: list[tuple[float, int]] = []
    for sid in sorted(g.start_ids):
        dist[sid] = 0.0
        heapq.heappush(heap, (0.0, sid))
    reached: Optional[int] = None
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        if u in g.goal_ids:
            reached = u
            break
        for v, label in g.neighbors(u).items():
            w = pose_distance(g.vertices[u], g.vertices[v], yaw_weight)
            if label is PossibilityLabel.INDETERMINATE:
                w *= indeterminate_penalty
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if reached is None:
        return None
    ids = [reached]
    while ids[-1] not in g.start_ids:
        ids.append(prev[ids[-1]])
    ids.reverse()
    if len(ids) < 2:
        return None  # start vertex is itself a goal; nothing to traverse
    return GuideRoute(tuple(g.edge(u, v) for u, v in zip(ids, ids[1:])))


def route_cost(
    g: PossibilityGraph, route: GuideRoute, indeterminate_penalty: float = 5.0, yaw_weight: float = 0.5
) -> float:
    total = 0.0
    for e in route.edges:
        w = pose_distance(e.from_pose, e.to_pose, yaw_weight)
        if e.label is PossibilityLabel.INDETERMINATE:
            w *= indeterminate_penalty
        total += w
    return total


def delete_indeterminate(g: PossibilityGraph, route: GuideRoute, which: int) -> PossibilityGraph:
    """Remove one indeterminate edge of a guide route; vertices are retained."""
    e = route.edges[which]
    if e.label is not PossibilityLabel.INDETERMINATE:
        raise ValueError("only indeterminate edges may be deleted from a route")
    if g.has_edge(e.from_id, e.to_id):
        g.remove_edge(e.from_id, e.to_id)
    return g


def promote(
    g: PossibilityGraph,
    states: Sequence[RobotState],
    spacing: float = 0.3,
    merge_radius: float = 0.06,
    yaw_weight: float = 0.5,
) -> list[tuple[int, int]]:
    """Insert the projections of a verified state path as possible vertices/edges.

    The path is decimated to roughly `spacing` between kept projections
    (endpoints always kept). Returns (vertex id, state index) pairs for the
    kept states so callers can associate trajectory slices with the new edges.
    """
    if not states:
        return []
    kept: list[tuple[int, int]] = []
    last_pose: Optional[Pose4] = None
    for i, s in enumerate(states):
        p = project_state(s)
        if last_pose is not None and i < len(states) - 1:
            if pose_distance(last_pose, p, yaw_weight) < spacing:
                continue
        vid = g.vertex_near(p, merge_radius, yaw_weight)
        if vid is None:
            vid = g.add_vertex(p)
        if kept and kept[-1][0] == vid:
            kept[-1] = (vid, i)
            last_pose = p
            continue
        if kept:
            g.add_edge(kept[-1][0], vid, PossibilityLabel.POSSIBLE)
        kept.append((vid, i))
        last_pose = p
    return kept
