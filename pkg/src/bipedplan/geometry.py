"""Planar-world geometry: poses, convex polygons, prism obstacles, collision and support tests.

The world model is a flat floor made of convex polygons (gaps are simply the
absence of floor) plus extruded convex prisms as obstacles. Robot geometry is
a set of axis-aligned boxes in the root frame; a pose rotates them about z and
translates them, so in the world they are z-aligned oriented boxes. All
collision tests are exact per pose (separating-axis); swept checks use dense
pose sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TAU = 2.0 * math.pi

# Boundary tolerance: points exactly on a floor-polygon edge count as inside,
# so feet may straddle abutting floor tiles.
_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.remainder(a, TAU)
    if r <= -math.pi:
        r += TAU
    return r


def yaw_difference(a: float, b: float) -> float:
    """Shortest signed arc from yaw a to yaw b, in (-pi, pi]."""
    return wrap_angle(b - a)


@dataclass(frozen=True)
class Pose4:
    """Root-link transform reduced to 4 DOF: planar position, height, heading.

    yaw is normalized to (-pi, pi] on construction; z must be >= 0.
    """

    x: float
    y: float
    z: float
    yaw: float

    def __post_init__(self):
        if self.z < 0.0:
            raise ValueError(f"Pose4 z must be >= 0, got {self.z}")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class ConvexPolygon2:
    """Convex planar polygon, counter-clockwise winding, non-degenerate."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise ValueError("polygon needs >= 3 planar vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross < -_EPS):
            raise ValueError("polygon must be convex with counter-clockwise winding")
        area = 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))
        if area <= _EPS:
            raise ValueError(f"polygon area must be positive, got {area}")
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in v))

    def array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def area(self) -> float:
        v = self.array()
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))

    def centroid(self) -> np.ndarray:
        return self.array().mean(axis=0)

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Boundary-inclusive membership test for an (n, 2) array of points."""
        v = self.array()
        e = np.roll(v, -1, axis=0) - v  # (m, 2) CCW edges
        rel = points[:, None, :] - v[None, :, :]  # (n, m, 2)
        cross = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= -_EPS, axis=1)


def rectangle(cx: float, cy: float, half_x: float, half_y: float, yaw: float = 0.0) -> ConvexPolygon2:
    """Convenience constructor for a (possibly rotated) rectangle polygon."""
    c, s = math.cos(yaw), math.sin(yaw)
    corners = []
    for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        px, py = sx * half_x, sy * half_y
        corners.append((cx + c * px - s * py, cy + s * px + c * py))
    return ConvexPolygon2(tuple(corners))


@dataclass(frozen=True)
class ObstaclePrism:
    """Vertical extrusion of a convex footprint over the height interval [z_lo, z_hi]."""

    footprint: ConvexPolygon2
    z_lo: float
    z_hi: float

    def __post_init__(self):
        if not self.z_lo < self.z_hi:
            raise ValueError(f"prism needs z_lo < z_hi, got [{self.z_lo}, {self.z_hi}]")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in the robot root frame: center offset and half-extents (meters)."""

    center: tuple[float, float, float]
    half: tuple[float, float, float]

    def __post_init__(self):
        if min(self.half) <= 0.0:
            raise ValueError(f"box half-extents must be strictly positive, got {self.half}")


BoxSet = tuple  # tuple[Box, ...]; kept as a plain tuple for cheap hashing/iteration


def make_boxset(boxes: Sequence[Box]) -> tuple[Box, ...]:
    bs = tuple(boxes)
    if not bs:
        raise ValueError("box set must be non-empty")
    return bs


def boxset_radius(geom: Sequence[Box]) -> float:
    """Max horizontal distance from the root axis to any box corner.

    Used to convert a linear sampling step into a yaw step: a yaw increment
    d moves a point at radius r by about r*d.
    """
    r = 0.0
    for b in geom:
        cx, cy, _ = b.center
        hx, hy, _ = b.half
        r = max(r, math.hypot(abs(cx) + hx, abs(cy) + hy))
    return r


@dataclass(frozen=True)
class World:
    """Flat environment: walkable floor polygons plus prism obstacles."""

    floor: tuple[ConvexPolygon2, ...]
    obstacles: tuple[ObstaclePrism, ...] = ()

    def __post_init__(self):
        if not self.floor:
            raise ValueError("world needs at least one floor polygon")
        object.__setattr__(self, "floor", tuple(self.floor))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def contains_floor_points(self, points: np.ndarray) -> np.ndarray:
        """True per point iff it lies in the union of floor polygons (boundary counts)."""
        inside = np.zeros(len(points), dtype=bool)
        for poly in self.floor:
            remaining = ~inside
            if not remaining.any():
                break
            inside[remaining] = poly.contains_points(points[remaining])
        return inside


def _prism_cache(prism: ObstaclePrism):
    v = prism.footprint.array()
    e = np.roll(v, -1, axis=0) - v
    normals = np.stack([e[:, 1], -e[:, 0]], axis=1)  # outward for CCW
    proj = v @ normals.T  # (m, m)
    return v, normals, proj.min(axis=0), proj.max(axis=0)


def _boxes_hit_prism(
    prism: ObstaclePrism,
    centers: np.ndarray,
    yaws: np.ndarray,
    half_xy: np.ndarray,
    z_lo: np.ndarray,
    z_hi: np.ndarray,
) -> np.ndarray:
    """Separating-axis test of n z-aligned oriented boxes against one prism.

    centers: (n, 2) world box centers; z_lo/z_hi: (n,) box z intervals.
    Overlap must be strict: shapes that merely touch do not collide.
    """
    hit = (z_lo < prism.z_hi) & (prism.z_lo < z_hi)
    if not hit.any():
        return hit

    verts, normals, pmin, pmax = _prism_cache(prism)
    c, s = np.cos(yaws), np.sin(yaws)
    u = np.stack([c, s], axis=1)  # box local x axis, (n, 2)
    w = np.stack([-s, c], axis=1)  # box local y axis
    hx, hy = half_xy

    # Box axes: polygon vertex projections vs box interval.
    for axis, h in ((u, hx), (w, hy)):
        cd = np.einsum("ij,ij->i", centers, axis)
        vp = verts @ axis.T  # (m, n)
        sep = (vp.max(axis=0) <= cd - h) | (vp.min(axis=0) >= cd + h)
        hit &= ~sep
        if not hit.any():
            return hit

    # Polygon edge normals: box extent along each normal.
    cn = centers @ normals.T  # (n, m)
    un = u @ normals.T
    wn = w @ normals.T
    ext = hx * np.abs(un) + hy * np.abs(wn)
    sep = (cn + ext <= pmin[None, :]) | (cn - ext >= pmax[None, :])
    hit &= ~np.any(sep, axis=1)
    return hit


def poses_collide(
    geom: Sequence[Box],
    xs: np.ndarray,
    ys: np.ndarray,
    zs: np.ndarray,
    yaws: np.ndarray,
    world: World,
) -> np.ndarray:
    """Vectorized collide_at over n poses; returns a boolean array of length n."""
    n = len(xs)
    out = np.zeros(n, dtype=bool)
    if not world.obstacles:
        return out
    pos = np.stack([xs, ys], axis=1)
    c, s = np.cos(yaws), np.sin(yaws)
    for box in geom:
        cx, cy, cz = box.center
        hx, hy, hz = box.half
        centers = np.stack([pos[:, 0] + c * cx - s * cy, pos[:, 1] + s * cx + c * cy], axis=1)
        blo = zs + cz - hz
        bhi = zs + cz + hz
        rad = math.hypot(hx, hy)
        for prism in world.obstacles:
            todo = ~out
            if not todo.any():
                return out
            # Broadphase: circumscribed-circle vs footprint bounding box.
            fp = prism.footprint.array()
            near = (
                (centers[:, 0] + rad > fp[:, 0].min())
                & (centers[:, 0] - rad < fp[:, 0].max())
                & (centers[:, 1] + rad > fp[:, 1].min())
                & (centers[:, 1] - rad < fp[:, 1].max())
            )
            todo &= near
            if not todo.any():
                continue
            idx = np.nonzero(todo)[0]
            out[idx] |= _boxes_hit_prism(
                prism, centers[idx], yaws[idx], (hx, hy), blo[idx], bhi[idx]
            )
    return out


def collide_at(geom: Sequence[Box], pose: Pose4, world: World) -> bool:
    """True iff any box of geom, placed at pose, intersects any obstacle prism."""
    return bool(
        poses_collide(
            geom,
            np.array([pose.x]),
            np.array([pose.y]),
            np.array([pose.z]),
            np.array([pose.yaw]),
            world,
        )[0]
    )


def interpolate_poses(a: Pose4, b: Pose4, step: float, radius: float = 0.0) -> tuple[np.ndarray, ...]:
    """Pose samples from a to b: linear in position, shortest-arc in yaw.

    Consecutive samples differ by at most `step` in position and at most
    step/radius in yaw (when radius > 0). Returns (xs, ys, zs, yaws) arrays
    including both endpoints.
    """
    dx, dy, dz = b.x - a.x, b.y - a.y, b.z - a.z
    dyaw = yaw_difference(a.yaw, b.yaw)
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    segs = dist / step
    if radius > 0.0:
        segs = max(segs, abs(dyaw) * radius / step)
    n = max(1, int(math.ceil(segs - 1e-12)))
    if dist == 0.0 and dyaw == 0.0:
        n = 0
    t = np.linspace(0.0, 1.0, n + 1)
    return (a.x + t * dx, a.y + t * dy, a.z + t * dz, a.yaw + t * dyaw)


def sweep_collides(geom: Sequence[Box], a: Pose4, b: Pose4, step: float, world: World) -> bool:
    """Dense-sampling swept collision check from pose a to pose b.

    Not exact continuous collision detection: obstacles thinner than `step`
    along the path can slip between samples.
    """
    if step <= 0.0:
        raise ValueError(f"sweep step must be > 0, got {step}")
    xs, ys, zs, yaws = interpolate_poses(a, b, step, boxset_radius(geom))
    return bool(poses_collide(geom, xs, ys, zs, yaws, world).any())


def convex_polygons_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Strict SAT overlap test between two convex CCW vertex arrays (touching = no overlap)."""
    for pts in (a, b):
        e = np.roll(pts, -1, axis=0) - pts
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
        pa = a @ normals.T
        pb = b @ normals.T
        if np.any((pa.max(axis=0) <= pb.min(axis=0)) | (pb.max(axis=0) <= pa.min(axis=0))):
            return False
    return True


def transform_polygon(polygon: ConvexPolygon2, x: float, y: float, yaw: float) -> np.ndarray:
    """World-frame vertex array of a polygon placed at (x, y) with heading yaw."""
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    return polygon.array() @ rot.T + np.array([x, y])


def supported(polygon: ConvexPolygon2, pose: Pose4, world: World) -> bool:
    """True iff every vertex of polygon, placed at pose (x, y, yaw), is on the floor union."""
    v = polygon.array()
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    rot = np.array([[c, -s], [s, c]])
    pts = v @ rot.T + np.array([pose.x, pose.y])
    return bool(world.contains_floor_points(pts).all())


def points_supported(points: np.ndarray, world: World) -> bool:
    """True iff every (x, y) row of points lies on the floor union."""
    return bool(world.contains_floor_points(points).all())
