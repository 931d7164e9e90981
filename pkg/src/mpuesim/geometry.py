"""UE motion (random waypoint with specular boundary reflection) and
panel-boresight geometry.

Angles are in degrees. Azimuth is measured counter-clockwise from +x;
elevation follows the zenith convention (0 = zenith, 90 = horizon).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class Panel(enum.IntEnum):
    P1 = 0
    P2 = 1
    P3 = 2

    @property
    def number(self) -> int:
        return int(self) + 1

    @classmethod
    def from_number(cls, n: int) -> "Panel":
        return cls(n - 1)


PANEL_AZIMUTH_OFFSET_DEG = {Panel.P1: -90.0, Panel.P2: 0.0, Panel.P3: 90.0}
PANEL_OFFSETS = np.array([PANEL_AZIMUTH_OFFSET_DEG[p] for p in Panel])


@dataclass(frozen=True)
class PanelOrientation:
    panel_id: Panel
    elevation_boresight_deg: float = 90.0

    @property
    def azimuth_offset_deg(self) -> float:
        return PANEL_AZIMUTH_OFFSET_DEG[self.panel_id]


def wrap_deg(angle):
    """Wrap to (-180, 180]."""
    a = np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0
    a = np.where(a == -180.0, 180.0, a)
    return float(a) if np.ndim(a) == 0 else a


@dataclass(frozen=True)
class MotionState:
    position: tuple[float, float]
    heading_deg: float
    speed_mps: float
    waypoint: tuple[float, float] | None = None


class HexagonRegion:
    """Regular hexagon centred at the origin.

    Parameters
    ----------
    circumradius : float
        Centre-to-vertex distance in metres.
    rotation_deg : float
        Azimuth of the first vertex.
    """

    def __init__(self, circumradius: float, rotation_deg: float = 0.0) -> None:
        self.circumradius = float(circumradius)
        self.rotation_deg = float(rotation_deg)
        ang = np.radians(rotation_deg + 60.0 * np.arange(6))
        self.vertices = circumradius * np.column_stack([np.cos(ang), np.sin(ang)])
        mid = np.radians(rotation_deg + 30.0 + 60.0 * np.arange(6))
        self.normals = np.column_stack([np.cos(mid), np.sin(mid)])
        self.apothem = circumradius * math.cos(math.pi / 6)

    def __repr__(self) -> str:
        return f"HexagonRegion(circumradius={self.circumradius}, rotation_deg={self.rotation_deg})"

    def contains(self, xy, tol: float = 1e-9):
        xy = np.asarray(xy, dtype=float)
        return np.all(xy @ self.normals.T <= self.apothem + tol, axis=-1)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def sample(self, rng: np.random.Generator) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bounds
        while True:
            p = rng.uniform((x0, y0), (x1, y1))
            if self.contains(p, tol=0.0):
                return float(p[0]), float(p[1])

    def exit_distance(self, pos, direction) -> tuple[float, int]:
        """Distance along unit ``direction`` from inside point ``pos`` to the
        boundary, and the index of the edge hit."""
        pos = np.asarray(pos, dtype=float)
        d = np.asarray(direction, dtype=float)
        dn = self.normals @ d
        slack = self.apothem - self.normals @ pos
        with np.errstate(divide="ignore"):
            t = np.where(dn > 1e-15, slack / np.where(dn > 1e-15, dn, 1.0), np.inf)
        t = np.maximum(t, 0.0)
        edge = int(np.argmin(t))
        return float(t[edge]), edge


def _unit(heading_deg: float) -> np.ndarray:
    h = math.radians(heading_deg)
    return np.array([math.cos(h), math.sin(h)])


def _heading_to(src, dst) -> float:
    return math.degrees(math.atan2(dst[1] - src[1], dst[0] - src[0])) % 360.0


def waypoint_on_ray(region: HexagonRegion, pos, heading_deg: float,
                    rng: np.random.Generator) -> tuple[float, float]:
    """Waypoint at a uniform distance along the in-region part of a ray."""
    direction = _unit(heading_deg)
    chord, _ = region.exit_distance(pos, direction)
    wp = np.asarray(pos, dtype=float) + rng.uniform(0.0, 1.0) * chord * direction
    return float(wp[0]), float(wp[1])


def step_position(motion: MotionState, dt_s: float, region: HexagonRegion,
                  rng: np.random.Generator) -> MotionState:
    """Advance one UE by ``speed * dt`` metres of path.

    Reaching the waypoint mid-step draws a new uniform waypoint and the
    remaining distance is spent on the new leg. Crossing the region boundary
    reflects the heading specularly about the edge normal; a new waypoint is
    then placed at a uniform distance along the reflected ray.
    """
    pos = np.asarray(motion.position, dtype=float)
    heading = motion.heading_deg
    waypoint = motion.waypoint
    if waypoint is None:
        waypoint = waypoint_on_ray(region, pos, heading, rng)
    remaining = motion.speed_mps * dt_s
    for _ in range(64):
        if remaining <= 0.0:
            break
        wp = np.asarray(waypoint)
        to_wp = float(np.hypot(*(wp - pos)))
        direction = _unit(heading)
        exit_t, edge = region.exit_distance(pos, direction)
        if to_wp <= remaining and to_wp <= exit_t:
            pos = wp.copy()
            remaining -= to_wp
            waypoint = region.sample(rng)
            heading = _heading_to(pos, waypoint)
            continue
        if remaining < exit_t:
            pos = pos + remaining * direction
            remaining = 0.0
            break
        # boundary hit: reflect
        pos = pos + exit_t * direction
        remaining -= exit_t
        n = region.normals[edge]
        reflected = direction - 2.0 * float(direction @ n) * n
        heading = math.degrees(math.atan2(reflected[1], reflected[0])) % 360.0
        waypoint = waypoint_on_ray(region, pos, heading, rng)
    return replace(motion, position=(float(pos[0]), float(pos[1])), heading_deg=heading,
                   waypoint=(float(waypoint[0]), float(waypoint[1])))


def panel_boresight(heading_deg: float, panel: PanelOrientation | Panel,
                    elevation_deg: float = 90.0) -> tuple[float, float]:
    """(azimuth, elevation) of a panel boresight, azimuth in (-180, 180].

    The UE screen is parallel to the ground so panel offsets are pure
    azimuth rotations of the heading."""
    if isinstance(panel, PanelOrientation):
        elevation_deg = panel.elevation_boresight_deg
        panel = panel.panel_id
    return wrap_deg(heading_deg + PANEL_AZIMUTH_OFFSET_DEG[Panel(panel)]), elevation_deg


def angular_offsets(ue_position, panel_direction, target_position) -> tuple[float, float]:
    """Direction to ``target_position`` in the frame of a boresight.

    Positions are (x, y, z) in metres; ``panel_direction`` is
    (azimuth, elevation) with elevation from zenith. Returns
    ``(delta_elevation, delta_azimuth)`` with azimuth wrapped to (-180, 180].
    """
    ue = np.asarray(ue_position, dtype=float)
    tgt = np.asarray(target_position, dtype=float)
    d = tgt - ue
    ground = math.hypot(d[0], d[1])
    if ground == 0.0 and d[2] == 0.0:
        raise ValueError("target coincides with UE position")
    az = math.degrees(math.atan2(d[1], d[0]))
    zenith = math.degrees(math.atan2(ground, d[2]))
    return zenith - panel_direction[1], wrap_deg(az - panel_direction[0])


class MobilityModel:
    """Vectorised random-waypoint motion for a UE population.

    The common case (no waypoint reached, no boundary touched) is a single
    array update; the rare UEs that hit a waypoint or the edge are advanced
    through :func:`step_position` with their own random stream.
    """

    def __init__(self, motions: list[MotionState], region: HexagonRegion,
                 rngs: list[np.random.Generator]) -> None:
        self.region = region
        self.rngs = rngs
        self.xy = np.array([m.position for m in motions], dtype=float).reshape(-1, 2)
        self.heading = np.array([m.heading_deg for m in motions], dtype=float)
        self.speed = np.array([m.speed_mps for m in motions], dtype=float)
        self.waypoint = np.empty_like(self.xy)
        for u, m in enumerate(motions):
            if m.waypoint is None:
                self.waypoint[u] = waypoint_on_ray(region, self.xy[u], self.heading[u], rngs[u])
            else:
                self.waypoint[u] = m.waypoint

    def motion(self, u: int) -> MotionState:
        return MotionState(position=(float(self.xy[u, 0]), float(self.xy[u, 1])),
                           heading_deg=float(self.heading[u]), speed_mps=float(self.speed[u]),
                           waypoint=(float(self.waypoint[u, 0]), float(self.waypoint[u, 1])))

    def step(self, dt_s: float) -> np.ndarray:
        """Advance every UE; returns the path length travelled per UE."""
        step_len = self.speed * dt_s
        to_wp = np.hypot(*(self.waypoint - self.xy).T)
        h = np.radians(self.heading)
        new_xy = self.xy + step_len[:, None] * np.column_stack([np.cos(h), np.sin(h)])
        slow = (to_wp <= step_len) | ~self.region.contains(new_xy, tol=0.0)
        self.xy = np.where(slow[:, None], self.xy, new_xy)
        for u in np.flatnonzero(slow):
            m = step_position(self.motion(int(u)), dt_s, self.region, self.rngs[u])
            self.xy[u] = m.position
            self.heading[u] = m.heading_deg
            self.waypoint[u] = m.waypoint
        return step_len
