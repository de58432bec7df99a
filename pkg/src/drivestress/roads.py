"""Road layouts: lanes, routes, and the on-disk asset format.

A road is a set of directed lane centerlines (travel direction follows
point order), a rectangular map bound, and one route the vehicle under
test is asked to complete. Six built-in layouts cover the usual desk
cases: a wide straight arterial, a merge, left and right turns, a street
with two intersections, and an S-curve.

Layouts live on disk as versioned JSON, one file per road, and the
packaged assets are exactly what ``build_layout`` produces; the builders
stay available so users can write their own variants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigError
from .geometry import (
    cumulative_lengths,
    heading_at_arclength,
    point_at_arclength,
    project_on_polyline,
)

LANE_WIDTH = 3.5  # [m]
ROAD_IDS = (1, 2, 3, 4, 5, 6)

ASSET_FORMAT = "drivestress-road"
ASSET_VERSION = 1


@dataclass
class Lane:
    lane_id: str
    points: np.ndarray
    width: float = LANE_WIDTH
    speed_limit: float = 10.0
    cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or len(self.points) < 2:
            raise ConfigError(f"lane {self.lane_id}: needs at least two points")
        if self.width <= 0.0 or self.speed_limit <= 0.0:
            raise ConfigError(f"lane {self.lane_id}: width and speed limit must be positive")
        self.cum = cumulative_lengths(self.points)

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    def project(self, p) -> tuple[float, float]:
        """(arc length, distance) of the nearest centerline point."""
        return project_on_polyline(self.points, self.cum, p)

    def point_at(self, s: float) -> np.ndarray:
        return point_at_arclength(self.points, self.cum, s)

    def heading_at(self, s: float) -> float:
        return heading_at_arclength(self.points, self.cum, s)


class Route:
    """The path the vehicle under test must complete, with arc-length
    projection and a precomputed curvature profile for speed planning."""

    def __init__(self, waypoints):
        self.waypoints = np.asarray(waypoints, dtype=float)
        if self.waypoints.ndim != 2 or len(self.waypoints) < 2:
            raise ConfigError("route needs at least two waypoints")
        self.cum = cumulative_lengths(self.waypoints)
        self.total_length = float(self.cum[-1])
        self._curvature = self._vertex_curvature()

    def _vertex_curvature(self) -> np.ndarray:
        pts = self.waypoints
        k = np.zeros(len(pts))
        for i in range(1, len(pts) - 1):
            a, b, c = pts[i - 1], pts[i], pts[i + 1]
            ab, bc, ac = b - a, c - b, c - a
            area2 = abs(ab[0] * bc[1] - ab[1] * bc[0])
            den = np.linalg.norm(ab) * np.linalg.norm(bc) * np.linalg.norm(ac)
            k[i] = 0.0 if den == 0.0 else 2.0 * area2 / den
        return k

    def project(self, p) -> tuple[float, float]:
        return project_on_polyline(self.waypoints, self.cum, p)

    def point_at(self, s: float) -> np.ndarray:
        return point_at_arclength(self.waypoints, self.cum, s)

    def heading_at(self, s: float) -> float:
        return heading_at_arclength(self.waypoints, self.cum, s)

    def max_curvature_ahead(self, s: float, window: float) -> float:
        lo = np.searchsorted(self.cum, s, side="left")
        hi = np.searchsorted(self.cum, s + window, side="right")
        if lo >= hi:
            return 0.0
        return float(self._curvature[lo:hi].max(initial=0.0))


@dataclass
class RoadMap:
    road_id: int
    name: str
    lanes: list
    bounds: tuple  # (xmin, ymin, xmax, ymax)
    meta: dict = field(default_factory=dict)

    @property
    def speed_limit(self) -> float:
        return max(l.speed_limit for l in self.lanes)

    def contains(self, p) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= p[0] <= xmax and ymin <= p[1] <= ymax

    def nearest_lane_point(self, p, max_dist: float):
        """Nearest on-lane snap for a requested position.

        Returns (lane, arc length, distance) or None when no centerline
        comes within max_dist.
        """
        best = None
        for lane in self.lanes:
            s, d = lane.project(p)
            if d <= max_dist and (best is None or d < best[2]):
                best = (lane, s, d)
        return best


# ---------------------------------------------------------------------------
# built-in layouts


def _resample(points: np.ndarray, spacing: float) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    cum = cumulative_lengths(points)
    n = max(int(math.ceil(cum[-1] / spacing)) + 1, 2)
    s = np.linspace(0.0, cum[-1], n)
    x = np.interp(s, cum, points[:, 0])
    y = np.interp(s, cum, points[:, 1])
    return np.column_stack([x, y])


def _arc(center, radius, theta0, theta1, spacing=0.5) -> np.ndarray:
    n = max(int(abs(theta1 - theta0) * radius / spacing) + 1, 8)
    th = np.linspace(theta0, theta1, n)
    return np.column_stack(
        [center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]
    )


def _offset_path(points: np.ndarray, d: float) -> np.ndarray:
    """Parallel path offset d to the left of travel direction."""
    pts = np.asarray(points, dtype=float)
    tang = np.gradient(pts, axis=0)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    normal = np.column_stack([-tang[:, 1], tang[:, 0]])
    return pts + d * normal


def _parallel_lanes(center_path, offsets, prefix, limit, spacing=1.0):
    lanes = []
    for i, off in enumerate(offsets):
        pts = _offset_path(_resample(center_path, spacing), off)
        lanes.append(Lane(f"{prefix}{i}", pts, LANE_WIDTH, limit))
    return lanes


def _build_road1():
    # wide straight arterial, seven lanes, route on the middle one
    limit = 10.0
    center = np.array([[0.0, 0.0], [100.0, 0.0]])
    offsets = [(-3 + i) * LANE_WIDTH for i in range(7)]  # -10.5 .. +10.5
    lanes = _parallel_lanes(center, offsets, "a", limit, spacing=5.0)
    route = Route(_resample(np.array([[20.0, 0.0], [80.0, 0.0]]), 1.0))
    return RoadMap(1, "straight-arterial", lanes, (-5.0, -14.5, 105.0, 14.5)), route


def _build_road2():
    # three-lane straight with a lane merging in from the right
    limit = 9.0
    center = np.array([[0.0, 0.0], [100.0, 0.0]])
    lanes = _parallel_lanes(center, [0.0, LANE_WIDTH, 2 * LANE_WIDTH], "m", limit, spacing=5.0)
    merge = np.array(
        [[0.0, -7.0], [12.0, -6.3], [24.0, -4.6], [36.0, -2.2], [46.0, -0.4], [54.0, 0.0], [100.0, 0.0]]
    )
    lanes.append(Lane("ramp", _resample(merge, 1.0), LANE_WIDTH, limit))
    route = Route(_resample(np.array([[20.0, 0.0], [74.0, 0.0]]), 1.0))
    return RoadMap(2, "straight-merge", lanes, (-5.0, -11.0, 105.0, 11.0)), route


ROUTE_LEAD = 35.0  # [m] of lane kept behind the route origin for spawns


def _turn_path(radius: float, left: bool):
    # route origin is (0, 0); the turn starts at x = 20
    lead = np.array([[-ROUTE_LEAD, 0.0], [20.0, 0.0]])
    if left:
        arc = _arc((20.0, radius), radius, -0.5 * math.pi, 0.0)
        out_dir = np.array([0.0, 1.0])
    else:
        arc = _arc((20.0, -radius), radius, 0.5 * math.pi, 0.0)
        out_dir = np.array([0.0, -1.0])
    exit_len = 46.0 - 20.0 - 0.5 * math.pi * radius  # route tail beyond the arc
    tail0 = arc[-1]
    tail = np.array([tail0, tail0 + out_dir * (exit_len + 20.0)])
    return np.vstack([lead, arc[1:], tail[1:]])


def _slice_route(path, s0, s1):
    center = _resample(path, 0.5)
    cum = cumulative_lengths(center)
    mask = (cum >= s0 - 1e-9) & (cum <= s1 + 1e-9)
    return Route(center[mask])


def _build_turn(road_id, left):
    limit = 8.0
    radius = 10.0 if left else 9.0
    path = _turn_path(radius, left)
    offsets = [-LANE_WIDTH, 0.0, LANE_WIDTH]
    lanes = _parallel_lanes(path, offsets, "t", limit, spacing=0.75)
    route = _slice_route(path, ROUTE_LEAD, ROUTE_LEAD + 46.0)
    name = "left-turn" if left else "right-turn"
    center = _resample(path, 0.5)
    xs, ys = center[:, 0], center[:, 1]
    pad = 2 * LANE_WIDTH + 3.0
    bounds = (xs.min() - pad, ys.min() - pad, xs.max() + pad, ys.max() + pad)
    return RoadMap(road_id, name, lanes, bounds), route


def _build_road5():
    # straight main street crossed by two side streets
    limit = 10.0
    main = np.array([[-25.0, 0.0], [105.0, 0.0]])
    lanes = _parallel_lanes(main, [-LANE_WIDTH, 0.0, LANE_WIDTH], "m", limit, spacing=5.0)
    for j, x in enumerate((35.0, 55.0)):
        cross = np.array([[x, -22.0], [x, 22.0]])
        lanes += _parallel_lanes(cross, [-0.5 * LANE_WIDTH, 0.5 * LANE_WIDTH], f"x{j}", 8.0, spacing=5.0)
    route = Route(_resample(np.array([[16.0, 0.0], [72.0, 0.0]]), 1.0))
    meta = {"intersections": [[35.0, 0.0], [55.0, 0.0]]}
    return RoadMap(5, "two-intersections", lanes, (-28.0, -25.0, 108.0, 25.0), meta), route


def _build_road6():
    # S-curve: lead-in, 45 deg left arc, 45 deg right arc, lead-out
    limit = 8.0
    r = 15.0
    lead = np.array([[-ROUTE_LEAD, 0.0], [10.0, 0.0]])
    a1 = _arc((10.0, r), r, -0.5 * math.pi, -0.25 * math.pi)
    c2 = a1[-1] + r * np.array([math.cos(-0.25 * math.pi), math.sin(-0.25 * math.pi)])
    a2 = _arc(c2, r, 0.75 * math.pi, 0.5 * math.pi)
    end = a2[-1]
    tail = np.array([end, end + np.array([34.0, 0.0])])
    path = np.vstack([lead, a1[1:], a2[1:], tail[1:]])
    lanes = _parallel_lanes(path, [-LANE_WIDTH, 0.0, LANE_WIDTH], "s", limit, spacing=0.75)
    route = _slice_route(path, ROUTE_LEAD, ROUTE_LEAD + 47.0)
    center = _resample(path, 0.5)
    xs, ys = center[:, 0], center[:, 1]
    pad = 2 * LANE_WIDTH + 3.0
    bounds = (xs.min() - pad, ys.min() - pad, xs.max() + pad, ys.max() + pad)
    return RoadMap(6, "s-curve", lanes, bounds), route


_BUILDERS = {
    1: _build_road1,
    2: _build_road2,
    3: lambda: _build_turn(3, left=True),
    4: lambda: _build_turn(4, left=False),
    5: _build_road5,
    6: _build_road6,
}


def build_layout(road_id: int):
    """Construct a built-in layout programmatically.

    The packaged assets are generated from these builders; prefer
    ``load_road`` for normal use so the file format stays exercised.
    """
    if road_id not in _BUILDERS:
        raise ConfigError(f"road id out of range: {road_id!r} (valid ids are 1..6)")
    return _BUILDERS[road_id]()


# ---------------------------------------------------------------------------
# asset file format


def save_road_asset(path, road_map: RoadMap, route: Route):
    doc = {
        "format": ASSET_FORMAT,
        "version": ASSET_VERSION,
        "road_id": road_map.road_id,
        "name": road_map.name,
        "bounds": [float(v) for v in road_map.bounds],
        "lanes": [
            {
                "lane_id": l.lane_id,
                "width": l.width,
                "speed_limit": l.speed_limit,
                "points": [[float(x), float(y)] for x, y in l.points],
            }
            for l in road_map.lanes
        ],
        "route": {"waypoints": [[float(x), float(y)] for x, y in route.waypoints]},
        "meta": road_map.meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_road_asset(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != ASSET_FORMAT:
        raise ConfigError(f"not a road asset: {path}")
    if doc.get("version") != ASSET_VERSION:
        raise ConfigError(f"unsupported road asset version {doc.get('version')!r}")
    lanes = [
        Lane(l["lane_id"], np.array(l["points"]), l["width"], l["speed_limit"])
        for l in doc["lanes"]
    ]
    road_map = RoadMap(
        int(doc["road_id"]), doc["name"], lanes, tuple(doc["bounds"]), doc.get("meta", {})
    )
    route = Route(np.array(doc["route"]["waypoints"]))
    _validate_layout(road_map, route)
    return road_map, route


def _validate_layout(road_map: RoadMap, route: Route):
    xmin, ymin, xmax, ymax = road_map.bounds
    if not (xmin < xmax and ymin < ymax):
        raise ConfigError("road bounds are degenerate")
    for lane in road_map.lanes:
        for p in lane.points:
            if not road_map.contains(p):
                raise ConfigError(f"lane {lane.lane_id} leaves the map bounds")
    for p in route.waypoints:
        if not road_map.contains(p):
            raise ConfigError("route leaves the map bounds")


def load_road(road_id: int):
    """Load a built-in layout from the packaged asset files."""
    if road_id not in ROAD_IDS:
        raise ConfigError(f"road id out of range: {road_id!r} (valid ids are 1..6)")
    ref = resources.files("drivestress").joinpath(f"assets/road{road_id}.json")
    with resources.as_file(ref) as path:
        return load_road_asset(path)


def write_builtin_assets(directory):
    """Regenerate the packaged asset files from the builders."""
    import os

    os.makedirs(directory, exist_ok=True)
    for rid in ROAD_IDS:
        road_map, route = build_layout(rid)
        save_road_asset(os.path.join(directory, f"road{rid}.json"), road_map, route)
