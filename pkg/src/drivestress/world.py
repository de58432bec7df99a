"""The 2-d driving world: actors, spawning, controllers, and the tick loop.

One world holds the vehicle under test (the AV), the NPC vehicles and
pedestrians an adversary has spawned, and a latched collision flag. All
motion is kinematic at a fixed dt. The update order inside a tick is
fixed (controls computed from the pre-tick state, then applied in actor
id order) so a world is fully deterministic given its construction
arguments and the sequence of spawns.

The AV controller is a deliberately simple stand-in for a production
stack: pure pursuit on the route, a comfort speed of 0.8x the limit
with curvature-aware slowdown, and proportional-to-emergency braking
for obstacles seen inside a forward detection cone that sit close to
the route line. Its blind spots are part of the testbed: actors
entering from the side are noticed late.

NPC vehicles hold their lane with constant-time-headway car following
(or run a 3 s lateral spline into an adjacent lane, when asked and one
exists); pedestrians walk a straight line at average walking or running
speed and freeze while anything is within their personal halt distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .geometry import Disc, Rect, footprint_distance, footprints_overlap, heading_vec, wrap_angle
from .roads import load_road

VEHICLE_LENGTH = 4.5  # [m]
VEHICLE_WIDTH = 2.0  # [m]
PED_RADIUS = 0.25  # [m] 0.5 m footprint disc

WALK_SPEED = 0.94  # [m/s]
RUN_SPEED = 1.43  # [m/s]


@dataclass
class SimParams:
    dt: float = 0.05  # [s]
    snap_dist: float = 2.0  # max offset-to-centerline distance for spawns [m]
    spawn_clearance: float = 5.0  # min distance to existing NPCs/pedestrians [m]
    ped_halt_dist: float = 2.0  # pedestrians freeze when anything is this close [m]
    # AV controller
    comfort_frac: float = 0.8  # cruise at this fraction of the speed limit
    cone_range: float = 25.0  # [m]
    cone_half_angle: float = math.radians(30.0)
    brake_headway: float = 2.5  # [s] proportional braking below this
    emergency_headway: float = 0.8  # [s] full braking below this
    av_accel: float = 3.0  # [m/s^2]
    av_brake: float = 8.0  # [m/s^2]
    path_halfwidth: float = 2.2  # obstacles beyond this lateral offset are ignored [m]
    lat_accel_max: float = 2.5  # curvature slowdown target [m/s^2]
    kappa_max: float = 0.5  # steering limit [1/m]
    standoff: float = 3.0  # surface gap the AV tries to keep when stopping [m]
    # NPC vehicles
    npc_headway: float = 1.5  # [s]
    npc_accel: float = 3.0  # |acceleration| bound [m/s^2]
    lane_change_secs: float = 3.0
    npc_speed_lo: float = 0.5  # initial speed jitter, fraction of lane limit
    npc_speed_hi: float = 0.9


@dataclass
class NpcVehicle:
    actor_id: int
    lane: object
    s: float
    speed: float
    target_speed: float
    heading: float
    pos: np.ndarray
    changing: object = None  # (dst_lane, elapsed) during a lane change

    kind = "vehicle"

    def footprint(self) -> Rect:
        return Rect(self.pos, self.heading, VEHICLE_LENGTH, VEHICLE_WIDTH)


@dataclass
class Pedestrian:
    actor_id: int
    pos: np.ndarray
    walk_dir: np.ndarray
    speed_setting: float
    halted: bool = False

    kind = "pedestrian"

    @property
    def heading(self) -> float:
        return math.atan2(self.walk_dir[1], self.walk_dir[0])

    @property
    def speed(self) -> float:
        return 0.0 if self.halted else self.speed_setting

    def footprint(self) -> Disc:
        return Disc(self.pos, PED_RADIUS)


class WorldState:
    """Mutable simulation state for one episode."""

    def __init__(self, road_map, route, params: SimParams, rng: np.random.Generator):
        self.road_map = road_map
        self.route = route
        self.params = params
        self.rng = rng

        self.av_pos = route.point_at(0.0).copy()
        self.av_heading = route.heading_at(0.0)
        self.av_speed = 0.0
        self.av_vel = np.zeros(2)
        self.av_acc = np.zeros(2)
        self.av_ang_vel = 0.0
        self.av_route_s = 0.0
        self.av_route_lat = 0.0

        self.actors: list = []
        self.tick_count = 0
        self.elapsed = 0.0
        self.collision_latched = False
        self.route_progress = 0.0  # max arc length reached, monotone
        self.next_actor_id = 1

    @property
    def speed_limit(self) -> float:
        return self.road_map.speed_limit

    def av_footprint(self) -> Rect:
        return Rect(self.av_pos, self.av_heading, VEHICLE_LENGTH, VEHICLE_WIDTH)

    def snapshot(self) -> dict:
        """Plain-data view of the world for traces."""
        return {
            "tick": self.tick_count,
            "t": self.elapsed,
            "av": {
                "x": float(self.av_pos[0]),
                "y": float(self.av_pos[1]),
                "heading": self.av_heading,
                "speed": self.av_speed,
                "vx": float(self.av_vel[0]),
                "vy": float(self.av_vel[1]),
                "ax": float(self.av_acc[0]),
                "ay": float(self.av_acc[1]),
                "yaw_rate": self.av_ang_vel,
            },
            "actors": [
                {
                    "id": a.actor_id,
                    "kind": a.kind,
                    "x": float(a.pos[0]),
                    "y": float(a.pos[1]),
                    "heading": a.heading,
                    "speed": a.speed,
                }
                for a in self.actors
            ],
            "collision": self.collision_latched,
        }


def new_world(road_id: int, seed, params: SimParams | None = None) -> WorldState:
    """Fresh world on a built-in road with the AV at the route start."""
    road_map, route = load_road(road_id)
    params = params or SimParams()
    rng = np.random.default_rng(np.random.SeedSequence([2, int(seed) & 0xFFFFFFFF]))
    return WorldState(road_map, route, params, rng)


# ---------------------------------------------------------------------------
# spawning


def _right_unit(heading: float) -> np.ndarray:
    return np.array([math.sin(heading), -math.cos(heading)])


def spawn_vehicle(world: WorldState, along: float, cross: float, behavior: str):
    """Place an NPC vehicle at an AV-relative offset, snapped to a lane.

    Returns the actor id, or None when a realism constraint rejects the
    placement (off-map, no lane within snapping distance, overlapping
    the AV, or closer than the spawn clearance to an existing actor).
    """
    if behavior not in ("change-left", "change-right", "keep-lane"):
        raise ContractError(f"unknown vehicle behavior: {behavior!r}")
    fwd = heading_vec(world.av_heading)
    requested = world.av_pos + along * fwd + cross * _right_unit(world.av_heading)
    if not world.road_map.contains(requested):
        return None
    snap = world.road_map.nearest_lane_point(requested, world.params.snap_dist)
    if snap is None:
        return None
    lane, s, _ = snap
    pos = lane.point_at(s)
    heading = lane.heading_at(s)
    npc = NpcVehicle(
        actor_id=world.next_actor_id,
        lane=lane,
        s=s,
        speed=0.0,
        target_speed=0.0,
        heading=heading,
        pos=pos,
    )
    if not _clearance_ok(world, npc.footprint(), pos):
        return None
    # speed jitter is the only randomness in the simulation
    frac = world.rng.uniform(world.params.npc_speed_lo, world.params.npc_speed_hi)
    npc.speed = npc.target_speed = frac * lane.speed_limit
    if behavior != "keep-lane":
        dst = _adjacent_lane(world, lane, s, left=(behavior == "change-left"))
        if dst is not None:
            npc.changing = [dst, 0.0]
    world.actors.append(npc)
    world.next_actor_id += 1
    return npc.actor_id


def spawn_pedestrian(world: WorldState, along: float, cross: float, direction: str, speed: float):
    """Place a pedestrian at an AV-relative offset, facing the AV's path.

    direction picks the walk vector relative to the AV's travel
    direction: "45-aligned" and "45-opposed" walk diagonally toward the
    AV line with/against travel, "90-perpendicular" crosses straight.
    """
    if direction not in ("45-aligned", "45-opposed", "90-perpendicular"):
        raise ContractError(f"unknown pedestrian direction: {direction!r}")
    if speed not in (WALK_SPEED, RUN_SPEED):
        raise ContractError(f"pedestrian speed must be {WALK_SPEED} or {RUN_SPEED}")
    fwd = heading_vec(world.av_heading)
    right = _right_unit(world.av_heading)
    requested = world.av_pos + along * fwd + cross * right
    if not world.road_map.contains(requested):
        return None
    snap = world.road_map.nearest_lane_point(requested, world.params.snap_dist)
    if snap is None:
        return None
    lane, s, _ = snap
    pos = lane.point_at(s)
    toward = -math.copysign(1.0, cross) * right  # unit vector back toward the AV line
    if direction == "45-aligned":
        walk = fwd + toward
    elif direction == "45-opposed":
        walk = -fwd + toward
    else:
        walk = toward
    walk = walk / np.linalg.norm(walk)
    ped = Pedestrian(world.next_actor_id, pos, walk, speed)
    if not _clearance_ok(world, ped.footprint(), pos):
        return None
    world.actors.append(ped)
    world.next_actor_id += 1
    return ped.actor_id


def _clearance_ok(world: WorldState, fp, pos) -> bool:
    if footprints_overlap(fp, world.av_footprint()):
        return False
    for other in world.actors:
        if float(np.linalg.norm(other.pos - pos)) < world.params.spawn_clearance:
            return False
    return True


def _adjacent_lane(world: WorldState, lane, s: float, left: bool):
    """Same-direction lane one width over, or None."""
    heading = lane.heading_at(s)
    side = 1.0 if left else -1.0
    probe = lane.point_at(s) - side * lane.width * _right_unit(heading)
    for cand in world.road_map.lanes:
        if cand is lane:
            continue
        cs, cd = cand.project(probe)
        if cd > 0.5 * lane.width:
            continue
        if abs(wrap_angle(cand.heading_at(cs) - heading)) < math.radians(30.0):
            return cand
    return None


# ---------------------------------------------------------------------------
# per-tick control and integration


def av_control(world: WorldState) -> tuple[float, float, float]:
    """(throttle, brake, steer) for the vehicle under test."""
    p = world.params
    v = world.av_speed
    s_here = world.av_route_s

    # pure pursuit toward a speed-scaled lookahead point on the route
    lookahead = min(max(0.8 * v, 2.5), 8.0)
    target = world.route.point_at(s_here + lookahead)
    to_target = target - world.av_pos
    alpha = wrap_angle(math.atan2(to_target[1], to_target[0]) - world.av_heading)
    kappa = 2.0 * math.sin(alpha) / lookahead
    steer = min(max(kappa / p.kappa_max, -1.0), 1.0)

    v_des = p.comfort_frac * world.speed_limit
    k_ahead = world.route.max_curvature_ahead(s_here, 15.0)
    if k_ahead > 1e-6:
        v_des = min(v_des, math.sqrt(p.lat_accel_max / k_ahead))

    headway = math.inf
    av_fp = world.av_footprint()
    for actor in world.actors:
        rel = actor.pos - world.av_pos
        dist = float(np.linalg.norm(rel))
        if dist > p.cone_range:
            continue
        bearing = wrap_angle(math.atan2(rel[1], rel[0]) - world.av_heading)
        if abs(bearing) > p.cone_half_angle:
            continue
        s_a, lat_a = world.route.project(actor.pos)
        if lat_a > p.path_halfwidth or s_a < s_here - 2.0:
            continue  # not on the path ahead
        gap = footprint_distance(av_fp, actor.footprint()) - p.standoff
        headway = min(headway, max(gap, 0.0) / max(v, 0.5))

    brake = 0.0
    if headway < p.emergency_headway:
        brake = 1.0
    elif headway < p.brake_headway:
        brake = (p.brake_headway - headway) / (p.brake_headway - p.emergency_headway)

    throttle = 0.0
    if brake == 0.0:
        throttle = min(max(0.5 * (v_des - v), 0.0), 1.0)
    return throttle, brake, steer


def _npc_acceleration(world: WorldState, npc: NpcVehicle, lane_s_cache: dict) -> float:
    """Constant-time-headway car following against the nearest leader."""
    p = world.params
    lead_gap = math.inf
    lead_speed = 0.0
    key = id(npc.lane)
    for s_o, speed_o, half_len in lane_s_cache.get(key, ()):
        ahead = s_o - npc.s
        if 0.0 < ahead < 40.0:
            gap = ahead - 0.5 * VEHICLE_LENGTH - half_len
            if gap < lead_gap:
                lead_gap = gap
                lead_speed = speed_o
    accel = 1.0 * (npc.target_speed - npc.speed)
    if math.isfinite(lead_gap):
        desired = p.npc_headway * npc.speed
        cth = 0.5 * (lead_gap - desired) + 1.0 * (lead_speed - npc.speed)
        accel = min(accel, cth)
    return min(max(accel, -p.npc_accel), p.npc_accel)


def _lane_occupancy(world: WorldState) -> dict:
    """For each lane in use by an NPC: (s, speed, half_length) of every
    other object near that lane, for leader scans."""
    lanes = {}
    for a in world.actors:
        if a.kind == "vehicle":
            lanes.setdefault(id(a.lane), a.lane)
    cache: dict = {k: [] for k in lanes}
    for key, lane in lanes.items():
        entries = cache[key]
        s, d = lane.project(world.av_pos)
        if d <= 0.5 * lane.width + 0.6:
            entries.append((s, world.av_speed, 0.5 * VEHICLE_LENGTH))
        for a in world.actors:
            if a.kind == "vehicle":
                if id(a.lane) == key:
                    entries.append((a.s, a.speed, 0.5 * VEHICLE_LENGTH))
                    continue
                half = 0.5 * VEHICLE_LENGTH
            else:
                half = PED_RADIUS
            s, d = lane.project(a.pos)
            if d <= 0.5 * lane.width + 0.6:
                entries.append((s, a.speed if a.kind == "vehicle" else 0.0, half))
    return cache


def _smoothstep(t: float) -> float:
    t = min(max(t, 0.0), 1.0)
    return t * t * (3.0 - 2.0 * t)


def _advance_npc(world: WorldState, npc: NpcVehicle, accel: float):
    p = world.params
    npc.speed = min(max(npc.speed + accel * p.dt, 0.0), npc.lane.speed_limit)
    npc.s += npc.speed * p.dt
    if npc.s >= npc.lane.length:  # lane runs out: stop at its end
        npc.s = npc.lane.length
        npc.speed = 0.0
    base = npc.lane.point_at(npc.s)
    if npc.changing is not None:
        dst, elapsed = npc.changing
        elapsed += p.dt
        ds, _ = dst.project(base)
        offset = dst.point_at(ds) - base
        frac = _smoothstep(elapsed / p.lane_change_secs)
        new_pos = base + frac * offset
        if elapsed >= p.lane_change_secs:
            npc.lane = dst
            npc.s, _ = dst.project(new_pos)
            npc.changing = None
        else:
            npc.changing = [dst, elapsed]
    else:
        new_pos = base
    move = new_pos - npc.pos
    if float(move @ move) > 1e-12:
        npc.heading = math.atan2(move[1], move[0])
    else:
        npc.heading = npc.lane.heading_at(npc.s)
    npc.pos = new_pos
    if not world.road_map.contains(npc.pos):  # hold at the map edge
        npc.pos = npc.pos - move
        npc.speed = 0.0


def _advance_ped(world: WorldState, ped: Pedestrian, halted: bool):
    ped.halted = halted
    if halted:
        return
    new_pos = ped.pos + ped.walk_dir * (ped.speed_setting * world.params.dt)
    if world.road_map.contains(new_pos):
        ped.pos = new_pos
    else:
        ped.halted = True


def tick(world: WorldState) -> WorldState:
    """Advance the world by one dt. Controls are computed from the
    pre-tick state for every agent, then applied in a fixed order."""
    p = world.params

    throttle, brake, steer = av_control(world)
    occupancy = _lane_occupancy(world)
    npc_accels = {
        a.actor_id: _npc_acceleration(world, a, occupancy)
        for a in world.actors
        if a.kind == "vehicle"
    }
    ped_halts = {}
    for a in world.actors:
        if a.kind != "pedestrian":
            continue
        fp = a.footprint()
        near = footprint_distance(fp, world.av_footprint()) < p.ped_halt_dist
        if not near:
            for other in world.actors:
                if other is a:
                    continue
                if footprint_distance(fp, other.footprint()) < p.ped_halt_dist:
                    near = True
                    break
        ped_halts[a.actor_id] = near

    # apply AV motion
    a_long = throttle * p.av_accel - brake * p.av_brake
    new_speed = max(world.av_speed + a_long * p.dt, 0.0)
    new_heading = wrap_angle(world.av_heading + new_speed * steer * p.kappa_max * p.dt)
    new_pos = world.av_pos + new_speed * p.dt * heading_vec(new_heading)
    new_vel = new_speed * heading_vec(new_heading)
    world.av_acc = (new_vel - world.av_vel) / p.dt
    world.av_ang_vel = wrap_angle(new_heading - world.av_heading) / p.dt
    world.av_pos, world.av_heading = new_pos, new_heading
    world.av_speed, world.av_vel = new_speed, new_vel

    for actor in world.actors:
        if actor.kind == "vehicle":
            _advance_npc(world, actor, npc_accels[actor.actor_id])
        else:
            _advance_ped(world, actor, ped_halts[actor.actor_id])

    world.av_route_s, world.av_route_lat = world.route.project(world.av_pos)
    world.route_progress = max(world.route_progress, world.av_route_s)
    world.tick_count += 1
    world.elapsed += p.dt

    if not world.collision_latched:
        av_fp = world.av_footprint()
        for actor in world.actors:
            if footprints_overlap(av_fp, actor.footprint()):
                world.collision_latched = True
                break
    return world
