"""Objective functions over world states and their reward transforms.

Two requirements are measured against the vehicle under test:

* no collision, tracked through a capped time-to-collision (seconds);
* route completion within a time budget, tracked through the percentage
  of the route's arc length reached so far.

Both rewards live in [0, 1] and grow as the corresponding requirement
gets closer to being violated, so a scenario generator maximizing them
is pushing toward the violation surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .geometry import footprint_distance, heading_vec
from .world import WorldState

TTC_CAP = 20.0  # [s] returned when no actor is closing

# reward_ttc normalizes 1/(1 + ln(ttc + 1)) from its range over [0, cap]
_RAW_AT_ZERO = 1.0
_RAW_AT_CAP = 1.0 / (1.0 + math.log(TTC_CAP + 1.0))


def ttc(world: WorldState) -> float:
    """Minimum time-to-collision between the AV and any actor.

    Per actor: the surface gap along the line of centers divided by the
    closing speed (the projection of relative velocity on that line).
    Non-closing actors contribute the cap. A latched collision or an
    overlapping configuration is 0 by definition.
    """
    if world.collision_latched:
        return 0.0
    best = TTC_CAP
    av_fp = world.av_footprint()
    for actor in world.actors:
        gap = footprint_distance(av_fp, actor.footprint())
        if gap <= 0.0:
            return 0.0
        rel_pos = actor.pos - world.av_pos
        dist = float(math.hypot(rel_pos[0], rel_pos[1]))
        if actor.kind == "vehicle":
            vel = actor.speed * heading_vec(actor.heading)
        else:
            vel = actor.speed * actor.walk_dir
        rel_vel = vel - world.av_vel
        closing = -(float(rel_pos @ rel_vel)) / dist
        if closing <= 1e-12:
            continue
        best = min(best, gap / closing)
    return min(best, TTC_CAP)


def rc(world: WorldState) -> float:
    """Route completion so far, in percent. Monotone within an episode:
    based on the maximum arc-length projection reached."""
    frac = world.route_progress / world.route.total_length
    return min(max(100.0 * frac, 0.0), 100.0)


def reward_ttc(ttc_value: float, collided: bool) -> float:
    """Collision risk reward: 1 on collision, else the min-max
    normalized value of 1/(1 + ln(ttc + 1)) over [0, cap]."""
    if collided:
        return 1.0
    if not math.isfinite(ttc_value) or ttc_value < 0.0:
        raise DomainError(f"ttc outside domain: {ttc_value!r}")
    raw = 1.0 / (1.0 + math.log(ttc_value + 1.0))
    value = (raw - _RAW_AT_CAP) / (_RAW_AT_ZERO - _RAW_AT_CAP)
    return min(max(value, 0.0), 1.0)


def reward_rc(rc_value: float) -> float:
    """Route-stalling reward: 0 while no progress at all has been made
    (a parked AV is not an interesting failure), else 1 - rc/100."""
    if not math.isfinite(rc_value) or rc_value < 0.0 or rc_value > 100.0:
        raise DomainError(f"route completion outside domain: {rc_value!r}")
    if rc_value == 0.0:
        return 0.0
    return 1.0 - rc_value / 100.0


def default_budget(route_length: float, speed_limit: float) -> float:
    """Time budget for the route: its length at half the speed limit."""
    return route_length / (0.5 * speed_limit)


def r2_violated(world: WorldState, budget: float) -> bool:
    """Route-completion requirement check at episode termination.

    Violated iff the remaining distance cannot be covered within the
    remaining budget even at the speed limit. Completing the route late
    also violates; completing it in time never does.
    """
    remaining = world.route.total_length * (1.0 - rc(world) / 100.0)
    return remaining / world.speed_limit > budget - world.elapsed


@dataclass
class ObjectiveSample:
    """Objective values at one simulation instant."""

    tick: int
    ttc: float
    rc: float
    collided: bool
