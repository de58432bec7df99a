"""The scenario-control problem as a two-objective MDP.

The adversary observes a 15-feature summary of the vehicle under test
(position, rotation, velocity, acceleration, angular velocity, three
components each with the planar third component fixed at zero), picks
one of 36 catalog actions that inject an NPC vehicle or a pedestrian at
an AV-relative offset, and the world then runs for one time step of 40
ticks. The step's vector reward is the componentwise maximum of the
per-instant reward transforms, so a single dangerous instant inside the
step is enough to register.

Episodes run for at most 6 time steps and terminate early on collision
or route completion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError, DomainError
from .objectives import (
    ObjectiveSample,
    default_budget,
    r2_violated,
    rc,
    reward_rc,
    reward_ttc,
    ttc,
)
from .world import (
    RUN_SPEED,
    WALK_SPEED,
    SimParams,
    WorldState,
    new_world,
    spawn_pedestrian,
    spawn_vehicle,
    tick,
)

STEPS_PER_EPISODE = 6
TICKS_PER_STEP = 40

N_OBJECTIVES = 2
STATE_DIM = 15

# fixed kinematic scaling bounds, symmetric around zero
VEL_BOUND = 30.0  # [m/s]
ACC_BOUND = 10.0  # [m/s^2]
YAW_RATE_BOUND = 3.0  # [rad/s]


def encode_state(world: WorldState) -> np.ndarray:
    """15 features min-max scaled to [-1, 1] with fixed per-road bounds.

    Blocks of three: position (x, y, 0 within map bounds), rotation
    (yaw, 0, 0 over [-pi, pi]), velocity, acceleration, yaw rate (each
    over symmetric bounds). Padded planar components stay exactly 0.
    """
    xmin, ymin, xmax, ymax = world.road_map.bounds
    px = 2.0 * (world.av_pos[0] - xmin) / (xmax - xmin) - 1.0
    py = 2.0 * (world.av_pos[1] - ymin) / (ymax - ymin) - 1.0
    raw = np.array(
        [
            px,
            py,
            0.0,
            world.av_heading / math.pi,
            0.0,
            0.0,
            world.av_vel[0] / VEL_BOUND,
            world.av_vel[1] / VEL_BOUND,
            0.0,
            world.av_acc[0] / ACC_BOUND,
            world.av_acc[1] / ACC_BOUND,
            0.0,
            world.av_ang_vel / YAW_RATE_BOUND,
            0.0,
            0.0,
        ]
    )
    if not np.all(np.isfinite(raw)):
        raise DomainError("state encoding hit a non-finite kinematic value")
    return np.clip(raw, -1.0, 1.0)


@dataclass(frozen=True)
class ActionSpec:
    """One catalog entry: what to spawn and where, relative to the AV."""

    index: int
    kind: str  # "vehicle" | "pedestrian"
    along: float  # [m] along the AV heading
    cross: float  # [m] to the right of the AV heading
    behavior: str | None = None  # vehicles
    direction: str | None = None  # pedestrians
    speed: float | None = None  # pedestrians


VEHICLE_ALONG = (-20.0, 0.0, 20.0)
VEHICLE_CROSS = (-3.5, 0.0, 3.5)
VEHICLE_BEHAVIORS = ("change-left", "change-right", "keep-lane")
PED_ALONG = 10.0
PED_CROSS = (-10.0, 10.0)
PED_DIRECTIONS = ("45-aligned", "45-opposed", "90-perpendicular")
PED_SPEEDS = (WALK_SPEED, RUN_SPEED)


def _build_catalog() -> tuple:
    specs = []
    for along in VEHICLE_ALONG:
        for cross in VEHICLE_CROSS:
            if along == 0.0 and cross == 0.0:
                continue  # on top of the AV
            for behavior in VEHICLE_BEHAVIORS:
                specs.append(
                    ActionSpec(len(specs), "vehicle", along, cross, behavior=behavior)
                )
    for cross in PED_CROSS:
        for direction in PED_DIRECTIONS:
            for speed in PED_SPEEDS:
                specs.append(
                    ActionSpec(
                        len(specs), "pedestrian", PED_ALONG, cross,
                        direction=direction, speed=speed,
                    )
                )
    return tuple(specs)


_CATALOG = _build_catalog()
N_ACTIONS = len(_CATALOG)


def action_catalog() -> tuple:
    """All 36 actions: 24 vehicle placements x behaviors, then 12
    pedestrian placements x direction x speed, in fixed index order."""
    return _CATALOG


def decode_action(index: int) -> ActionSpec:
    if not 0 <= index < N_ACTIONS:
        raise ContractError(f"action index out of range: {index!r}")
    return _CATALOG[index]


def apply_action(world: WorldState, index: int):
    """Spawn per the catalog entry. Returns the actor id or None when a
    realism constraint rejected the placement (the action is consumed
    either way)."""
    spec = decode_action(index)
    if spec.kind == "vehicle":
        return spawn_vehicle(world, spec.along, spec.cross, spec.behavior)
    return spawn_pedestrian(world, spec.along, spec.cross, spec.direction, spec.speed)


def aggregate_reward(instants) -> np.ndarray:
    """Step reward: componentwise max of the per-instant transforms.

    With a single instant this is the identity on the transformed
    objectives."""
    if not instants:
        raise ContractError("cannot aggregate an empty instant sequence")
    r1 = max(reward_ttc(s.ttc, s.collided) for s in instants)
    r2 = max(reward_rc(s.rc) for s in instants)
    return np.array([r1, r2])


@dataclass
class StepOutcome:
    state: np.ndarray
    reward: np.ndarray
    terminal: str  # "running" | "collision" | "completed" | "timeout"
    instants: list
    spawned_id: object = None

    @property
    def done(self) -> bool:
        return self.terminal != "running"


def run_time_step(
    world: WorldState,
    action_index: int,
    ticks_per_step: int = TICKS_PER_STEP,
    max_ticks: int = STEPS_PER_EPISODE * TICKS_PER_STEP,
    trace=None,
) -> StepOutcome:
    """Apply one action and advance the world by one time step.

    The spawn happens first; the world then ticks until the step ends
    or the episode terminates (collision, route completed, or the
    episode tick budget runs out)."""
    spawned = apply_action(world, action_index)
    if trace is not None:
        trace.step(world.tick_count // ticks_per_step, action_index, spawned)
    instants = []
    terminal = "running"
    for _ in range(ticks_per_step):
        tick(world)
        sample = ObjectiveSample(world.tick_count, ttc(world), rc(world), world.collision_latched)
        instants.append(sample)
        if trace is not None:
            trace.tick(world, sample)
        if sample.collided:
            terminal = "collision"
            break
        if sample.rc >= 100.0:
            terminal = "completed"
            break
    if terminal == "running" and world.tick_count >= max_ticks:
        terminal = "timeout"
    return StepOutcome(encode_state(world), aggregate_reward(instants), terminal, instants, spawned)


# ---------------------------------------------------------------------------
# episodes


RECORD_SCHEMA_VERSION = 1


@dataclass
class EpisodeRecord:
    """Everything the metrics layer needs about one episode."""

    road_id: int
    seed: int
    actions: list
    spawned: list
    terminal: str
    collided: bool  # requirement R1 violated
    r2: bool  # completion requirement infeasible at termination
    r2_inclusive: bool  # r2 or collided (collision precludes completion)
    final_rc: float
    mean_ttc: float
    step_ttc: list = field(default_factory=list)  # per-step mean of instants
    step_rc: list = field(default_factory=list)  # per-step final value
    step_rewards: list = field(default_factory=list)
    elapsed: float = 0.0
    budget: float = 0.0

    @property
    def r1(self) -> bool:
        return self.collided

    @property
    def joint(self) -> bool:
        return self.collided and self.r2

    def to_dict(self) -> dict:
        return {
            "schema_version": RECORD_SCHEMA_VERSION,
            "road_id": self.road_id,
            "seed": self.seed,
            "actions": list(self.actions),
            "spawned": [s if s is None else int(s) for s in self.spawned],
            "terminal": self.terminal,
            "r1": self.collided,
            "r2": self.r2,
            "r2_inclusive": self.r2_inclusive,
            "final_rc": self.final_rc,
            "mean_ttc": self.mean_ttc,
            "step_ttc": list(self.step_ttc),
            "step_rc": list(self.step_rc),
            "step_rewards": [list(map(float, r)) for r in self.step_rewards],
            "elapsed": self.elapsed,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeRecord":
        if d.get("schema_version") != RECORD_SCHEMA_VERSION:
            raise ConfigError(f"unsupported episode record version {d.get('schema_version')!r}")
        return cls(
            road_id=d["road_id"],
            seed=d["seed"],
            actions=d["actions"],
            spawned=d["spawned"],
            terminal=d["terminal"],
            collided=d["r1"],
            r2=d["r2"],
            r2_inclusive=d["r2_inclusive"],
            final_rc=d["final_rc"],
            mean_ttc=d["mean_ttc"],
            step_ttc=d["step_ttc"],
            step_rc=d["step_rc"],
            step_rewards=[np.array(r) for r in d["step_rewards"]],
            elapsed=d["elapsed"],
            budget=d["budget"],
        )


def episode_seed(master_seed: int, episode_index: int) -> int:
    """Per-episode sub-seed: first 64-bit word of the seed sequence
    spawned from (master, index). Stable across platforms."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFF, int(episode_index)])
    return int(ss.generate_state(2, np.uint32)[0])


def run_episode(
    policy,
    road_id: int,
    seed: int,
    budget: float | None = None,
    params: SimParams | None = None,
    steps_per_episode: int = STEPS_PER_EPISODE,
    ticks_per_step: int = TICKS_PER_STEP,
    trace=None,
) -> EpisodeRecord:
    """Roll one episode under `policy(state, rng) -> action index`.

    The world and the policy get decoupled random streams derived from
    the episode seed."""
    world = new_world(road_id, seed, params)
    if budget is None:
        budget = default_budget(world.route.total_length, world.speed_limit)
    policy_rng = np.random.default_rng(np.random.SeedSequence([3, int(seed) & 0xFFFFFFFF]))
    max_ticks = steps_per_episode * ticks_per_step
    if trace is not None:
        trace.header(road_id=road_id, seed=seed, budget=budget,
                     steps_per_episode=steps_per_episode, ticks_per_step=ticks_per_step,
                     dt=world.params.dt)

    actions, spawned, step_ttc, step_rc_values, step_rewards = [], [], [], [], []
    terminal = "timeout"
    for _ in range(steps_per_episode):
        state = encode_state(world)
        action = int(policy(state, policy_rng))
        out = run_time_step(world, action, ticks_per_step, max_ticks, trace)
        actions.append(action)
        spawned.append(out.spawned_id)
        step_ttc.append(float(np.mean([s.ttc for s in out.instants])))
        step_rc_values.append(out.instants[-1].rc)
        step_rewards.append(out.reward)
        if out.done:
            terminal = out.terminal
            break

    record = EpisodeRecord(
        road_id=road_id,
        seed=seed,
        actions=actions,
        spawned=spawned,
        terminal=terminal,
        collided=world.collision_latched,
        r2=r2_violated(world, budget),
        r2_inclusive=r2_violated(world, budget) or world.collision_latched,
        final_rc=rc(world),
        mean_ttc=float(np.mean(step_ttc)),
        step_ttc=step_ttc,
        step_rc=step_rc_values,
        step_rewards=step_rewards,
        elapsed=world.elapsed,
        budget=budget,
    )
    if trace is not None:
        trace.end(record)
    return record


class ScenarioEnv:
    """Single-episode environment view used by the trainers.

    reset() builds a fresh world; step() applies one catalog action and
    returns (state, vector reward, done, info)."""

    n_actions = N_ACTIONS
    n_objectives = N_OBJECTIVES
    state_dim = STATE_DIM

    def __init__(self, road_id: int, seed: int, budget: float | None = None,
                 params: SimParams | None = None, trace=None,
                 steps_per_episode: int = STEPS_PER_EPISODE,
                 ticks_per_step: int = TICKS_PER_STEP):
        self.road_id = road_id
        self.seed = seed
        self.params = params
        self.trace = trace
        self.world = None
        self.budget = budget
        self.max_steps = steps_per_episode
        self.ticks_per_step = ticks_per_step
        self._steps = 0

    def reset(self) -> np.ndarray:
        self.world = new_world(self.road_id, self.seed, self.params)
        if self.budget is None:
            self.budget = default_budget(self.world.route.total_length, self.world.speed_limit)
        self._steps = 0
        if self.trace is not None:
            self.trace.header(road_id=self.road_id, seed=self.seed, budget=self.budget,
                              steps_per_episode=self.max_steps, ticks_per_step=self.ticks_per_step,
                              dt=self.world.params.dt)
        return encode_state(self.world)

    def step(self, action: int):
        out = run_time_step(self.world, int(action), self.ticks_per_step,
                            self.max_steps * self.ticks_per_step, trace=self.trace)
        self._steps += 1
        done = out.done or self._steps >= self.max_steps
        info = {
            "terminal": out.terminal,
            "instants": out.instants,
            "step_ttc": float(np.mean([s.ttc for s in out.instants])),
            "rc": out.instants[-1].rc,
        }
        if done:
            info["r1"] = self.world.collision_latched
            info["r2"] = r2_violated(self.world, self.budget)
            info["final_rc"] = rc(self.world)
        return out.state, out.reward, done, info
