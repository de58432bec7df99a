import json
import math

import numpy as np
import pytest

from drivestress import momdp, world as wd
from drivestress.errors import ConfigError, ContractError, DomainError
from drivestress.objectives import ObjectiveSample, r2_violated, reward_ttc


# ---------------------------------------------------------------------------
# state encoding


def test_encode_state_at_rest():
    w = wd.new_world(1, seed=0)
    s = momdp.encode_state(w)
    assert s.shape == (momdp.STATE_DIM,)
    assert np.all((-1.0 <= s) & (s <= 1.0))
    # road 1 bounds are x in [-5, 105], y in [-14.5, 14.5]; AV starts at (20, 0)
    assert s[0] == pytest.approx(2.0 * 25.0 / 110.0 - 1.0, abs=1e-12)
    assert s[1] == pytest.approx(0.0, abs=1e-12)
    # padded planar components and kinematics at rest are exactly zero
    assert all(s[i] == 0.0 for i in (2, 4, 5, 8, 11, 13, 14))
    np.testing.assert_array_equal(s[6:13], np.zeros(7))


def test_encode_state_clips_and_validates():
    w = wd.new_world(1, seed=0)
    w.av_vel = np.array([60.0, -60.0])
    s = momdp.encode_state(w)
    assert s[6] == 1.0 and s[7] == -1.0
    w.av_vel = np.array([np.nan, 0.0])
    with pytest.raises(DomainError):
        momdp.encode_state(w)


# ---------------------------------------------------------------------------
# action catalog


def test_catalog_shape_and_order():
    cat = momdp.action_catalog()
    assert len(cat) == momdp.N_ACTIONS == 36
    assert [a.index for a in cat] == list(range(36))
    assert all(a.kind == "vehicle" for a in cat[:24])
    assert all(a.kind == "pedestrian" for a in cat[24:])
    first = cat[0]
    assert (first.along, first.cross, first.behavior) == (-20.0, -3.5, "change-left")
    assert (cat[2].along, cat[2].cross, cat[2].behavior) == (-20.0, -3.5, "keep-lane")
    last_vehicle = cat[23]
    assert (last_vehicle.along, last_vehicle.cross, last_vehicle.behavior) == (20.0, 3.5, "keep-lane")
    # no vehicle is ever placed on top of the AV
    assert all(not (a.along == 0.0 and a.cross == 0.0) for a in cat[:24])
    ped0, ped_last = cat[24], cat[35]
    assert (ped0.along, ped0.cross, ped0.direction, ped0.speed) == (10.0, -10.0, "45-aligned", wd.WALK_SPEED)
    assert (ped_last.cross, ped_last.direction, ped_last.speed) == (10.0, "90-perpendicular", wd.RUN_SPEED)
    # catalog entries are all distinct
    keys = {(a.kind, a.along, a.cross, a.behavior, a.direction, a.speed) for a in cat}
    assert len(keys) == 36


def test_decode_action_bounds():
    with pytest.raises(ContractError):
        momdp.decode_action(36)
    with pytest.raises(ContractError):
        momdp.decode_action(-1)


# ---------------------------------------------------------------------------
# step reward aggregation


def test_aggregate_reward_single_instant_identity():
    r = momdp.aggregate_reward([ObjectiveSample(1, 5.0, 40.0, False)])
    np.testing.assert_allclose(r, [reward_ttc(5.0, False), 0.6], atol=1e-12)


def test_aggregate_reward_componentwise_max():
    instants = [
        ObjectiveSample(1, 5.0, 1e-9, False),  # risky instant, no progress
        ObjectiveSample(2, 20.0, 40.0, False),  # safe instant, some progress
    ]
    r = momdp.aggregate_reward(instants)
    np.testing.assert_allclose(r, [reward_ttc(5.0, False), 1.0 - 1e-11], atol=1e-10)


def test_aggregate_reward_collision_dominates():
    r = momdp.aggregate_reward([ObjectiveSample(1, 0.0, 10.0, True)])
    assert r[0] == 1.0


def test_aggregate_reward_rejects_empty():
    with pytest.raises(ContractError):
        momdp.aggregate_reward([])


# ---------------------------------------------------------------------------
# time steps


def test_run_time_step_running():
    w = wd.new_world(1, seed=0)
    out = momdp.run_time_step(w, 24)  # pedestrian far to the side
    assert out.terminal == "running"
    assert not out.done
    assert out.spawned_id is not None
    assert len(out.instants) == 40
    assert out.state.shape == (15,)
    assert out.reward.shape == (2,)
    assert w.tick_count == 40


def test_run_time_step_collision_stops_early():
    w = wd.new_world(1, seed=0)
    ped = wd.Pedestrian(99, w.av_pos + np.array([1.5, 0.0]), np.array([0.0, 1.0]), wd.WALK_SPEED)
    w.actors.append(ped)
    out = momdp.run_time_step(w, 24)
    assert out.terminal == "collision"
    assert out.done
    assert len(out.instants) == 1
    assert out.instants[0].ttc == 0.0
    assert out.reward[0] == 1.0


def test_run_time_step_timeout_at_tick_budget():
    w = wd.new_world(1, seed=0)
    out = momdp.run_time_step(w, 24, ticks_per_step=40, max_ticks=40)
    assert out.terminal == "timeout"


def test_blocked_episode_times_out_with_r2():
    # a parked vehicle 12 m ahead pins the AV for the whole episode
    w = wd.new_world(1, seed=6)
    lane, s, _ = w.road_map.nearest_lane_point(w.av_pos + np.array([12.0, 0.0]), 2.0)
    w.actors.append(wd.NpcVehicle(50, lane, s, 0.0, 0.0, lane.heading_at(s), lane.point_at(s)))
    terminal = "running"
    for _ in range(momdp.STEPS_PER_EPISODE):
        out = momdp.run_time_step(w, 24)
        terminal = out.terminal
        if out.done:
            break
    assert terminal == "timeout"
    assert w.tick_count == 240
    assert w.elapsed == pytest.approx(12.0, abs=1e-9)
    assert r2_violated(w, 12.0)
    assert not w.collision_latched


# ---------------------------------------------------------------------------
# episodes


def test_run_episode_completes_on_empty_enough_road():
    # the side pedestrians never reach the path inside the horizon
    record = momdp.run_episode(lambda s, rng: 24, road_id=1, seed=3)
    assert record.terminal == "completed"
    assert record.final_rc == 100.0
    assert not record.r1 and not record.r2 and not record.joint
    assert not record.r2_inclusive
    assert record.elapsed < record.budget
    assert len(record.actions) == len(record.spawned) == len(record.step_rewards)
    assert all(a == 24 for a in record.actions)
    assert record.budget == pytest.approx(12.0)


def test_run_episode_is_deterministic_in_seed():
    policy = lambda s, rng: int(rng.integers(momdp.N_ACTIONS))
    a = momdp.run_episode(policy, road_id=2, seed=11).to_dict()
    b = momdp.run_episode(policy, road_id=2, seed=11).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = momdp.run_episode(policy, road_id=2, seed=12).to_dict()
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


def test_record_round_trip():
    policy = lambda s, rng: int(rng.integers(momdp.N_ACTIONS))
    record = momdp.run_episode(policy, road_id=4, seed=9)
    again = momdp.EpisodeRecord.from_dict(json.loads(json.dumps(record.to_dict())))
    assert again.to_dict() == record.to_dict()
    assert again.r1 == record.r1 and again.joint == record.joint
    bad = record.to_dict()
    bad["schema_version"] = 99
    with pytest.raises(ConfigError):
        momdp.EpisodeRecord.from_dict(bad)


def test_episode_seed_stream():
    assert momdp.episode_seed(42, 7) == momdp.episode_seed(42, 7)
    seeds = {momdp.episode_seed(42, i) for i in range(100)}
    assert len(seeds) == 100
    assert all(0 <= s < 2**32 for s in seeds)
    assert momdp.episode_seed(42, 7) != momdp.episode_seed(43, 7)


# ---------------------------------------------------------------------------
# environment wrapper


def test_scenario_env_contract():
    env = momdp.ScenarioEnv(road_id=1, seed=5)
    s = env.reset()
    assert s.shape == (15,)
    assert env.n_actions == 36 and env.n_objectives == 2 and env.max_steps == 6
    steps = 0
    done = False
    while not done:
        s, r, done, info = env.step(24)
        steps += 1
        assert s.shape == (15,) and r.shape == (2,)
        assert "terminal" in info and "step_ttc" in info
        assert steps <= 6
    assert {"r1", "r2", "final_rc"} <= info.keys()
    # a second reset starts an identical episode
    env2 = momdp.ScenarioEnv(road_id=1, seed=5)
    np.testing.assert_array_equal(env2.reset(), env.reset())
