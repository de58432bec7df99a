import numpy as np
import pytest

from drivestress import eql, toy


# ---------------------------------------------------------------------------
# environment mechanics


def test_env_protocol_constants():
    env = toy.TreasureChain(seed=0)
    assert env.n_actions == 2
    assert env.n_objectives == 2
    assert env.state_dim == 8
    assert env.max_steps == 8
    assert len(toy.TREASURES) == 8
    assert list(toy.TREASURES) == sorted(toy.TREASURES)  # payout grows down the chain
    # marginal payout shrinks down the chain, which spreads the optimal
    # stopping index across preference weights
    gains = np.diff(toy.TREASURES)
    assert np.all(np.diff(gains) < 0)


def test_reset_and_advance():
    env = toy.TreasureChain(seed=0)
    s = env.reset()
    np.testing.assert_array_equal(s, np.eye(8)[0])
    s, r, done, _ = env.step(toy.ADVANCE)
    np.testing.assert_array_equal(s, np.eye(8)[1])
    np.testing.assert_allclose(r, [0.0, -0.1], atol=1e-15)
    assert not done


def test_collect_is_terminal_with_position_payout():
    env = toy.TreasureChain(seed=0)
    env.reset()
    env.step(toy.ADVANCE)
    env.step(toy.ADVANCE)
    _, r, done, _ = env.step(toy.COLLECT)
    assert done
    np.testing.assert_allclose(r, [toy.TREASURES[2], -0.1], atol=1e-15)


def test_advance_at_end_collects():
    env = toy.TreasureChain(seed=0)
    env.reset()
    for _ in range(7):
        _, _, done, _ = env.step(toy.ADVANCE)
        assert not done
    _, r, done, _ = env.step(toy.ADVANCE)
    assert done
    np.testing.assert_allclose(r, [1.0, -0.1], atol=1e-15)


def test_episode_never_exceeds_max_steps():
    env = toy.TreasureChain(seed=0)
    env.reset()
    steps = 0
    done = False
    while not done:
        _, _, done, _ = env.step(toy.ADVANCE)
        steps += 1
    assert steps == env.max_steps


# ---------------------------------------------------------------------------
# backward-induction oracle (independent of the learner)


def oracle_value(w):
    """Vector return of the utility-optimal policy from the start state,
    by backward induction over chain positions (undiscounted)."""
    w = np.asarray(w, dtype=float)
    n = len(toy.TREASURES)
    value = np.zeros(2)
    for i in reversed(range(n)):
        q_collect = np.array([toy.TREASURES[i], -0.1])
        if i == n - 1:
            q_advance = q_collect  # advancing off the end collects
        else:
            q_advance = np.array([0.0, -0.1]) + value
        value = q_collect if w @ q_collect >= w @ q_advance else q_advance
    return value


def oracle_collect_index(w):
    """Where the optimal policy stops, by simulating it."""
    w = np.asarray(w, dtype=float)
    n = len(toy.TREASURES)
    values = [None] * n
    for i in reversed(range(n)):
        q_collect = np.array([toy.TREASURES[i], -0.1])
        q_advance = q_collect if i == n - 1 else np.array([0.0, -0.1]) + values[i + 1]
        values[i] = q_collect if w @ q_collect >= w @ q_advance else q_advance
    for i in range(n):
        q_collect = np.array([toy.TREASURES[i], -0.1])
        if w @ values[i] <= w @ q_collect + 1e-12:
            return i
    return n - 1


WEIGHT_GRID = [np.array([k / 10.0, 1.0 - k / 10.0]) for k in range(11)]


def test_oracle_stopping_indices_frozen():
    got = [oracle_collect_index(w) for w in WEIGHT_GRID]
    assert got == [0, 0, 0, 0, 1, 3, 5, 7, 7, 7, 7]
    assert set(got) == {0, 1, 3, 5, 7}


def test_oracle_value_endpoints():
    np.testing.assert_allclose(oracle_value([1.0, 0.0]), [1.0, -0.8])
    np.testing.assert_allclose(oracle_value([0.0, 1.0]), [toy.TREASURES[0], -0.1])


def test_oracle_utility_beats_every_fixed_stop():
    for w in WEIGHT_GRID:
        best = float(w @ oracle_value(w))
        for stop in range(8):
            ret = np.array([toy.TREASURES[stop], -0.1 * (stop + 1)])
            assert best >= float(w @ ret) - 1e-12


# ---------------------------------------------------------------------------
# rollout helper and learner integration


def test_rollout_return_matches_hand_count():
    env = toy.TreasureChain(seed=0)
    ret = toy.rollout_return(env, lambda s, rng: toy.COLLECT if s[3] == 1.0 else toy.ADVANCE,
                             np.random.default_rng(0))
    np.testing.assert_allclose(ret, [toy.TREASURES[3], -0.4], atol=1e-12)


def test_trainer_accepts_toy_env():
    cfg = eql.EqlConfig(capacity=64, warmup=8, batch_size=4, hidden=(8,),
                        target_sync=4, n_weight_samples=2, gamma=1.0)
    out = eql.train_eql(toy.TreasureChain, episodes=3, config=cfg, seed=1)
    assert len(out.curves) == 3
    assert out.curves[0]["mean_ttc"] is None  # the toy env has no such metric
