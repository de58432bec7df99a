"""Reference scenario policies: uniform random and a scalarized DQN.

The scalar learner collapses the vector reward to the mean of its
components before learning, so it optimizes a fixed 50/50 trade-off
with a standard max backup. It shares the replay buffer, schedules,
and network machinery with the vector learner; only the objective
handling differs.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .eql import EqlConfig, TrainResult, _master
from .momdp import episode_seed
from .nn import (
    AdamState,
    Mlp,
    apply_update,
    backward,
    clone,
    forward,
    load_checkpoint,
    save_checkpoint,
)
from .replay import PrioritizedReplay, Transition


def random_policy(n_actions: int):
    """`policy(state, rng) -> action` drawing uniformly from the catalog."""

    def act(state, rng):
        return int(rng.integers(n_actions))

    return act


def scalarize(reward) -> float:
    """Equal-weight collapse of a vector reward to one number."""
    return float(np.mean(np.asarray(reward, dtype=float)))


def dqn_targets(target_net: Mlp, rewards, next_states, terminals, gamma: float) -> np.ndarray:
    """Scalar TD targets: r + gamma * max_a q_t(s', a) on live rows."""
    rewards = np.asarray(rewards, dtype=float)
    q = forward(target_net, np.asarray(next_states, dtype=float))
    live = ~np.asarray(terminals, dtype=bool)
    return rewards + gamma * q.max(axis=1) * live


class DqnAgent:
    """Single-objective Q-learner over the same action catalog."""

    def __init__(self, state_dim: int, n_actions: int,
                 config: EqlConfig | None = None, seed: int = 0):
        self.config = (config or EqlConfig()).validate()
        self.state_dim = int(state_dim)
        self.n_actions = int(n_actions)
        sizes = (self.state_dim, *self.config.hidden, self.n_actions)
        self.net = Mlp(sizes, seed=seed)
        self.target = clone(self.net)
        self.opt = AdamState.for_net(self.net, lr=self.config.lr, clip_norm=self.config.clip_norm)
        self.replay = PrioritizedReplay(self.config.capacity, self.config.per_alpha,
                                        self.config.per_eps)
        self.updates = 0

    def q_values(self, state) -> np.ndarray:
        return forward(self.net, np.asarray(state, dtype=float))

    def select_action(self, state, epsilon: float, rng: np.random.Generator) -> int:
        if epsilon > 0.0 and rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        return int(np.argmax(self.q_values(state)))

    def policy(self, epsilon: float = 0.0):
        def act(state, rng):
            return self.select_action(state, epsilon, rng)

        return act

    def learn_step(self, beta: float, sample_rng: np.random.Generator) -> float:
        cfg = self.config
        idx, batch, iw = self.replay.sample(cfg.batch_size, beta, sample_rng)
        n = len(batch)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.array([t.reward for t in batch], dtype=float)
        next_states = np.stack([t.next_state for t in batch])
        terminals = np.array([t.terminal for t in batch])

        y = dqn_targets(self.target, rewards, next_states, terminals, cfg.gamma)
        out = forward(self.net, states)
        rows = np.arange(n)
        delta = y - out[rows, actions]
        loss = float(np.mean(iw * delta * delta))
        g_out = np.zeros_like(out)
        g_out[rows, actions] = -2.0 * iw * delta / n
        grads = backward(self.net, states, g_out)
        apply_update(self.net, self.opt, grads)

        self.replay.update_priorities(idx, delta)
        self.updates += 1
        if self.updates % cfg.target_sync == 0:
            self.target = clone(self.net)
        return loss

    def save(self, path, extra: dict | None = None):
        from dataclasses import asdict

        meta = {
            "algo": "sorlw",
            "state_dim": self.state_dim,
            "n_actions": self.n_actions,
            "config": asdict(self.config),
        }
        meta.update(extra or {})
        save_checkpoint(path, self.net, step=self.updates, extra=meta)

    @classmethod
    def load(cls, path):
        net, header = load_checkpoint(path)
        meta = header["extra"]
        if meta.get("algo") != "sorlw":
            raise ConfigError(f"checkpoint holds a {meta.get('algo')!r} agent, not 'sorlw'")
        cfg_fields = dict(meta["config"])
        cfg_fields["hidden"] = tuple(cfg_fields["hidden"])
        agent = cls(meta["state_dim"], meta["n_actions"], EqlConfig(**cfg_fields),
                    seed=header["seed"])
        agent.net = net
        agent.target = clone(net)
        agent.updates = int(header["step"])
        return agent, header


def run_random(env_factory, episodes: int, seed: int = 0,
               algo_label: str = "rs") -> TrainResult:
    """Run the uniform random baseline; nothing to train, so the result
    carries curves only (agent is None)."""
    if episodes <= 0:
        raise ConfigError(f"episodes must be positive, got {episodes!r}")
    explore_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 101]))

    curves = []
    for ep in range(episodes):
        env = env_factory(episode_seed(_master(seed), ep))
        state = env.reset()
        policy = random_policy(env.n_actions)
        done = False
        info: dict = {}
        step_ttcs = []
        while not done:
            action = policy(state, explore_rng)
            state, _, done, info = env.step(action)
            if "step_ttc" in info:
                step_ttcs.append(float(info["step_ttc"]))
        curves.append({
            "episode": ep,
            "algo": algo_label,
            "mean_ttc": float(np.mean(step_ttcs)) if step_ttcs else None,
            "final_rc": info.get("final_rc"),
            "r1": bool(info.get("r1", False)),
            "r2": bool(info.get("r2", False)),
            "epsilon": 1.0,
            "lambda": 0.0,
        })
    return TrainResult(None, curves, 0, 0)


def train_sorlw(env_factory, episodes: int, config: EqlConfig | None = None,
                seed: int = 0, algo_label: str = "sorlw") -> TrainResult:
    """Train the scalarized learner; mirrors the vector trainer's loop."""
    cfg = (config or EqlConfig()).validate()
    if episodes <= 0:
        raise ConfigError(f"episodes must be positive, got {episodes!r}")
    first = env_factory(episode_seed(_master(seed), 0))
    agent = DqnAgent(first.state_dim, first.n_actions, cfg, seed=seed)
    explore_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 101]))
    sample_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 303]))
    planned = max(episodes * first.max_steps - cfg.warmup, 1)

    curves = []
    for ep in range(episodes):
        # one factory call per episode: the dimension probe is episode zero
        env = first if ep == 0 else env_factory(episode_seed(_master(seed), ep))
        state = env.reset()
        epsilon = cfg.epsilon_at(ep, episodes)
        done = False
        info: dict = {}
        step_ttcs = []
        while not done:
            action = agent.select_action(state, epsilon, explore_rng)
            nxt, reward, done, info = env.step(action)
            agent.replay.push(Transition(np.asarray(state, dtype=float), int(action),
                                         scalarize(reward),
                                         np.asarray(nxt, dtype=float), bool(done)))
            if len(agent.replay) >= cfg.warmup:
                beta = cfg.beta_at(agent.updates, planned)
                agent.learn_step(beta, sample_rng)
            state = nxt
            if "step_ttc" in info:
                step_ttcs.append(float(info["step_ttc"]))
        curves.append({
            "episode": ep,
            "algo": algo_label,
            "mean_ttc": float(np.mean(step_ttcs)) if step_ttcs else None,
            "final_rc": info.get("final_rc"),
            "r1": bool(info.get("r1", False)),
            "r2": bool(info.get("r2", False)),
            "epsilon": epsilon,
            "lambda": 0.0,
        })
    return TrainResult(agent, curves, agent.updates, planned)
