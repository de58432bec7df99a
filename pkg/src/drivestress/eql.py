"""Multi-objective Q-learning with an envelope backup.

One network maps (state, preference weight) to a full action-by-
objective table of vector values. The backup for a transition is
optimistic over preferences: it scans a set of candidate weights (fresh
simplex draws plus the transition's own training weight) and every
action, keeps the pair with the best utility under the transition's
weight, and backs up that action's entire vector. Because the
transition's own weight is always a candidate, the target can only
improve on the standard scalarized backup.

The loss blends a vector MSE with a projected-utility MSE and shifts
linearly from the former to the latter over a configured fraction of
training, so early updates shape the whole vector head and late updates
sharpen the utilities that drive action choice.

All randomness flows through named generator streams derived from the
master seed: exploration, weight sampling, and replay sampling are
decoupled, so any one of them can be changed without disturbing the
others.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
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


def sample_weights(rng: np.random.Generator, n: int, n_objectives: int = 2) -> np.ndarray:
    """n preference weights drawn uniformly from the simplex."""
    return rng.dirichlet(np.ones(n_objectives), size=n)


def linear_ramp(t: float, ramp_len: float) -> float:
    """t / ramp_len clamped to [0, 1]; a degenerate ramp is already done."""
    if ramp_len <= 0.0:
        return 1.0
    return min(max(t / ramp_len, 0.0), 1.0)


@dataclass(frozen=True)
class EqlConfig:
    gamma: float = 0.99
    lr: float = 1e-3
    clip_norm: float = 10.0
    hidden: tuple = (128, 128)
    capacity: int = 20000
    warmup: int = 500
    batch_size: int = 64
    target_sync: int = 200  # updates between target-network refreshes
    per_alpha: float = 0.6
    per_beta0: float = 0.4
    per_eps: float = 1e-3
    n_weight_samples: int = 16  # fresh candidate weights per backup
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_frac: float = 0.5  # fraction of episodes spent annealing epsilon
    lam_frac: float = 0.6  # fraction of planned updates spent blending the loss

    def validate(self) -> "EqlConfig":
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma!r}")
        if self.lr <= 0.0 or self.clip_norm <= 0.0:
            raise ConfigError("lr and clip_norm must be positive")
        if self.per_alpha < 0.0 or not 0.0 < self.per_beta0 <= 1.0 or self.per_eps <= 0.0:
            raise ConfigError("replay priorities need alpha >= 0, beta0 in (0, 1], eps > 0")
        if self.capacity <= 0 or self.batch_size <= 0 or self.warmup < 0:
            raise ConfigError("capacity and batch size must be positive, warmup non-negative")
        if self.target_sync <= 0:
            raise ConfigError("target_sync must be positive")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigError("epsilon schedule must satisfy 0 <= end <= start <= 1")
        if not (0.0 < self.eps_frac <= 1.0 and 0.0 < self.lam_frac <= 1.0):
            raise ConfigError("schedule fractions must be in (0, 1]")
        if self.n_weight_samples < 0:
            raise ConfigError("n_weight_samples must be non-negative")
        if not self.hidden or any(int(h) <= 0 for h in self.hidden):
            raise ConfigError(f"bad hidden sizes: {self.hidden!r}")
        return self

    def epsilon_at(self, episode: int, episodes: int) -> float:
        r = linear_ramp(episode, self.eps_frac * episodes)
        return self.eps_start + (self.eps_end - self.eps_start) * r

    def lambda_at(self, update: int, planned_updates: int) -> float:
        return linear_ramp(update, self.lam_frac * planned_updates)

    def beta_at(self, update: int, planned_updates: int) -> float:
        return self.per_beta0 + (1.0 - self.per_beta0) * linear_ramp(update, planned_updates)


def envelope_targets(
    target_net: Mlp,
    rewards: np.ndarray,
    next_states: np.ndarray,
    terminals,
    train_weights: np.ndarray,
    cand_weights: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """Vector TD targets under the envelope backup.

    For each row i: y_i = r_i + gamma * q_t(s'_i, a*, w*), where (a*, w*)
    maximizes train_weights[i] . q_t(s'_i, a, w') over all actions and
    all candidate weights w' (the shared cand_weights rows plus the
    row's own training weight). Terminal rows are the pure reward.
    """
    rewards = np.asarray(rewards, dtype=float)
    next_states = np.asarray(next_states, dtype=float)
    train_weights = np.asarray(train_weights, dtype=float)
    cand_weights = np.asarray(cand_weights, dtype=float).reshape(-1, rewards.shape[1])
    batch, n_obj = rewards.shape
    n_cand = len(cand_weights) + 1

    shared = np.broadcast_to(cand_weights, (batch, len(cand_weights), n_obj))
    wk = np.concatenate([shared, train_weights[:, None, :]], axis=1)  # (B, K, O)
    states_rep = np.repeat(next_states[:, None, :], n_cand, axis=1)
    x = np.concatenate([states_rep, wk], axis=2).reshape(batch * n_cand, -1)
    q = forward(target_net, x).reshape(batch, n_cand, -1, n_obj)  # (B, K, A, O)

    util = np.einsum("bkao,bo->bka", q, train_weights)
    best = util.reshape(batch, -1).argmax(axis=1)
    q_best = q.reshape(batch, -1, n_obj)[np.arange(batch), best]
    live = ~np.asarray(terminals, dtype=bool)
    return rewards + gamma * q_best * live[:, None]


def homotopy_loss(pred, target, weights, lam: float, iw=None):
    """Blended loss and its gradient with respect to pred.

    (1 - lam) * mean over all entries of iw (target - pred)^2
      + lam * mean over rows of iw (w . (target - pred))^2
    """
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    weights = np.asarray(weights, dtype=float)
    batch, n_obj = pred.shape
    if iw is None:
        iw = np.ones(batch)
    iw = np.asarray(iw, dtype=float)

    diff = target - pred
    udiff = np.einsum("bo,bo->b", weights, diff)
    vec_term = float(np.sum(iw[:, None] * diff * diff)) / (batch * n_obj)
    util_term = float(np.sum(iw * udiff * udiff)) / batch
    loss = (1.0 - lam) * vec_term + lam * util_term
    grad = -(
        (1.0 - lam) * 2.0 * iw[:, None] * diff / (batch * n_obj)
        + lam * 2.0 * (iw * udiff)[:, None] * weights / batch
    )
    return loss, grad


class EqlAgent:
    """The network pair, optimizer, and replay buffer of one learner."""

    def __init__(self, state_dim: int, n_actions: int, n_objectives: int = 2,
                 config: EqlConfig | None = None, seed: int = 0):
        self.config = (config or EqlConfig()).validate()
        self.state_dim = int(state_dim)
        self.n_actions = int(n_actions)
        self.n_objectives = int(n_objectives)
        sizes = (self.state_dim + self.n_objectives,
                 *self.config.hidden,
                 self.n_actions * self.n_objectives)
        self.net = Mlp(sizes, seed=seed)
        self.target = clone(self.net)
        self.opt = AdamState.for_net(self.net, lr=self.config.lr, clip_norm=self.config.clip_norm)
        self.replay = PrioritizedReplay(self.config.capacity, self.config.per_alpha,
                                        self.config.per_eps)
        self.updates = 0

    def q_values(self, state, weight) -> np.ndarray:
        x = np.concatenate([np.asarray(state, dtype=float), np.asarray(weight, dtype=float)])
        return forward(self.net, x).reshape(self.n_actions, self.n_objectives)

    def select_action(self, state, weight, epsilon: float, rng: np.random.Generator) -> int:
        if epsilon > 0.0 and rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        w = np.asarray(weight, dtype=float)
        return int(np.argmax(self.q_values(state, w) @ w))

    def policy(self, weight, epsilon: float = 0.0):
        """A `policy(state, rng) -> action` view at a fixed preference."""
        w = np.asarray(weight, dtype=float)

        def act(state, rng):
            return self.select_action(state, w, epsilon, rng)

        return act

    def learn_step(self, beta: float, lam: float,
                   weight_rng: np.random.Generator, sample_rng: np.random.Generator) -> float:
        cfg = self.config
        idx, batch, iw = self.replay.sample(cfg.batch_size, beta, sample_rng)
        n = len(batch)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.stack([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        terminals = np.array([t.terminal for t in batch])

        # weights are not stored with transitions: every replayed sample
        # gets a fresh training weight, plus a fresh shared candidate set
        train_w = sample_weights(weight_rng, n, self.n_objectives)
        cand = sample_weights(weight_rng, cfg.n_weight_samples, self.n_objectives)
        y = envelope_targets(self.target, rewards, next_states, terminals,
                             train_w, cand, cfg.gamma)

        x = np.concatenate([states, train_w], axis=1)
        out = forward(self.net, x)
        rows = np.arange(n)
        q_sel = out.reshape(n, self.n_actions, self.n_objectives)[rows, actions]
        loss, g_sel = homotopy_loss(q_sel, y, train_w, lam, iw)
        g_out = np.zeros((n, self.n_actions, self.n_objectives))
        g_out[rows, actions] = g_sel
        grads = backward(self.net, x, g_out.reshape(n, -1))
        apply_update(self.net, self.opt, grads)

        self.replay.update_priorities(idx, y - q_sel)
        self.updates += 1
        if self.updates % cfg.target_sync == 0:
            self.target = clone(self.net)
        return loss

    def save(self, path, extra: dict | None = None):
        meta = {
            "algo": "eql",
            "state_dim": self.state_dim,
            "n_actions": self.n_actions,
            "n_objectives": self.n_objectives,
            "config": asdict(self.config),
        }
        meta.update(extra or {})
        save_checkpoint(path, self.net, step=self.updates, extra=meta)

    @classmethod
    def load(cls, path):
        net, header = load_checkpoint(path)
        meta = header["extra"]
        if meta.get("algo") != "eql":
            raise ConfigError(f"checkpoint holds a {meta.get('algo')!r} agent, not 'eql'")
        cfg_fields = dict(meta["config"])
        cfg_fields["hidden"] = tuple(cfg_fields["hidden"])
        agent = cls(meta["state_dim"], meta["n_actions"], meta["n_objectives"],
                    EqlConfig(**cfg_fields), seed=header["seed"])
        agent.net = net
        agent.target = clone(net)
        agent.updates = int(header["step"])
        return agent, header


@dataclass
class TrainResult:
    agent: object
    curves: list
    updates: int
    planned_updates: int


def _master(seed: int) -> int:
    return int(seed) & 0xFFFFFFFF


def train_eql(env_factory, episodes: int, config: EqlConfig | None = None,
              seed: int = 0, algo_label: str = "eql") -> TrainResult:
    """Train over `episodes` episodes of `env_factory(episode_seed)`.

    The factory is called once per episode with a derived sub-seed; the
    returned environment must expose n_actions, n_objectives, state_dim,
    max_steps, reset() and step()."""
    cfg = (config or EqlConfig()).validate()
    if episodes <= 0:
        raise ConfigError(f"episodes must be positive, got {episodes!r}")
    first = env_factory(episode_seed(_master(seed), 0))
    agent = EqlAgent(first.state_dim, first.n_actions, first.n_objectives, cfg, seed=seed)
    explore_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 101]))
    weight_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 202]))
    sample_rng = np.random.default_rng(np.random.SeedSequence([_master(seed), 303]))
    planned = max(episodes * first.max_steps - cfg.warmup, 1)

    curves = []
    for ep in range(episodes):
        # one factory call per episode: the dimension probe is episode zero
        env = first if ep == 0 else env_factory(episode_seed(_master(seed), ep))
        state = env.reset()
        epsilon = cfg.epsilon_at(ep, episodes)
        w_ep = sample_weights(weight_rng, 1, agent.n_objectives)[0]
        done = False
        info: dict = {}
        step_ttcs = []
        while not done:
            action = agent.select_action(state, w_ep, epsilon, explore_rng)
            nxt, reward, done, info = env.step(action)
            agent.replay.push(Transition(np.asarray(state, dtype=float), int(action),
                                         np.asarray(reward, dtype=float),
                                         np.asarray(nxt, dtype=float), bool(done)))
            if len(agent.replay) >= cfg.warmup:
                lam = cfg.lambda_at(agent.updates, planned)
                beta = cfg.beta_at(agent.updates, planned)
                agent.learn_step(beta, lam, weight_rng, sample_rng)
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
            "lambda": cfg.lambda_at(agent.updates, planned),
        })
    return TrainResult(agent, curves, agent.updates, planned)
