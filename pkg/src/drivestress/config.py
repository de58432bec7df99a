"""Run configuration: one flat schema covering algorithm choice, road,
episode counts, simulation timing, and every learner hyperparameter.
Validated up front so a bad run dies before any simulation starts."""

import dataclasses
import json
from dataclasses import dataclass

from .eql import EqlConfig
from .errors import ConfigError

ALGORITHMS = ("eql", "sorlw", "rs")

TRAIN_EPISODES_DEFAULT = 1200
EVAL_EPISODES_DEFAULT = 100


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "eql"
    road_id: int = 1
    episodes: int | None = None  # None: 1200 for train, 100 for eval
    seed: int = 0
    steps_per_episode: int = 6
    ticks_per_step: int = 40
    dt: float = 0.05
    budget: float | None = None  # None: derived from route length and limit

    gamma: float = 0.99
    lr: float = 1e-3
    clip_norm: float = 10.0
    hidden: tuple = (128, 128)
    capacity: int = 20000
    warmup: int = 500
    batch_size: int = 64
    target_sync: int = 200
    per_alpha: float = 0.6
    per_beta0: float = 0.4
    per_eps: float = 1e-3
    n_weight_samples: int = 16
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_frac: float = 0.5
    lam_frac: float = 0.6

    # 0 for train: trace only the final episode; N: every Nth plus the final
    trace_every_train: int = 0
    # 0 for eval: no traces; N: every Nth episode
    trace_every_eval: int = 1

    def validate(self) -> "RunConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 1 <= int(self.road_id) <= 6:
            raise ConfigError(f"road_id must be 1..6, got {self.road_id!r}")
        if self.episodes is not None and int(self.episodes) < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes!r}")
        if int(self.seed) < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed!r}")
        if int(self.steps_per_episode) < 1 or int(self.ticks_per_step) < 1:
            raise ConfigError("steps_per_episode and ticks_per_step must be >= 1")
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if self.budget is not None and not float(self.budget) > 0.0:
            raise ConfigError(f"budget must be positive, got {self.budget!r}")
        if int(self.trace_every_train) < 0 or int(self.trace_every_eval) < 0:
            raise ConfigError("trace intervals must be non-negative")
        self.to_eql_config().validate()
        return self

    def to_eql_config(self) -> EqlConfig:
        return EqlConfig(
            gamma=self.gamma, lr=self.lr, clip_norm=self.clip_norm,
            hidden=tuple(self.hidden), capacity=self.capacity,
            warmup=self.warmup, batch_size=self.batch_size,
            target_sync=self.target_sync, per_alpha=self.per_alpha,
            per_beta0=self.per_beta0, per_eps=self.per_eps,
            n_weight_samples=self.n_weight_samples, eps_start=self.eps_start,
            eps_end=self.eps_end, eps_frac=self.eps_frac,
            lam_frac=self.lam_frac)

    def resolved_episodes(self, command: str) -> int:
        if self.episodes is not None:
            return int(self.episodes)
        return TRAIN_EPISODES_DEFAULT if command == "train" else EVAL_EPISODES_DEFAULT

    def to_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["hidden"] = list(self.hidden)
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        if not isinstance(payload, dict):
            raise ConfigError(f"config must be a JSON object, got {type(payload).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        coerced = dict(payload)
        if "hidden" in coerced:
            coerced["hidden"] = tuple(coerced["hidden"])
        return cls(**coerced).validate()


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return RunConfig.from_dict(payload)
