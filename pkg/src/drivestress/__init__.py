"""Desk-scale testbed for stress-testing a rule-based driving controller:
a 2D road simulator, vector-reward scenario MDP, multi-objective
Q-learning with an envelope backup, baselines, and the statistics used
to judge whether a method finds more violating scenarios than another.
"""

from ._version import __version__
from .baselines import DqnAgent, random_policy, run_random, scalarize, train_sorlw
from .config import RunConfig, load_config
from .eql import EqlAgent, EqlConfig, TrainResult, envelope_targets, homotopy_loss, sample_weights, train_eql
from .errors import ConfigError, ContractError, DomainError, DriveStressError, IntegrityError
from .momdp import (
    EpisodeRecord,
    N_ACTIONS,
    N_OBJECTIVES,
    STATE_DIM,
    ScenarioEnv,
    action_catalog,
    encode_state,
    episode_seed,
    run_episode,
)
from .objectives import default_budget, r2_violated, rc, reward_rc, reward_ttc, ttc
from .replay import PrioritizedReplay, Transition
from .roads import load_road
from .stats import (
    ComparisonResult,
    ContingencyTable,
    MetricsSummary,
    aggregate,
    compare,
    contingency_from_counts,
    fisher_exact_two_sided,
    odds_ratio,
    significance_bucket,
)
from .toy import TreasureChain
from .traces import (
    TraceWriter,
    read_curves,
    read_records,
    read_trace,
    replay_trace,
    write_curves,
    write_manifest,
    write_records,
)
from .world import SimParams, new_world, spawn_pedestrian, spawn_vehicle, tick

__all__ = [
    "__version__",
    "ComparisonResult", "ConfigError", "ContingencyTable", "ContractError",
    "DomainError", "DqnAgent", "DriveStressError", "EpisodeRecord", "EqlAgent",
    "EqlConfig", "IntegrityError", "MetricsSummary", "N_ACTIONS", "N_OBJECTIVES",
    "PrioritizedReplay", "RunConfig", "ScenarioEnv", "SimParams", "STATE_DIM",
    "TraceWriter", "TrainResult", "Transition", "TreasureChain",
    "action_catalog", "aggregate", "compare", "contingency_from_counts",
    "default_budget", "encode_state", "envelope_targets", "episode_seed",
    "fisher_exact_two_sided", "homotopy_loss", "load_config", "load_road",
    "new_world", "odds_ratio", "r2_violated", "random_policy", "rc",
    "read_curves", "read_records", "read_trace", "replay_trace", "reward_rc",
    "reward_ttc", "run_episode", "run_random", "sample_weights", "scalarize",
    "significance_bucket", "spawn_pedestrian", "spawn_vehicle", "tick",
    "train_eql", "train_sorlw", "ttc", "write_curves", "write_manifest",
    "write_records",
]
