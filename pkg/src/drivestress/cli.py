"""Command-line front end: train, eval, compare, replay, print-config.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 integrity
error. Every run directory gets a deterministic manifest plus a
timestamp sidecar; traces and curves are byte-stable for a fixed
(config, seed) pair."""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .baselines import DqnAgent, random_policy, run_random, train_sorlw
from .config import RunConfig, load_config
from .eql import EqlAgent, _master, train_eql
from .errors import ConfigError, ContractError, DomainError, IntegrityError
from .momdp import N_ACTIONS, ScenarioEnv, episode_seed, run_episode
from .stats import aggregate, compare
from .traces import (
    TraceWriter,
    read_records,
    replay_trace,
    write_curves,
    write_manifest,
    write_records,
    write_run_meta,
)
from .world import SimParams

EVAL_WEIGHT = (0.5, 0.5)  # learned vector policies are judged at equal preference

METRICS_COLUMNS = ("algo", "road_id", "n_episodes", "v_r1", "v_r2", "v_r1_r2",
                   "v_r2_inclusive", "ttc_given_r1", "rc_given_r2",
                   "ttc_given_joint", "rc_given_joint")

COMPARE_COLUMNS = ("metric", "violations_a", "n_a", "violations_b", "n_b",
                   "odds_ratio", "p_value", "significance")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "algo", None) is not None:
        overrides["algorithm"] = args.algo
    if getattr(args, "road", None) is not None:
        overrides["road_id"] = args.road
    if getattr(args, "episodes", None) is not None:
        overrides["episodes"] = args.episodes
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


class _EnvSource:
    """Per-episode environment factory that manages trace writers.

    The trainers call the factory once per episode in order; the writer
    for a traced episode is closed when the next episode starts and the
    caller flushes the last one after the loop."""

    def __init__(self, cfg: RunConfig, traces_dir, should_trace):
        self.cfg = cfg
        self.traces_dir = traces_dir
        self.should_trace = should_trace
        self.index = -1
        self.writer = None

    def __call__(self, seed: int) -> ScenarioEnv:
        self.flush()
        self.index += 1
        trace = None
        if self.should_trace(self.index):
            path = os.path.join(self.traces_dir, f"ep{self.index:05d}.jsonl")
            self.writer = trace = TraceWriter(path)
        cfg = self.cfg
        return ScenarioEnv(cfg.road_id, seed, budget=cfg.budget,
                           params=SimParams(dt=cfg.dt), trace=trace,
                           steps_per_episode=cfg.steps_per_episode,
                           ticks_per_step=cfg.ticks_per_step)

    def flush(self):
        if self.writer is not None:
            self.writer.close()
            self.writer = None


def _write_run_common(out_dir, cfg: RunConfig, episodes: int) -> None:
    seeds = {
        "master": cfg.seed,
        "episode": [episode_seed(_master(cfg.seed), i) for i in range(episodes)],
    }
    write_manifest(os.path.join(out_dir, "manifest.json"), cfg.to_dict(), seeds)
    write_run_meta(os.path.join(out_dir, "run_meta.json"))


def cmd_train(args) -> int:
    cfg = _build_config(args)
    episodes = cfg.resolved_episodes("train")
    out_dir = args.out
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)

    every = cfg.trace_every_train

    def should_trace(i: int) -> bool:
        return i == episodes - 1 or (every > 0 and i % every == 0)

    source = _EnvSource(cfg, traces_dir, should_trace)
    if cfg.algorithm == "eql":
        result = train_eql(source, episodes, cfg.to_eql_config(), seed=cfg.seed)
    elif cfg.algorithm == "sorlw":
        result = train_sorlw(source, episodes, cfg.to_eql_config(), seed=cfg.seed)
    else:
        result = run_random(source, episodes, seed=cfg.seed)
    source.flush()

    write_curves(os.path.join(out_dir, "curves.csv"), result.curves)
    if result.agent is not None:
        result.agent.save(os.path.join(out_dir, "checkpoint.bin"),
                          extra={"episodes": episodes, "road_id": cfg.road_id})
    _write_run_common(out_dir, cfg, episodes)
    print(f"trained {cfg.algorithm} on road {cfg.road_id}: "
          f"{episodes} episodes, {result.updates} updates -> {out_dir}")
    return 0


def _eval_policy(cfg: RunConfig, checkpoint):
    if cfg.algorithm == "rs":
        if checkpoint:
            raise ConfigError("the random baseline takes no checkpoint")
        return random_policy(N_ACTIONS)
    if not checkpoint:
        raise ConfigError(f"--checkpoint is required to evaluate {cfg.algorithm}")
    if cfg.algorithm == "eql":
        agent, _ = EqlAgent.load(checkpoint)
        return agent.policy(np.asarray(EVAL_WEIGHT), epsilon=cfg.eps_end)
    agent, _ = DqnAgent.load(checkpoint)
    return agent.policy(epsilon=cfg.eps_end)


def cmd_eval(args) -> int:
    cfg = _build_config(args)
    policy = _eval_policy(cfg, args.checkpoint)
    episodes = cfg.resolved_episodes("eval")
    out_dir = args.out
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)

    every = cfg.trace_every_eval
    params = SimParams(dt=cfg.dt)
    records = []
    for i in range(episodes):
        trace = None
        if every > 0 and i % every == 0:
            trace = TraceWriter(os.path.join(traces_dir, f"ep{i:05d}.jsonl"))
        records.append(run_episode(
            policy, cfg.road_id, episode_seed(_master(cfg.seed), i),
            budget=cfg.budget, params=params,
            steps_per_episode=cfg.steps_per_episode,
            ticks_per_step=cfg.ticks_per_step, trace=trace))

    write_records(os.path.join(out_dir, "records.jsonl"), records)
    summary = aggregate(records)
    row = {
        "algo": cfg.algorithm, "road_id": cfg.road_id,
        "n_episodes": summary.n_episodes, "v_r1": summary.v_r1,
        "v_r2": summary.v_r2, "v_r1_r2": summary.v_r1_r2,
        "v_r2_inclusive": summary.v_r2_inclusive,
        "ttc_given_r1": summary.ttc_given_r1,
        "rc_given_r2": summary.rc_given_r2,
        "ttc_given_joint": summary.ttc_given_joint,
        "rc_given_joint": summary.rc_given_joint,
    }
    lines = [",".join(METRICS_COLUMNS),
             ",".join(_cell(row[c]) for c in METRICS_COLUMNS)]
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_run_common(out_dir, cfg, episodes)
    print(f"evaluated {cfg.algorithm} on road {cfg.road_id}: "
          f"{episodes} episodes, v_r1={summary.v_r1} v_r2={summary.v_r2} "
          f"v_r1_r2={summary.v_r1_r2} -> {out_dir}")
    return 0


def _records_path(arg):
    # accept either an eval output directory or the records file itself
    return os.path.join(arg, "records.jsonl") if os.path.isdir(arg) else arg


def cmd_compare(args) -> int:
    records_a = read_records(_records_path(args.results_a))
    records_b = read_records(_records_path(args.results_b))
    if len(records_a) != len(records_b):
        raise ConfigError(
            f"episode counts differ: {len(records_a)} vs {len(records_b)}")
    metrics = ["v_r1", "v_r2", "v_r1_r2"] if args.metric == "all" else [args.metric]
    lines = [",".join(COMPARE_COLUMNS)]
    for metric in metrics:
        result = compare(records_a, records_b, metric)
        table = result.table
        lines.append(",".join(_cell(v) for v in (
            metric, table.a, table.a + table.b, table.c, table.c + table.d,
            result.odds_ratio, result.p_value, result.significance)))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replay(args) -> int:
    record = replay_trace(args.trace)
    for i, action in enumerate(record.actions):
        print(f"step {i}: action={action} spawned={record.spawned[i]} "
              f"ttc={record.step_ttc[i]:.3f} rc={record.step_rc[i]:.2f}")
    print(f"terminal={record.terminal} r1={record.r1} r2={record.r2} "
          f"final_rc={record.final_rc:.2f} elapsed={record.elapsed:.2f}s "
          f"budget={record.budget:.2f}s")
    print(f"verified: trace matches re-simulation ({record.road_id=}, {record.seed=})")
    return 0


def cmd_print_config(args) -> int:
    cfg = _build_config(args)
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    return 0


def _add_config_flags(parser, with_out=True):
    parser.add_argument("--algo", choices=("eql", "sorlw", "rs"))
    parser.add_argument("--road", type=int)
    parser.add_argument("--episodes", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--config", help="JSON config file")
    if with_out:
        parser.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivestress",
        description="Search for critical driving scenarios with multi-objective RL")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an agent and emit curves")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="run frozen-policy evaluation episodes")
    _add_config_flags(p_eval)
    p_eval.add_argument("--checkpoint", help="trained agent checkpoint")
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="Fisher test between two eval runs")
    p_cmp.add_argument("results_a", help="eval output directory or records.jsonl")
    p_cmp.add_argument("results_b", help="eval output directory or records.jsonl")
    p_cmp.add_argument("--metric", default="all",
                       choices=("v_r1", "v_r2", "v_r1_r2", "all"))
    p_cmp.add_argument("--out")
    p_cmp.set_defaults(func=cmd_compare)

    p_rep = sub.add_parser("replay", help="re-simulate and verify a trace")
    p_rep.add_argument("trace")
    p_rep.set_defaults(func=cmd_replay)

    p_cfg = sub.add_parser("print-config", help="print the effective config")
    _add_config_flags(p_cfg, with_out=False)
    p_cfg.set_defaults(func=cmd_print_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ContractError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
