"""Trace, curve, record, and manifest persistence."""

import hashlib
import json

import numpy as np
import pytest

from drivestress.errors import ConfigError, ContractError, IntegrityError
from drivestress.momdp import EpisodeRecord, ScenarioEnv, run_episode
from drivestress.traces import (
    CURVE_COLUMNS,
    TraceWriter,
    read_curves,
    read_manifest,
    read_records,
    read_trace,
    replay_trace,
    write_curves,
    write_manifest,
    write_records,
    write_run_meta,
)


def spawn_policy(action):
    def policy(state, rng):
        return action

    return policy


def scripted(actions):
    it = iter(actions)

    def policy(state, rng):
        return next(it)

    return policy


def write_episode_trace(path, road_id=1, seed=5, action=24):
    writer = TraceWriter(path)
    record = run_episode(spawn_policy(action), road_id, seed, trace=writer)
    return record


class TestTraceWriter:
    def test_trace_file_is_wellformed_jsonl(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        record = write_episode_trace(path)
        lines = path.read_text().splitlines()
        parsed = [json.loads(line) for line in lines]

        header = parsed[0]
        assert header["kind"] == "header"
        assert header["road_id"] == 1
        assert header["seed"] == 5
        assert header["steps_per_episode"] == 6
        assert header["ticks_per_step"] == 40
        assert header["dt"] == 0.05
        assert header["budget"] == pytest.approx(12.0)

        kinds = [p["kind"] for p in parsed]
        assert kinds[0] == "header"
        assert kinds[-1] == "end"
        assert kinds.count("step") == len(record.actions)
        assert kinds.count("tick") == round(record.elapsed / header["dt"])

        tick_line = next(p for p in parsed if p["kind"] == "tick")
        for key in ("tick", "t", "av", "actors", "collision", "ttc", "rc"):
            assert key in tick_line
        for key in ("x", "y", "heading", "speed", "vx", "vy", "ax", "ay", "yaw_rate"):
            assert key in tick_line["av"]

        assert parsed[-1]["record"] == record.to_dict()

    def test_step_lines_carry_actions_and_spawns(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        record = write_episode_trace(path, action=24)
        steps = [p for p in map(json.loads, path.read_text().splitlines())
                 if p["kind"] == "step"]
        assert [s["action"] for s in steps] == list(record.actions)
        assert [s["spawned"] for s in steps] == [
            s if s is None else int(s) for s in record.spawned]
        assert [s["step"] for s in steps] == list(range(len(steps)))

    def test_byte_identical_across_runs(self, tmp_path):
        a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
        write_episode_trace(a, road_id=2, seed=9)
        write_episode_trace(b, road_id=2, seed=9)
        write_episode_trace(c, road_id=2, seed=10)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()

    def test_scenario_env_trace_closes_without_end_line(self, tmp_path):
        path = tmp_path / "train.jsonl"
        with TraceWriter(path) as writer:
            env = ScenarioEnv(1, 5, trace=writer)
            env.reset()
            done = False
            while not done:
                _, _, done, _ = env.step(24)
        parsed = [json.loads(line) for line in path.read_text().splitlines()]
        assert parsed[0]["kind"] == "header"
        assert all(p["kind"] != "end" for p in parsed)
        assert any(p["kind"] == "tick" for p in parsed)

    def test_double_header_rejected(self, tmp_path):
        writer = TraceWriter(tmp_path / "t.jsonl")
        writer.header(road_id=1, seed=0, budget=12.0, steps_per_episode=6,
                      ticks_per_step=40, dt=0.05)
        with pytest.raises(ContractError):
            writer.header(road_id=1, seed=0, budget=12.0, steps_per_episode=6,
                          ticks_per_step=40, dt=0.05)


class TestReadTrace:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        record = write_episode_trace(path, road_id=3, seed=11)
        data = read_trace(path)
        assert data.header["road_id"] == 3
        assert [s["action"] for s in data.steps] == list(record.actions)
        assert len(data.ticks) == round(record.elapsed / data.header["dt"])
        assert EpisodeRecord.from_dict(data.record).to_dict() == record.to_dict()

    def test_empty_file_is_usage_error(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(ConfigError):
            read_trace(path)

    def test_corrupt_json_line_names_line(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        write_episode_trace(path)
        lines = path.read_text().splitlines()
        lines[3] = "{not json"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(IntegrityError, match="line 4"):
            read_trace(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        write_episode_trace(path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[1:]) + "\n")
        with pytest.raises(IntegrityError):
            read_trace(path)


class TestReplayTrace:
    def test_verifies_clean_trace(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        record = write_episode_trace(path, road_id=1, seed=7)
        replayed = replay_trace(path)
        assert replayed.to_dict() == record.to_dict()

    def test_verifies_training_trace_without_end_line(self, tmp_path):
        path = tmp_path / "train.jsonl"
        with TraceWriter(path) as writer:
            env = ScenarioEnv(2, 13, trace=writer)
            env.reset()
            done = False
            while not done:
                _, _, done, _ = env.step(0)
        replayed = replay_trace(path)
        assert replayed.road_id == 2
        assert replayed.seed == 13

    def test_tampered_tick_names_first_divergent_tick(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        write_episode_trace(path, seed=7)
        lines = path.read_text().splitlines()
        idx, parsed = next(
            (i, json.loads(line)) for i, line in enumerate(lines)
            if json.loads(line).get("kind") == "tick" and json.loads(line)["tick"] == 17)
        parsed["av"]["speed"] += 0.25
        lines[idx] = json.dumps(parsed, sort_keys=True, separators=(",", ":"))
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(IntegrityError, match="tick 17"):
            replay_trace(path)

    def test_tampered_action_diverges(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        write_episode_trace(path, seed=7, action=24)
        lines = path.read_text().splitlines()
        out = []
        for line in lines:
            parsed = json.loads(line)
            if parsed.get("kind") == "step" and parsed["step"] == 2:
                parsed["spawned"] = 999
                line = json.dumps(parsed, sort_keys=True, separators=(",", ":"))
            out.append(line)
        path.write_text("\n".join(out) + "\n")
        with pytest.raises(IntegrityError):
            replay_trace(path)

    def test_truncated_trace_rejected(self, tmp_path):
        path = tmp_path / "ep.jsonl"
        write_episode_trace(path, seed=7)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-40]) + "\n")
        with pytest.raises(IntegrityError):
            replay_trace(path)


class TestCurvesCsv:
    rows = [
        {"episode": 0, "algo": "eql", "mean_ttc": 3.25, "final_rc": 41.5,
         "r1": True, "r2": False, "epsilon": 1.0, "lambda": 0.0},
        {"episode": 1, "algo": "eql", "mean_ttc": None, "final_rc": 100.0,
         "r1": False, "r2": False, "epsilon": 0.981, "lambda": 0.01},
    ]

    def test_header_and_layout_frozen(self, tmp_path):
        path = tmp_path / "curves.csv"
        write_curves(path, self.rows)
        lines = path.read_text().splitlines()
        assert lines[0] == "episode,algo,mean_ttc,final_rc,r1,r2,epsilon,lambda"
        assert lines[1] == "0,eql,3.25,41.5,1,0,1.0,0.0"
        assert lines[2] == "1,eql,,100.0,0,0,0.981,0.01"
        assert CURVE_COLUMNS == ("episode", "algo", "mean_ttc", "final_rc",
                                 "r1", "r2", "epsilon", "lambda")

    def test_roundtrip(self, tmp_path):
        path = tmp_path / "curves.csv"
        write_curves(path, self.rows)
        back = read_curves(path)
        assert back == self.rows

    def test_float_repr_roundtrip(self, tmp_path):
        row = dict(self.rows[0])
        row["mean_ttc"] = 0.1 + 0.2
        path = tmp_path / "curves.csv"
        write_curves(path, [row])
        assert read_curves(path)[0]["mean_ttc"] == 0.1 + 0.2

    def test_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_curves(a, self.rows)
        write_curves(b, self.rows)
        assert a.read_bytes() == b.read_bytes()


class TestRecordsJsonl:
    def test_roundtrip(self, tmp_path):
        records = [run_episode(spawn_policy(24), 1, s) for s in (3, 4)]
        path = tmp_path / "records.jsonl"
        write_records(path, records)
        back = read_records(path)
        assert [r.to_dict() for r in back] == [r.to_dict() for r in records]

    def test_reader_validates_schema(self, tmp_path):
        path = tmp_path / "records.jsonl"
        record = run_episode(spawn_policy(24), 1, 3)
        bad = record.to_dict()
        bad["schema_version"] = 99
        path.write_text(json.dumps(bad) + "\n")
        with pytest.raises(ConfigError):
            read_records(path)


class TestManifest:
    config = {"algorithm": "eql", "road_id": 1, "episodes": 4, "seed": 123}

    def test_contents_and_hash(self, tmp_path):
        path = tmp_path / "manifest.json"
        write_manifest(path, self.config, seeds={"master": 123, "episode": [9, 8]})
        manifest = read_manifest(path)
        canonical = json.dumps(self.config, sort_keys=True,
                               separators=(",", ":")).encode()
        assert manifest["config_sha256"] == hashlib.sha256(canonical).hexdigest()
        assert manifest["config"] == self.config
        assert manifest["seeds"] == {"master": 123, "episode": [9, 8]}
        assert manifest["version"] == "0.1.0"

    def test_no_timestamp_and_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_manifest(a, self.config, seeds={"master": 1})
        write_manifest(b, self.config, seeds={"master": 1})
        assert a.read_bytes() == b.read_bytes()
        assert "time" not in a.read_text().lower()

    def test_run_meta_sidecar_carries_timestamp(self, tmp_path):
        path = tmp_path / "run_meta.json"
        write_run_meta(path)
        meta = json.loads(path.read_text())
        assert "created_utc" in meta
