"""Episode traces, learning curves, episode records, and run manifests.

Traces are JSON lines: one header line, then one line per agent step and
one per simulator tick, optionally closed by an end line holding the
episode record.  All JSON is written with sorted keys so identical runs
produce identical bytes.  Files land via temp-file-plus-rename so a
crashed run never leaves a half-written artifact behind.
"""

import csv
import datetime
import hashlib
import json
import os
from dataclasses import dataclass

from ._version import __version__
from .errors import ConfigError, ContractError, IntegrityError
from .momdp import EpisodeRecord, run_episode
from .world import SimParams

TRACE_SCHEMA_VERSION = 1
CURVE_COLUMNS = ("episode", "algo", "mean_ttc", "final_rc", "r1", "r2",
                 "epsilon", "lambda")

HEADER_FIELDS = ("road_id", "seed", "budget", "steps_per_episode",
                 "ticks_per_step", "dt")


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


class TraceWriter:
    """Collects one episode's trace lines and writes them on close.

    Implements the hook protocol the episode runner calls: header, step,
    tick, and optionally end.  `path=None` keeps the trace in memory,
    which the replay verifier uses for comparison."""

    def __init__(self, path=None):
        self.path = path
        self.lines: list[dict] = []
        self._written = False

    def header(self, **meta) -> None:
        if self.lines:
            raise ContractError("trace already has a header")
        missing = [f for f in HEADER_FIELDS if f not in meta]
        if missing:
            raise ContractError(f"trace header missing fields: {missing}")
        self.lines.append({"kind": "header", "version": TRACE_SCHEMA_VERSION, **meta})

    def step(self, step_index: int, action_index: int, spawned) -> None:
        self.lines.append({
            "kind": "step",
            "step": int(step_index),
            "action": int(action_index),
            "spawned": None if spawned is None else int(spawned),
        })

    def tick(self, world, sample) -> None:
        self.lines.append({
            "kind": "tick",
            **world.snapshot(),
            "ttc": float(sample.ttc),
            "rc": float(sample.rc),
        })

    def end(self, record: EpisodeRecord) -> None:
        self.lines.append({"kind": "end", "record": record.to_dict()})
        self.close()

    def close(self) -> None:
        if self._written or self.path is None or not self.lines:
            return
        _atomic_write(self.path, "".join(_canon(l) + "\n" for l in self.lines))
        self._written = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


@dataclass
class TraceData:
    header: dict
    steps: list
    ticks: list
    record: dict | None
    lines: list


def read_trace(path) -> TraceData:
    """Parse and structurally validate a trace file."""
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise ConfigError(f"empty trace: {path}")
    lines = []
    for i, text in enumerate(raw, start=1):
        try:
            lines.append(json.loads(text))
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"{path}: line {i} is not valid JSON: {exc}") from exc
    if lines[0].get("kind") != "header":
        raise IntegrityError(f"{path}: line 1 must be a header line")
    if lines[0].get("version") != TRACE_SCHEMA_VERSION:
        raise IntegrityError(f"{path}: unsupported trace version {lines[0].get('version')!r}")
    steps, ticks, record = [], [], None
    for i, line in enumerate(lines[1:], start=2):
        kind = line.get("kind")
        if kind == "step":
            steps.append(line)
        elif kind == "tick":
            ticks.append(line)
        elif kind == "end":
            if record is not None or i != len(lines):
                raise IntegrityError(f"{path}: end line must be the last line")
            record = line.get("record")
        elif kind == "header":
            raise IntegrityError(f"{path}: line {i}: duplicate header")
        else:
            raise IntegrityError(f"{path}: line {i}: unknown line kind {kind!r}")
    if not steps:
        raise IntegrityError(f"{path}: trace has no step lines")
    return TraceData(lines[0], steps, ticks, record, lines)


def _divergence_error(path, index, recorded, regenerated) -> IntegrityError:
    tick = None
    for line in (recorded, regenerated):
        if isinstance(line, dict) and line.get("kind") == "tick":
            tick = line.get("tick")
            break
    where = f"tick {tick}" if tick is not None else f"line {index + 1}"
    return IntegrityError(
        f"{path}: trace diverges from re-simulation at {where}: "
        f"recorded {_canon(recorded) if recorded is not None else '<missing>'} "
        f"!= re-simulated {_canon(regenerated) if regenerated is not None else '<missing>'}")


def replay_trace(path, params: SimParams | None = None) -> EpisodeRecord:
    """Re-simulate a trace from its recorded seed and actions and verify
    every recorded line against the regenerated one.  Returns the
    replayed episode record."""
    data = read_trace(path)
    header = data.header
    if params is None:
        params = SimParams(dt=float(header["dt"]))
    actions = [s["action"] for s in data.steps]
    remaining = iter(actions)

    def policy(state, rng):
        try:
            return next(remaining)
        except StopIteration:
            raise IntegrityError(
                f"{path}: re-simulation requested more steps than the trace records")

    mem = TraceWriter(None)
    record = run_episode(
        policy, int(header["road_id"]), int(header["seed"]),
        budget=float(header["budget"]), params=params,
        steps_per_episode=int(header["steps_per_episode"]),
        ticks_per_step=int(header["ticks_per_step"]), trace=mem)

    regenerated = mem.lines
    recorded = data.lines
    if data.record is None:
        # training traces stop at the last tick; drop the regenerated end line
        regenerated = [l for l in regenerated if l.get("kind") != "end"]
    for i in range(max(len(recorded), len(regenerated))):
        rec = recorded[i] if i < len(recorded) else None
        gen = regenerated[i] if i < len(regenerated) else None
        if rec is None or gen is None or _canon(rec) != _canon(gen):
            raise _divergence_error(path, i, rec, gen)
    return record


def write_curves(path, rows) -> None:
    """Learning-curve CSV: one row per episode, fixed column order."""
    out = [",".join(CURVE_COLUMNS)]
    for row in rows:
        cells = []
        for col in CURVE_COLUMNS:
            value = row[col]
            if value is None:
                cells.append("")
            elif isinstance(value, bool):
                cells.append(str(int(value)))
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        out.append(",".join(cells))
    _atomic_write(path, "\n".join(out) + "\n")


def read_curves(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CURVE_COLUMNS:
            raise ConfigError(f"{path}: unexpected curve columns {reader.fieldnames}")
        rows = []
        for row in reader:
            rows.append({
                "episode": int(row["episode"]),
                "algo": row["algo"],
                "mean_ttc": None if row["mean_ttc"] == "" else float(row["mean_ttc"]),
                "final_rc": float(row["final_rc"]),
                "r1": bool(int(row["r1"])),
                "r2": bool(int(row["r2"])),
                "epsilon": float(row["epsilon"]),
                "lambda": float(row["lambda"]),
            })
    return rows


def write_records(path, records) -> None:
    """Episode records as JSON lines, one per episode."""
    _atomic_write(path, "".join(_canon(r.to_dict()) + "\n" for r in records))


def read_records(path) -> list:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, text in enumerate(fh.read().splitlines(), start=1):
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as exc:
                raise IntegrityError(f"{path}: line {i} is not valid JSON") from exc
            records.append(EpisodeRecord.from_dict(payload))
    return records


def config_hash(config: dict) -> str:
    return hashlib.sha256(_canon(config).encode()).hexdigest()


def write_manifest(path, config: dict, seeds: dict) -> None:
    """Deterministic run manifest: config, its hash, code version, seeds.

    Timestamps are banned here; they live in the run-meta sidecar."""
    manifest = {
        "version": __version__,
        "config": config,
        "config_sha256": config_hash(config),
        "seeds": seeds,
    }
    _atomic_write(path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_run_meta(path) -> None:
    """Wall-clock sidecar; the only artifact allowed to differ between
    identical runs."""
    meta = {"created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    _atomic_write(path, json.dumps(meta, sort_keys=True, indent=2) + "\n")
