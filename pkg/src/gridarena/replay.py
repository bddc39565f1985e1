"""Replay file format and verification.

A replay is newline-delimited JSON: a header line (format version, game,
task, seed, hash algorithm), one line per tick (actions, centipoint
rewards, state hash as hex), and a result line.  Verification re-simulates
the task from the recorded seed with the recorded actions and demands a
bit-exact match of every per-tick reward map and state hash.
"""

from __future__ import annotations

import json

from .engine import state_hash
from .games import GAMES, get_game
from .hashing import HASH_ALGORITHM
from .rng import Stream, derive_seed
from .task import TaskSpec
from .types import (EpisodeResult, MatchRecord, Termination, TickRecord,
                    UnsupportedReplayError)

FORMAT_VERSION = 1


def dump_record(record: MatchRecord) -> str:
    lines = [json.dumps({
        "format_version": record.format_version,
        "game": record.game,
        "task": record.task,
        "seed": record.seed,
        "hash_alg": HASH_ALGORITHM,
    }, sort_keys=True, separators=(",", ":"))]
    for i, tick in enumerate(record.ticks):
        obj = {
            "t": i,
            "actions": {str(s): a for s, a in tick.actions.items()},
            "rewards": {str(s): r for s, r in tick.rewards.items()},
            "hash": f"{tick.state_hash:016x}",
        }
        if tick.substituted:
            obj["subs"] = tick.substituted
        lines.append(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    r = record.result
    lines.append(json.dumps({"result": {
        "total_rewards": {str(s): r.total_rewards[s] for s in sorted(r.total_rewards)},
        "ticks_elapsed": r.ticks_elapsed,
        "termination": r.termination.value,
    }}, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def load_record(text: str) -> MatchRecord:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("replay must have at least a header and a result line")
    header = json.loads(lines[0])
    if header.get("format_version") != FORMAT_VERSION:
        raise UnsupportedReplayError(
            f"unsupported replay format_version {header.get('format_version')!r}")
    if header.get("hash_alg") != HASH_ALGORITHM:
        raise UnsupportedReplayError(
            f"unsupported hash algorithm {header.get('hash_alg')!r}")
    if header.get("game") not in GAMES:
        raise UnsupportedReplayError(f"unknown game {header.get('game')!r}")

    footer = json.loads(lines[-1])
    if "result" not in footer:
        raise ValueError("replay is missing its result line")
    res = footer["result"]
    result = EpisodeResult(
        total_rewards={int(s): cp for s, cp in res["total_rewards"].items()},
        ticks_elapsed=res["ticks_elapsed"],
        termination=Termination(res["termination"]),
    )

    ticks = []
    for ln in lines[1:-1]:
        obj = json.loads(ln)
        ticks.append(TickRecord(
            actions={int(s): a for s, a in obj["actions"].items()},
            rewards={int(s): cp for s, cp in obj["rewards"].items()},
            state_hash=int(obj["hash"], 16),
            substituted=obj.get("subs", []),
        ))
    return MatchRecord(game=header["game"], task=header["task"],
                       seed=header["seed"], ticks=ticks, result=result,
                       format_version=header["format_version"])


def verify_replay(record: MatchRecord) -> bool:
    """True iff re-simulation reproduces every tick hash and reward map."""
    if record.format_version != FORMAT_VERSION:
        raise UnsupportedReplayError(
            f"unsupported replay format_version {record.format_version!r}")
    if record.game not in GAMES:
        raise UnsupportedReplayError(f"unknown game {record.game!r}")
    game = get_game(record.game)
    task = TaskSpec(game=record.task["game"], params=record.task.get("params", {}),
                    seed=record.task["seed"],
                    spec_version=record.task.get("spec_version", 1))

    state = game.init(task.full_params(), derive_seed(record.seed, "init"))
    env_rng = Stream(derive_seed(record.seed, "env"))
    totals: dict[int, int] = {}
    outcome = None
    for tick in record.ticks:
        outcome = game.step(state, tick.actions, env_rng)
        if outcome.rewards != tick.rewards:
            return False
        if state_hash(game, state) != tick.state_hash:
            return False
        for slot, cp in outcome.rewards.items():
            totals[slot] = totals.get(slot, 0) + cp
        if outcome.done and tick is not record.ticks[-1]:
            return False

    if outcome is None or not outcome.done:
        return False
    r = record.result
    if r.ticks_elapsed != len(record.ticks) or r.termination != outcome.termination:
        return False
    full_totals = {s: totals.get(s, 0) for s in r.total_rewards}
    return full_totals == r.total_rewards and set(totals) <= set(r.total_rewards)
