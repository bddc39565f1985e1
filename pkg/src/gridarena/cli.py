"""Operator command line.

Subcommands: play (run a match with named controllers), serve (host remote
agents over TCP), taskgen (sample task files), tournament (run a bracket
config), replay-verify (check recorded matches), bench (ticks/second).

Every run prints its effective configuration, seeds included, on one line;
re-running with the echoed values reproduces the outputs.  Flags override
environment variables (MARLO_ARENA_ADDR, MARLO_ARENA_ACTION_TIMEOUT_MS,
MARLO_ARENA_WORKERS); exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .baselines import BASELINES, make_baseline
from .engine import run_task
from .replay import dump_record, load_record, verify_replay
from .server import (DEFAULT_ACTION_TIMEOUT_MS, MatchAbortedError, ArenaServer)
from .task import (DIFFICULTIES, TaskFormatError, TaskSpec, load_task,
                   sample_task, save_task, validate)
from .tournament import (BracketConfigError, Entry, TournamentConfig,
                         run_tournament)
from .types import InvalidTaskError, to_points

ENV_ADDR = "MARLO_ARENA_ADDR"
ENV_TIMEOUT = "MARLO_ARENA_ACTION_TIMEOUT_MS"
ENV_WORKERS = "MARLO_ARENA_WORKERS"


def _fail(code: int, message: str) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return code


def _echo_config(subcommand: str, **kv):
    parts = " ".join(f"{k}={v}" for k, v in kv.items())
    print(f"config {subcommand} {parts}")


def _load_task_file(path: str) -> TaskSpec:
    task = load_task(Path(path).read_text())
    violations = validate(task)
    if violations:
        raise InvalidTaskError(violations)
    return task


def _parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def _result_line(result):
    scores = {str(s): to_points(cp) for s, cp in sorted(result.total_rewards.items())}
    print(json.dumps({
        "termination": result.termination.value,
        "ticks": result.ticks_elapsed,
        "scores": scores,
    }, sort_keys=True))


def cmd_play(args) -> int:
    task = _load_task_file(args.task)
    names = args.agents.split(",")
    seed = task.seed if args.seed is None else args.seed
    _echo_config("play", task=args.task, agents=args.agents, seed=seed)
    controllers = {i: make_baseline(n) for i, n in enumerate(names)}
    result, record = run_task(task, controllers, seed=seed)
    if args.record:
        Path(args.record).write_text(dump_record(record))
    _result_line(result)
    return 0


def cmd_serve(args) -> int:
    task = _load_task_file(args.task)
    addr = args.addr or os.environ.get(ENV_ADDR, "127.0.0.1:0")
    timeout_ms = args.action_timeout_ms
    if timeout_ms is None:
        timeout_ms = int(os.environ.get(ENV_TIMEOUT, DEFAULT_ACTION_TIMEOUT_MS))
    host, port = _parse_addr(addr)
    seed = task.seed if args.seed is None else args.seed
    assignments = dict(enumerate(args.agents.split(",")))
    _echo_config("serve", task=args.task, agents=args.agents, addr=addr,
                 action_timeout_ms=timeout_ms, seed=seed)
    server = ArenaServer(task, assignments, host=host, port=port,
                         action_timeout_ms=timeout_ms,
                         handshake_timeout_s=args.handshake_timeout,
                         auth_token=args.auth_token, seed=seed)
    print(f"listening {server.address[0]} {server.address[1]}", flush=True)
    result, record = server.run_match()
    if args.record:
        Path(args.record).write_text(dump_record(record))
    _result_line(result)
    return 0


def cmd_taskgen(args) -> int:
    _echo_config("taskgen", game=args.game, difficulty=args.difficulty,
                 seed=args.seed, count=args.count)
    for i in range(args.count):
        spec = sample_task(args.game, args.difficulty, args.seed + i)
        text = save_task(spec)
        if args.out:
            out = Path(args.out)
            if args.count > 1:
                out = out.with_name(f"{out.stem}_{i}{out.suffix}")
            out.write_text(text)
            print(str(out))
        else:
            sys.stdout.write(text)
    return 0


def cmd_tournament(args) -> int:
    cfg_obj = json.loads(Path(args.config).read_text())
    tasks = []
    for t in cfg_obj["tasks"]:
        if isinstance(t, str):
            base = Path(args.config).parent
            tasks.append(_load_task_file(str((base / t))))
        else:
            tasks.append(load_task(json.dumps(t)))
    entries = [Entry(e["entry_id"], e["controller"]) for e in cfg_obj["entries"]]
    base_seed = args.seed if args.seed is not None else cfg_obj["base_seed"]
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get(ENV_WORKERS, "1"))
    config = TournamentConfig(
        entries=entries,
        league_size=cfg_obj["league_size"],
        promote_k=cfg_obj["promote_k"],
        episodes_per_pairing=cfg_obj["episodes_per_pairing"],
        tasks=tasks,
        base_seed=base_seed,
    )
    _echo_config("tournament", config=args.config, base_seed=base_seed,
                 workers=workers, out=args.out)
    report = run_tournament(config, out_dir=args.out, workers=workers)
    print(json.dumps({"champion": report.champion}))
    return 0


def cmd_replay_verify(args) -> int:
    ok = True
    for path in args.replays:
        record = load_record(Path(path).read_text())
        good = verify_replay(record)
        print(f"{'ok' if good else 'FAIL'} {path}")
        ok = ok and good
    return 0 if ok else 1


def cmd_bench(args) -> int:
    _echo_config("bench", game=args.game, ticks=args.ticks, seed=args.seed)
    episode_len = 1000
    if args.game == "mobchase":
        task = TaskSpec("mobchase", {"tick_limit": episode_len, "flee_bias": 1.0},
                        seed=args.seed)
        agents = ["greedy_chaser", "random"]
    elif args.game == "buildbattle":
        task = TaskSpec("buildbattle", {"tick_limit": episode_len}, seed=args.seed)
        agents = ["random"] * 4
    else:
        task = TaskSpec("treasurehunt", {"tick_limit": episode_len}, seed=args.seed)
        agents = ["random"] * 4

    ticks_done = 0
    start = time.perf_counter()
    episode_seed = args.seed
    while ticks_done < args.ticks:
        controllers = {i: make_baseline(n) for i, n in enumerate(agents)}
        result, _ = run_task(task, controllers, seed=episode_seed)
        ticks_done += result.ticks_elapsed
        episode_seed += 1
    elapsed = time.perf_counter() - start
    rate = ticks_done / elapsed
    print(json.dumps({"game": args.game, "ticks": ticks_done,
                      "seconds": round(elapsed, 3),
                      "ticks_per_second": round(rate, 1)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridarena",
                                description="Grid-world multi-agent game arena")
    sub = p.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("play", help="run a local match with named baselines")
    sp.add_argument("--task", required=True)
    sp.add_argument("--agents", required=True,
                    help=f"comma list of baselines ({', '.join(BASELINES)})")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--record", help="write the match replay here")
    sp.set_defaults(func=cmd_play)

    sp = sub.add_parser("serve", help="host a match for remote agents")
    sp.add_argument("--task", required=True)
    sp.add_argument("--agents", required=True,
                    help="comma list per slot: 'remote' or a baseline name")
    sp.add_argument("--addr", help=f"host:port (default ${ENV_ADDR} or 127.0.0.1:0)")
    sp.add_argument("--action-timeout-ms", type=int,
                    help=f"per-tick action timeout (default ${ENV_TIMEOUT} or "
                         f"{DEFAULT_ACTION_TIMEOUT_MS})")
    sp.add_argument("--handshake-timeout", type=float, default=30.0)
    sp.add_argument("--auth-token")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--record")
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("taskgen", help="sample task files")
    sp.add_argument("--game", required=True,
                    choices=["mobchase", "buildbattle", "treasurehunt"])
    sp.add_argument("--difficulty", required=True, choices=list(DIFFICULTIES))
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--out", help="output file (stdout if omitted)")
    sp.set_defaults(func=cmd_taskgen)

    sp = sub.add_parser("tournament", help="run a bracket config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", help="results directory")
    sp.add_argument("--seed", type=int, help="override the config's base_seed")
    sp.add_argument("--workers", type=int,
                    help=f"parallel matches (default ${ENV_WORKERS} or 1)")
    sp.set_defaults(func=cmd_tournament)

    sp = sub.add_parser("replay-verify", help="re-simulate and check replays")
    sp.add_argument("replays", nargs="+")
    sp.set_defaults(func=cmd_replay_verify)

    sp = sub.add_parser("bench", help="measure ticks/second")
    sp.add_argument("--game", default="mobchase",
                    choices=["mobchase", "buildbattle", "treasurehunt"])
    sp.add_argument("--ticks", type=int, default=20000)
    sp.add_argument("--seed", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (TaskFormatError, InvalidTaskError, BracketConfigError,
            FileNotFoundError, KeyError, ValueError) as e:
        return _fail(2, f"{type(e).__name__}: {e}")
    except MatchAbortedError as e:
        return _fail(1, f"match aborted: {e}")
    except OSError as e:
        return _fail(1, f"{type(e).__name__}: {e}")


if __name__ == "__main__":
    sys.exit(main())
