import json
import os
import socket
import subprocess
import sys
import threading

from gridarena.cli import main
from gridarena.protocol import encode, make_message
from gridarena.task import load_task
from tests.conftest import AgentClient


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_taskgen_writes_valid_task_files(capsys, tmp_path):
    out = tmp_path / "task.json"
    code, stdout, _ = run_cli(capsys, "taskgen", "--game", "mobchase",
                              "--difficulty", "small", "--seed", "4",
                              "--out", str(out))
    assert code == 0
    assert stdout.startswith("config taskgen ")
    task = load_task(out.read_text())
    assert task.game == "mobchase"


def test_taskgen_to_stdout_is_reproducible(capsys):
    _, a, _ = run_cli(capsys, "taskgen", "--game", "treasurehunt",
                      "--difficulty", "large", "--seed", "9")
    _, b, _ = run_cli(capsys, "taskgen", "--game", "treasurehunt",
                      "--difficulty", "large", "--seed", "9")
    assert a == b


def test_play_records_a_verifiable_replay(capsys, tmp_path):
    task_file = tmp_path / "t.json"
    run_cli(capsys, "taskgen", "--game", "mobchase", "--difficulty", "small",
            "--seed", "2", "--out", str(task_file))
    replay = tmp_path / "match.replay"
    code, stdout, _ = run_cli(capsys, "play", "--task", str(task_file),
                              "--agents", "greedy_chaser,greedy_chaser",
                              "--seed", "5", "--record", str(replay))
    assert code == 0
    result = json.loads(stdout.splitlines()[-1])
    assert set(result) == {"termination", "ticks", "scores"}

    code, stdout, _ = run_cli(capsys, "replay-verify", str(replay))
    assert code == 0 and stdout.startswith("ok ")


def test_replay_verify_flags_tampering(capsys, tmp_path):
    task_file = tmp_path / "t.json"
    run_cli(capsys, "taskgen", "--game", "mobchase", "--difficulty", "small",
            "--seed", "2", "--out", str(task_file))
    replay = tmp_path / "match.replay"
    run_cli(capsys, "play", "--task", str(task_file), "--agents",
            "random,random", "--record", str(replay))
    text = replay.read_text()
    lines = text.splitlines()
    tick = json.loads(lines[1])
    tick["hash"] = "0" * 16
    lines[1] = json.dumps(tick, sort_keys=True, separators=(",", ":"))
    replay.write_text("\n".join(lines) + "\n")
    code, stdout, _ = run_cli(capsys, "replay-verify", str(replay))
    assert code == 1 and stdout.startswith("FAIL ")


def test_bad_task_file_is_a_usage_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"game": "mobchase", "params": {"gravity": 1}, '
                   '"seed": 1, "spec_version": 1}')
    code, _, stderr = run_cli(capsys, "play", "--task", str(bad),
                              "--agents", "random,random")
    assert code == 2
    assert "gravity" in json.loads(stderr)["error"]


def test_tournament_from_config_file(capsys, tmp_path):
    cfg = {
        "entries": [{"entry_id": "scripted", "controller": "scripted"}]
                   + [{"entry_id": f"r{i}", "controller": "random"}
                      for i in range(3)],
        "league_size": 4, "promote_k": 1, "episodes_per_pairing": 2,
        "base_seed": 6,
        "tasks": [
            {"game": "mobchase", "params": {"tick_limit": 40}, "seed": 1,
             "spec_version": 1},
            {"game": "buildbattle", "params": {"tick_limit": 60}, "seed": 2,
             "spec_version": 1},
            {"game": "treasurehunt",
             "params": {"foe_count": 0, "observation_radius": 99,
                        "tick_limit": 100},
             "seed": 3, "spec_version": 1},
        ],
    }
    cfg_path = tmp_path / "bracket.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "results"
    code, stdout, _ = run_cli(capsys, "tournament", "--config", str(cfg_path),
                              "--out", str(out_dir))
    assert code == 0
    assert json.loads(stdout.splitlines()[-1])["champion"] == "scripted"
    assert (out_dir / "tables.json").exists()
    assert (out_dir / "report.txt").exists()


def test_bench_reports_a_rate(capsys):
    code, stdout, _ = run_cli(capsys, "bench", "--game", "mobchase",
                              "--ticks", "2000")
    assert code == 0
    stats = json.loads(stdout.splitlines()[-1])
    assert stats["ticks"] >= 2000 and stats["ticks_per_second"] > 0


def test_serve_subprocess_announces_and_plays(tmp_path):
    task_file = tmp_path / "t.json"
    task_file.write_text('{"game": "mobchase", '
                         '"params": {"tick_limit": 20}, '
                         '"seed": 5, "spec_version": 1}\n')
    proc = subprocess.Popen(
        [sys.executable, "-m", "gridarena.cli", "serve",
         "--task", str(task_file), "--agents", "remote,greedy_chaser",
         "--addr", "127.0.0.1:0", "--handshake-timeout", "20"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        for line in proc.stdout:
            if line.startswith("listening "):
                _, host, port = line.split()
                break
        else:
            raise AssertionError("server never announced its address")
        client = AgentClient(host, int(port))
        scores, _ = client.run(lambda view: "stay")
        client.close()
        assert str(client.slot) in scores
        assert proc.wait(timeout=20) == 0
    finally:
        proc.kill()


def test_env_var_supplies_the_listen_address(tmp_path):
    task_file = tmp_path / "t.json"
    task_file.write_text('{"game": "mobchase", '
                         '"params": {"tick_limit": 5}, '
                         '"seed": 5, "spec_version": 1}\n')
    env = dict(os.environ, MARLO_ARENA_ADDR="127.0.0.1:0",
               MARLO_ARENA_ACTION_TIMEOUT_MS="150")
    proc = subprocess.Popen(
        [sys.executable, "-m", "gridarena.cli", "serve",
         "--task", str(task_file), "--agents", "remote,random",
         "--handshake-timeout", "20"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=env)
    try:
        line = proc.stdout.readline()
        assert "action_timeout_ms=150" in line
        for line in proc.stdout:
            if line.startswith("listening 127.0.0.1 "):
                port = int(line.split()[2])
                break
        else:
            raise AssertionError("server never announced its address")
        client = AgentClient("127.0.0.1", port)
        client.run(lambda view: "stay")
        client.close()
        assert proc.wait(timeout=20) == 0
    finally:
        proc.kill()
