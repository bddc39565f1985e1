"""Lockstep arena server.

External agent processes connect over TCP, handshake for an agent slot,
then play one lockstep episode: the server broadcasts an observation each
tick, waits up to the action timeout for each remote slot's action frame,
substitutes the game's no-op for anything late, malformed or disconnected,
steps the game, and sends per-slot step results.  The engine therefore
consumes exactly one action per active slot per tick no matter how the
clients behave, and a match always finishes.

Slots may also be filled by named in-process baselines, so a single remote
client can play against scripted opponents.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time

from .baselines import make_baseline
from .engine import run_episode
from .games import get_game
from .protocol import (PROTOCOL_VERSION, FrameReader, ProtocolError, decode,
                       encode, make_message)
from .task import TaskSpec, save_task

logger = logging.getLogger(__name__)

DEFAULT_ACTION_TIMEOUT_MS = 100
DEFAULT_HANDSHAKE_TIMEOUT_S = 30.0


class MatchAbortedError(RuntimeError):
    """Handshake phase failed; the match never started."""


class _ActionTimeout(Exception):
    """Raised by a remote action source so the engine substitutes no-op."""


class Session:
    """One connected agent process, pinned to one slot for the episode."""

    def __init__(self, conn: socket.socket, addr):
        self.conn = conn
        self.addr = addr
        self.slot: int | None = None
        self.entry_name = ""
        self.state = "handshaking"        # handshaking | ready | dropped
        self.missed_ticks = 0
        self.actions: queue.Queue = queue.Queue()
        self._send_lock = threading.Lock()

    def send(self, msg: dict):
        if self.state == "dropped":
            return
        try:
            with self._send_lock:
                self.conn.sendall(encode(msg))
        except OSError:
            self.drop()

    def drop(self):
        self.state = "dropped"
        try:
            self.conn.close()
        except OSError:
            pass


class RemoteSource:
    """ActionSource backed by a session; raises on timeout so the engine
    tags the tick and substitutes the game's no-op."""

    def __init__(self, session: Session, match_id: str, timeout_s: float,
                 game_name: str):
        self.session = session
        self.match_id = match_id
        self.timeout_s = timeout_s
        self.game_name = game_name
        self.tick = 0
        self.score_cp = 0

    def act(self, observation, rng):
        tick = self.tick
        self.tick += 1
        s = self.session
        if s.state == "dropped":
            s.missed_ticks += 1
            raise _ActionTimeout(f"slot {s.slot} disconnected")
        s.send(make_message("observation", {
            "match_id": self.match_id,
            "tick": tick,
            "agent_slot": s.slot,
            "view": observation,
            "score_so_far": self.score_cp,
        }))
        deadline = time.monotonic() + self.timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                s.missed_ticks += 1
                raise _ActionTimeout(f"slot {s.slot} tick {tick} timed out")
            try:
                payload = s.actions.get(timeout=remaining)
            except queue.Empty:
                s.missed_ticks += 1
                raise _ActionTimeout(f"slot {s.slot} tick {tick} timed out") from None
            if payload.get("match_id") != self.match_id:
                continue
            if payload.get("tick") != tick:
                continue                    # stale frame from an earlier tick
            return payload["action"]


class ArenaServer:
    """Hosts one lockstep match on a TCP listener."""

    def __init__(self, task: TaskSpec, slot_assignments: dict[int, str],
                 host: str = "127.0.0.1", port: int = 0,
                 action_timeout_ms: int = DEFAULT_ACTION_TIMEOUT_MS,
                 handshake_timeout_s: float = DEFAULT_HANDSHAKE_TIMEOUT_S,
                 auth_token: str | None = None,
                 match_id: str = "m0", seed: int | None = None):
        self.task = task
        self.game = get_game(task.game)
        self.slot_assignments = dict(slot_assignments)
        self.remote_slots = sorted(s for s, a in slot_assignments.items()
                                   if a == "remote")
        self.action_timeout_s = action_timeout_ms / 1000.0
        self.handshake_timeout_s = handshake_timeout_s
        self.auth_token = auth_token
        self.match_id = match_id
        self.seed = task.seed if seed is None else seed

        self.sessions: dict[int, Session] = {}
        self._unassigned = list(self.remote_slots)
        self._lock = threading.Lock()
        self._all_connected = threading.Event()
        if not self.remote_slots:
            self._all_connected.set()

        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen()
        self.address = self._listener.getsockname()
        self._accepting = True
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True)
        self._accept_thread.start()

    # -- connection handling -------------------------------------------------

    def _accept_loop(self):
        while self._accepting:
            try:
                conn, addr = self._listener.accept()
            except OSError:
                return
            session = Session(conn, addr)
            threading.Thread(target=self._session_loop, args=(session,),
                             daemon=True).start()

    def _session_loop(self, session: Session):
        reader = FrameReader()
        session.conn.settimeout(self.handshake_timeout_s)
        try:
            while True:
                data = session.conn.recv(65536)
                if not data:
                    break
                try:
                    lines = list(reader.feed(data))
                except ProtocolError as e:
                    session.send(make_message("error", {"message": str(e)}))
                    continue
                for line in lines:
                    self._handle_frame(session, line)
        except (OSError, socket.timeout):
            pass
        finally:
            if session.state != "dropped":
                logger.info("session for slot %s disconnected", session.slot)
            session.drop()

    def _handle_frame(self, session: Session, line: bytes):
        try:
            msg = decode(line)
        except ProtocolError as e:
            logger.warning("malformed frame from %s: %s", session.addr, e)
            session.send(make_message("error", {"message": str(e)}))
            return

        msg_type = msg["type"]
        payload = msg["payload"]
        if msg_type == "ping":
            session.send(make_message("pong"))
        elif msg_type == "hello":
            self._handle_hello(session, msg)
        elif msg_type == "action":
            if session.state != "ready":
                session.send(make_message("error",
                                          {"message": "action before welcome"}))
            else:
                session.actions.put(payload)
        else:
            session.send(make_message(
                "error", {"message": f"unexpected message type {msg_type!r}"}))

    def _handle_hello(self, session: Session, msg: dict):
        if msg["protocol_version"] != PROTOCOL_VERSION:
            session.send(make_message("error", {
                "message": f"unsupported protocol_version {msg['protocol_version']}"
                           f" (server speaks {PROTOCOL_VERSION})"}))
            session.drop()
            return
        if self.auth_token is not None \
                and msg["payload"].get("auth_token") != self.auth_token:
            session.send(make_message("error", {"message": "bad auth token"}))
            session.drop()
            return
        with self._lock:
            if not self._unassigned:
                session.send(make_message("error",
                                          {"message": "all agent slots are filled"}))
                session.drop()
                return
            slot = self._unassigned.pop(0)
            session.slot = slot
            session.entry_name = msg["payload"]["entry_name"]
            session.state = "ready"
            self.sessions[slot] = session
            last = not self._unassigned
        session.conn.settimeout(None)
        session.send(make_message("welcome", {
            "agent_slot": slot,
            "match_id": self.match_id,
            "game": self.task.game,
            "task": save_task(self.task).strip(),
        }))
        # only wake the match thread once the welcome is on the wire, so no
        # observation can overtake it
        if last:
            self._all_connected.set()
        logger.info("slot %d filled by %r from %s", slot,
                    session.entry_name, session.addr)

    # -- match driving -------------------------------------------------------

    def run_match(self):
        """Block until all remote slots handshake, then play the episode.

        Returns (EpisodeResult, MatchRecord).  Raises MatchAbortedError if
        the remote slots do not fill within the handshake timeout.
        """
        try:
            if not self._all_connected.wait(self.handshake_timeout_s):
                for s in list(self.sessions.values()):
                    s.send(make_message("error",
                                        {"message": "handshake timeout; match aborted"}))
                raise MatchAbortedError("not all remote slots connected in time")

            controllers = {}
            sources = {}
            for slot, assignment in self.slot_assignments.items():
                if assignment == "remote":
                    src = RemoteSource(self.sessions[slot], self.match_id,
                                       self.action_timeout_s, self.task.game)
                    controllers[slot] = src
                    sources[slot] = src
                else:
                    controllers[slot] = make_baseline(assignment)

            def on_tick(tick, actions, outcome):
                for slot, src in sources.items():
                    reward = outcome.rewards.get(slot, 0)
                    src.score_cp += reward
                    self.sessions[slot].send(make_message("step_result", {
                        "tick": tick,
                        "reward": reward,
                        "done": outcome.done,
                    }))

            result, record = run_episode(self.game, controllers, self.task,
                                         self.seed, tick_observer=on_tick)

            end = make_message("episode_end", {"result": {
                "total_rewards": {str(s): cp
                                  for s, cp in result.total_rewards.items()},
                "ticks_elapsed": result.ticks_elapsed,
                "termination": result.termination.value,
            }})
            final = make_message("match_end", {
                "match_id": self.match_id,
                "scores": {str(s): cp for s, cp in result.total_rewards.items()},
            })
            for s in list(self.sessions.values()):
                s.send(end)
                s.send(final)
            return result, record
        finally:
            self.close()

    def close(self):
        self._accepting = False
        try:
            self._listener.close()
        except OSError:
            pass
        for s in list(self.sessions.values()):
            s.drop()


def serve_match(task: TaskSpec, slot_assignments: dict[int, str], *,
                host: str = "127.0.0.1", port: int = 0,
                action_timeout_ms: int = DEFAULT_ACTION_TIMEOUT_MS,
                handshake_timeout_s: float = DEFAULT_HANDSHAKE_TIMEOUT_S,
                auth_token: str | None = None, seed: int | None = None,
                on_listening=None):
    """Host one match and return (EpisodeResult, MatchRecord)."""
    server = ArenaServer(task, slot_assignments, host=host, port=port,
                         action_timeout_ms=action_timeout_ms,
                         handshake_timeout_s=handshake_timeout_s,
                         auth_token=auth_token, seed=seed)
    if on_listening is not None:
        on_listening(server.address)
    return server.run_match()
