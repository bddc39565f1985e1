"""Wire protocol: newline-delimited JSON frames over TCP.

One frame is one LF-terminated UTF-8 line holding a single JSON object:
{"type": ..., "payload": {...}} with "protocol_version" present on hello
and welcome.  Text framing keeps the protocol debuggable with netcat and
trivial to implement from any client language; throughput is not a
concern at this scale.  Frames above 1 MiB are rejected outright.

Rewards on the wire are integer centipoints, same as everywhere else in
the engine, so client-side accumulation is exact.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 1 << 20


class ProtocolError(ValueError):
    """Frame violates the message schema; names the offending field."""


# Required payload keys per message type.
_SCHEMAS = {
    "hello": ("entry_name",),
    "welcome": ("agent_slot", "match_id", "game", "task"),
    "observation": ("match_id", "tick", "agent_slot", "view", "score_so_far"),
    "action": ("match_id", "tick", "action"),
    "step_result": ("tick", "reward", "done"),
    "episode_end": ("result",),
    "match_end": ("match_id", "scores"),
    "error": ("message",),
    "ping": (),
    "pong": (),
}

_VERSIONED = {"hello", "welcome"}


def make_message(msg_type: str, payload: dict | None = None) -> dict:
    msg = {"type": msg_type, "payload": payload or {}}
    if msg_type in _VERSIONED:
        msg["protocol_version"] = PROTOCOL_VERSION
    return msg


def _check(msg: dict) -> dict:
    if not isinstance(msg, dict):
        raise ProtocolError("frame must be a JSON object")
    msg_type = msg.get("type")
    if msg_type not in _SCHEMAS:
        raise ProtocolError(f"unknown message type {msg_type!r}")
    payload = msg.get("payload")
    if not isinstance(payload, dict):
        raise ProtocolError("missing or invalid field 'payload'")
    for key in _SCHEMAS[msg_type]:
        if key not in payload:
            raise ProtocolError(f"message {msg_type!r} is missing field 'payload.{key}'")
    if msg_type in _VERSIONED and not isinstance(msg.get("protocol_version"), int):
        raise ProtocolError(f"message {msg_type!r} is missing field 'protocol_version'")
    return msg


def encode(msg: dict) -> bytes:
    _check(msg)
    data = json.dumps(msg, sort_keys=True, separators=(",", ":")).encode("utf-8")
    if len(data) + 1 > MAX_FRAME_BYTES:
        raise ProtocolError("frame exceeds 1 MiB")
    return data + b"\n"


def decode(line: bytes | str) -> dict:
    if isinstance(line, str):
        line = line.encode("utf-8")
    if len(line) > MAX_FRAME_BYTES:
        raise ProtocolError("frame exceeds 1 MiB")
    try:
        msg = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(f"malformed frame: {e}") from None
    return _check(msg)


class FrameReader:
    """Splits a byte stream into frames, resynchronizing at each newline."""

    def __init__(self):
        self._buf = b""

    def feed(self, data: bytes):
        """Yield complete raw lines from the stream so far."""
        self._buf += data
        if len(self._buf) > MAX_FRAME_BYTES:
            overflow, self._buf = self._buf, b""
            raise ProtocolError("frame exceeds 1 MiB")
        while b"\n" in self._buf:
            line, self._buf = self._buf.split(b"\n", 1)
            if line.strip():
                yield line
