"""State hashing for replay verification.

Hashes are 64-bit FNV-1a folded over the canonical JSON serialization
(sorted keys, no whitespace) in 64-bit little-endian words, zero-padded at
the tail.  Word-wise folding keeps pure-Python hashing off the tick loop's
critical path; the exact algorithm is fixed by the id written into every
replay header, so two states hash equal iff their canonical forms are
byte-identical.
"""

from __future__ import annotations

import json
import struct

HASH_ALGORITHM = "fnv1a64w"

_MASK = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64w(data: bytes) -> int:
    """FNV-1a over the stream viewed as zero-padded little-endian u64 words."""
    pad = -len(data) % 8
    if pad:
        data = data + b"\x00" * pad
    h = _FNV_OFFSET
    for word in struct.unpack(f"<{len(data) // 8}Q", data):
        h = ((h ^ word) * _FNV_PRIME) & _MASK
    return h


def canonical_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def hash_canonical(obj) -> int:
    """Hash any JSON-serializable canonical state description."""
    return fnv1a64w(canonical_bytes(obj))
