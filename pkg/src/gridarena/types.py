"""Shared engine types.

Scores are integer centipoints throughout (1 point = 100 centipoints) so
the game reward constants (1, 0.2, 0.25, 0.5) are exact and records never
accumulate floating drift.  Decimal points appear only at I/O boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

AgentId = int

CENTI_PER_POINT = 100


def to_points(centipoints: int) -> float:
    return centipoints / CENTI_PER_POINT


class Termination(str, Enum):
    CAPTURE = "capture"
    ALL_EXITED = "all_exited"
    TIMEOUT = "timeout"
    STRUCTURE_COMPLETE = "structure_complete"
    TREASURE_EXIT = "treasure_exit"
    DEATH = "death"


@dataclass
class StepOutcome:
    """One tick's result: centipoint rewards per agent, events, termination."""

    rewards: dict[AgentId, int]
    done: bool = False
    events: list[dict] = field(default_factory=list)
    termination: Termination | None = None


@dataclass
class EpisodeResult:
    total_rewards: dict[AgentId, int]
    ticks_elapsed: int
    termination: Termination


@dataclass
class TickRecord:
    actions: dict[AgentId, object]
    rewards: dict[AgentId, int]
    state_hash: int
    substituted: list[AgentId] = field(default_factory=list)


@dataclass
class MatchRecord:
    """Full deterministic trace of one episode, sufficient for replay."""

    game: str
    task: dict
    seed: int
    ticks: list[TickRecord]
    result: EpisodeResult
    format_version: int = 1


class InvalidTaskError(ValueError):
    """Task parameters fail the owning game's validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnsupportedReplayError(ValueError):
    """Replay names an unknown game, format version, or hash algorithm."""
