"""Interface every game module implements.

A game is a bundle of pure functions over a plain state object: validate
parameters, build an initial state from a seed, advance one lockstep tick,
and describe the state (observation payloads, canonical form for hashing).
The engine and server only ever talk to games through this surface.
"""

from __future__ import annotations

from ..rng import Stream
from ..types import StepOutcome


class Game:
    name: str = ""

    def default_params(self) -> dict:
        raise NotImplementedError

    def validate_params(self, params: dict) -> list[str]:
        """Return a list of human-readable violations (empty = valid)."""
        raise NotImplementedError

    def agent_slots(self, params: dict) -> int:
        raise NotImplementedError

    def init(self, params: dict, seed: int):
        raise NotImplementedError

    def active_slots(self, state) -> list[int]:
        raise NotImplementedError

    def noop_action(self):
        return "stay"

    def step(self, state, actions: dict[int, object], rng: Stream) -> StepOutcome:
        raise NotImplementedError

    def observe(self, state, slot: int) -> dict:
        raise NotImplementedError

    def canonical(self, state) -> dict:
        """JSON-serializable canonical form; the hashing input."""
        raise NotImplementedError


def with_defaults(params: dict, defaults: dict) -> dict:
    merged = dict(defaults)
    merged.update(params or {})
    return merged
