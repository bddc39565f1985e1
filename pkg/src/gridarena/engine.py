"""Episode loop: observe, collect actions, step, record.

One episode is fully determined by (task, match seed, action trace).  The
environment and every agent slot draw from independent streams derived
from the match seed, so one controller's draw count never perturbs
another's behavior.  Every tick is recorded (actions, centipoint rewards,
state hash) for later replay verification.
"""

from __future__ import annotations

import logging
from typing import Callable, Protocol

from .games import get_game
from .games.base import Game
from .hashing import hash_canonical
from .rng import Stream, derive_seed
from .task import TaskSpec, validate
from .types import (EpisodeResult, InvalidTaskError, MatchRecord, StepOutcome,
                    TickRecord)

logger = logging.getLogger(__name__)


class ActionSource(Protocol):
    def act(self, observation: dict, rng: Stream): ...


class ScriptedSource:
    """Plays back a fixed per-tick action list; used by tests and replays."""

    def __init__(self, actions):
        self.actions = list(actions)
        self._i = 0

    def act(self, observation, rng):
        if self._i >= len(self.actions):
            return "stay"
        a = self.actions[self._i]
        self._i += 1
        return a


def state_hash(game: Game, state) -> int:
    return hash_canonical(game.canonical(state))


def run_episode(
    game: Game,
    controllers: dict[int, ActionSource],
    task: TaskSpec,
    seed: int,
    tick_observer: Callable[[int, dict, StepOutcome], None] | None = None,
) -> tuple[EpisodeResult, MatchRecord]:
    """Drive one full episode and return its result plus the match record.

    A controller that raises is substituted with the game's no-op action
    for that tick and the tick is tagged; the episode always runs on.
    """
    violations = validate(task)
    if violations:
        raise InvalidTaskError(violations)
    if game.name != task.game:
        raise InvalidTaskError([f"task is for game {task.game!r}, not {game.name!r}"])

    params = task.full_params()
    slots = game.agent_slots(params)
    missing = [s for s in range(slots) if s not in controllers]
    if missing:
        raise InvalidTaskError([f"no controller for agent slots {missing}"])

    state = game.init(params, derive_seed(seed, "init"))
    env_rng = Stream(derive_seed(seed, "env"))
    slot_rngs = {s: Stream(derive_seed(seed, f"slot/{s}")) for s in range(slots)}

    totals = {s: 0 for s in range(slots)}
    ticks: list[TickRecord] = []
    noop = game.noop_action()

    while True:
        actions: dict[int, object] = {}
        substituted: list[int] = []
        for slot in game.active_slots(state):
            obs = game.observe(state, slot)
            try:
                actions[slot] = controllers[slot].act(obs, slot_rngs[slot])
            except Exception:
                logger.warning("controller for slot %d failed; substituting no-op",
                               slot, exc_info=True)
                actions[slot] = noop
                substituted.append(slot)

        outcome = game.step(state, actions, env_rng)
        h = state_hash(game, state)
        ticks.append(TickRecord(actions=actions, rewards=dict(outcome.rewards),
                                state_hash=h, substituted=substituted))
        for slot, cp in outcome.rewards.items():
            totals[slot] += cp
        if tick_observer is not None:
            tick_observer(len(ticks) - 1, actions, outcome)
        if outcome.done:
            result = EpisodeResult(total_rewards=totals,
                                   ticks_elapsed=len(ticks),
                                   termination=outcome.termination)
            record = MatchRecord(game=game.name,
                                 task={"game": task.game, "params": task.params,
                                       "seed": task.seed,
                                       "spec_version": task.spec_version},
                                 seed=seed, ticks=ticks, result=result)
            return result, record


def run_task(task: TaskSpec, controllers, seed=None, tick_observer=None):
    """Convenience wrapper: resolve the game, default seed to the task's."""
    game = get_game(task.game)
    return run_episode(game, controllers, task,
                       task.seed if seed is None else seed,
                       tick_observer=tick_observer)
