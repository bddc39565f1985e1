"""Mob Chase: cooperative capture-or-leave in a fenced meadow.

Two or more agents share a small meadow with a wandering mob.  Cornering
the mob (no free cell adjacent to it) pays every still-active agent 100
centipoints; stepping off through an exit cell pays that agent 20 and
removes it from the grid.  The episode ends on capture, when everyone has
exited, or at the tick limit.

Tick order: agent moves resolve simultaneously (lowest slot wins cell
conflicts), exits are processed, the mob moves, then the capture test runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..rng import Stream
from ..types import StepOutcome, Termination
from .base import Game, with_defaults

FENCE = "#"
FREE = "."
EXIT = "E"

# N, E, S, W scan order everywhere a direction tie must break deterministically.
DIRS = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}
DIR_ORDER = ("N", "E", "S", "W")

EXIT_REWARD_CP = 20
CAPTURE_REWARD_CP = 100

DEFAULTS = {
    "width": 7,
    "height": 7,
    "agent_count": 2,
    "exit_count": 2,
    "tick_limit": 100,
    "flee_bias": 0.75,
    "observation_radius": None,
    "weather": "clear",
    "exits": None,             # optional fixed [x, y] list
    "mob_pos": None,           # optional fixed [x, y]
    "agent_positions": None,   # optional fixed list of [x, y]
}

ACTIVE = "active"
EXITED = "exited"


@dataclass
class MobChaseState:
    width: int
    height: int
    cells: list[str]                 # rows of FENCE/FREE/EXIT characters
    mob_pos: tuple[int, int]
    agent_pos: dict[int, tuple[int, int]]
    agent_status: dict[int, str]
    tick: int
    tick_limit: int
    flee_bias: float
    observation_radius: int | None


def _walkable(cells, x, y, width, height):
    return 0 <= x < width and 0 <= y < height and cells[y][x] != FENCE


class MobChase(Game):
    name = "mobchase"

    def default_params(self):
        return dict(DEFAULTS)

    def validate_params(self, params):
        p = with_defaults(params, DEFAULTS)
        errs = []
        w, h = p["width"], p["height"]
        n = p["agent_count"]
        if w < 3 or h < 3:
            errs.append("grid too small: width and height must be >= 3")
        if n < 2:
            errs.append("agent_count must be >= 2")
        if p["exit_count"] < 1:
            errs.append("exit_count must be >= 1")
        if p["tick_limit"] < 1:
            errs.append("tick_limit must be >= 1")
        if not (0.0 <= p["flee_bias"] <= 1.0):
            errs.append("flee_bias must be in [0, 1]")
        if w >= 3 and h >= 3:
            interior = (w - 2) * (h - 2)
            if interior < n + 1:
                errs.append("grid too small: cannot place all agents and the mob")
            perimeter_slots = 2 * max(w - 2, 0) + 2 * max(h - 2, 0)
            if p["exit_count"] > perimeter_slots:
                errs.append("exit_count exceeds available perimeter cells")
        if p["agent_positions"] is not None and len(p["agent_positions"]) != n:
            errs.append("agent_positions must list one cell per agent")
        return errs

    def agent_slots(self, params):
        return with_defaults(params, DEFAULTS)["agent_count"]

    def init(self, params, seed):
        p = with_defaults(params, DEFAULTS)
        w, h, n = p["width"], p["height"], p["agent_count"]
        rng = Stream(seed)

        if p["exits"] is not None:
            exits = [tuple(c) for c in p["exits"]]
        else:
            candidates = (
                [(x, 0) for x in range(1, w - 1)]
                + [(x, h - 1) for x in range(1, w - 1)]
                + [(0, y) for y in range(1, h - 1)]
                + [(w - 1, y) for y in range(1, h - 1)]
            )
            exits = rng.sample(candidates, p["exit_count"])

        exit_set = set(exits)
        cells = []
        for y in range(h):
            row = []
            for x in range(w):
                if (x, y) in exit_set:
                    row.append(EXIT)
                elif x == 0 or y == 0 or x == w - 1 or y == h - 1:
                    row.append(FENCE)
                else:
                    row.append(FREE)
            cells.append("".join(row))

        interior = [(x, y) for y in range(1, h - 1) for x in range(1, w - 1)]
        taken = set()
        if p["mob_pos"] is not None:
            mob_pos = tuple(p["mob_pos"])
        else:
            mob_pos = None
        agent_pos = {}
        if p["agent_positions"] is not None:
            for slot, c in enumerate(p["agent_positions"]):
                agent_pos[slot] = tuple(c)
            taken |= set(agent_pos.values())
        if mob_pos is not None:
            taken.add(mob_pos)

        free = [c for c in interior if c not in taken]
        need = (1 if mob_pos is None else 0) + (n - len(agent_pos))
        drawn = rng.sample(free, need)
        i = 0
        if mob_pos is None:
            mob_pos = drawn[i]
            i += 1
        for slot in range(n):
            if slot not in agent_pos:
                agent_pos[slot] = drawn[i]
                i += 1

        return MobChaseState(
            width=w,
            height=h,
            cells=cells,
            mob_pos=mob_pos,
            agent_pos=agent_pos,
            agent_status={slot: ACTIVE for slot in range(n)},
            tick=0,
            tick_limit=p["tick_limit"],
            flee_bias=p["flee_bias"],
            observation_radius=p["observation_radius"],
        )

    def active_slots(self, state):
        return [s for s, st in sorted(state.agent_status.items()) if st == ACTIVE]

    def step(self, state, actions, rng):
        rewards = {slot: 0 for slot in self.active_slots(state)}
        events = []

        occupied = {pos for slot, pos in state.agent_pos.items()
                    if state.agent_status[slot] == ACTIVE}
        occupied.add(state.mob_pos)

        # Simultaneous moves; lowest slot claims a contested cell first,
        # everyone else's illegal move degrades to Stay.
        for slot in sorted(actions):
            act = actions[slot]
            if act in DIRS:
                dx, dy = DIRS[act]
                x, y = state.agent_pos[slot]
                tx, ty = x + dx, y + dy
                if _walkable(state.cells, tx, ty, state.width, state.height) \
                        and (tx, ty) not in occupied:
                    occupied.discard((x, y))
                    occupied.add((tx, ty))
                    state.agent_pos[slot] = (tx, ty)
            elif act == "exit":
                x, y = state.agent_pos[slot]
                if state.cells[y][x] == EXIT:
                    state.agent_status[slot] = EXITED
                    occupied.discard((x, y))
                    rewards[slot] = EXIT_REWARD_CP
                    events.append({"type": "exit", "slot": slot})

        state.mob_pos = self.mob_policy(state, rng)

        outcome = StepOutcome(rewards=rewards, events=events)
        state.tick += 1
        active = self.active_slots(state)

        if self.is_captured(state):
            for slot in active:
                rewards[slot] += CAPTURE_REWARD_CP
            events.append({"type": "capture", "mob_pos": list(state.mob_pos)})
            outcome.done = True
            outcome.termination = Termination.CAPTURE
        elif not active:
            events.append({"type": "all_exited"})
            outcome.done = True
            outcome.termination = Termination.ALL_EXITED
        elif state.tick >= state.tick_limit:
            events.append({"type": "timeout"})
            outcome.done = True
            outcome.termination = Termination.TIMEOUT
        return outcome

    def is_captured(self, state):
        """True iff every 4-neighbor of the mob is fence or an active agent."""
        mx, my = state.mob_pos
        agents = {pos for slot, pos in state.agent_pos.items()
                  if state.agent_status[slot] == ACTIVE}
        for d in DIR_ORDER:
            dx, dy = DIRS[d]
            nx, ny = mx + dx, my + dy
            if _walkable(state.cells, nx, ny, state.width, state.height) \
                    and (nx, ny) not in agents:
                return False
        return True

    def mob_policy(self, state, rng):
        """Next mob cell: flee with probability flee_bias, else wander."""
        mx, my = state.mob_pos
        agents = [pos for slot, pos in state.agent_pos.items()
                  if state.agent_status[slot] == ACTIVE]
        agent_set = set(agents)
        free = []
        for d in DIR_ORDER:
            dx, dy = DIRS[d]
            nx, ny = mx + dx, my + dy
            if _walkable(state.cells, nx, ny, state.width, state.height) \
                    and (nx, ny) not in agent_set:
                free.append((nx, ny))
        if not free:
            return (mx, my)
        if agents and rng.random() < state.flee_bias:
            dists = [min(abs(cx - ax) + abs(cy - ay) for ax, ay in agents)
                     for cx, cy in free]
            best = max(dists)
            ties = [c for c, dc in zip(free, dists) if dc == best]
            return ties[0] if len(ties) == 1 else rng.choice(ties)
        return rng.choice(free)

    def observe(self, state, slot):
        x, y = state.agent_pos[slot]
        obs = {
            "game": self.name,
            "you": slot,
            "pos": [x, y],
            "width": state.width,
            "height": state.height,
            "ticks_remaining": state.tick_limit - state.tick,
            "agents": {
                str(s): {"pos": list(p), "status": state.agent_status[s]}
                for s, p in state.agent_pos.items()
                if state.agent_status[s] == ACTIVE
            },
        }
        r = state.observation_radius
        if r is None or r <= 0:
            obs["grid"] = state.cells
            obs["mob"] = list(state.mob_pos)
        else:
            x0, x1 = max(0, x - r), min(state.width - 1, x + r)
            y0, y1 = max(0, y - r), min(state.height - 1, y + r)
            obs["grid"] = [state.cells[wy][x0:x1 + 1] for wy in range(y0, y1 + 1)]
            obs["window_origin"] = [x0, y0]
            mx, my = state.mob_pos
            obs["mob"] = [mx, my] if abs(mx - x) <= r and abs(my - y) <= r else None
            obs["agents"] = {
                s: a for s, a in obs["agents"].items()
                if abs(a["pos"][0] - x) <= r and abs(a["pos"][1] - y) <= r
            }
        return obs

    def canonical(self, state):
        return {
            "game": self.name,
            "cells": state.cells,
            "mob": list(state.mob_pos),
            "agents": [
                [s, list(state.agent_pos[s]), state.agent_status[s]]
                for s in sorted(state.agent_pos)
            ],
            "tick": state.tick,
        }


GAME = MobChase()
