"""Build Battle: two teams race to replicate a blueprint cuboid.

Each team owns a private region with the same dimensions as the shared
blueprint.  Agents walk the region's ground plane and place or remove
blocks in adjacent columns.  Every effective block event is scored against
the blueprint: +20 centipoints for moving a cell toward the blueprint
(correct place, or removal of a wrong block), -20 for moving it away.
First region to match the blueprint ends the match.

Cells are indexed (x, y, z): x across the width, z across the depth (the
ground plane), y up the height.  Regions are stored as flat row-major
lists of block-type names with None for empty.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..rng import Stream
from ..types import StepOutcome, Termination
from .base import Game, with_defaults
from .mobchase import DIRS, DIR_ORDER

BLOCK_REWARD_CP = 20

DEFAULT_PALETTE = ["stone", "dirt"]

DEFAULTS = {
    "blueprint_dims": [3, 1, 3],   # width, height, depth
    "blueprint": None,             # optional literal flat cell list
    "palette": None,               # defaults to DEFAULT_PALETTE
    "empty_fraction": 0.3,         # sampling density when blueprint is drawn
    "team_size": 2,
    "tick_limit": 200,
    "observation_radius": None,
    "weather": "clear",
}


def cell_index(w: int, d: int, x: int, y: int, z: int) -> int:
    return x + w * (z + d * y)


@dataclass
class Blueprint:
    dims: tuple[int, int, int]     # (w, h, d)
    cells: list[str | None]        # flat, None = required-empty

    def at(self, x, y, z):
        w, _, d = self.dims
        return self.cells[cell_index(w, d, x, y, z)]


@dataclass
class BuildState:
    blueprint: Blueprint
    regions: dict[int, list[str | None]]     # team -> flat cells
    agent_pos: dict[int, tuple[int, int]]    # slot -> (x, z) on ground plane
    team_of: dict[int, int]
    palette: list[str]
    team_score: dict[int, int]               # running centipoints, for observations
    tick: int
    tick_limit: int


class BuildBattle(Game):
    name = "buildbattle"

    def default_params(self):
        return dict(DEFAULTS)

    def validate_params(self, params):
        p = with_defaults(params, DEFAULTS)
        errs = []
        dims = p["blueprint_dims"]
        if len(dims) != 3 or any(v < 1 for v in dims):
            errs.append("blueprint_dims must be three values >= 1")
        else:
            w, h, d = dims
            if w * d < 2:
                errs.append("ground plane too small: agents need a cell next to every column")
            if w * d < p["team_size"]:
                errs.append("ground plane too small for the team")
        palette = p["palette"] if p["palette"] is not None else DEFAULT_PALETTE
        if len(palette) < 1:
            errs.append("palette must name at least one block type")
        if p["team_size"] < 1:
            errs.append("team_size must be >= 1")
        if p["tick_limit"] < 1:
            errs.append("tick_limit must be >= 1")
        if p["blueprint"] is not None:
            w, h, d = dims
            if len(p["blueprint"]) != w * h * d:
                errs.append("blueprint literal length does not match blueprint_dims")
            elif not any(c is not None for c in p["blueprint"]):
                errs.append("blueprint must require at least one block")
            elif any(c is not None and c not in palette for c in p["blueprint"]):
                errs.append("blueprint uses a block type outside the palette")
        return errs

    def agent_slots(self, params):
        return 2 * with_defaults(params, DEFAULTS)["team_size"]

    def init(self, params, seed):
        p = with_defaults(params, DEFAULTS)
        w, h, d = p["blueprint_dims"]
        palette = list(p["palette"]) if p["palette"] is not None else list(DEFAULT_PALETTE)
        rng = Stream(seed)

        if p["blueprint"] is not None:
            cells = list(p["blueprint"])
        else:
            cells = []
            for _ in range(w * h * d):
                if rng.random() < p["empty_fraction"]:
                    cells.append(None)
                else:
                    cells.append(palette[rng.randrange(len(palette))])
            if not any(c is not None for c in cells):
                cells[rng.randrange(len(cells))] = palette[0]
        blueprint = Blueprint(dims=(w, h, d), cells=cells)

        ts = p["team_size"]
        ground = [(x, z) for z in range(d) for x in range(w)]
        agent_pos = {}
        team_of = {}
        for team in (0, 1):
            spots = rng.sample(ground, ts)
            for i in range(ts):
                slot = team * ts + i
                agent_pos[slot] = spots[i]
                team_of[slot] = team

        return BuildState(
            blueprint=blueprint,
            regions={0: [None] * (w * h * d), 1: [None] * (w * h * d)},
            agent_pos=agent_pos,
            team_of=team_of,
            palette=palette,
            team_score={0: 0, 1: 0},
            tick=0,
            tick_limit=p["tick_limit"],
        )

    def active_slots(self, state):
        return sorted(state.agent_pos)

    def classify_event(self, blueprint, pos, before, after):
        """Centipoint value of one effective block event at pos."""
        want = blueprint.at(*pos)
        if after is not None:       # placement
            return BLOCK_REWARD_CP if after == want else -BLOCK_REWARD_CP
        # removal: taking away the required block is the only bad removal
        return -BLOCK_REWARD_CP if before == want else BLOCK_REWARD_CP

    def is_complete(self, region, blueprint):
        return region == blueprint.cells

    def step(self, state, actions, rng):
        w, h, d = state.blueprint.dims
        rewards = {slot: 0 for slot in state.agent_pos}
        events = []

        # Ground-plane moves: same conflict rule as the meadow, but teams
        # occupy separate regions so only teammates can collide.
        occupied = {}
        for slot, pos in state.agent_pos.items():
            occupied.setdefault(state.team_of[slot], set()).add(pos)
        for slot in sorted(actions):
            act = actions[slot]
            if isinstance(act, str) and act in DIRS:
                dx, dz = DIRS[act]
                x, z = state.agent_pos[slot]
                tx, tz = x + dx, z + dz
                team = state.team_of[slot]
                if 0 <= tx < w and 0 <= tz < d and (tx, tz) not in occupied[team]:
                    occupied[team].discard((x, z))
                    occupied[team].add((tx, tz))
                    state.agent_pos[slot] = (tx, tz)

        for slot in sorted(actions):
            act = actions[slot]
            if not isinstance(act, list):
                continue
            kind = act[0]
            team = state.team_of[slot]
            region = state.regions[team]
            x, z = state.agent_pos[slot]
            if kind == "place" and len(act) == 5:
                _, block, dx, dz, y = act
                if block not in state.palette or (dx, dz) not in DIRS.values():
                    continue
                tx, tz = x + dx, z + dz
                if not (0 <= tx < w and 0 <= tz < d and 0 <= y < h):
                    continue
                idx = cell_index(w, d, tx, y, tz)
                if region[idx] is not None:
                    continue
                region[idx] = block
                delta = self.classify_event(state.blueprint, (tx, y, tz), None, block)
                rewards[slot] += delta
                state.team_score[team] += delta
                events.append({"type": "place", "slot": slot,
                               "pos": [tx, y, tz], "block": block, "delta": delta})
            elif kind == "remove" and len(act) == 4:
                _, dx, dz, y = act
                if (dx, dz) not in DIRS.values():
                    continue
                tx, tz = x + dx, z + dz
                if not (0 <= tx < w and 0 <= tz < d and 0 <= y < h):
                    continue
                idx = cell_index(w, d, tx, y, tz)
                before = region[idx]
                if before is None:
                    continue
                region[idx] = None
                delta = self.classify_event(state.blueprint, (tx, y, tz), before, None)
                rewards[slot] += delta
                state.team_score[team] += delta
                events.append({"type": "remove", "slot": slot,
                               "pos": [tx, y, tz], "block": before, "delta": delta})

        outcome = StepOutcome(rewards=rewards, events=events)
        state.tick += 1
        complete = [t for t in (0, 1) if self.is_complete(state.regions[t], state.blueprint)]
        if complete:
            events.append({"type": "complete", "team": complete[0]})
            outcome.done = True
            outcome.termination = Termination.STRUCTURE_COMPLETE
        elif state.tick >= state.tick_limit:
            events.append({"type": "timeout"})
            outcome.done = True
            outcome.termination = Termination.TIMEOUT
        return outcome

    def potential(self, region, blueprint):
        """Matching-placed minus mismatching-placed cells: block rewards
        always equal BLOCK_REWARD_CP times the change in this value."""
        phi = 0
        for have, want in zip(region, blueprint.cells):
            if have is None:
                continue
            phi += 1 if have == want else -1
        return phi

    def observe(self, state, slot):
        team = state.team_of[slot]
        w, h, d = state.blueprint.dims
        return {
            "game": self.name,
            "you": slot,
            "team": team,
            "pos": list(state.agent_pos[slot]),
            "dims": [w, h, d],
            "palette": list(state.palette),
            "blueprint": list(state.blueprint.cells),
            "region": list(state.regions[team]),
            "teammates": {
                str(s): list(p) for s, p in state.agent_pos.items()
                if state.team_of[s] == team and s != slot
            },
            "own_score": state.team_score[team],
            "opponent_score": state.team_score[1 - team],
            "ticks_remaining": state.tick_limit - state.tick,
        }

    def canonical(self, state):
        return {
            "game": self.name,
            "blueprint": state.blueprint.cells,
            "regions": [state.regions[0], state.regions[1]],
            "agents": [
                [s, list(state.agent_pos[s]), state.team_of[s]]
                for s in sorted(state.agent_pos)
            ],
            "scores": [state.team_score[0], state.team_score[1]],
            "tick": state.tick,
        }


GAME = BuildBattle()
