"""Treasure Hunt: two teams race for a treasure in a generated dungeon.

Each team fields one collector (can pick up the treasure) plus fighters.
Hostile foes roam the map, chase agents on sight and hit for 1 hp.  The
episode ends the moment the carrier reaches the exit, any agent dies, or
time runs out.

Scoring (centipoints, per agent): pickup +25 to the carrier's team and -25
to the other; carrier-at-exit +50 / -50; a death costs the dead agent's
whole team -100 and pays the opponents nothing.

The dungeon is rooms-and-corridors: non-overlapping rectangular rooms
carved from solid wall, consecutive room centers joined by L-corridors,
the exit in the first room and the treasure in the room farthest from it.
Layouts that fail a flood-fill connectivity check are regenerated from a
derived seed; a bounded number of restarts guards against bad parameters.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from ..rng import Stream, derive_seed
from ..types import InvalidTaskError, StepOutcome, Termination
from .base import Game, with_defaults
from .mobchase import DIRS, DIR_ORDER

WALL = "#"
FLOOR = "."
EXIT = "E"

PICKUP_CP = 25
EXIT_CP = 50
DEATH_CP = -100

COLLECTOR = "collector"
FIGHTER = "fighter"

DEFAULTS = {
    "width": 15,
    "height": 15,
    "rooms": 4,
    "team_size": 2,
    "foe_count": 2,
    "sight_radius": 5,
    "agent_hp": 2,
    "foe_hp": 1,
    "treasure_count": 1,
    "tick_limit": 300,
    "observation_radius": 4,
    "weather": "clear",
}

_MAX_RESTARTS = 20


@dataclass
class DungeonMap:
    width: int
    height: int
    cells: list[str]
    exit_pos: tuple[int, int]
    treasure_pos: tuple[int, int]
    spawn_points: dict[int, list[tuple[int, int]]]
    rooms: list[tuple[int, int, int, int]]   # (x, y, w, h)


@dataclass
class HuntState:
    map: DungeonMap
    agent_pos: dict[int, tuple[int, int]]
    agent_hp: dict[int, int]
    role_of: dict[int, str]
    team_of: dict[int, int]
    foes: list[dict]                         # {"pos": (x, y), "hp": int}
    carrier: int | None
    treasure_present: bool
    tick: int
    tick_limit: int
    sight_radius: int
    observation_radius: int
    dead: list[int] = field(default_factory=list)


def _walkable(cells, x, y, w, h):
    return 0 <= x < w and 0 <= y < h and cells[y][x] != WALL


def flood_fill(cells, start):
    """All walkable cells reachable from start by 4-connectivity."""
    w, h = len(cells[0]), len(cells)
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for d in DIR_ORDER:
            dx, dy = DIRS[d]
            nx, ny = x + dx, y + dy
            if (nx, ny) not in seen and _walkable(cells, nx, ny, w, h):
                seen.add((nx, ny))
                queue.append((nx, ny))
    return seen


def bfs_distances(cells, start, blocked=()):
    w, h = len(cells[0]), len(cells)
    blocked = set(blocked)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for d in DIR_ORDER:
            dx, dy = DIRS[d]
            nx, ny = x + dx, y + dy
            if (nx, ny) in dist or (nx, ny) in blocked:
                continue
            if _walkable(cells, nx, ny, w, h):
                dist[(nx, ny)] = dist[(x, y)] + 1
                queue.append((nx, ny))
    return dist


def generate_dungeon(params: dict, seed: int) -> DungeonMap:
    p = with_defaults(params, DEFAULTS)
    w, h, k = p["width"], p["height"], p["rooms"]
    ts = p["team_size"]

    for attempt in range(_MAX_RESTARTS):
        rng = Stream(derive_seed(seed, attempt))
        layout = _try_layout(rng, w, h, k, ts)
        if layout is None:
            continue
        reachable = flood_fill(layout.cells, layout.exit_pos)
        walkable = {(x, y) for y in range(h) for x in range(w)
                    if layout.cells[y][x] != WALL}
        if reachable == walkable:
            return layout
    raise InvalidTaskError(["dungeon generation failed: no valid layout for parameters"])


def _try_layout(rng, w, h, k, team_size):
    # cap room size by the per-room share of the interior (rooms keep a
    # 1-cell margin) so k rooms can actually pack into a tight map
    area_cap = math.isqrt((w - 2) * (h - 2) // k) - 1
    max_room = min(7, w - 4, h - 4, max(3, area_cap))
    if max_room < 3:
        return None
    rooms = []
    for _ in range(k):
        placed = False
        for _ in range(200):
            rw = rng.randint(3, max_room)
            rh = rng.randint(3, max_room)
            rx = rng.randint(1, w - rw - 1)
            ry = rng.randint(1, h - rh - 1)
            if all(rx + rw + 1 <= ox or ox + ow + 1 <= rx
                   or ry + rh + 1 <= oy or oy + oh + 1 <= ry
                   for ox, oy, ow, oh in rooms):
                rooms.append((rx, ry, rw, rh))
                placed = True
                break
        if not placed:
            return None

    grid = [[WALL] * w for _ in range(h)]
    for rx, ry, rw, rh in rooms:
        for y in range(ry, ry + rh):
            for x in range(rx, rx + rw):
                grid[y][x] = FLOOR

    def center(room):
        rx, ry, rw, rh = room
        return (rx + rw // 2, ry + rh // 2)

    for a, b in zip(rooms, rooms[1:]):
        (ax, ay), (bx, by) = center(a), center(b)
        if rng.randrange(2) == 0:
            _carve_h(grid, ax, bx, ay)
            _carve_v(grid, ay, by, bx)
        else:
            _carve_v(grid, ay, by, ax)
            _carve_h(grid, ax, bx, by)

    cells = ["".join(row) for row in grid]
    exit_pos = center(rooms[0])
    dist = bfs_distances(cells, exit_pos)

    def room_cells(room):
        rx, ry, rw, rh = room
        return [(x, y) for y in range(ry, ry + rh) for x in range(rx, rx + rw)]

    treasure_room = max(range(len(rooms)),
                        key=lambda i: dist.get(center(rooms[i]), -1))
    if len(rooms) == 1:
        candidates = [c for c in room_cells(rooms[0]) if c != exit_pos]
        treasure_pos = max(candidates, key=lambda c: (dist.get(c, -1), c))
    else:
        treasure_pos = center(rooms[treasure_room])
        if treasure_pos == exit_pos:
            return None

    reserved = {exit_pos, treasure_pos}
    if len(rooms) >= 3:
        spawn_rooms = [i for i in range(len(rooms)) if i != treasure_room][:2]
    elif len(rooms) == 2:
        spawn_rooms = [0, 1]
    else:
        spawn_rooms = [0, 0]
    spawn_points = {}
    for team, ri in enumerate(spawn_rooms):
        free = [c for c in room_cells(rooms[ri]) if c not in reserved]
        if len(free) < team_size:
            return None
        cells_for_team = rng.sample(free, team_size)
        reserved |= set(cells_for_team)
        spawn_points[team] = cells_for_team

    grid[exit_pos[1]][exit_pos[0]] = EXIT
    cells = ["".join(row) for row in grid]
    return DungeonMap(width=w, height=h, cells=cells, exit_pos=exit_pos,
                      treasure_pos=treasure_pos, spawn_points=spawn_points,
                      rooms=rooms)


def _carve_h(grid, x0, x1, y):
    for x in range(min(x0, x1), max(x0, x1) + 1):
        if grid[y][x] == WALL:
            grid[y][x] = FLOOR


def _carve_v(grid, y0, y1, x):
    for y in range(min(y0, y1), max(y0, y1) + 1):
        if grid[y][x] == WALL:
            grid[y][x] = FLOOR


class TreasureHunt(Game):
    name = "treasurehunt"

    def default_params(self):
        return dict(DEFAULTS)

    def validate_params(self, params):
        p = with_defaults(params, DEFAULTS)
        errs = []
        w, h = p["width"], p["height"]
        if w < 7 or h < 7:
            errs.append("grid too small: width and height must be >= 7")
        if p["rooms"] < 1:
            errs.append("rooms must be >= 1")
        elif w >= 7 and h >= 7 and p["rooms"] * 16 > (w - 2) * (h - 2):
            errs.append("too many rooms for the map size")
        if p["team_size"] < 1:
            errs.append("team_size must be >= 1 (every team needs a collector)")
        if p["foe_count"] < 0:
            errs.append("foe_count must be >= 0")
        if p["treasure_count"] != 1:
            errs.append("treasure_count must be 1")
        if p["agent_hp"] < 1 or p["foe_hp"] < 1:
            errs.append("hit points must be >= 1")
        if p["tick_limit"] < 1:
            errs.append("tick_limit must be >= 1")
        if p["sight_radius"] < 0 or p["observation_radius"] < 1:
            errs.append("radii must be non-negative (observation_radius >= 1)")
        return errs

    def agent_slots(self, params):
        return 2 * with_defaults(params, DEFAULTS)["team_size"]

    def init(self, params, seed):
        p = with_defaults(params, DEFAULTS)
        dungeon = generate_dungeon(p, derive_seed(seed, "map"))
        rng = Stream(derive_seed(seed, "entities"))
        ts = p["team_size"]

        agent_pos, agent_hp, role_of, team_of = {}, {}, {}, {}
        for team in (0, 1):
            for i, cell in enumerate(dungeon.spawn_points[team]):
                slot = team * ts + i
                agent_pos[slot] = cell
                agent_hp[slot] = p["agent_hp"]
                role_of[slot] = COLLECTOR if i == 0 else FIGHTER
                team_of[slot] = team

        taken = set(agent_pos.values()) | {dungeon.treasure_pos, dungeon.exit_pos}
        def far_from_spawns(c):
            return all(abs(c[0] - s[0]) + abs(c[1] - s[1]) > 2
                       for s in agent_pos.values())
        floor = [(x, y) for y in range(dungeon.height) for x in range(dungeon.width)
                 if dungeon.cells[y][x] == FLOOR and (x, y) not in taken]
        preferred = [c for c in floor if far_from_spawns(c)] or floor
        foes = []
        for cell in rng.sample(preferred, min(p["foe_count"], len(preferred))):
            foes.append({"pos": cell, "hp": p["foe_hp"]})

        return HuntState(
            map=dungeon,
            agent_pos=agent_pos,
            agent_hp=agent_hp,
            role_of=role_of,
            team_of=team_of,
            foes=foes,
            carrier=None,
            treasure_present=True,
            tick=0,
            tick_limit=p["tick_limit"],
            sight_radius=p["sight_radius"],
            observation_radius=p["observation_radius"],
        )

    def active_slots(self, state):
        return [s for s in sorted(state.agent_pos) if s not in state.dead]

    def event_rewards(self, kind, subject_team, team_of):
        """Centipoints per agent for one scoring event.

        Pickup and exit are zero-sum between the teams; a death is strictly
        team-local (the opponents get nothing for it).
        """
        out = {}
        for slot, team in team_of.items():
            if kind == "pickup":
                out[slot] = PICKUP_CP if team == subject_team else -PICKUP_CP
            elif kind == "treasure_exit":
                out[slot] = EXIT_CP if team == subject_team else -EXIT_CP
            elif kind == "death":
                out[slot] = DEATH_CP if team == subject_team else 0
            else:
                raise ValueError(f"unknown event kind {kind!r}")
        return out

    def step(self, state, actions, rng):
        m = state.map
        rewards = {slot: 0 for slot in state.agent_pos}
        events = []
        outcome = StepOutcome(rewards=rewards, events=events)

        def credit(kind, team):
            for slot, cp in self.event_rewards(kind, team, state.team_of).items():
                rewards[slot] += cp

        occupied = {pos for slot, pos in state.agent_pos.items()
                    if slot not in state.dead}
        foe_cells = {tuple(f["pos"]) for f in state.foes}

        for slot in sorted(actions):
            act = actions[slot]
            if isinstance(act, str) and act in DIRS:
                dx, dy = DIRS[act]
                x, y = state.agent_pos[slot]
                tx, ty = x + dx, y + dy
                if _walkable(m.cells, tx, ty, m.width, m.height) \
                        and (tx, ty) not in occupied and (tx, ty) not in foe_cells:
                    occupied.discard((x, y))
                    occupied.add((tx, ty))
                    state.agent_pos[slot] = (tx, ty)
            elif isinstance(act, list) and len(act) == 2 and act[0] == "attack":
                if act[1] not in DIRS:
                    continue
                dx, dy = DIRS[act[1]]
                x, y = state.agent_pos[slot]
                target = (x + dx, y + dy)
                for foe in state.foes:
                    if tuple(foe["pos"]) == target:
                        foe["hp"] -= 1
                        if foe["hp"] <= 0:
                            state.foes.remove(foe)
                            foe_cells.discard(target)
                            events.append({"type": "foe_death", "pos": list(target)})
                        break
            elif act == "pickup":
                if (state.role_of[slot] == COLLECTOR and state.treasure_present
                        and state.agent_pos[slot] == m.treasure_pos):
                    state.carrier = slot
                    state.treasure_present = False
                    events.append({"type": "pickup", "slot": slot})
                    credit("pickup", state.team_of[slot])

        if state.carrier is not None and state.carrier not in state.dead \
                and state.agent_pos[state.carrier] == m.exit_pos:
            events.append({"type": "treasure_exit", "slot": state.carrier})
            credit("treasure_exit", state.team_of[state.carrier])
            outcome.done = True
            outcome.termination = Termination.TREASURE_EXIT

        if not outcome.done:
            for foe in list(state.foes):
                died = self._foe_act(state, foe, rng, events)
                if died is not None:
                    credit("death", state.team_of[died])
                    outcome.done = True
                    outcome.termination = Termination.DEATH
                    break

        state.tick += 1
        if not outcome.done and state.tick >= state.tick_limit:
            events.append({"type": "timeout"})
            outcome.done = True
            outcome.termination = Termination.TIMEOUT
        return outcome

    def _foe_act(self, state, foe, rng, events):
        """One foe's turn; returns the slot of an agent it killed, if any."""
        move = self.foe_policy(state, foe, rng)
        if isinstance(move, int):
            state.agent_hp[move] -= 1
            if state.agent_hp[move] <= 0:
                state.dead.append(move)
                events.append({"type": "death", "slot": move,
                               "team": state.team_of[move]})
                return move
            return None
        if move is not None:
            foe["pos"] = move
        return None

    def foe_policy(self, state, foe, rng):
        """Attack an adjacent agent (lowest slot), else chase the nearest
        agent in sight by BFS, else wander.  Returns a slot to attack, a
        cell to move to, or None to stay."""
        m = state.map
        fx, fy = foe["pos"]
        alive = [(s, state.agent_pos[s]) for s in self.active_slots(state)]

        adjacent = [s for s, (ax, ay) in alive if abs(ax - fx) + abs(ay - fy) == 1]
        if adjacent:
            return min(adjacent)

        foe_cells = {tuple(f["pos"]) for f in state.foes if f is not foe}
        agent_cells = {pos for _, pos in alive}

        in_sight = [(abs(ax - fx) + abs(ay - fy), s, (ax, ay))
                    for s, (ax, ay) in alive
                    if abs(ax - fx) + abs(ay - fy) <= state.sight_radius]
        if in_sight:
            _, _, target = min(in_sight)
            blocked = foe_cells | (agent_cells - {target})
            dist = bfs_distances(m.cells, target, blocked=blocked)
            best, best_cell = dist.get((fx, fy)), None
            if best is not None:
                for d in DIR_ORDER:
                    dx, dy = DIRS[d]
                    cell = (fx + dx, fy + dy)
                    nd = dist.get(cell)
                    if nd is not None and nd < best and cell != target:
                        best, best_cell = nd, cell
                if best_cell is not None:
                    return best_cell

        free = []
        for d in DIR_ORDER:
            dx, dy = DIRS[d]
            cell = (fx + dx, fy + dy)
            if _walkable(m.cells, cell[0], cell[1], m.width, m.height) \
                    and cell not in foe_cells and cell not in agent_cells:
                free.append(cell)
        return rng.choice(free) if free else None

    def observe(self, state, slot):
        m = state.map
        x, y = state.agent_pos[slot]
        r = state.observation_radius
        team = state.team_of[slot]

        x0, x1 = max(0, x - r), min(m.width - 1, x + r)
        y0, y1 = max(0, y - r), min(m.height - 1, y + r)
        rows = [m.cells[wy][x0:x1 + 1] for wy in range(y0, y1 + 1)]

        def in_window(c):
            return abs(c[0] - x) <= r and abs(c[1] - y) <= r

        return {
            "game": self.name,
            "you": slot,
            "pos": [x, y],
            "hp": state.agent_hp[slot],
            "role": state.role_of[slot],
            "team": team,
            "is_carrier": state.carrier == slot,
            "team_has_treasure": state.carrier is not None
                and state.team_of[state.carrier] == team,
            "width": m.width,
            "height": m.height,
            "window": rows,
            "window_origin": [x0, y0],
            "treasure": list(m.treasure_pos)
                if state.treasure_present and in_window(m.treasure_pos) else None,
            "exit": list(m.exit_pos) if in_window(m.exit_pos) else None,
            "foes": [{"pos": list(f["pos"]), "hp": f["hp"]}
                     for f in state.foes if in_window(f["pos"])],
            "teammates": {
                str(s): {"pos": list(p), "hp": state.agent_hp[s],
                         "role": state.role_of[s]}
                for s, p in state.agent_pos.items()
                if state.team_of[s] == team and s != slot and s not in state.dead
            },
            "opponents": {
                str(s): {"pos": list(p)}
                for s, p in state.agent_pos.items()
                if state.team_of[s] != team and s not in state.dead and in_window(p)
            },
            "ticks_remaining": state.tick_limit - state.tick,
        }

    def canonical(self, state):
        return {
            "game": self.name,
            "cells": state.map.cells,
            "treasure": list(state.map.treasure_pos) if state.treasure_present else None,
            "carrier": state.carrier,
            "agents": [
                [s, list(state.agent_pos[s]), state.agent_hp[s],
                 state.role_of[s], state.team_of[s]]
                for s in sorted(state.agent_pos) if s not in state.dead
            ],
            "foes": [[list(f["pos"]), f["hp"]] for f in state.foes],
            "tick": state.tick,
        }


GAME = TreasureHunt()
