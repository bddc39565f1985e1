"""Scripted baseline controllers.

Baselines consume exactly the per-tick observation payloads that remote
agents receive (no privileged engine state), so they double as reference
client implementations.  Each controller instance may keep private memory
between ticks (cached maps, stuck counters); instances are never shared
across agent slots.
"""

from __future__ import annotations

from collections import deque

from .games.mobchase import DIRS, DIR_ORDER

_DIR_LIST = [(d,) + DIRS[d] for d in DIR_ORDER]


def _grid_walkable(rows, x, y):
    return 0 <= y < len(rows) and 0 <= x < len(rows[y]) and rows[y][x] != "#"


def _bfs(rows, start, goals, blocked=frozenset()):
    """Distance map from start plus the first step toward the nearest goal.

    Returns (best_goal_distance, first_step_cell) or (None, None).
    Neighbor expansion follows N, E, S, W so ties are deterministic.
    """
    goals = set(goals)
    if start in goals:
        return 0, start
    seen = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for _, dx, dy in _DIR_LIST:
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt in seen or nxt in blocked:
                continue
            if not _grid_walkable(rows, nxt[0], nxt[1]):
                continue
            seen[nxt] = cur
            if nxt in goals:
                step = nxt
                while seen[step] != start:
                    step = seen[step]
                dist = 1
                back = nxt
                while seen[back] != start:
                    back = seen[back]
                    dist += 1
                return dist, step
            queue.append(nxt)
    return None, None


def _step_dir(src, dst):
    for d, dx, dy in _DIR_LIST:
        if (src[0] + dx, src[1] + dy) == dst:
            return d
    return "stay"


class RandomAgent:
    """Uniform draw over the game's plausible actions."""

    def act(self, obs, rng):
        game = obs["game"]
        if game == "mobchase":
            options = list(DIR_ORDER) + ["stay"]
            x, y = obs["pos"]
            ox, oy = obs.get("window_origin", [0, 0])
            if obs["grid"][y - oy][x - ox] == "E":
                options.append("exit")
            return rng.choice(options)
        if game == "buildbattle":
            kind = rng.choice(list(DIR_ORDER) + ["stay", "place", "remove"])
            if kind in DIRS or kind == "stay":
                return kind
            d = rng.choice(list(DIR_ORDER))
            dx, dz = DIRS[d]
            y = rng.randrange(obs["dims"][1])
            if kind == "place":
                return ["place", rng.choice(obs["palette"]), dx, dz, y]
            return ["remove", dx, dz, y]
        if game == "treasurehunt":
            kind = rng.choice(list(DIR_ORDER) + ["stay", "pickup", "attack"])
            if kind == "attack":
                return ["attack", rng.choice(list(DIR_ORDER))]
            return kind
        raise ValueError(f"random baseline got observation for unknown game {game!r}")


class GreedyChaser:
    """Mob Chase: walk the shortest path to a cell adjacent to the mob."""

    def act(self, obs, rng):
        if obs["game"] != "mobchase":
            raise ValueError("greedy_chaser only plays mobchase")
        if obs.get("mob") is None:
            return rng.choice(list(DIR_ORDER) + ["stay"])
        pos = tuple(obs["pos"])
        mob = tuple(obs["mob"])
        if abs(pos[0] - mob[0]) + abs(pos[1] - mob[1]) == 1:
            return "stay"
        others = {tuple(a["pos"]) for s, a in obs["agents"].items()
                  if int(s) != obs["you"]}
        goals = set()
        for _, dx, dy in _DIR_LIST:
            c = (mob[0] + dx, mob[1] + dy)
            if _grid_walkable(obs["grid"], c[0], c[1]):
                goals.add(c)
        _, step = _bfs(obs["grid"], pos, goals, blocked=others | {mob})
        if step is None:
            _, step = _bfs(obs["grid"], pos, goals, blocked={mob})
        return _step_dir(pos, step) if step else "stay"


class ExitSeeker:
    """Mob Chase: head for the nearest exit cell and leave."""

    def act(self, obs, rng):
        if obs["game"] != "mobchase":
            raise ValueError("exit_seeker only plays mobchase")
        pos = tuple(obs["pos"])
        rows = obs["grid"]
        ox, oy = obs.get("window_origin", [0, 0])
        exits = {(x + ox, y + oy)
                 for y, row in enumerate(rows)
                 for x, ch in enumerate(row) if ch == "E"}
        if pos in exits:
            return "exit"
        if not exits:
            return rng.choice(list(DIR_ORDER) + ["stay"])
        local = {(x - ox, y - oy) for x, y in exits}
        others = {tuple(a["pos"]) for s, a in obs["agents"].items()
                  if int(s) != obs["you"]}
        local_others = {(x - ox, y - oy) for x, y in others}
        _, step = _bfs(rows, (pos[0] - ox, pos[1] - oy), local, blocked=local_others)
        if step is None:
            _, step = _bfs(rows, (pos[0] - ox, pos[1] - oy), local)
        if step is None:
            return "stay"
        return _step_dir((pos[0] - ox, pos[1] - oy), step)


class GreedyBuilder:
    """Build Battle: walk to the nearest wrong cell of the own region and
    fix it (remove a wrong block, place the required one)."""

    def act(self, obs, rng):
        if obs["game"] != "buildbattle":
            raise ValueError("greedy_builder only plays buildbattle")
        w, h, d = obs["dims"]
        region, blueprint = obs["region"], obs["blueprint"]
        pos = tuple(obs["pos"])
        mismatches = []
        for idx, (have, want) in enumerate(zip(region, blueprint)):
            if have != want:
                x = idx % w
                z = (idx // w) % d
                y = idx // (w * d)
                mismatches.append((x, y, z))
        if not mismatches:
            return "stay"

        # Fix an adjacent wrong column if we stand next to one.
        for x, y, z in sorted(mismatches):
            dx, dz = x - pos[0], z - pos[1]
            if abs(dx) + abs(dz) == 1:
                have = region[x + w * (z + d * y)]
                if have is not None:
                    return ["remove", dx, dz, y]
                return ["place", blueprint[x + w * (z + d * y)], dx, dz, y]

        # Otherwise walk toward a ground cell adjacent to some wrong column.
        goals = set()
        for x, y, z in mismatches:
            for _, dx, dz in _DIR_LIST:
                gx, gz = x + dx, z + dz
                if 0 <= gx < w and 0 <= gz < d:
                    goals.add((gx, gz))
        teammates = {tuple(p) for p in obs["teammates"].values()}
        rows = ["." * w for _ in range(d)]   # ground plane has no walls
        _, step = _bfs(rows, pos, goals, blocked=teammates)
        if step is None:
            _, step = _bfs(rows, pos, goals)
        return _step_dir(pos, step) if step else "stay"


class HunterScripted:
    """Treasure Hunt: the collector explores, grabs the treasure and runs
    to the exit; fighters shadow their collector and attack adjacent foes.

    Keeps a private map stitched from egocentric windows, so it works at
    any observation radius."""

    def __init__(self):
        self.known: dict[tuple[int, int], str] = {}
        self.treasure: tuple[int, int] | None = None
        self.exit: tuple[int, int] | None = None
        self.last_pos = None
        self.stuck = 0

    def _integrate(self, obs):
        ox, oy = obs["window_origin"]
        for wy, row in enumerate(obs["window"]):
            for wx, ch in enumerate(row):
                x, y = ox + wx, oy + wy
                if 0 <= x < obs["width"] and 0 <= y < obs["height"]:
                    self.known[(x, y)] = ch
                    if ch == "E":
                        self.exit = (x, y)
        if obs["treasure"] is not None:
            self.treasure = tuple(obs["treasure"])
        elif self.treasure is not None:
            tx, ty = self.treasure
            px, py = obs["pos"]
            r = (len(obs["window"]) - 1) // 2
            if abs(tx - px) <= r and abs(ty - py) <= r:
                self.treasure = None    # cell visible and empty: it was taken

    def _known_rows(self, obs):
        w, h = obs["width"], obs["height"]
        return ["".join(self.known.get((x, y), "#") for x in range(w))
                for y in range(h)]

    def _frontiers(self, obs):
        w, h = obs["width"], obs["height"]
        out = set()
        for (x, y), ch in self.known.items():
            if ch == "#":
                continue
            for _, dx, dy in _DIR_LIST:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and (nx, ny) not in self.known:
                    out.add((x, y))
                    break
        return out

    def _retreat(self, obs, pos, away_from):
        rows = self._known_rows(obs)
        occupied = {tuple(f["pos"]) for f in obs["foes"]}
        occupied |= {tuple(m["pos"]) for m in obs["teammates"].values()}
        occupied |= {tuple(o["pos"]) for o in obs["opponents"].values()}
        best, best_d = "stay", abs(pos[0] - away_from[0]) + abs(pos[1] - away_from[1])
        for d, dx, dy in _DIR_LIST:
            c = (pos[0] + dx, pos[1] + dy)
            if not _grid_walkable(rows, c[0], c[1]) or c in occupied:
                continue
            dist = abs(c[0] - away_from[0]) + abs(c[1] - away_from[1])
            if dist > best_d:
                best, best_d = d, dist
        return best

    def act(self, obs, rng):
        if obs["game"] != "treasurehunt":
            raise ValueError("hunter_scripted only plays treasurehunt")
        self._integrate(obs)
        pos = tuple(obs["pos"])

        if pos == self.last_pos:
            self.stuck += 1
        else:
            self.stuck = 0
        self.last_pos = pos
        if self.stuck >= 3:     # break livelocks around other agents
            self.stuck = 0
            return rng.choice(list(DIR_ORDER) + ["stay"])

        # Fighters (and cornered collectors) strike adjacent foes.
        for foe in obs["foes"]:
            fx, fy = foe["pos"]
            for d, dx, dy in _DIR_LIST:
                if (pos[0] + dx, pos[1] + dy) == (fx, fy):
                    return ["attack", d]

        if obs["role"] == "collector":
            if obs["is_carrier"]:
                target = self.exit
            elif self.treasure is not None:
                if pos == self.treasure:
                    return "pickup"
                target = self.treasure
            else:
                target = None
        else:
            mate = next((m for m in obs["teammates"].values()
                         if m["role"] == "collector"), None)
            target = tuple(mate["pos"]) if mate else None
            if target is not None and abs(target[0] - pos[0]) + abs(target[1] - pos[1]) <= 1:
                # Close enough; give way so we never wall the collector in.
                return self._retreat(obs, pos, target)

        rows = self._known_rows(obs)
        avoid = {tuple(f["pos"]) for f in obs["foes"]}
        avoid |= {tuple(m["pos"]) for m in obs["teammates"].values()}
        avoid |= {tuple(o["pos"]) for o in obs["opponents"].values()}

        if target is not None and target != pos:
            _, step = _bfs(rows, pos, {target}, blocked=avoid - {target})
            if step is None:
                _, step = _bfs(rows, pos, {target})
            if step is not None:
                return _step_dir(pos, step)

        frontiers = self._frontiers(obs)
        if frontiers:
            _, step = _bfs(rows, pos, frontiers, blocked=avoid)
            if step is None:
                _, step = _bfs(rows, pos, frontiers)
            if step is not None and step != pos:
                return _step_dir(pos, step)
        return rng.choice(list(DIR_ORDER) + ["stay"])


BASELINES = {
    "random": RandomAgent,
    "greedy_chaser": GreedyChaser,
    "exit_seeker": ExitSeeker,
    "greedy_builder": GreedyBuilder,
    "hunter_scripted": HunterScripted,
}


def make_baseline(name: str):
    try:
        return BASELINES[name]()
    except KeyError:
        raise KeyError(
            f"unknown baseline {name!r}; known: {', '.join(BASELINES)}") from None
