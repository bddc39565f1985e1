from collections import deque

import pytest
from scipy import stats

from gridarena.baselines import make_baseline
from gridarena.engine import run_task
from gridarena.games.treasurehunt import (COLLECTOR, DEATH_CP, EXIT_CP,
                                          FIGHTER, PICKUP_CP, DungeonMap,
                                          GAME, HuntState, flood_fill,
                                          generate_dungeon)
from gridarena.rng import Stream
from gridarena.task import TaskSpec
from gridarena.types import Termination


def tiny_map(cells, exit_pos, treasure):
    return DungeonMap(width=len(cells[0]), height=len(cells), cells=list(cells),
                      exit_pos=exit_pos, treasure_pos=treasure,
                      spawn_points={0: [], 1: []}, rooms=[])


def make_state(m, agents, teams, roles=None, foes=(), carrier=None,
               treasure_present=True, tick_limit=100, sight=6, obs=4):
    n = len(agents)
    roles = roles or [COLLECTOR if i % (n // 2 or 1) == 0 else FIGHTER
                      for i in range(n)]
    return HuntState(
        map=m, agent_pos=dict(enumerate(agents)),
        agent_hp={i: 3 for i in range(n)},
        role_of=dict(enumerate(roles)), team_of=dict(enumerate(teams)),
        foes=[{"pos": p, "hp": 2} for p in foes],
        carrier=carrier, treasure_present=treasure_present,
        tick=0, tick_limit=tick_limit, sight_radius=sight,
        observation_radius=obs)


OPEN = ["#########",
        "#.......#",
        "#.......#",
        "#.......#",
        "#.......#",
        "#.......#",
        "#.......#",
        "#.......#",
        "#########"]


# ---------------------------------------------------------------- event rewards

def test_event_reward_vectors_for_two_teams_of_two():
    team_of = {0: 0, 1: 0, 2: 1, 3: 1}
    assert GAME.event_rewards("pickup", 0, team_of) == \
        {0: PICKUP_CP, 1: PICKUP_CP, 2: -PICKUP_CP, 3: -PICKUP_CP}
    assert GAME.event_rewards("treasure_exit", 1, team_of) == \
        {0: -EXIT_CP, 1: -EXIT_CP, 2: EXIT_CP, 3: EXIT_CP}
    assert GAME.event_rewards("death", 0, team_of) == \
        {0: DEATH_CP, 1: DEATH_CP, 2: 0, 3: 0}
    with pytest.raises(ValueError):
        GAME.event_rewards("tea_break", 0, team_of)


def test_pickup_and_exit_are_zero_sum():
    team_of = {0: 0, 1: 0, 2: 1, 3: 1}
    for kind in ("pickup", "treasure_exit"):
        for team in (0, 1):
            assert sum(GAME.event_rewards(kind, team, team_of).values()) == 0


def test_pickup_requires_collector_on_treasure():
    m = tiny_map(OPEN, exit_pos=(1, 1), treasure=(4, 4))
    st = make_state(m, agents=[(4, 4), (3, 3), (5, 5), (6, 6)],
                    teams=[0, 0, 1, 1], roles=[FIGHTER, COLLECTOR, COLLECTOR, FIGHTER])
    out = GAME.step(st, {0: "pickup", 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert st.carrier is None and out.rewards[0] == 0   # fighter holds nothing
    st.role_of[0] = COLLECTOR
    out = GAME.step(st, {0: "pickup", 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert st.carrier == 0 and not st.treasure_present
    assert out.rewards == {0: PICKUP_CP, 1: PICKUP_CP, 2: -PICKUP_CP, 3: -PICKUP_CP}
    # a second pickup can never fire
    out = GAME.step(st, {0: "pickup", 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert all(cp == 0 for cp in out.rewards.values())


def test_carrier_reaching_exit_ends_match():
    m = tiny_map(OPEN, exit_pos=(2, 1), treasure=(4, 4))
    st = make_state(m, agents=[(1, 1), (3, 3), (5, 5), (6, 6)],
                    teams=[0, 0, 1, 1], carrier=0, treasure_present=False)
    out = GAME.step(st, {0: "E", 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert out.done and out.termination == Termination.TREASURE_EXIT
    assert out.rewards == {0: EXIT_CP, 1: EXIT_CP, 2: -EXIT_CP, 3: -EXIT_CP}


def test_death_is_terminal_and_team_local():
    # surround a 1 hp agent with a foe; the foe must attack and end it
    m = tiny_map(OPEN, exit_pos=(1, 1), treasure=(6, 6))
    st = make_state(m, agents=[(3, 3), (1, 2), (5, 5), (6, 5)],
                    teams=[0, 0, 1, 1], foes=[(3, 4)])
    st.agent_hp[0] = 1
    out = GAME.step(st, {i: "stay" for i in range(4)}, Stream(1))
    assert out.done and out.termination == Termination.DEATH
    assert out.rewards == {0: DEATH_CP, 1: DEATH_CP, 2: 0, 3: 0}
    assert st.dead == [0]
    assert any(e["type"] == "death" and e["slot"] == 0 for e in out.events)


def test_agents_can_kill_foes():
    m = tiny_map(OPEN, exit_pos=(1, 1), treasure=(6, 6))
    st = make_state(m, agents=[(3, 3), (1, 2), (6, 1), (6, 2)],
                    teams=[0, 0, 1, 1])
    st.foes = [{"pos": (4, 3), "hp": 2}]
    st.sight_radius = 0   # keep the foe passive for this check
    GAME.step(st, {0: ["attack", "E"], 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert st.foes[0]["hp"] == 1
    out = GAME.step(st, {0: ["attack", "E"], 1: "stay", 2: "stay", 3: "stay"}, Stream(1))
    assert st.foes == []
    assert any(e["type"] == "foe_death" for e in out.events)


# ---------------------------------------------------------------- foe policy

def test_foe_attacks_lowest_adjacent_slot():
    m = tiny_map(OPEN, exit_pos=(1, 1), treasure=(6, 6))
    st = make_state(m, agents=[(3, 2), (3, 4), (1, 1), (1, 2)],
                    teams=[0, 0, 1, 1], foes=[(3, 3)])
    assert GAME.foe_policy(st, st.foes[0], Stream(1)) == 0


def test_foe_chases_within_sight_only():
    corridor = ["#########",
                "#.......#",
                "#########"]
    m = tiny_map(corridor, exit_pos=(1, 1), treasure=(1, 1))
    st = make_state(m, agents=[(1, 1), (2, 1), (6, 1), (5, 1)][:2],
                    teams=[0, 1], roles=[COLLECTOR, COLLECTOR],
                    foes=[(7, 1)], sight=6)
    # agent 0 at distance 6: in sight, foe steps toward it
    assert GAME.foe_policy(st, st.foes[0], Stream(1)) in ((6, 1),)
    st.sight_radius = 3
    # now out of sight: wander, but the corridor only offers W here
    assert GAME.foe_policy(st, st.foes[0], Stream(1)) == (6, 1)


def test_foe_wander_is_uniform_over_free_neighbours():
    m = tiny_map(OPEN, exit_pos=(1, 1), treasure=(6, 6))
    st = make_state(m, agents=[(1, 1), (1, 2)], teams=[0, 1],
                    roles=[COLLECTOR, COLLECTOR], foes=[(5, 5)], sight=0)
    rng = Stream(31)
    counts = {}
    for _ in range(8000):
        st.foes[0]["pos"] = (5, 5)
        c = GAME.foe_policy(st, st.foes[0], rng)
        counts[c] = counts.get(c, 0) + 1
    assert set(counts) == {(5, 4), (6, 5), (5, 6), (4, 5)}
    _, p = stats.chisquare(list(counts.values()))
    assert p > 0.001


# ---------------------------------------------------------------- dungeon

def test_dungeon_generation_is_deterministic_and_connected():
    params = {"width": 15, "height": 15, "rooms": 4, "team_size": 2}
    for seed in range(40):
        a = generate_dungeon(params, seed)
        b = generate_dungeon(params, seed)
        assert a.cells == b.cells
        assert (a.exit_pos, a.treasure_pos, a.spawn_points) == \
            (b.exit_pos, b.treasure_pos, b.spawn_points)
        walkable = {(x, y) for y in range(a.height) for x in range(a.width)
                    if a.cells[y][x] != "#"}
        assert flood_fill(a.cells, a.exit_pos) == walkable
        assert a.treasure_pos in walkable and a.exit_pos in walkable
        special = [a.treasure_pos, a.exit_pos] \
            + a.spawn_points[0] + a.spawn_points[1]
        assert len(set(special)) == len(special)


def test_single_room_degenerate_map_still_valid():
    params = {"width": 9, "height": 9, "rooms": 1, "team_size": 1}
    d = generate_dungeon(params, 3)
    walkable = {(x, y) for y in range(d.height) for x in range(d.width)
                if d.cells[y][x] != "#"}
    assert flood_fill(d.cells, d.exit_pos) == walkable


def test_impossible_layout_raises():
    from gridarena.types import InvalidTaskError
    with pytest.raises(InvalidTaskError):
        generate_dungeon({"width": 7, "height": 7, "rooms": 1,
                          "team_size": 30}, 1)


# ---------------------------------------------------------------- episodes

def test_episode_rewards_zero_sum_without_deaths():
    for seed in range(20):
        task = TaskSpec("treasurehunt", {"foe_count": 0, "tick_limit": 80},
                        seed=seed)
        res, rec = run_task(task, {i: make_baseline("random")
                                   for i in range(4)}, seed=seed)
        assert sum(res.total_rewards.values()) == 0


def test_hunters_win_on_open_intel():
    wins = 0
    for seed in range(10):
        task = TaskSpec("treasurehunt",
                        {"foe_count": 0, "observation_radius": 99,
                         "tick_limit": 400}, seed=seed)
        res, _ = run_task(task, {i: make_baseline("hunter_scripted")
                                 for i in range(4)}, seed=seed)
        if res.termination == Termination.TREASURE_EXIT:
            wins += 1
    assert wins >= 8


def test_observation_window_stays_inside_map():
    task = TaskSpec("treasurehunt", {"observation_radius": 99}, seed=4)
    from gridarena.games import get_game
    game = get_game("treasurehunt")
    st = game.init(task.full_params(), seed=4)
    obs = game.observe(st, 0)
    assert obs["window_origin"] == [0, 0]
    assert len(obs["window"]) == st.map.height
    assert all(len(r) == st.map.width for r in obs["window"])
