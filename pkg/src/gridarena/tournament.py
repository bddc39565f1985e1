"""Play-off tournament: round-robin leagues, sum-of-scores ranking, promotion.

Every stage runs one round-robin league (or several) over a task list that
covers all three games.  Each unordered pair of entries plays an even
number of episodes per task, swapping sides halfway so no entry is stuck
with one role.  In the cooperative meadow game the pair plays as
teammates, one agent slot each; in the team games each entry drives one
whole team.  An entry always banks exactly its own agents' centipoints,
so one table schema covers all games and league totals are exact integer
sums over the underlying match records.

The top entries of each league pool into the next stage (snake-seeded by
rank) until a single final league decides the champion.  The whole bracket
is validated before any match runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .baselines import BASELINES, make_baseline
from .engine import run_episode
from .games import GAME_NAMES, get_game
from .replay import dump_record
from .rng import Stream, derive_seed
from .task import TaskSpec, validate
from .types import MatchRecord, to_points

# Named multi-game controller profiles selectable in tournament configs.
PROFILES = {
    "random": {g: "random" for g in GAME_NAMES},
    "scripted": {
        "mobchase": "exit_seeker",
        "buildbattle": "greedy_builder",
        "treasurehunt": "hunter_scripted",
    },
}


class BracketConfigError(ValueError):
    """Bracket cannot be played as configured."""


@dataclass(frozen=True)
class Entry:
    entry_id: str
    controller: object    # profile name, baseline name, or {game: baseline}

    def baseline_for(self, game_name: str) -> str:
        c = self.controller
        if isinstance(c, dict):
            mapping = c
        elif c in PROFILES:
            mapping = PROFILES[c]
        elif c in BASELINES:
            return c
        else:
            raise BracketConfigError(
                f"entry {self.entry_id!r}: unknown controller {c!r}")
        try:
            return mapping[game_name]
        except KeyError:
            raise BracketConfigError(
                f"entry {self.entry_id!r} has no controller for {game_name!r}") from None


@dataclass
class StageConfig:
    league_size: int
    tasks: list[TaskSpec]
    episodes_per_pairing: int
    promote_k: int
    base_seed: int

    def check(self):
        errs = []
        if self.league_size < 2:
            errs.append("league_size must be >= 2")
        if self.episodes_per_pairing < 2 or self.episodes_per_pairing % 2:
            errs.append("episodes_per_pairing must be an even number >= 2")
        if not (1 <= self.promote_k < self.league_size):
            errs.append("promote_k must be in [1, league_size)")
        games = {t.game for t in self.tasks}
        if games != set(GAME_NAMES):
            errs.append(f"tasks must cover all of {GAME_NAMES}, got {sorted(games)}")
        for i, t in enumerate(self.tasks):
            bad = validate(t)
            if bad:
                errs.append(f"task {i}: {'; '.join(bad)}")
            elif t.game == "mobchase" and t.full_params()["agent_count"] != 2:
                errs.append(f"task {i}: pairings need mobchase agent_count = 2")
        if errs:
            raise BracketConfigError("; ".join(errs))


@dataclass(frozen=True)
class MatchAssignment:
    entry_a: str
    entry_b: str
    task_index: int
    episode_index: int
    side: int      # 0: entry_a is slot 0 / team 0, 1: swapped
    seed: int


@dataclass
class LeagueTable:
    entries: list[str]
    task_count: int
    cells: dict[str, list[int]] = field(default_factory=dict)   # entry -> cp per task
    pair_totals: dict[tuple[str, str], int] = field(default_factory=dict)
    tiebreak_notes: list[str] = field(default_factory=list)
    ranking: list[str] = field(default_factory=list)

    def __post_init__(self):
        for e in self.entries:
            self.cells.setdefault(e, [0] * self.task_count)

    def add(self, entry: str, task_index: int, cp: int, opponent: str):
        self.cells[entry][task_index] += cp
        key = (entry, opponent)
        self.pair_totals[key] = self.pair_totals.get(key, 0) + cp

    def total(self, entry: str) -> int:
        return sum(self.cells[entry])


def schedule_league(entries: list[Entry], cfg: StageConfig) -> list[MatchAssignment]:
    """Full round-robin schedule; deterministic and insertion-order free."""
    if len(entries) != cfg.league_size:
        raise BracketConfigError(
            f"league needs {cfg.league_size} entries, got {len(entries)}")
    ids = sorted(e.entry_id for e in entries)
    if len(set(ids)) != len(ids):
        raise BracketConfigError("entry_ids must be unique")
    out = []
    half = cfg.episodes_per_pairing // 2
    for a, b in combinations(ids, 2):
        for ti, task in enumerate(cfg.tasks):
            for ep in range(cfg.episodes_per_pairing):
                out.append(MatchAssignment(
                    entry_a=a, entry_b=b, task_index=ti, episode_index=ep,
                    side=0 if ep < half else 1,
                    seed=derive_seed(cfg.base_seed, f"match/{a}/{b}/{ti}/{ep}"),
                ))
    return out


def play_assignment(assignment: MatchAssignment, cfg: StageConfig,
                    by_id: dict[str, Entry]) -> tuple[dict[str, int], MatchRecord]:
    """Run one episode; returns centipoints per entry and the record."""
    task = cfg.tasks[assignment.task_index]
    game = get_game(task.game)
    params = task.full_params()
    order = [assignment.entry_a, assignment.entry_b]
    if assignment.side == 1:
        order.reverse()

    slots = game.agent_slots(params)
    if task.game == "mobchase":
        slot_owner = {0: order[0], 1: order[1]}
    else:
        per_team = slots // 2
        slot_owner = {s: order[0] if s < per_team else order[1]
                      for s in range(slots)}

    controllers = {s: make_baseline(by_id[owner].baseline_for(task.game))
                   for s, owner in slot_owner.items()}
    result, record = run_episode(game, controllers, task, assignment.seed)
    scores = {order[0]: 0, order[1]: 0}
    for s, cp in result.total_rewards.items():
        scores[slot_owner[s]] += cp
    return scores, record


def rank(table: LeagueTable, tiebreak_seed: int) -> list[str]:
    """Descending by total; ties by head-to-head, then a seeded draw."""
    totals = {e: table.total(e) for e in table.entries}
    groups: dict[int, list[str]] = {}
    for e in table.entries:
        groups.setdefault(totals[e], []).append(e)

    ordered = []
    for total in sorted(groups, reverse=True):
        tied = sorted(groups[total])
        if len(tied) > 1:
            h2h = {e: sum(table.pair_totals.get((e, o), 0)
                          for o in tied if o != e) for e in tied}
            draw = Stream(derive_seed(tiebreak_seed, "tiebreak/" + "/".join(tied)))
            jitter = {e: draw.next_u64() for e in tied}
            tied.sort(key=lambda e: (-h2h[e], jitter[e]))
            table.tiebreak_notes.append(
                f"tie at {total} cp between {', '.join(sorted(tied))}: "
                f"head-to-head {h2h}, seeded draw order {tied}")
        ordered.extend(tied)
    table.ranking = ordered
    return ordered


def run_league(entries: list[Entry], cfg: StageConfig,
               workers: int = 1) -> tuple[LeagueTable, list[MatchRecord]]:
    cfg.check()
    by_id = {e.entry_id: e for e in entries}
    schedule = schedule_league(entries, cfg)
    table = LeagueTable(entries=sorted(by_id), task_count=len(cfg.tasks))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            played = list(pool.map(
                lambda m: play_assignment(m, cfg, by_id), schedule))
    else:
        played = [play_assignment(m, cfg, by_id) for m in schedule]

    records = []
    for assignment, (scores, record) in zip(schedule, played):
        opponents = {assignment.entry_a: assignment.entry_b,
                     assignment.entry_b: assignment.entry_a}
        for entry_id, cp in scores.items():
            table.add(entry_id, assignment.task_index, cp, opponents[entry_id])
        records.append(record)
    rank(table, cfg.base_seed)
    return table, records


@dataclass
class TournamentConfig:
    entries: list[Entry]
    league_size: int
    promote_k: int
    episodes_per_pairing: int
    tasks: list[TaskSpec]
    base_seed: int

    def stage_sizes(self) -> list[int]:
        """Entry counts per stage; raises if the bracket cannot partition."""
        sizes = []
        count = len(self.entries)
        if count < 2:
            raise BracketConfigError("a tournament needs at least 2 entries")
        while True:
            if count <= self.league_size:
                if count < 2:
                    raise BracketConfigError(
                        "promotion leaves fewer than 2 entries for the final league")
                sizes.append(count)
                return sizes
            if count % self.league_size:
                raise BracketConfigError(
                    f"{count} entries cannot split into leagues of {self.league_size}")
            sizes.append(count)
            count = (count // self.league_size) * self.promote_k


@dataclass
class StageReport:
    leagues: list[LeagueTable]
    promoted: list[str]


@dataclass
class TournamentReport:
    stages: list[StageReport]
    champion: str
    records: list[MatchRecord]


def _snake(items: list[str], buckets: int) -> list[list[str]]:
    out = [[] for _ in range(buckets)]
    for i, item in enumerate(items):
        lap, off = divmod(i, buckets)
        out[off if lap % 2 == 0 else buckets - 1 - off].append(item)
    return out


def run_tournament(config: TournamentConfig, out_dir: str | None = None,
                   workers: int = 1) -> TournamentReport:
    config.stage_sizes()    # validate the whole bracket before any match
    for e in config.entries:
        for g in GAME_NAMES:
            e.baseline_for(g)

    by_id = {e.entry_id: e for e in config.entries}
    pool_ids = sorted(by_id)
    shuffler = Stream(derive_seed(config.base_seed, "stage0/assignment"))
    shuffler.shuffle(pool_ids)

    stages: list[StageReport] = []
    all_records: list[MatchRecord] = []
    stage_idx = 0
    while True:
        if len(pool_ids) > config.league_size:
            n_leagues = len(pool_ids) // config.league_size
            leagues_members = [pool_ids[i * config.league_size:(i + 1) * config.league_size]
                               for i in range(n_leagues)]
        else:
            leagues_members = [pool_ids]

        tables = []
        promoted_by_rank: list[list[str]] = []
        for li, members in enumerate(leagues_members):
            cfg = StageConfig(
                league_size=len(members),
                tasks=config.tasks,
                episodes_per_pairing=config.episodes_per_pairing,
                promote_k=min(config.promote_k, len(members) - 1),
                base_seed=derive_seed(config.base_seed, f"stage/{stage_idx}/league/{li}"),
            )
            table, records = run_league([by_id[m] for m in members], cfg,
                                        workers=workers)
            tables.append(table)
            all_records.extend(records)

        final_stage = len(leagues_members) == 1
        if final_stage:
            promoted = [tables[0].ranking[0]]
        else:
            for r in range(config.promote_k):
                promoted_by_rank.append([t.ranking[r] for t in tables])
            promoted = [e for tier in promoted_by_rank for e in tier]
        stages.append(StageReport(leagues=tables, promoted=promoted))
        if final_stage:
            champion = tables[0].ranking[0]
            break
        next_leagues = max(1, len(promoted) // config.league_size)
        pool_ids = [e for bucket in _snake(promoted, next_leagues) for e in bucket]
        stage_idx += 1

    report = TournamentReport(stages=stages, champion=champion,
                              records=all_records)
    if out_dir is not None:
        write_report(report, config, out_dir)
    return report


def write_report(report: TournamentReport, config: TournamentConfig,
                 out_dir: str):
    out = Path(out_dir)
    (out / "replays").mkdir(parents=True, exist_ok=True)
    for i, record in enumerate(report.records):
        (out / "replays" / f"match_{i:05d}.replay").write_text(dump_record(record))

    tables = []
    for si, stage in enumerate(report.stages):
        for li, table in enumerate(stage.leagues):
            tables.append({
                "stage": si,
                "league": li,
                "ranking": table.ranking,
                "totals_cp": {e: table.total(e) for e in table.entries},
                "per_task_cp": table.cells,
                "tiebreaks": table.tiebreak_notes,
            })
    (out / "tables.json").write_text(json.dumps(
        {"champion": report.champion, "leagues": tables}, indent=2, sort_keys=True))

    lines = []
    for si, stage in enumerate(report.stages):
        for li, table in enumerate(stage.leagues):
            lines.append(f"Stage {si} league {li}")
            lines.append(f"  {'entry':<20} {'total':>10}  per-task points")
            for e in table.ranking:
                per_task = " ".join(f"{to_points(cp):8.2f}" for cp in table.cells[e])
                lines.append(f"  {e:<20} {to_points(table.total(e)):>10.2f}  {per_task}")
            for note in table.tiebreak_notes:
                lines.append(f"  note: {note}")
        lines.append(f"  promoted: {', '.join(stage.promoted)}")
        lines.append("")
    lines.append(f"Champion: {report.champion}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
