"""Task space: parameter schema, validation, seeded sampling, file format.

A task is one fully seeded game instance.  The on-disk format is a single
strict JSON object (unknown fields are errors, spec_version mandatory), so
evaluation tasks written elsewhere cannot silently depend on parameters
this build does not implement.  Difficulty ranges live in a versioned data
file, not in code, so they can be redefined per tournament stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .games import GAMES, get_game
from .rng import Stream, derive_seed

SPEC_VERSION = 1

DIFFICULTIES = ("small", "medium", "large")

_MASTER_PALETTE = ["stone", "dirt", "wood", "glass"]
_WEATHERS = ["clear", "rain", "snow", "thunder"]

_TOP_LEVEL_FIELDS = {"game", "params", "seed", "spec_version"}


class TaskFormatError(ValueError):
    """Task text is malformed: bad JSON, unknown field, or bad version."""


@dataclass
class TaskSpec:
    game: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    spec_version: int = SPEC_VERSION

    def full_params(self) -> dict:
        return {**get_game(self.game).default_params(), **self.params}


def validate(spec: TaskSpec) -> list[str]:
    """All violations that would make instantiation fail (empty = ok)."""
    if spec.game not in GAMES:
        return [f"unknown game {spec.game!r}"]
    if spec.spec_version != SPEC_VERSION:
        return [f"unsupported spec_version {spec.spec_version}"]
    errs = []
    if not (0 <= spec.seed < 2 ** 64):
        errs.append("seed must be an unsigned 64-bit integer")
    game = get_game(spec.game)
    allowed = set(game.default_params())
    for key in spec.params:
        if key not in allowed:
            errs.append(f"unknown parameter {key!r} for game {spec.game!r}")
    if not errs:
        errs.extend(game.validate_params(spec.params))
    return errs


def _load_ranges() -> dict:
    text = resources.files("gridarena.data").joinpath("difficulty.json").read_text()
    return json.loads(text)


_RANGES = None


def difficulty_ranges() -> dict:
    global _RANGES
    if _RANGES is None:
        _RANGES = _load_ranges()
    return _RANGES


def sample_task(game: str, difficulty: str, seed: int) -> TaskSpec:
    """Deterministically draw a valid task from the difficulty ranges."""
    get_game(game)
    if difficulty not in DIFFICULTIES:
        raise ValueError(f"unknown difficulty {difficulty!r}")
    ranges = difficulty_ranges()[game][difficulty]
    rng = Stream(derive_seed(seed, f"sample/{game}/{difficulty}"))

    def draw(key):
        lo, hi = ranges[key]
        return rng.randint(lo, hi)

    if game == "mobchase":
        params = {
            "width": draw("width"),
            "height": draw("height"),
            "agent_count": draw("agent_count"),
            "exit_count": draw("exit_count"),
            "tick_limit": draw("tick_limit"),
            "flee_bias": ranges["flee_bias"],
        }
    elif game == "buildbattle":
        params = {
            "blueprint_dims": [draw("bp_width"), draw("bp_height"), draw("bp_depth")],
            "palette": _MASTER_PALETTE[: draw("palette_size")],
            "team_size": draw("team_size"),
            "tick_limit": draw("tick_limit"),
        }
    else:  # treasurehunt
        w, h = draw("width"), draw("height")
        max_rooms = ((w - 2) * (h - 2)) // 16
        lo, hi = ranges["rooms"]
        params = {
            "width": w,
            "height": h,
            "rooms": rng.randint(lo, min(hi, max_rooms)),
            "foe_count": draw("foe_count"),
            "team_size": draw("team_size"),
            "tick_limit": draw("tick_limit"),
            "observation_radius": draw("observation_radius"),
        }
    params["weather"] = _WEATHERS[rng.randrange(len(_WEATHERS))]
    spec = TaskSpec(game=game, params=params, seed=rng.next_u64())
    violations = validate(spec)
    if violations:
        raise AssertionError(f"sampler produced invalid task: {violations}")
    return spec


def save_task(spec: TaskSpec) -> str:
    """Canonical task text: sorted keys, compact, trailing newline."""
    obj = {
        "game": spec.game,
        "params": spec.params,
        "seed": spec.seed,
        "spec_version": spec.spec_version,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def load_task(text: str) -> TaskSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise TaskFormatError(f"invalid task text: {e.msg} at line {e.lineno} column {e.colno}") from None
    if not isinstance(obj, dict):
        raise TaskFormatError("task text must be a single JSON object")
    for key in obj:
        if key not in _TOP_LEVEL_FIELDS:
            raise TaskFormatError(f"unknown field {key!r}")
    for key in ("game", "seed", "spec_version"):
        if key not in obj:
            raise TaskFormatError(f"missing required field {key!r}")
    if obj["spec_version"] != SPEC_VERSION:
        raise TaskFormatError(f"unsupported spec_version {obj['spec_version']!r}")
    game = obj["game"]
    if game not in GAMES:
        raise TaskFormatError(f"unknown game {game!r}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise TaskFormatError("field 'params' must be an object")
    allowed = set(get_game(game).default_params())
    for key in params:
        if key not in allowed:
            raise TaskFormatError(f"unknown field {'params.' + key!r}")
    if not isinstance(obj["seed"], int) or not (0 <= obj["seed"] < 2 ** 64):
        raise TaskFormatError("field 'seed' must be an unsigned 64-bit integer")
    return TaskSpec(game=game, params=params, seed=obj["seed"],
                    spec_version=obj["spec_version"])
