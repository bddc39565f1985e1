"""Game registry: name -> game singleton."""

from . import buildbattle, mobchase, treasurehunt
from .base import Game

GAMES: dict[str, Game] = {
    mobchase.GAME.name: mobchase.GAME,
    buildbattle.GAME.name: buildbattle.GAME,
    treasurehunt.GAME.name: treasurehunt.GAME,
}

GAME_NAMES = tuple(GAMES)


def get_game(name: str) -> Game:
    try:
        return GAMES[name]
    except KeyError:
        raise KeyError(f"unknown game {name!r}; known: {', '.join(GAMES)}") from None
