"""
Benchmark games and the registry that builds them by name.
"""
import logging
from functools import lru_cache
from typing import Dict, List, Type

from errors import MalformedGameError, UnknownGameError
from game_core import compile_tree, validate_perfect_recall
from game_model import GameDynamics
from games.goofspiel import Goofspiel
from games.kuhn import KuhnPoker, kuhn_equilibrium_policy
from games.leduc import LeducPoker
from games.liars_dice import LiarsDice
from games.matrix import MatrixGame

logger = logging.getLogger(__name__)

GAMES: Dict[str, Type[GameDynamics]] = {
    "kuhn": KuhnPoker,
    "leduc": LeducPoker,
    "liars_dice": LiarsDice,
    "goofspiel": Goofspiel,
}

ALIASES: Dict[str, str] = {
    "liars_dice_11": "liars_dice",
    "goofspiel_4": "goofspiel",
}

GAME_NAMES: List[str] = sorted(GAMES) + sorted(ALIASES)


def canonical_name(name: str) -> str:
    """Resolve CLI aliases; raises UnknownGameError for anything unregistered."""
    resolved = ALIASES.get(name, name)
    if resolved not in GAMES:
        raise UnknownGameError(f"unknown game {name!r}; expected one of {', '.join(GAME_NAMES)}")
    return resolved


@lru_cache(maxsize=None)
def build_game(name: str) -> GameDynamics:
    """
    Build and validate a benchmark game.

    Args:
        name: kuhn, leduc, liars_dice (liars_dice_11) or goofspiel (goofspiel_4)

    Returns:
        A GameDynamics whose tree compiles (zero-sum, valid chance) and has perfect recall

    Raises:
        UnknownGameError: name is not registered
        MalformedGameError: the game fails validation
    """
    game = GAMES[canonical_name(name)]()
    compile_tree(game)
    report = validate_perfect_recall(game)
    if not report:
        raise MalformedGameError(f"{game.name}: {report}")
    logger.info(f"Built game {game.name}")
    return game


__all__ = [
    "ALIASES",
    "GAMES",
    "GAME_NAMES",
    "Goofspiel",
    "KuhnPoker",
    "LeducPoker",
    "LiarsDice",
    "MatrixGame",
    "build_game",
    "canonical_name",
    "kuhn_equilibrium_policy",
]
