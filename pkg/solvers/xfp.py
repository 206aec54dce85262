"""
Extensive-form fictitious play with the realisation-weighted behavioural update.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from best_response import best_response_vector
from game_core import GameTree
from solvers.records import ConvergenceRecord, make_record
from values import reach_probabilities

logger = logging.getLogger(__name__)


@dataclass
class XfpState:
    """The average policy π^t of both players as a slot vector."""
    tree: GameTree
    average: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, tree: GameTree, policy: Optional[np.ndarray] = None) -> "XfpState":
        average = tree.uniform_vector() if policy is None else np.array(policy, dtype=float)
        return cls(tree=tree, average=average)


def _state_reach(tree: GameTree, vector: np.ndarray) -> np.ndarray:
    """Owner's own realisation probability of each slot's infostate."""
    own = reach_probabilities(tree, vector).own
    return own[tree.slot_player, tree.first_member[tree.slot_infostate]]


def mix_toward(tree: GameTree, average: np.ndarray, response: np.ndarray, mixing: float) -> np.ndarray:
    """
    Behavioural form of (1 − λ)·average + λ·response in realisation weights.

    Infostates neither policy reaches keep the average's distribution. At
    λ = 1 the response is returned as is.
    """
    if mixing >= 1.0:
        return response.copy()
    reach_average = _state_reach(tree, average)
    reach_response = _state_reach(tree, response)
    denominator = (1.0 - mixing) * reach_average + mixing * reach_response
    safe = np.where(denominator > 0, denominator, 1.0)
    weight = np.where(denominator > 0, mixing * reach_response / safe, 0.0)
    return average + weight * (response - average)


def xfp_step(state: XfpState, evaluate: bool = True) -> Tuple[XfpState, Optional[ConvergenceRecord]]:
    """Best-respond to the averages, then fold the responses in with λ_t = 1/t."""
    tree = state.tree
    t = state.iteration + 1
    response = np.zeros(tree.slot_count)
    for player in (0, 1):
        one_hot, _ = best_response_vector(tree, state.average, player)
        response += one_hot
    state.average = mix_toward(tree, state.average, response, 1.0 / t)
    state.iteration = t
    logger.debug(f"XFP iteration {t} done")
    if not evaluate:
        return state, None
    return state, make_record(tree, t, state.average)
