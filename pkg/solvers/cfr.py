"""
CFR with regret matching, and CFR-BR with a choice of local learner.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from best_response import best_response_vector
from game_core import GameTree
from policy import (
    combine_players,
    normalize_segments,
    project_segments,
    regret_matching,
    segment_softmax,
)
from solvers.records import (
    BestIterateTracker,
    ConvergenceRecord,
    RegretMeter,
    make_record,
    record_with_tracker,
)
from solvers.schedule import StepSchedule
from values import evaluate_tree

logger = logging.getLogger(__name__)

REGRET_MATCHING = "regret_matching"
HEDGE = "hedge"
GIGA = "giga"
LEARNERS = (REGRET_MATCHING, HEDGE, GIGA)


@dataclass
class CfrState:
    """Cumulative regrets, average-policy weights and the current policy as slot vectors."""
    tree: GameTree
    current: np.ndarray
    regrets: np.ndarray
    average_weights: np.ndarray
    iteration: int = 0
    learner: str = REGRET_MATCHING
    temperature: float = 1.0
    schedule: StepSchedule = field(default_factory=StepSchedule)
    tracker: BestIterateTracker = field(default_factory=BestIterateTracker)
    meter: Optional[RegretMeter] = None

    @classmethod
    def initial(cls, tree: GameTree, learner: str = REGRET_MATCHING, temperature: float = 1.0,
                schedule: Optional[StepSchedule] = None, policy: Optional[np.ndarray] = None) -> "CfrState":
        if learner not in LEARNERS:
            raise ValueError(f"unknown local learner {learner!r}; expected one of {', '.join(LEARNERS)}")
        if temperature <= 0:
            raise ValueError(f"hedge temperature must be positive, got {temperature}")
        current = tree.uniform_vector() if policy is None else np.array(policy, dtype=float)
        return cls(
            tree=tree,
            current=current,
            regrets=np.zeros(tree.slot_count),
            average_weights=np.zeros(tree.slot_count),
            learner=learner,
            temperature=temperature,
            schedule=schedule or StepSchedule(),
            meter=RegretMeter(tree),
        )

    def average_policy(self) -> np.ndarray:
        """Own-reach-weighted average of the current policies; uniform before the first step."""
        if self.iteration == 0:
            return self.current.copy()
        return normalize_segments(self.average_weights, self.tree.slot_offsets, self.tree.slot_infostate)


def _own_state_reach(tree: GameTree, own_reach: np.ndarray) -> np.ndarray:
    """Owner's reach of each slot's infostate (constant over members under perfect recall)."""
    return own_reach[tree.slot_player, tree.first_member[tree.slot_infostate]]


def cfr_step(state: CfrState, evaluate: bool = True) -> Tuple[CfrState, Optional[ConvergenceRecord]]:
    """
    One simultaneous CFR iteration for both players.

    The record (when evaluate is set) describes the average policy.
    """
    tree = state.tree
    t = state.iteration + 1
    evaluation = evaluate_tree(tree, state.current)
    state.regrets += evaluation.cf_regrets()
    state.average_weights += _own_state_reach(tree, evaluation.reach.own) * state.current
    state.current = regret_matching(state.regrets, tree.slot_offsets, tree.slot_infostate)
    state.iteration = t
    logger.debug(f"CFR iteration {t} done")
    if not evaluate:
        return state, None
    return state, make_record(tree, t, state.average_policy())


def learner_update(state: CfrState, regrets: np.ndarray, t: int) -> np.ndarray:
    """Next policy of the local learner given this iteration's instantaneous regrets."""
    tree = state.tree
    if state.learner == GIGA:
        step = state.schedule.rate(t)
        return project_segments(state.current + step * regrets, tree.slot_offsets, tree.slot_infostate)
    state.regrets += regrets
    if state.learner == HEDGE:
        return segment_softmax(state.regrets / state.temperature, tree.slot_offsets, tree.slot_infostate)
    return regret_matching(state.regrets, tree.slot_offsets, tree.slot_infostate)


def best_response_round(tree: GameTree, current: np.ndarray, iteration: int,
                        tracker: BestIterateTracker, meter: Optional[RegretMeter],
                        player_order: Tuple[int, int] = (0, 1)) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate each player's current policy against the opponent's best response to it.

    Both best responses are taken against the same (pre-update) joint policy.
    The tracker and meter see every player's value against its best response.

    Returns:
        (slot vector of counterfactual values vs the best responses,
         slot vector of counterfactual regrets vs the best responses)
    """
    responses = {}
    for player in player_order:
        opponent = 1 - player
        responses[opponent] = best_response_vector(tree, current, opponent)

    cf_values = np.zeros(tree.slot_count)
    cf_regrets = np.zeros(tree.slot_count)
    for player in player_order:
        opponent_br, opponent_value = responses[1 - player]
        joint = combine_players(tree, player, current, opponent_br)
        evaluation = evaluate_tree(tree, joint)
        mine = tree.slot_player == player
        cf_values[mine] = evaluation.cf_action_values[mine]
        cf_regrets[mine] = evaluation.cf_regrets()[mine]
        value = -opponent_value
        tracker.offer(player, iteration, value, current)
        if meter is not None:
            meter.observe(player, value, opponent_br)
    return cf_values, cf_regrets


def cfr_br_step(state: CfrState, evaluate: bool = True,
                hedge: Optional[bool] = None) -> Tuple[CfrState, Optional[ConvergenceRecord]]:
    """
    One CFR-BR iteration: each player learns from counterfactual values against
    the opponent's best response to its current policy.

    Args:
        hedge: when given, True selects the hedge learner and False regret matching

    The record reports the current iterate, with the best iterate's NashConv alongside.
    """
    if hedge is not None:
        state.learner = HEDGE if hedge else REGRET_MATCHING
    tree = state.tree
    t = state.iteration + 1
    _, regrets = best_response_round(tree, state.current, state.iteration, state.tracker, state.meter)
    state.current = learner_update(state, regrets, t)
    state.iteration = t
    logger.debug(f"CFR-BR ({state.learner}) iteration {t} done")
    if not evaluate:
        return state, None
    return state, record_with_tracker(tree, t, state.current, state.tracker)
