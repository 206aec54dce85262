"""
Tabular Exploitability Descent.

Every iteration computes both players' best responses to the current joint
policy, values each player's actions against them and takes one ascent step
per information state.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from best_response import best_response_vector
from game_core import GameTree
from policy import combine_players, project_segments, segment_pg_direction, segment_softmax
from solvers.records import BestIterateTracker, ConvergenceRecord, RegretMeter, record_with_tracker
from solvers.schedule import SQRT, StepSchedule
from values import evaluate_tree

logger = logging.getLogger(__name__)

Q_L2 = "q_l2"
QC_L2 = "qc_l2"
QC_SOFTMAX = "qc_softmax"
QC_MD = "qc_md"
ED_VARIANTS = (Q_L2, QC_L2, QC_SOFTMAX, QC_MD)
SIMPLEX_VARIANTS = (Q_L2, QC_L2)

DEFAULT_SCHEDULES = {
    Q_L2: StepSchedule(SQRT, 1.0),
    QC_L2: StepSchedule(SQRT, 1.0),
    QC_SOFTMAX: StepSchedule(),
    QC_MD: StepSchedule(),
}


@dataclass
class EdState:
    """
    Per-slot parameters of both players: probabilities for the ℓ2 variants,
    logits for the softmax variants.
    """
    tree: GameTree
    variant: str
    params: np.ndarray
    schedule: StepSchedule
    iteration: int = 0
    allow_degenerate: bool = False
    tracker: BestIterateTracker = field(default_factory=BestIterateTracker)
    meter: Optional[RegretMeter] = None

    @classmethod
    def initial(cls, tree: GameTree, variant: str, schedule: Optional[StepSchedule] = None,
                params: Optional[np.ndarray] = None, allow_degenerate: bool = False) -> "EdState":
        """
        Uniform start (probabilities 1/|A| or zero logits) unless params are given.

        Raises:
            ValueError: unknown variant, or ℓ2 parameters that are not strictly positive
        """
        if variant not in ED_VARIANTS:
            raise ValueError(f"unknown ED variant {variant!r}; expected one of {', '.join(ED_VARIANTS)}")
        if params is None:
            params = tree.uniform_vector() if variant in SIMPLEX_VARIANTS else np.zeros(tree.slot_count)
        params = np.array(params, dtype=float)
        if variant == Q_L2 and not (params > 0).all():
            raise ValueError("the q_l2 variant needs a strictly positive initial policy")
        return cls(
            tree=tree,
            variant=variant,
            params=params,
            schedule=schedule or DEFAULT_SCHEDULES[variant],
            allow_degenerate=allow_degenerate,
            meter=RegretMeter(tree),
        )

    def policy(self) -> np.ndarray:
        """Current joint policy as a slot vector."""
        if self.variant in SIMPLEX_VARIANTS:
            return self.params.copy()
        return segment_softmax(self.params, self.tree.slot_offsets, self.tree.slot_infostate)


def values_against_best_responses(state: EdState, current: np.ndarray,
                                  player_order: Tuple[int, int] = (0, 1)) -> np.ndarray:
    """
    q^b for every slot: each player's action values with the opponent replaced
    by its best response to the current joint policy.

    All best responses are computed before any player's values, so the result
    does not depend on player_order.
    """
    tree = state.tree
    responses = {}
    for player in player_order:
        responses[1 - player] = best_response_vector(tree, current, 1 - player)

    action_values = np.zeros(tree.slot_count)
    for player in player_order:
        opponent_br, opponent_value = responses[1 - player]
        evaluation = evaluate_tree(tree, combine_players(tree, player, current, opponent_br))
        if state.variant == Q_L2:
            values, _ = evaluation.q_action_values((player,), state.allow_degenerate)
        else:
            values = evaluation.cf_action_values
        mine = tree.slot_player == player
        action_values[mine] = values[mine]
        state.tracker.offer(player, state.iteration, -opponent_value, current)
        if state.meter is not None:
            state.meter.observe(player, -opponent_value, opponent_br)
    return action_values


def apply_update(state: EdState, action_values: np.ndarray, step: float) -> np.ndarray:
    """New parameters after one ascent step of the state's variant."""
    tree = state.tree
    offsets, segments = tree.slot_offsets, tree.slot_infostate
    if state.variant in SIMPLEX_VARIANTS:
        return project_segments(state.params + step * action_values, offsets, segments)
    if state.variant == QC_SOFTMAX:
        probs = segment_softmax(state.params, offsets, segments)
        return state.params + step * segment_pg_direction(probs, action_values, offsets, segments)
    return state.params + step * action_values


def ed_step(state: EdState, evaluate: bool = True,
            player_order: Tuple[int, int] = (0, 1)) -> Tuple[EdState, Optional[ConvergenceRecord]]:
    """
    One simultaneous ED iteration.

    Raises:
        DegenerateReachError: q_l2 met a zero-mass infostate without the fallback enabled
        FloatingPointError: the update produced a NaN or unbounded parameter
    """
    t = state.iteration + 1
    current = state.policy()
    action_values = values_against_best_responses(state, current, player_order)
    params = apply_update(state, action_values, state.schedule.rate(t))
    if state.variant in SIMPLEX_VARIANTS:
        invalid = ~np.isfinite(params)
    else:
        # -inf logits are actions played with probability exactly zero
        invalid = np.isnan(params) | np.isposinf(params)
    if invalid.any():
        raise FloatingPointError(f"ED {state.variant} produced non-finite parameters")
    state.params = params
    state.iteration = t
    logger.debug(f"ED {state.variant} iteration {t} done")
    if not evaluate:
        return state, None
    return state, record_with_tracker(state.tree, t, state.policy(), state.tracker)
