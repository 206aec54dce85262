"""
Exact full-tree evaluation of joint policies.

One downward pass computes reach probabilities (each player's own contribution
and chance's), one upward pass computes player 0's value at every history.
Counterfactual action values for both players fall out of the two passes.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import DegenerateReachError
from game_core import CHANCE, GameTree, compile_tree
from game_model import GameDynamics, InfoStateKey
from policy import PolicyLike, policy_vector

logger = logging.getLogger(__name__)

Q_MODE = "q"
QC_MODE = "qc"


@dataclass
class ReachDecomposition:
    """Per-history reach: own[i] is player i's product of action probabilities, chance the chance product."""
    own: np.ndarray
    chance: np.ndarray

    def opponent(self, player: int) -> np.ndarray:
        """η_{−i}: opponent and chance contributions."""
        return self.own[1 - player] * self.chance

    @property
    def total(self) -> np.ndarray:
        return self.own[0] * self.own[1] * self.chance


@dataclass
class TreeEvaluation:
    """Everything one joint slot vector induces on a tree."""
    tree: GameTree
    vector: np.ndarray
    reach: ReachDecomposition
    node_values: np.ndarray
    cf_action_values: np.ndarray
    reach_mass: np.ndarray

    @property
    def root_value(self) -> float:
        """v_0 at the initial history."""
        return float(self.node_values[0])

    def history_values(self, player: int) -> np.ndarray:
        return self.node_values if player == 0 else -self.node_values

    def cf_state_values(self) -> np.ndarray:
        """v^c(s) = Σ_a π(s,a) q^c(s,a) for every infostate."""
        return self.tree.segment_sums(self.vector * self.cf_action_values)

    def cf_regrets(self) -> np.ndarray:
        """r(s,a) = q^c(s,a) − v^c(s) as a slot vector."""
        return self.cf_action_values - self.cf_state_values()[self.tree.slot_infostate]

    def q_action_values(self, players: Tuple[int, ...] = (0, 1),
                        allow_degenerate: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """
        Normalised q(s,a) = q^c(s,a) / B_{−i}(s) on the infostates of players.

        Returns:
            (slot vector of q-values, boolean mask of degenerate infostates)

        Raises:
            DegenerateReachError: some infostate has zero reach mass and
                allow_degenerate is False
        """
        owners = self.tree.slot_player[self.tree.slot_offsets]
        degenerate = (self.reach_mass <= 0.0) & np.isin(owners, players)
        if degenerate.any() and not allow_degenerate:
            first = int(np.flatnonzero(degenerate)[0])
            raise DegenerateReachError(self.tree.infostates[first].key)
        mass = np.where(self.reach_mass > 0.0, self.reach_mass, 1.0)[self.tree.slot_infostate]
        values = self.cf_action_values / mass
        if degenerate.any():
            logger.warning(
                f"{int(degenerate.sum())} infostates have zero reach mass; using counterfactual values there"
            )
        return values, degenerate


def reach_probabilities(tree: GameTree, vector: np.ndarray) -> ReachDecomposition:
    """Layered downward pass; root reaches are all 1."""
    edge_prob = tree.edge_probabilities(vector)
    own = np.ones((2, tree.num_nodes))
    chance = np.ones(tree.num_nodes)
    owner = tree.edge_owner
    for layer in tree.layers[1:]:
        parents = tree.parent[layer]
        probs = edge_prob[layer]
        layer_owner = owner[layer]
        for player in (0, 1):
            own[player, layer] = own[player, parents] * np.where(layer_owner == player, probs, 1.0)
        chance[layer] = chance[parents] * np.where(layer_owner == CHANCE, probs, 1.0)
    return ReachDecomposition(own=own, chance=chance)


def history_values(tree: GameTree, vector: np.ndarray, edge_prob: Optional[np.ndarray] = None) -> np.ndarray:
    """Player 0's expected utility from every history onward (upward pass)."""
    if edge_prob is None:
        edge_prob = tree.edge_probabilities(vector)
    values = tree.utility.copy()
    for layer in reversed(tree.layers[1:]):
        np.add.at(values, tree.parent[layer], edge_prob[layer] * values[layer])
    return values


def evaluate_tree(tree: GameTree, vector: np.ndarray) -> TreeEvaluation:
    """Reach, history values, counterfactual action values and reach mass for a joint slot vector."""
    edge_prob = tree.edge_probabilities(vector)
    reach = reach_probabilities(tree, vector)
    node_values = history_values(tree, vector, edge_prob)

    cf_action_values = np.zeros(tree.slot_count)
    reach_mass = np.zeros(len(tree.infostates))
    for player in (0, 1):
        opp = reach.opponent(player)
        sign = 1.0 if player == 0 else -1.0
        edges = tree.decision_edges(player)
        np.add.at(cf_action_values, tree.edge_slot[edges], sign * opp[tree.parent[edges]] * node_values[edges])
        nodes = tree.decision_nodes(player)
        np.add.at(reach_mass, tree.node_infostate[nodes], opp[nodes])
    return TreeEvaluation(
        tree=tree,
        vector=vector,
        reach=reach,
        node_values=node_values,
        cf_action_values=cf_action_values,
        reach_mass=reach_mass,
    )


@dataclass
class ValueReport:
    """Per-infostate action values of one player, q or q^c depending on mode."""
    player: int
    mode: str
    action_values: Dict[InfoStateKey, np.ndarray] = field(default_factory=dict)
    state_values: Dict[InfoStateKey, float] = field(default_factory=dict)
    reach_mass: Dict[InfoStateKey, float] = field(default_factory=dict)
    degenerate: List[InfoStateKey] = field(default_factory=list)


def _report(evaluation: TreeEvaluation, player: int, mode: str, slot_values: np.ndarray,
            degenerate_mask: np.ndarray) -> ValueReport:
    tree = evaluation.tree
    report = ValueReport(player=player, mode=mode)
    for info in tree.player_infostate_list(player):
        values = np.array(slot_values[info.slots])
        report.action_values[info.key] = values
        report.state_values[info.key] = float(np.dot(evaluation.vector[info.slots], values))
        report.reach_mass[info.key] = float(evaluation.reach_mass[info.index])
        if degenerate_mask[info.index]:
            report.degenerate.append(info.key)
    return report


def expected_value(game: GameDynamics, joint: PolicyLike) -> Tuple[float, float]:
    """
    Exact (v_0, v_1) of a joint policy.

    Raises:
        MissingInfoStateError: the joint policy misses an infostate
    """
    tree = compile_tree(game)
    v0 = float(history_values(tree, policy_vector(tree, joint))[0])
    return v0, -v0


def counterfactual_values(game: GameDynamics, joint: PolicyLike, player: int) -> ValueReport:
    """q^c and v^c of player's infostates; defined even at zero opponent reach."""
    tree = compile_tree(game)
    evaluation = evaluate_tree(tree, policy_vector(tree, joint))
    no_degenerate = np.zeros(len(tree.infostates), dtype=bool)
    return _report(evaluation, int(player), QC_MODE, evaluation.cf_action_values, no_degenerate)


def q_values(game: GameDynamics, joint: PolicyLike, player: int, allow_degenerate: bool = False) -> ValueReport:
    """
    Normalised q-values of player's infostates.

    Args:
        allow_degenerate: report q^c (and list the key in report.degenerate)
            instead of raising when an infostate has zero reach mass

    Raises:
        DegenerateReachError: zero reach mass and allow_degenerate is False
    """
    tree = compile_tree(game)
    evaluation = evaluate_tree(tree, policy_vector(tree, joint))
    player = int(player)
    values, degenerate = evaluation.q_action_values((player,), allow_degenerate)
    return _report(evaluation, player, Q_MODE, values, degenerate)
