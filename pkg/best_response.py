"""
Exact best responses, exploitability and NashConv.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from game_core import GameTree, compile_tree
from game_model import GameDynamics
from policy import PolicyLike, TabularPolicy, combine_players, policy_vector, vector_to_policy
from values import history_values, reach_probabilities

logger = logging.getLogger(__name__)


@dataclass
class BestResponseResult:
    """A pure best response and the value it earns against the fixed opponent."""
    player: int
    policy: TabularPolicy
    value: float
    vector: np.ndarray


@dataclass
class ExploitabilityReport:
    """δ_i per player plus the quantities they come from."""
    exploitability: Tuple[float, float]
    best_response_values: Tuple[float, float]
    value_p0: float

    @property
    def nash_conv(self) -> float:
        return self.exploitability[0] + self.exploitability[1]


def _first_argmax(tree: GameTree, slot_values: np.ndarray) -> np.ndarray:
    """Per infostate, the local index of the first maximal slot (lowest action id wins ties)."""
    best = tree.segment_max(slot_values)[tree.slot_infostate]
    local = np.arange(tree.slot_count) - tree.slot_offsets[tree.slot_infostate]
    candidates = np.where(slot_values >= best, local, tree.max_actions)
    return np.minimum.reduceat(candidates, tree.slot_offsets)


def _layered_best_response(tree: GameTree, vector: np.ndarray, player: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bottom-up pass choosing, per infostate, the action with the highest
    counterfactual value. Needs every infostate's members on one depth.

    Returns:
        (chosen local action per infostate, player's value per history)
    """
    edge_prob = tree.edge_probabilities(vector)
    opp_reach = reach_probabilities(tree, vector).opponent(player)
    values = tree.utility.copy() if player == 0 else -tree.utility
    slot_values = np.zeros(tree.slot_count)
    choice = np.zeros(len(tree.infostates), dtype=np.int64)
    own_edge = tree.edge_owner == player

    for layer in reversed(tree.layers[1:]):
        parents = tree.parent[layer]
        mine = own_edge[layer]
        others = layer[~mine]
        np.add.at(values, tree.parent[others], edge_prob[others] * values[others])

        decided = layer[mine]
        if len(decided) == 0:
            continue
        np.add.at(slot_values, tree.edge_slot[decided], opp_reach[parents[mine]] * values[decided])
        choice = _first_argmax(tree, slot_values)
        decision_parents = parents[mine]
        chosen = choice[tree.node_infostate[decision_parents]] == tree.action_index[decided]
        values[decision_parents[chosen]] = values[decided[chosen]]
    return choice, values


def _recursive_best_response(tree: GameTree, vector: np.ndarray, player: int) -> Tuple[np.ndarray, np.ndarray]:
    """Memoised recursion for trees where an infostate spans several depths."""
    edge_prob = tree.edge_probabilities(vector)
    opp_reach = reach_probabilities(tree, vector).opponent(player)
    sign = 1.0 if player == 0 else -1.0
    values = np.full(tree.num_nodes, np.nan)
    choice: Dict[int, int] = {}

    def decide(g: int) -> int:
        if g not in choice:
            info = tree.infostates[g]
            totals = np.zeros(info.num_actions)
            for member in info.members:
                for child in tree.children[member]:
                    totals[tree.action_index[child]] += opp_reach[member] * node_value(child)
            choice[g] = int(np.argmax(totals))
        return choice[g]

    def node_value(node: int) -> float:
        if np.isnan(values[node]):
            kids = tree.children[node]
            if not kids:
                values[node] = sign * tree.utility[node]
            elif tree.player[node] == player:
                values[node] = node_value(kids[decide(int(tree.node_infostate[node]))])
            else:
                values[node] = sum(edge_prob[child] * node_value(child) for child in kids)
        return values[node]

    node_value(0)
    for info in tree.player_infostate_list(player):
        decide(info.index)
    chosen = np.zeros(len(tree.infostates), dtype=np.int64)
    for g, action in choice.items():
        chosen[g] = action
    return chosen, values


def best_response_vector(tree: GameTree, vector: np.ndarray, player: int) -> Tuple[np.ndarray, float]:
    """
    Best response of player against the opponent slots of a joint slot vector.

    Returns:
        (one-hot slot vector over player's slots, zeros elsewhere; BR value)
    """
    if tree.uniform_depth:
        choice, values = _layered_best_response(tree, vector, player)
    else:
        choice, values = _recursive_best_response(tree, vector, player)
    local = np.arange(tree.slot_count) - tree.slot_offsets[tree.slot_infostate]
    one_hot = ((local == choice[tree.slot_infostate]) & (tree.slot_player == player)).astype(float)
    return one_hot, float(values[0])


def best_response(game: GameDynamics, opp_policy: PolicyLike, player: int) -> BestResponseResult:
    """
    Pure best response of player to the opponent's policy.

    Every infostate of player gets an action, zero-reach ones included
    (their counterfactual weights are all zero, so the lowest id is chosen).

    Raises:
        MissingInfoStateError: opp_policy misses an opponent infostate
    """
    tree = compile_tree(game)
    player = int(player)
    vector = policy_vector(tree, opp_policy, players=(1 - player,))
    one_hot, value = best_response_vector(tree, vector, player)
    return BestResponseResult(
        player=player,
        policy=vector_to_policy(tree, one_hot, players=(player,)),
        value=value,
        vector=one_hot,
    )


def evaluate_exploitability(tree: GameTree, vector: np.ndarray) -> ExploitabilityReport:
    """Exploitability of a joint slot vector."""
    v0 = float(history_values(tree, vector)[0])
    _, br0 = best_response_vector(tree, vector, 0)
    _, br1 = best_response_vector(tree, vector, 1)
    return ExploitabilityReport(
        exploitability=(br0 - v0, br1 + v0),
        best_response_values=(br0, br1),
        value_p0=v0,
    )


def exploitability(game: GameDynamics, joint: PolicyLike) -> Tuple[float, float]:
    """(δ_0, δ_1): what each player gains by switching to a best response."""
    tree = compile_tree(game)
    return evaluate_exploitability(tree, policy_vector(tree, joint)).exploitability


def nash_conv(game: GameDynamics, joint: PolicyLike) -> float:
    """δ_0 + δ_1; in two-player zero-sum games also the sum of best-response values."""
    tree = compile_tree(game)
    return evaluate_exploitability(tree, policy_vector(tree, joint)).nash_conv


def best_response_joint(tree: GameTree, vector: np.ndarray, player: int) -> np.ndarray:
    """Joint slot vector with player's slots replaced by its best response."""
    one_hot, _ = best_response_vector(tree, vector, player)
    return combine_players(tree, player, one_hot, vector)
