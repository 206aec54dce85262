"""
Game tree compilation and traversal utilities.

Every evaluation in the package runs on a GameTree: the game flattened once,
depth-first, into numpy arrays plus a "slot" layout with one slot per
(information state, legal action) pair. Policies become flat slot vectors.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from errors import MalformedGameError
from game_model import Action, GameDynamics, History, InfoStateKey, PlayerId, PLAYERS

logger = logging.getLogger(__name__)

TERMINAL = int(PlayerId.TERMINAL)
CHANCE = int(PlayerId.CHANCE)
ROOT_EDGE = -3

CHANCE_TOLERANCE = 1e-12


def _walk(game: GameDynamics) -> Iterator[Tuple[int, History, int, int, int]]:
    """Yield (index, history, parent index, action index, depth) in depth-first preorder."""
    stack = [(game.initial_history(), -1, -1, 0)]
    index = 0
    while stack:
        history, parent, action_index, depth = stack.pop()
        if depth > game.max_depth:
            raise MalformedGameError(
                f"{game.name}: history {history} is deeper than max_depth={game.max_depth}"
            )
        yield index, history, parent, action_index, depth
        if not game.is_terminal(history):
            if game.current_player(history) == PlayerId.CHANCE:
                count = len(game.chance_outcomes(history))
            else:
                count = len(game.legal_actions(history))
            if count == 0:
                raise MalformedGameError(f"{game.name}: non-terminal history {history} has no actions")
            for action_index_child in reversed(range(count)):
                stack.append((history.child(action_index_child), index, action_index_child, depth + 1))
        index += 1


def enumerate_histories(game: GameDynamics) -> List[History]:
    """All histories, terminal and non-terminal, in deterministic depth-first preorder."""
    return [history for _, history, _, _, _ in _walk(game)]


@dataclass(frozen=True)
class InfoState:
    """One information state of the compiled tree."""
    index: int
    key: InfoStateKey
    actions: Tuple[Action, ...]
    slot_offset: int
    members: Tuple[int, ...]

    @property
    def player(self) -> int:
        return self.key.player

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @property
    def slots(self) -> slice:
        return slice(self.slot_offset, self.slot_offset + len(self.actions))


@dataclass(eq=False)
class GameTree:
    """A game flattened into arrays indexed by preorder node number."""
    game_name: str
    histories: List[History]
    parent: np.ndarray
    depth: np.ndarray
    player: np.ndarray
    action_index: np.ndarray
    chance_prob: np.ndarray
    utility: np.ndarray
    node_infostate: np.ndarray
    edge_slot: np.ndarray
    edge_owner: np.ndarray
    children: List[List[int]]
    layers: List[np.ndarray]
    infostates: List[InfoState]
    player_infostates: Tuple[Tuple[int, ...], Tuple[int, ...]]
    slot_infostate: np.ndarray
    slot_player: np.ndarray
    slot_offsets: np.ndarray
    first_member: np.ndarray
    key_index: Dict[InfoStateKey, int]
    uniform_depth: bool

    @property
    def num_nodes(self) -> int:
        return len(self.histories)

    @property
    def slot_count(self) -> int:
        return len(self.slot_infostate)

    @property
    def max_actions(self) -> int:
        return max(info.num_actions for info in self.infostates)

    @property
    def utility_range(self) -> float:
        """Δu: spread of terminal utilities."""
        terminal = self.utility[self.player == TERMINAL]
        return float(terminal.max() - terminal.min())

    def infostate_count(self, player: int) -> int:
        return len(self.player_infostates[player])

    def player_infostate_list(self, player: int) -> List[InfoState]:
        return [self.infostates[g] for g in self.player_infostates[player]]

    def player_slot_mask(self, player: int) -> np.ndarray:
        return self.slot_player == player

    def decision_nodes(self, player: int) -> np.ndarray:
        return np.flatnonzero(self.player == player)

    def decision_edges(self, player: int) -> np.ndarray:
        """Child node indices whose incoming edge is an action of player."""
        return np.flatnonzero(self.edge_owner == player)

    def lookup(self, key: InfoStateKey) -> InfoState:
        return self.infostates[self.key_index[key]]

    def edge_probabilities(self, policy_vector: np.ndarray) -> np.ndarray:
        """Probability of each node's incoming edge under a slot-vector policy."""
        slot = np.maximum(self.edge_slot, 0)
        return np.where(self.edge_slot >= 0, policy_vector[slot], self.chance_prob)

    def uniform_vector(self) -> np.ndarray:
        counts = np.array([info.num_actions for info in self.infostates], dtype=float)
        return 1.0 / counts[self.slot_infostate]

    def segment_sums(self, slot_values: np.ndarray) -> np.ndarray:
        """Per-infostate sums of a slot vector."""
        return np.add.reduceat(slot_values, self.slot_offsets)

    def segment_max(self, slot_values: np.ndarray) -> np.ndarray:
        return np.maximum.reduceat(slot_values, self.slot_offsets)

    def statistics(self) -> Dict:
        """Counts describing the tree."""
        terminal_count = int(np.count_nonzero(self.player == TERMINAL))
        return {
            "game": self.game_name,
            "histories": self.num_nodes,
            "terminals": terminal_count,
            "chance_nodes": int(np.count_nonzero(self.player == CHANCE)),
            "infostates_p0": self.infostate_count(0),
            "infostates_p1": self.infostate_count(1),
            "max_actions": self.max_actions,
            "max_depth": int(self.depth.max()),
        }


@lru_cache(maxsize=32)
def compile_tree(game: GameDynamics) -> GameTree:
    """
    Flatten a game into a GameTree, checking the GameDynamics contract.

    Raises:
        MalformedGameError: depth overflow, bad chance distribution, non-zero-sum
            terminal, or an information state whose histories disagree on legal actions
    """
    logger.info(f"Compiling game tree for {game.name}")

    histories: List[History] = []
    parents: List[int] = []
    depths: List[int] = []
    players: List[int] = []
    action_indices: List[int] = []
    utilities: List[float] = []
    node_keys: List[Optional[InfoStateKey]] = []
    chance_probs: List[float] = []
    pending_chance: Dict[int, List[float]] = {}

    legal_by_key: Dict[InfoStateKey, Tuple[Action, ...]] = {}
    members_by_key: Dict[InfoStateKey, List[int]] = defaultdict(list)

    for index, history, parent, action_index, depth in _walk(game):
        histories.append(history)
        parents.append(parent)
        depths.append(depth)
        action_indices.append(action_index)
        chance_probs.append(pending_chance[parent][action_index] if parent in pending_chance else 1.0)
        node_keys.append(None)
        utilities.append(0.0)

        if game.is_terminal(history):
            players.append(TERMINAL)
            u0 = game.utility(history, 0)
            u1 = game.utility(history, 1)
            if u0 + u1 != 0:
                raise MalformedGameError(
                    f"{game.name}: terminal {game.describe(history)!r} is not zero-sum ({u0}, {u1})"
                )
            utilities[index] = float(u0)
            continue

        player = int(game.current_player(history))
        players.append(player)
        if player == CHANCE:
            outcomes = game.chance_outcomes(history)
            probs = [p for _, p in outcomes]
            if min(probs) < 0 or abs(sum(probs) - 1.0) > CHANCE_TOLERANCE:
                raise MalformedGameError(
                    f"{game.name}: chance distribution at {history} is invalid: {probs}"
                )
            pending_chance[index] = probs
            continue

        key = game.info_state_key(history, player)
        if key.player != player:
            raise MalformedGameError(f"{game.name}: key {key} at {history} belongs to the wrong player")
        legal = tuple(game.legal_actions(history))
        known = legal_by_key.setdefault(key, legal)
        if len(known) != len(legal) or [a.label for a in known] != [a.label for a in legal]:
            raise MalformedGameError(
                f"{game.name}: histories of {key} disagree on legal actions "
                f"({[a.label for a in known]} vs {[a.label for a in legal]})"
            )
        node_keys[index] = key
        members_by_key[key].append(index)

    # Global infostate order: player 0 keys sorted, then player 1 keys sorted.
    infostates: List[InfoState] = []
    key_index: Dict[InfoStateKey, int] = {}
    per_player: List[List[int]] = [[], []]
    offset = 0
    for p in PLAYERS:
        for key in sorted(k for k in legal_by_key if k.player == p):
            g = len(infostates)
            info = InfoState(
                index=g,
                key=key,
                actions=legal_by_key[key],
                slot_offset=offset,
                members=tuple(members_by_key[key]),
            )
            infostates.append(info)
            key_index[key] = g
            per_player[p].append(g)
            offset += info.num_actions

    num_nodes = len(histories)
    parent = np.array(parents, dtype=np.int64)
    depth = np.array(depths, dtype=np.int64)
    player = np.array(players, dtype=np.int64)
    action_index = np.array(action_indices, dtype=np.int64)

    node_infostate = np.full(num_nodes, -1, dtype=np.int64)
    for key, members in members_by_key.items():
        node_infostate[members] = key_index[key]

    edge_owner = np.full(num_nodes, ROOT_EDGE, dtype=np.int64)
    edge_owner[1:] = player[parent[1:]]
    edge_slot = np.full(num_nodes, -1, dtype=np.int64)
    offsets = np.array([info.slot_offset for info in infostates], dtype=np.int64)
    decision_child = edge_owner >= 0
    edge_slot[decision_child] = offsets[node_infostate[parent[decision_child]]] + action_index[decision_child]

    children: List[List[int]] = [[] for _ in range(num_nodes)]
    for child in range(1, num_nodes):
        children[parents[child]].append(child)

    layers = [np.flatnonzero(depth == d) for d in range(int(depth.max()) + 1)]

    slot_infostate = np.concatenate(
        [np.full(info.num_actions, info.index, dtype=np.int64) for info in infostates]
    ) if infostates else np.zeros(0, dtype=np.int64)
    slot_player = np.array([infostates[g].player for g in slot_infostate], dtype=np.int64)
    first_member = np.array([info.members[0] for info in infostates], dtype=np.int64)
    uniform_depth = all(len({depths[m] for m in info.members}) == 1 for info in infostates)

    tree = GameTree(
        game_name=game.name,
        histories=histories,
        parent=parent,
        depth=depth,
        player=player,
        action_index=action_index,
        chance_prob=np.array(chance_probs, dtype=float),
        utility=np.array(utilities, dtype=float),
        node_infostate=node_infostate,
        edge_slot=edge_slot,
        edge_owner=edge_owner,
        children=children,
        layers=layers,
        infostates=infostates,
        player_infostates=(tuple(per_player[0]), tuple(per_player[1])),
        slot_infostate=slot_infostate,
        slot_player=slot_player,
        slot_offsets=offsets,
        first_member=first_member,
        key_index=key_index,
        uniform_depth=uniform_depth,
    )
    stats = tree.statistics()
    logger.info(
        f"Compiled {game.name}: {stats['histories']} histories, {stats['terminals']} terminals, "
        f"{stats['infostates_p0']}+{stats['infostates_p1']} infostates"
    )
    return tree


def enumerate_infostates(game: GameDynamics, player: int) -> List[Tuple[InfoStateKey, List[Action]]]:
    """A player's information states, lexicographic by key, with their legal actions."""
    if int(player) not in (0, 1):
        raise ValueError(f"information states belong to players 0 and 1, not {player}")
    tree = compile_tree(game)
    return [(info.key, list(info.actions)) for info in tree.player_infostate_list(int(player))]


@dataclass
class PerfectRecallReport:
    """Outcome of a perfect-recall check; failing reports name two conflicting histories."""
    passed: bool
    key: Optional[InfoStateKey] = None
    counterexample: Optional[Tuple[History, History]] = None

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return "perfect recall holds"
        first, second = self.counterexample
        return f"perfect recall fails at {self.key}: histories {first} and {second} have different own pasts"


def validate_perfect_recall(game: GameDynamics) -> PerfectRecallReport:
    """
    Check that every member history of an information state shares the owner's
    sequence of earlier (information state, action) pairs.
    """
    tree = compile_tree(game)
    # Own pasts are hash-consed: (previous past id, infostate, action) -> id.
    interned: Dict[Tuple[int, int, int], int] = {}
    past = np.zeros((2, tree.num_nodes), dtype=np.int64)
    for node in range(1, tree.num_nodes):
        parent = tree.parent[node]
        past[:, node] = past[:, parent]
        owner = tree.edge_owner[node]
        if owner >= 0:
            step = (int(past[owner, parent]), int(tree.node_infostate[parent]), int(tree.action_index[node]))
            past[owner, node] = interned.setdefault(step, len(interned) + 1)

    for info in tree.infostates:
        reference = info.members[0]
        for member in info.members[1:]:
            if past[info.player, member] != past[info.player, reference]:
                report = PerfectRecallReport(
                    passed=False,
                    key=info.key,
                    counterexample=(tree.histories[reference], tree.histories[member]),
                )
                logger.warning(str(report))
                return report
    return PerfectRecallReport(passed=True)
