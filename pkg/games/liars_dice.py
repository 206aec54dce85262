"""
Liar's Dice (1,1): one private six-sided die per player, sixes wild.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from game_model import Action, History, InfoStateKey, PlayerId, ReplayGame

FACES = 6
MAX_QUANTITY = 2
NUM_BIDS = FACES * MAX_QUANTITY
LIAR = NUM_BIDS
WILD_FACE = 6


def bid_quantity(bid: int) -> int:
    return bid // FACES + 1


def bid_face(bid: int) -> int:
    return bid % FACES + 1


def bid_label(bid: int) -> str:
    return "Liar" if bid == LIAR else f"{bid_quantity(bid)}-{bid_face(bid)}"


def bid_satisfied(bid: int, dice: Tuple[int, ...]) -> bool:
    """q-f holds iff at least q dice show f or the wild face (q-6 counts sixes only)."""
    face = bid_face(bid)
    if face == WILD_FACE:
        count = sum(1 for d in dice if d == WILD_FACE)
    else:
        count = sum(1 for d in dice if d == face or d == WILD_FACE)
    return count >= bid_quantity(bid)


@dataclass(frozen=True)
class LiarsDiceState:
    dice: Tuple[int, ...] = ()
    bids: Tuple[int, ...] = ()
    called: bool = False


class LiarsDice(ReplayGame):
    """
    Bids are ordered by (quantity, face) with the wild face ranked highest;
    each bid must exceed the last, and Liar is legal once any bid stands.
    """

    name = "liars_dice"

    def _initial_state(self) -> LiarsDiceState:
        return LiarsDiceState()

    def _legal_bids(self, state: LiarsDiceState) -> List[int]:
        start = state.bids[-1] + 1 if state.bids else 0
        moves = list(range(start, NUM_BIDS))
        if state.bids:
            moves.append(LIAR)
        return moves

    def _next_state(self, state: LiarsDiceState, action_id: int) -> LiarsDiceState:
        if len(state.dice) < 2:
            return LiarsDiceState(dice=state.dice + (action_id + 1,))
        move = self._legal_bids(state)[action_id]
        if move == LIAR:
            return LiarsDiceState(dice=state.dice, bids=state.bids, called=True)
        return LiarsDiceState(dice=state.dice, bids=state.bids + (move,))

    def is_terminal(self, history: History) -> bool:
        return self._state(history).called

    def current_player(self, history: History) -> PlayerId:
        state = self._state(history)
        if state.called:
            return PlayerId.TERMINAL
        if len(state.dice) < 2:
            return PlayerId.CHANCE
        return PlayerId(len(state.bids) % 2)

    def legal_actions(self, history: History) -> List[Action]:
        return [Action(i, bid_label(move)) for i, move in enumerate(self._legal_bids(self._state(history)))]

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        return [(Action(face - 1, str(face)), 1.0 / FACES) for face in range(1, FACES + 1)]

    def utility(self, history: History, player: int) -> float:
        state = self._state(history)
        caller = len(state.bids) % 2
        bidder = 1 - caller
        winner = bidder if bid_satisfied(state.bids[-1], state.dice) else caller
        return 1.0 if player == winner else -1.0

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        bids = ",".join(bid_label(b) for b in state.bids)
        return InfoStateKey(player, f"{state.dice[player]}:{bids}".encode("ascii"))

    @property
    def max_depth(self) -> int:
        return 2 + NUM_BIDS + 1

    @property
    def encoding_size(self) -> int:
        return 2 + FACES + NUM_BIDS

    def encode(self, history: History, player: int) -> np.ndarray:
        """[player 2][own die 6][one bit per bid already made]; bids are increasing so the set fixes the order."""
        if self.is_terminal(history):
            raise ValueError("terminal histories have no encoding")
        state = self._state(history)
        bits = np.zeros(self.encoding_size)
        bits[player] = 1.0
        bits[2 + state.dice[player] - 1] = 1.0
        for bid in state.bids:
            bits[2 + FACES + bid] = 1.0
        return bits
