"""
Goofspiel with hidden bids: fixed decreasing point deck, win/lose/tie feedback only.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from game_model import Action, History, InfoStateKey, PlayerId, ReplayGame

WIN, LOSE, TIE = "W", "L", "T"
OUTCOMES = (WIN, LOSE, TIE)


@dataclass(frozen=True)
class GoofspielState:
    bids: Tuple[Tuple[int, int], ...] = ()
    pending: Tuple[int, ...] = ()


class Goofspiel(ReplayGame):
    """
    Each round player 0 bids, then player 1 bids without seeing it; both then
    learn only the round outcome. Utility is the sign of the point difference.
    """

    name = "goofspiel"

    def __init__(self, num_cards: int = 4):
        super().__init__()
        self.num_cards = num_cards
        self.point_cards = tuple(range(num_cards, 0, -1))

    def _initial_state(self) -> GoofspielState:
        return GoofspielState()

    def _hand(self, state: GoofspielState, player: int) -> List[int]:
        spent = {round_bids[player] for round_bids in state.bids}
        if player == 0 and state.pending:
            spent.add(state.pending[0])
        return [card for card in range(1, self.num_cards + 1) if card not in spent]

    def _actor(self, state: GoofspielState) -> int:
        return len(state.pending)

    def _next_state(self, state: GoofspielState, action_id: int) -> GoofspielState:
        actor = self._actor(state)
        card = self._hand(state, actor)[action_id]
        if actor == 0:
            return GoofspielState(bids=state.bids, pending=(card,))
        return GoofspielState(bids=state.bids + ((state.pending[0], card),), pending=())

    def _points(self, state: GoofspielState) -> Tuple[int, int]:
        points = [0, 0]
        for point_card, (bid0, bid1) in zip(self.point_cards, state.bids):
            if bid0 > bid1:
                points[0] += point_card
            elif bid1 > bid0:
                points[1] += point_card
        return points[0], points[1]

    @staticmethod
    def _outcome(bids: Tuple[int, int], player: int) -> str:
        own, other = bids[player], bids[1 - player]
        if own == other:
            return TIE
        return WIN if own > other else LOSE

    def is_terminal(self, history: History) -> bool:
        return len(self._state(history).bids) == self.num_cards

    def current_player(self, history: History) -> PlayerId:
        state = self._state(history)
        if len(state.bids) == self.num_cards:
            return PlayerId.TERMINAL
        return PlayerId(self._actor(state))

    def legal_actions(self, history: History) -> List[Action]:
        state = self._state(history)
        return [Action(i, f"bid{card}") for i, card in enumerate(self._hand(state, self._actor(state)))]

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        return []

    def utility(self, history: History, player: int) -> float:
        points = self._points(self._state(history))
        diff = points[player] - points[1 - player]
        return float(np.sign(diff))

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        rounds = ",".join(f"{bids[player]}{self._outcome(bids, player)}" for bids in state.bids)
        return InfoStateKey(player, f"{len(state.bids)}:{rounds}".encode("ascii"))

    @property
    def max_depth(self) -> int:
        return 2 * self.num_cards

    @property
    def encoding_size(self) -> int:
        return 2 + self.num_cards + (self.num_cards - 1) * (self.num_cards + len(OUTCOMES))

    def encode(self, history: History, player: int) -> np.ndarray:
        """[player 2][current point card K][per completed round: own bid K + outcome 3]."""
        if self.is_terminal(history):
            raise ValueError("terminal histories have no encoding")
        state = self._state(history)
        k = self.num_cards
        bits = np.zeros(self.encoding_size)
        bits[player] = 1.0
        bits[2 + self.point_cards[len(state.bids)] - 1] = 1.0
        block = k + len(OUTCOMES)
        for round_index, bids in enumerate(state.bids):
            base = 2 + k + round_index * block
            bits[base + bids[player] - 1] = 1.0
            bits[base + k + OUTCOMES.index(self._outcome(bids, player))] = 1.0
        return bits
