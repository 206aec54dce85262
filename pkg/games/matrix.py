"""
One-shot matrix game: player 0 picks a row, player 1 picks a column without seeing it.
"""
from typing import List, Sequence, Tuple

import numpy as np

from game_model import Action, History, InfoStateKey, PlayerId, ReplayGame


class MatrixGame(ReplayGame):
    """Zero-sum normal-form game as a two-decision extensive-form game; payoffs are player 0's."""

    name = "matrix"

    def __init__(self, payoffs: Sequence[Sequence[float]], name: str = "matrix"):
        super().__init__()
        self.payoffs = np.array(payoffs, dtype=float)
        if self.payoffs.ndim != 2 or 0 in self.payoffs.shape:
            raise ValueError(f"payoffs must be a non-empty matrix, got shape {self.payoffs.shape}")
        self.name = name

    def _initial_state(self) -> Tuple[int, ...]:
        return ()

    def _next_state(self, state: Tuple[int, ...], action_id: int) -> Tuple[int, ...]:
        return state + (action_id,)

    def is_terminal(self, history: History) -> bool:
        return len(history) == 2

    def current_player(self, history: History) -> PlayerId:
        if len(history) == 2:
            return PlayerId.TERMINAL
        return PlayerId(len(history))

    def legal_actions(self, history: History) -> List[Action]:
        count = self.payoffs.shape[len(history)]
        prefix = "row" if len(history) == 0 else "col"
        return [Action(i, f"{prefix}{i}") for i in range(count)]

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        return []

    def utility(self, history: History, player: int) -> float:
        row, col = self._state(history)
        value = float(self.payoffs[row, col])
        return value if player == 0 else -value

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        return InfoStateKey(player, b"row" if player == 0 else b"col")

    @property
    def max_depth(self) -> int:
        return 2

    @property
    def encoding_size(self) -> int:
        return 2

    def encode(self, history: History, player: int) -> np.ndarray:
        if self.is_terminal(history):
            raise ValueError("terminal histories have no encoding")
        bits = np.zeros(self.encoding_size)
        bits[player] = 1.0
        return bits
