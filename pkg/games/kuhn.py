"""
Kuhn poker: 3-card deck, 1-chip ante, one betting round with at most one bet.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from game_model import Action, History, InfoStateKey, PlayerId, ReplayGame

CARDS = ("J", "Q", "K")
PASS, BET = 0, 1
ACTIONS = (Action(PASS, "p"), Action(BET, "b"))
TERMINAL_SEQUENCES = {"pp", "bp", "bb", "pbp", "pbb"}


@dataclass(frozen=True)
class KuhnState:
    cards: Tuple[int, ...] = ()
    betting: str = ""


class KuhnPoker(ReplayGame):
    """Two chance deals (player 0's card, then player 1's) followed by the betting tree."""

    name = "kuhn"
    ANTE = 1
    BET_SIZE = 1

    def _initial_state(self) -> KuhnState:
        return KuhnState()

    def _next_state(self, state: KuhnState, action_id: int) -> KuhnState:
        if len(state.cards) < 2:
            remaining = [c for c in range(len(CARDS)) if c not in state.cards]
            return KuhnState(cards=state.cards + (remaining[action_id],), betting=state.betting)
        return KuhnState(cards=state.cards, betting=state.betting + ACTIONS[action_id].label)

    def is_terminal(self, history: History) -> bool:
        return self._state(history).betting in TERMINAL_SEQUENCES

    def current_player(self, history: History) -> PlayerId:
        state = self._state(history)
        if len(state.cards) < 2:
            return PlayerId.CHANCE
        if state.betting in TERMINAL_SEQUENCES:
            return PlayerId.TERMINAL
        return PlayerId(len(state.betting) % 2)

    def legal_actions(self, history: History) -> List[Action]:
        return list(ACTIONS)

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        state = self._state(history)
        remaining = [c for c in range(len(CARDS)) if c not in state.cards]
        p = 1.0 / len(remaining)
        return [(Action(i, CARDS[c]), p) for i, c in enumerate(remaining)]

    def utility(self, history: History, player: int) -> float:
        state = self._state(history)
        committed = [self.ANTE, self.ANTE]
        folder = None
        for i, label in enumerate(state.betting):
            actor = i % 2
            if label == "b":
                committed[actor] += self.BET_SIZE
            elif "b" in state.betting[:i]:
                folder = actor
        if folder is not None:
            winner = 1 - folder
        else:
            winner = 0 if state.cards[0] > state.cards[1] else 1
        gain = committed[1 - winner]
        return float(gain if player == winner else -gain)

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        return InfoStateKey(player, f"{CARDS[state.cards[player]]}:{state.betting}".encode("ascii"))

    @property
    def max_depth(self) -> int:
        return 5

    @property
    def encoding_size(self) -> int:
        return 11

    def encode(self, history: History, player: int) -> np.ndarray:
        """[player 2][own card 3][3 betting slots x (pass, bet)]."""
        if self.is_terminal(history):
            raise ValueError("terminal histories have no encoding")
        state = self._state(history)
        bits = np.zeros(self.encoding_size)
        bits[player] = 1.0
        bits[2 + state.cards[player]] = 1.0
        for slot, label in enumerate(state.betting):
            bits[5 + 2 * slot + (BET if label == "b" else PASS)] = 1.0
        return bits


def kuhn_equilibrium_policy(alpha: float = 1.0 / 6.0) -> dict:
    """
    The classical one-parameter Kuhn equilibrium family, as {key: [p_pass, p_bet]}.

    Player 0 bets J with alpha and K with 3*alpha, calls a bet with Q at alpha + 1/3.
    Player 1 bets J after a pass with 1/3, always bets/calls K, calls with Q at 1/3.
    """
    table = {
        (0, "J:"): [1.0 - alpha, alpha],
        (0, "Q:"): [1.0, 0.0],
        (0, "K:"): [1.0 - 3.0 * alpha, 3.0 * alpha],
        (0, "J:pb"): [1.0, 0.0],
        (0, "Q:pb"): [1.0 - (alpha + 1.0 / 3.0), alpha + 1.0 / 3.0],
        (0, "K:pb"): [0.0, 1.0],
        (1, "J:p"): [2.0 / 3.0, 1.0 / 3.0],
        (1, "Q:p"): [1.0, 0.0],
        (1, "K:p"): [0.0, 1.0],
        (1, "J:b"): [1.0, 0.0],
        (1, "Q:b"): [2.0 / 3.0, 1.0 / 3.0],
        (1, "K:b"): [0.0, 1.0],
    }
    return {InfoStateKey(p, k.encode("ascii")): np.array(v) for (p, k), v in table.items()}
