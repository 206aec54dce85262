"""
Leduc poker: 6-card deck (3 ranks x 2 suits), two betting rounds, one public card.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from game_model import Action, History, InfoStateKey, PlayerId, ReplayGame

CARDS = ("Js", "Jh", "Qs", "Qh", "Ks", "Kh")
FOLD, CALL, RAISE = "f", "c", "r"
MAX_ROUND_ACTIONS = 4


def rank(card: int) -> int:
    return card // 2


@dataclass(frozen=True)
class LeducState:
    private: Tuple[int, ...] = ()
    public: Optional[int] = None
    rounds: Tuple[str, ...] = ("",)
    committed: Tuple[int, int] = (1, 1)
    folded: Optional[int] = None

    @property
    def round(self) -> int:
        return len(self.rounds) - 1

    @property
    def betting(self) -> str:
        return self.rounds[-1]

    @property
    def raises(self) -> int:
        return self.betting.count(RAISE)


class LeducPoker(ReplayGame):
    """
    Ante 1, raise 2 in round one and 4 in round two, at most two raises per round
    (the opening bet counts). Fold is only legal when facing a bet.
    """

    name = "leduc"
    ANTE = 1
    RAISE_SIZES = (2, 4)
    MAX_RAISES = 2

    def _initial_state(self) -> LeducState:
        return LeducState(committed=(self.ANTE, self.ANTE))

    @staticmethod
    def _round_over(betting: str) -> bool:
        return betting in ("cc",) or (len(betting) >= 2 and betting[-1] == CALL and RAISE in betting)

    def _dealing(self, state: LeducState) -> bool:
        return len(state.private) < 2 or (
            state.public is None and state.round == 1
        )

    def _actor(self, state: LeducState) -> int:
        return len(state.betting) % 2

    def _legal_labels(self, state: LeducState) -> List[str]:
        actor = self._actor(state)
        facing_bet = state.committed[actor] < max(state.committed)
        labels = [FOLD] if facing_bet else []
        labels.append(CALL)
        if state.raises < self.MAX_RAISES:
            labels.append(RAISE)
        return labels

    def _next_state(self, state: LeducState, action_id: int) -> LeducState:
        if len(state.private) < 2:
            card = self._remaining(state)[action_id]
            return LeducState(private=state.private + (card,), rounds=state.rounds, committed=state.committed)
        if state.public is None and state.round == 1:
            card = self._remaining(state)[action_id]
            return LeducState(private=state.private, public=card, rounds=state.rounds, committed=state.committed)

        label = self._legal_labels(state)[action_id]
        actor = self._actor(state)
        committed = list(state.committed)
        if label == FOLD:
            return LeducState(state.private, state.public, state.rounds[:-1] + (state.betting + label,),
                              state.committed, folded=actor)
        if label == CALL:
            committed[actor] = max(committed)
        else:
            committed[actor] = max(committed) + self.RAISE_SIZES[state.round]
        betting = state.betting + label
        rounds = state.rounds[:-1] + (betting,)
        if self._round_over(betting) and state.round == 0:
            rounds = rounds + ("",)
        return LeducState(state.private, state.public, rounds, (committed[0], committed[1]))

    def _remaining(self, state: LeducState) -> List[int]:
        dealt = set(state.private) | ({state.public} if state.public is not None else set())
        return [c for c in range(len(CARDS)) if c not in dealt]

    def is_terminal(self, history: History) -> bool:
        state = self._state(history)
        return state.folded is not None or (state.round == 1 and self._round_over(state.betting))

    def current_player(self, history: History) -> PlayerId:
        state = self._state(history)
        if self.is_terminal(history):
            return PlayerId.TERMINAL
        if self._dealing(state):
            return PlayerId.CHANCE
        return PlayerId(self._actor(state))

    def legal_actions(self, history: History) -> List[Action]:
        return [Action(i, label) for i, label in enumerate(self._legal_labels(self._state(history)))]

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        remaining = self._remaining(self._state(history))
        p = 1.0 / len(remaining)
        return [(Action(i, CARDS[c]), p) for i, c in enumerate(remaining)]

    def utility(self, history: History, player: int) -> float:
        state = self._state(history)
        if state.folded is not None:
            winner = 1 - state.folded
        else:
            strength = [self._hand_strength(state.private[p], state.public) for p in (0, 1)]
            if strength[0] == strength[1]:
                return 0.0
            winner = 0 if strength[0] > strength[1] else 1
        gain = state.committed[1 - winner]
        return float(gain if player == winner else -gain)

    @staticmethod
    def _hand_strength(private: int, public: int) -> int:
        if rank(private) == rank(public):
            return 10 + rank(private)
        return rank(private)

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        public = CARDS[state.public] if state.public is not None else "-"
        return InfoStateKey(player, f"{CARDS[state.private[player]]}:{public}:{'/'.join(state.rounds)}".encode("ascii"))

    @property
    def max_depth(self) -> int:
        return 2 + MAX_ROUND_ACTIONS + 1 + MAX_ROUND_ACTIONS

    @property
    def encoding_size(self) -> int:
        return 2 + 6 + 6 + 2 * MAX_ROUND_ACTIONS * 2

    def encode(self, history: History, player: int) -> np.ndarray:
        """[player 2][private 6][public 6][2 rounds x 4 slots x (call, raise)]."""
        if self.is_terminal(history):
            raise ValueError("terminal histories have no encoding")
        state = self._state(history)
        bits = np.zeros(self.encoding_size)
        bits[player] = 1.0
        bits[2 + state.private[player]] = 1.0
        if state.public is not None:
            bits[8 + state.public] = 1.0
        for round_index, betting in enumerate(state.rounds):
            for slot, label in enumerate(betting):
                base = 14 + round_index * MAX_ROUND_ACTIONS * 2 + slot * 2
                bits[base + (1 if label == RAISE else 0)] = 1.0
        return bits
