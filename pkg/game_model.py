"""
Data model classes for two-player zero-sum extensive-form games.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List, Tuple, Union

import numpy as np


class PlayerId(IntEnum):
    """Whose turn it is at a history. Players are 0-indexed."""
    TERMINAL = -2
    CHANCE = -1
    PLAYER_0 = 0
    PLAYER_1 = 1

    @property
    def opponent(self) -> "PlayerId":
        if self not in PLAYERS:
            raise ValueError(f"{self.name} has no opponent")
        return PlayerId(1 - int(self))


PLAYERS: Tuple[PlayerId, PlayerId] = (PlayerId.PLAYER_0, PlayerId.PLAYER_1)


@dataclass(frozen=True)
class Action:
    """An action at one decision point; ids are dense positions in the legal list."""
    id: int
    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class History:
    """Sequence of action ids taken from the initial history (chance included)."""
    actions: Tuple[int, ...] = ()

    def child(self, action_id: int) -> "History":
        return History(self.actions + (int(action_id),))

    @property
    def parent(self) -> "History":
        if not self.actions:
            raise ValueError("the initial history has no parent")
        return History(self.actions[:-1])

    def is_prefix_of(self, other: "History") -> bool:
        """True iff self ⊑ other."""
        n = len(self.actions)
        return n <= len(other.actions) and other.actions[:n] == self.actions

    def __len__(self) -> int:
        return len(self.actions)

    def __str__(self) -> str:
        return "(" + ",".join(str(a) for a in self.actions) + ")"


@dataclass(frozen=True, order=True)
class InfoStateKey:
    """Stable identifier of an information state; orders lexicographically by key bytes."""
    player: int
    key: bytes

    def hex(self) -> str:
        return self.key.hex()

    @classmethod
    def from_hex(cls, player: int, text: str) -> "InfoStateKey":
        return cls(player=int(player), key=bytes.fromhex(text))

    def __str__(self) -> str:
        return f"p{self.player}[{self.key.decode('ascii', errors='replace')}]"


class GameDynamics(ABC):
    """
    Contract for a finite two-player zero-sum extensive-form game.

    Histories are action sequences; implementations recompute whatever state
    they need from them. Chance acts through the same turn-taking interface.
    """

    name: str = "game"

    def initial_history(self) -> History:
        return History()

    @abstractmethod
    def is_terminal(self, history: History) -> bool:
        """True at terminal histories z ∈ Z."""

    @abstractmethod
    def current_player(self, history: History) -> PlayerId:
        """Player to act, CHANCE at chance nodes, TERMINAL at terminals."""

    @abstractmethod
    def legal_actions(self, history: History) -> List[Action]:
        """Ordered legal actions at a player decision point."""

    @abstractmethod
    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        """Outcomes and probabilities at a chance node."""

    @abstractmethod
    def utility(self, history: History, player: int) -> float:
        """u_i(z) at a terminal history."""

    @abstractmethod
    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        """Key of the information state containing history for player."""

    @property
    @abstractmethod
    def max_depth(self) -> int:
        """Upper bound on history length."""

    @property
    @abstractmethod
    def encoding_size(self) -> int:
        """Bit count of encode()."""

    @abstractmethod
    def encode(self, history: History, player: int) -> np.ndarray:
        """Fixed-size 0/1 vector describing player's view of history."""

    def apply(self, history: History, action: Union[Action, int]) -> History:
        """Extend history by an action legal at it."""
        action_id = action.id if isinstance(action, Action) else int(action)
        if self.current_player(history) == PlayerId.CHANCE:
            count = len(self.chance_outcomes(history))
        elif self.is_terminal(history):
            raise ValueError(f"cannot act at terminal history {history}")
        else:
            count = len(self.legal_actions(history))
        if not 0 <= action_id < count:
            raise ValueError(f"action {action_id} is not legal at history {history}")
        return history.child(action_id)

    def describe(self, history: History) -> str:
        """Human-readable action labels along a history."""
        labels = []
        current = self.initial_history()
        for action_id in history.actions:
            if self.current_player(current) == PlayerId.CHANCE:
                labels.append(self.chance_outcomes(current)[action_id][0].label)
            else:
                labels.append(self.legal_actions(current)[action_id].label)
            current = current.child(action_id)
        return " ".join(labels)


class ReplayGame(GameDynamics):
    """
    Base for games whose state is rebuilt by replaying a history.

    Subclasses provide an initial state and a pure transition; states are
    memoised per history so each tree node is computed once.
    """

    def __init__(self):
        self._states: Dict[History, object] = {}

    @abstractmethod
    def _initial_state(self):
        """State at the initial history."""

    @abstractmethod
    def _next_state(self, state, action_id: int):
        """State after taking action_id (a position in the legal/chance list)."""

    def _state(self, history: History):
        state = self._states.get(history)
        if state is None:
            if not history.actions:
                state = self._initial_state()
            else:
                state = self._next_state(self._state(history.parent), history.actions[-1])
            self._states[history] = state
        return state
