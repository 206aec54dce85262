from typing import List, Tuple

import numpy as np
import pytest

from errors import MalformedGameError
from game_core import (
    CHANCE,
    TERMINAL,
    compile_tree,
    enumerate_histories,
    enumerate_infostates,
    validate_perfect_recall,
)
from game_model import Action, GameDynamics, History, InfoStateKey, PlayerId
from games.kuhn import CARDS, KuhnPoker


class OneDecision(GameDynamics):
    """Player 0 picks one of two actions; player 1 never moves."""

    name = "one_decision"

    def is_terminal(self, history: History) -> bool:
        return len(history) == 1

    def current_player(self, history: History) -> PlayerId:
        return PlayerId.TERMINAL if len(history) == 1 else PlayerId.PLAYER_0

    def legal_actions(self, history: History) -> List[Action]:
        return [Action(0, "left"), Action(1, "right")]

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        return []

    def utility(self, history: History, player: int) -> float:
        u0 = 1.0 if history.actions[0] == 0 else -1.0
        return u0 if player == 0 else -u0

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        return InfoStateKey(player, b"root")

    @property
    def max_depth(self) -> int:
        return 1

    @property
    def encoding_size(self) -> int:
        return 1

    def encode(self, history: History, player: int) -> np.ndarray:
        return np.ones(1)


class ForgetfulKuhn(KuhnPoker):
    """Player 0 forgets the private card when facing a bet."""

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        if player == 0 and state.betting == "pb":
            return InfoStateKey(0, b"?:pb")
        return super().info_state_key(history, player)


class ForgetfulActions(KuhnPoker):
    """Player 0's second decision reuses the opening key, merging different own pasts."""

    def info_state_key(self, history: History, player: int) -> InfoStateKey:
        state = self._state(history)
        if player == 0:
            return InfoStateKey(0, f"{CARDS[state.cards[0]]}:".encode("ascii"))
        return super().info_state_key(history, player)


class NotZeroSum(OneDecision):
    name = "not_zero_sum"

    def utility(self, history: History, player: int) -> float:
        return 1.0


class TooDeep(OneDecision):
    name = "too_deep"

    @property
    def max_depth(self) -> int:
        return 0


class BadChance(OneDecision):
    name = "bad_chance"

    def current_player(self, history: History) -> PlayerId:
        return PlayerId.TERMINAL if len(history) == 1 else PlayerId.CHANCE

    def chance_outcomes(self, history: History) -> List[Tuple[Action, float]]:
        return [(Action(0, "a"), 0.5), (Action(1, "b"), 0.6)]


class TestEnumerateHistories:
    def test_single_decision_game(self):
        histories = enumerate_histories(OneDecision())
        assert histories == [History(), History((0,)), History((1,))]

    def test_kuhn_history_count(self, kuhn):
        assert len(enumerate_histories(kuhn)) == 58

    def test_preorder_is_deterministic_and_unique(self, kuhn):
        first = enumerate_histories(kuhn)
        second = enumerate_histories(KuhnPoker())
        assert first == second
        assert len(set(first)) == len(first)
        for earlier, later in zip(first, first[1:]):
            if len(later) > len(earlier):
                assert earlier.is_prefix_of(later)

    def test_depth_overflow_is_malformed(self):
        with pytest.raises(MalformedGameError):
            enumerate_histories(TooDeep())


class TestEnumerateInfostates:
    def test_kuhn_counts(self, kuhn):
        assert len(enumerate_infostates(kuhn, 0)) == 6
        assert len(enumerate_infostates(kuhn, 1)) == 6

    def test_kuhn_order_is_lexicographic(self, kuhn):
        keys = [key for key, _ in enumerate_infostates(kuhn, 0)]
        assert keys == sorted(keys)
        assert [k.key.decode() for k in keys] == ["J:", "J:pb", "K:", "K:pb", "Q:", "Q:pb"]

    def test_actions_attached(self, kuhn):
        for _, actions in enumerate_infostates(kuhn, 1):
            assert [a.label for a in actions] == ["p", "b"]

    def test_single_decision_game(self):
        assert len(enumerate_infostates(OneDecision(), 0)) == 1
        assert enumerate_infostates(OneDecision(), 1) == []

    def test_chance_is_not_a_player(self, kuhn):
        with pytest.raises(ValueError):
            enumerate_infostates(kuhn, CHANCE)


class TestPerfectRecall:
    def test_kuhn_passes(self, kuhn):
        report = validate_perfect_recall(kuhn)
        assert report
        assert report.counterexample is None

    def test_forgotten_card_fails(self):
        report = validate_perfect_recall(ForgetfulKuhn())
        assert not report
        assert report.key == InfoStateKey(0, b"?:pb")
        first, second = report.counterexample
        assert first != second

    def test_merged_own_pasts_fail(self):
        report = validate_perfect_recall(ForgetfulActions())
        assert not report
        assert report.key.player == 0
        first, second = report.counterexample
        assert len(first) != len(second)


class TestCompileTree:
    def test_layout(self, kuhn_tree):
        assert kuhn_tree.num_nodes == 58
        assert kuhn_tree.slot_count == 24
        assert kuhn_tree.max_actions == 2
        assert kuhn_tree.utility_range == 4.0
        assert kuhn_tree.player[0] == CHANCE
        assert np.count_nonzero(kuhn_tree.player == TERMINAL) == 30

    def test_slots_follow_infostate_order(self, kuhn_tree):
        keys = [info.key for info in kuhn_tree.infostates]
        assert keys[:6] == sorted(keys[:6])
        assert all(k.player == 0 for k in keys[:6])
        assert all(k.player == 1 for k in keys[6:])
        assert list(kuhn_tree.slot_offsets) == list(range(0, 24, 2))

    def test_keys_constant_across_members(self, kuhn, kuhn_tree):
        for info in kuhn_tree.infostates:
            for member in info.members:
                assert kuhn.info_state_key(kuhn_tree.histories[member], info.player) == info.key

    def test_chance_probabilities(self, kuhn_tree):
        deal_children = kuhn_tree.children[0]
        assert np.allclose(kuhn_tree.chance_prob[deal_children], 1.0 / 3.0)

    def test_segment_helpers(self, kuhn_tree):
        sums = kuhn_tree.segment_sums(kuhn_tree.uniform_vector())
        assert np.allclose(sums, 1.0)
        assert kuhn_tree.segment_max(np.arange(24.0)).tolist() == list(range(1, 24, 2))

    def test_statistics(self, kuhn_tree):
        stats = kuhn_tree.statistics()
        assert stats["histories"] == 58
        assert stats["infostates_p0"] == stats["infostates_p1"] == 6
        assert stats["chance_nodes"] == 4

    def test_not_zero_sum_is_malformed(self):
        with pytest.raises(MalformedGameError, match="zero-sum"):
            compile_tree(NotZeroSum())

    def test_bad_chance_is_malformed(self):
        with pytest.raises(MalformedGameError, match="chance"):
            compile_tree(BadChance())
