"""
Convergence records, best-iterate tracking and online regret measurement.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from best_response import ExploitabilityReport, best_response_vector, evaluate_exploitability
from game_core import GameTree
from policy import combine_players, normalize_segments
from values import reach_probabilities

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "iteration",
    "nashconv",
    "exploitability_p0",
    "exploitability_p1",
    "best_iter_nashconv",
    "value_p0",
    "wall_ms",
]


@dataclass
class ConvergenceRecord:
    """One row of a convergence curve."""
    iteration: int
    nashconv: float
    exploitability_p0: float
    exploitability_p1: float
    best_iter_nashconv: Optional[float]
    value_p0: float
    wall_ms: int = 0

    def as_row(self) -> Dict:
        return asdict(self)


def _record(report: ExploitabilityReport, iteration: int, best_iter_nashconv: Optional[float]) -> ConvergenceRecord:
    return ConvergenceRecord(
        iteration=iteration,
        nashconv=report.nash_conv,
        exploitability_p0=report.exploitability[0],
        exploitability_p1=report.exploitability[1],
        best_iter_nashconv=best_iter_nashconv,
        value_p0=report.value_p0,
    )


def make_record(tree: GameTree, iteration: int, vector: np.ndarray) -> ConvergenceRecord:
    """Evaluate a joint slot vector into a record."""
    return _record(evaluate_exploitability(tree, vector), iteration, None)


def record_with_tracker(tree: GameTree, iteration: int, vector: np.ndarray,
                        tracker: "BestIterateTracker") -> ConvergenceRecord:
    """Record the current iterate, offering it to the tracker first."""
    report = evaluate_exploitability(tree, vector)
    br0, br1 = report.best_response_values
    tracker.offer(0, iteration, -br1, vector)
    tracker.offer(1, iteration, -br0, vector)
    return _record(report, iteration, tracker.nash_conv)


@dataclass
class BestIterateTracker:
    """
    Keeps, per player, the iterate with the highest value against its best response.

    The stored values never decrease. When both players have a snapshot,
    NashConv of the stored pair is −(best_0 + best_1).
    """
    best_values: List[float] = field(default_factory=lambda: [-math.inf, -math.inf])
    best_iterations: List[int] = field(default_factory=lambda: [-1, -1])
    snapshots: List[Optional[np.ndarray]] = field(default_factory=lambda: [None, None])
    history: List[List[float]] = field(default_factory=lambda: [[], []])

    def offer(self, player: int, iteration: int, value: float, vector: np.ndarray) -> bool:
        """Store the iterate if it beats the best so far; returns True when it did."""
        improved = value > self.best_values[player]
        if improved:
            self.best_values[player] = value
            self.best_iterations[player] = iteration
            self.snapshots[player] = np.array(vector, dtype=float)
        self.history[player].append(self.best_values[player])
        return improved

    @property
    def complete(self) -> bool:
        return all(snapshot is not None for snapshot in self.snapshots)

    @property
    def nash_conv(self) -> Optional[float]:
        if not self.complete:
            return None
        return -(self.best_values[0] + self.best_values[1])

    def best_vector(self, tree: GameTree) -> Optional[np.ndarray]:
        """Joint slot vector of the stored best iterates."""
        if not self.complete:
            return None
        return combine_players(tree, 0, self.snapshots[0], self.snapshots[1])


@dataclass
class RegretMeter:
    """
    Average external regret of each player against the sequence of best responses it faced.

    The regret of player i after T rounds is BRval_i(b̄) − mean_t v_i(π^t, b^t),
    where b̄ averages the opponent's best responses in realisation weights.
    """
    tree: GameTree
    rounds: List[int] = field(default_factory=lambda: [0, 0])
    value_sums: List[float] = field(default_factory=lambda: [0.0, 0.0])
    realization_sums: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.realization_sums is None:
            self.realization_sums = np.zeros(self.tree.slot_count)

    def observe(self, player: int, value: float, opponent_vector: np.ndarray) -> None:
        """Record v_i(π^t, b^t) and the realisation weights of the opponent's b^t."""
        opponent = 1 - player
        reach = reach_probabilities(self.tree, opponent_vector).own[opponent]
        state_reach = reach[self.tree.first_member][self.tree.slot_infostate]
        mask = self.tree.slot_player == opponent
        self.realization_sums[mask] += (state_reach * opponent_vector)[mask]
        self.value_sums[player] += value
        self.rounds[player] += 1

    def average_opponent(self, player: int) -> np.ndarray:
        return normalize_segments(self.realization_sums, self.tree.slot_offsets, self.tree.slot_infostate)

    def average_regret(self, player: int) -> float:
        if self.rounds[player] == 0:
            return 0.0
        _, best_value = best_response_vector(self.tree, self.average_opponent(player), player)
        return best_value - self.value_sums[player] / self.rounds[player]
