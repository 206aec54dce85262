"""
Tabular and logit policies, simplex projection, softmax and the policy-gradient direction.

Per-infostate operations come in two forms: a plain function on one vector
(project_l2_simplex, softmax, pg_update_direction) and a segment form that
applies it to every infostate of a flat slot vector at once. The plain forms
delegate to the segment forms so both always agree bit for bit.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from errors import MissingInfoStateError
from game_core import GameTree, compile_tree
from game_model import GameDynamics, InfoStateKey, PLAYERS

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-9


def _single_segment(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.zeros(1, dtype=np.int64), np.zeros(n, dtype=np.int64)


def project_segments(values: np.ndarray, offsets: np.ndarray, segment_ids: np.ndarray) -> np.ndarray:
    """
    Euclidean projection of every segment of values onto its probability simplex.

    Sort-based thresholding: sort each segment descending, find the largest k
    with u_k - (Σ_{j<=k} u_j - 1)/k > 0, subtract that threshold and clamp at 0.
    Segments that already lie on the simplex are returned unchanged and
    all-equal segments become exactly uniform.

    Args:
        values: flat vector holding all segments back to back
        offsets: start index of each segment
        segment_ids: segment index of every entry of values

    Returns:
        Projected flat vector
    """
    values = np.asarray(values, dtype=float)
    if np.isnan(values).any():
        raise ValueError("cannot project a vector containing NaN onto the simplex")
    n = len(values)
    counts = np.diff(np.append(offsets, n))
    position = np.arange(n) - offsets[segment_ids]

    # One padded row per segment so cumulative sums never cross segments.
    width = int(counts.max())
    rows = np.full((len(offsets), width), -np.inf)
    rows[segment_ids, position] = values
    ordered = -np.sort(-rows, axis=1)
    valid = np.arange(width)[None, :] < counts[:, None]
    ordered = np.where(valid, ordered, 0.0)
    cumulative = np.cumsum(ordered, axis=1)
    rank = np.arange(1, width + 1)[None, :]
    active = valid & (ordered - (cumulative - 1.0) / rank > 0)
    rho = np.maximum(np.max(np.where(active, rank, 0), axis=1), 1)
    threshold = (cumulative[np.arange(len(offsets)), rho - 1] - 1.0) / rho
    projected = np.maximum(values - threshold[segment_ids], 0.0)

    seg_min = np.minimum.reduceat(values, offsets)
    seg_max = np.maximum.reduceat(values, offsets)
    seg_sum = np.add.reduceat(values, offsets)
    uniform = seg_min == seg_max
    on_simplex = (seg_min >= 0) & (np.abs(seg_sum - 1.0) <= 8.0 * np.finfo(float).eps * counts)
    projected = np.where(on_simplex[segment_ids], values, projected)
    projected = np.where(uniform[segment_ids], 1.0 / counts[segment_ids], projected)
    return projected


def project_l2_simplex(v: Sequence[float]) -> np.ndarray:
    """Euclidean-nearest point of the probability simplex to v."""
    v = np.asarray(v, dtype=float)
    offsets, segment_ids = _single_segment(len(v))
    return project_segments(v, offsets, segment_ids)


def segment_softmax(values: np.ndarray, offsets: np.ndarray, segment_ids: np.ndarray) -> np.ndarray:
    """Softmax within each segment, max-subtracted."""
    shifted = values - np.maximum.reduceat(values, offsets)[segment_ids]
    exps = np.exp(shifted)
    return exps / np.add.reduceat(exps, offsets)[segment_ids]


def softmax(theta: Sequence[float]) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    offsets, segment_ids = _single_segment(len(theta))
    return segment_softmax(theta, offsets, segment_ids)


def segment_pg_direction(probs: np.ndarray, q: np.ndarray, offsets: np.ndarray,
                         segment_ids: np.ndarray) -> np.ndarray:
    """π(a)·(q_a − π·q) within each segment."""
    expected = np.add.reduceat(probs * q, offsets)[segment_ids]
    return probs * (q - expected)


def pg_update_direction(pi: Sequence[float], q: Sequence[float]) -> np.ndarray:
    """
    ⟨∇_θ softmax(θ), q⟩ expressed through π = softmax(θ): the regret scaled by π.

    Components sum to zero.
    """
    pi = np.asarray(pi, dtype=float)
    q = np.asarray(q, dtype=float)
    if pi.shape != q.shape:
        raise ValueError(f"policy and values differ in length ({len(pi)} vs {len(q)})")
    offsets, segment_ids = _single_segment(len(pi))
    return segment_pg_direction(pi, q, offsets, segment_ids)


def regret_matching(regrets: np.ndarray, offsets: np.ndarray, segment_ids: np.ndarray) -> np.ndarray:
    """Positive regrets normalised per segment; uniform where no regret is positive."""
    positive = np.maximum(regrets, 0.0)
    totals = np.add.reduceat(positive, offsets)[segment_ids]
    counts = np.diff(np.append(offsets, len(regrets)))[segment_ids]
    safe = np.where(totals > 0, totals, 1.0)
    return np.where(totals > 0, positive / safe, 1.0 / counts)


def normalize_segments(weights: np.ndarray, offsets: np.ndarray, segment_ids: np.ndarray) -> np.ndarray:
    """Scale nonnegative weights to sum to 1 per segment; zero-mass segments become uniform."""
    totals = np.add.reduceat(weights, offsets)[segment_ids]
    counts = np.diff(np.append(offsets, len(weights)))[segment_ids]
    safe = np.where(totals > 0, totals, 1.0)
    return np.where(totals > 0, weights / safe, 1.0 / counts)


@dataclass
class TabularPolicy:
    """Behavioural policy: InfoStateKey -> probabilities over the legal actions, for one or both players."""
    game_name: str
    table: Dict[InfoStateKey, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, key: InfoStateKey) -> np.ndarray:
        try:
            return self.table[key]
        except KeyError:
            raise MissingInfoStateError(key) from None

    def __setitem__(self, key: InfoStateKey, probs: Sequence[float]) -> None:
        self.table[key] = np.asarray(probs, dtype=float)

    def __contains__(self, key: InfoStateKey) -> bool:
        return key in self.table

    def __iter__(self) -> Iterator[InfoStateKey]:
        return iter(sorted(self.table))

    def __len__(self) -> int:
        return len(self.table)

    @property
    def players(self) -> Tuple[int, ...]:
        return tuple(sorted({key.player for key in self.table}))

    @property
    def is_joint(self) -> bool:
        return self.players == (0, 1)

    def for_player(self, player: int) -> "TabularPolicy":
        return TabularPolicy(self.game_name, {k: v.copy() for k, v in self.table.items() if k.player == player})

    def merged(self, other: "TabularPolicy") -> "TabularPolicy":
        """Joint policy: entries of other override entries of self."""
        table = {k: v.copy() for k, v in self.table.items()}
        table.update({k: v.copy() for k, v in other.table.items()})
        return TabularPolicy(self.game_name, table)

    def copy(self) -> "TabularPolicy":
        return TabularPolicy(self.game_name, {k: v.copy() for k, v in self.table.items()})

    def validate(self, tolerance: float = SIMPLEX_TOLERANCE) -> None:
        """Raise ValueError unless every entry is a probability vector."""
        for key, probs in self.table.items():
            if (probs < 0).any() or abs(probs.sum() - 1.0) > tolerance or not np.isfinite(probs).all():
                raise ValueError(f"entry for {key} is not on the simplex: {probs}")


@dataclass
class LogitTable:
    """Unconstrained per-infostate parameters θ_s of a softmax policy."""
    game_name: str
    logits: Dict[InfoStateKey, np.ndarray] = field(default_factory=dict)

    def to_policy(self) -> TabularPolicy:
        return TabularPolicy(self.game_name, {key: softmax(theta) for key, theta in self.logits.items()})

    @classmethod
    def zeros(cls, game: GameDynamics, players: Iterable[int] = PLAYERS) -> "LogitTable":
        tree = compile_tree(game)
        logits = {}
        for player in players:
            for info in tree.player_infostate_list(int(player)):
                logits[info.key] = np.zeros(info.num_actions)
        return cls(game.name, logits)


PolicyLike = Union[TabularPolicy, Sequence[TabularPolicy]]


def uniform_policy(game: GameDynamics, player: Optional[int] = None) -> TabularPolicy:
    """Uniform distribution at every infostate of player (both players when None)."""
    tree = compile_tree(game)
    players = PLAYERS if player is None else (int(player),)
    table = {}
    for p in players:
        for info in tree.player_infostate_list(int(p)):
            table[info.key] = np.full(info.num_actions, 1.0 / info.num_actions)
    return TabularPolicy(game.name, table)


def _as_single(policies: PolicyLike) -> TabularPolicy:
    if isinstance(policies, TabularPolicy):
        return policies
    combined = None
    for item in policies:
        combined = item if combined is None else combined.merged(item)
    if combined is None:
        raise ValueError("no policies given")
    return combined


def policy_vector(tree: GameTree, policies: PolicyLike, players: Optional[Iterable[int]] = None) -> np.ndarray:
    """
    Flatten a policy (or a pair of per-player policies) into a slot vector.

    Args:
        tree: compiled game tree giving the slot layout
        policies: TabularPolicy or sequence of them, merged in order
        players: players whose infostates must be covered; slots of other
            players are filled uniformly. Defaults to both players.

    Raises:
        MissingInfoStateError: a required infostate has no entry
        ValueError: an entry's length differs from the legal-action count
    """
    policy = _as_single(policies)
    required = set(PLAYERS if players is None else (int(p) for p in players))
    vector = tree.uniform_vector()
    for info in tree.infostates:
        if info.player not in required:
            continue
        if info.key not in policy:
            raise MissingInfoStateError(info.key)
        probs = policy.table[info.key]
        if len(probs) != info.num_actions:
            raise ValueError(
                f"entry for {info.key} has {len(probs)} probabilities but {info.num_actions} legal actions"
            )
        vector[info.slots] = probs
    return vector


def vector_to_policy(tree: GameTree, vector: np.ndarray, players: Iterable[int] = PLAYERS) -> TabularPolicy:
    """Inverse of policy_vector for the given players."""
    table = {}
    for p in players:
        for info in tree.player_infostate_list(int(p)):
            table[info.key] = np.array(vector[info.slots], dtype=float)
    return TabularPolicy(tree.game_name, table)


def combine_players(tree: GameTree, player: int, own: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Joint slot vector taking player's slots from own and the opponent's from other."""
    return np.where(tree.slot_player == player, own, other)
