"""
Neural Exploitability Descent.

A single fully-connected ReLU network maps an information-state encoding to
one logit per action slot; the legal slots go through a softmax. Each step
evaluates the network on every information state of both players, values the
actions against best responses and takes one gradient-descent step on

    L(θ) = −Σ_s π(s)·(q^b(s) − B(s)) + w_r/n Σ θ²

where the baseline B(s) = π(s)·q^b(s) is held constant and n is the number of
network parameters. Backpropagation is written out by hand in numpy.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from best_response import best_response_vector
from game_core import GameTree
from game_model import GameDynamics
from policy import combine_players
from solvers.records import BestIterateTracker, ConvergenceRecord, RegretMeter, record_with_tracker
from values import QC_MODE, Q_MODE, evaluate_tree

logger = logging.getLogger(__name__)

FAN_IN_UNIFORM = "fan_in_uniform"
ZEROS = "zeros"
INIT_SCHEMES = (FAN_IN_UNIFORM, ZEROS)

SWEEP_HIDDEN_LAYERS = (1, 2, 3, 4, 5)
SWEEP_HIDDEN_UNITS = (64, 128, 256)
SWEEP_REG_WEIGHTS = (1e-7, 1e-6, 1e-5, 1e-4)


@dataclass
class MlpParams:
    """Weights are [fan_in, fan_out]; biases is None for a bias-free network."""
    weights: List[np.ndarray]
    biases: Optional[List[np.ndarray]] = None

    @property
    def use_bias(self) -> bool:
        return self.biases is not None

    @property
    def input_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_width(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_layers(self) -> int:
        return len(self.weights) - 1

    @property
    def parameter_count(self) -> int:
        count = sum(w.size for w in self.weights)
        if self.biases is not None:
            count += sum(b.size for b in self.biases)
        return count

    def arrays(self) -> List[np.ndarray]:
        return list(self.weights) + (list(self.biases) if self.biases is not None else [])

    def squared_norm(self) -> float:
        return float(sum(np.sum(a * a) for a in self.arrays()))

    def copy(self) -> "MlpParams":
        biases = [b.copy() for b in self.biases] if self.biases is not None else None
        return MlpParams([w.copy() for w in self.weights], biases)

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, flat: np.ndarray) -> "MlpParams":
        """Same shapes, entries taken in order from flat."""
        out = self.copy()
        position = 0
        for array in out.arrays():
            array[...] = flat[position:position + array.size].reshape(array.shape)
            position += array.size
        return out

    def scaled_add(self, other: "MlpParams", scale: float) -> "MlpParams":
        """self + scale·other."""
        weights = [w + scale * g for w, g in zip(self.weights, other.weights)]
        biases = None
        if self.biases is not None:
            biases = [b + scale * g for b, g in zip(self.biases, other.biases)]
        return MlpParams(weights, biases)

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    @classmethod
    def initialize(cls, input_width: int, output_width: int, hidden_layers: int = 1,
                   hidden_units: int = 64, scheme: str = FAN_IN_UNIFORM, seed: int = 0,
                   use_bias: bool = True) -> "MlpParams":
        """
        Fan-in-scaled uniform weights U(−1/√fan_in, 1/√fan_in) from a seeded
        generator, or all zeros. Biases start at zero.
        """
        if scheme not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {scheme!r}; expected one of {', '.join(INIT_SCHEMES)}")
        if hidden_layers < 0:
            raise ValueError(f"hidden layer count must be nonnegative, got {hidden_layers}")
        widths = [input_width] + [hidden_units] * hidden_layers + [output_width]
        rng = np.random.default_rng(seed)
        weights = []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            if scheme == ZEROS:
                weights.append(np.zeros((fan_in, fan_out)))
            else:
                bound = 1.0 / math.sqrt(fan_in)
                weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases = [np.zeros(w.shape[1]) for w in weights] if use_bias else None
        return cls(weights, biases)


@dataclass
class TrainConfig:
    """Hyperparameters of a neural ED run."""
    learning_rate: float = 0.5
    reg_weight: float = 1e-5
    hidden_layers: int = 1
    hidden_units: int = 64
    init: str = FAN_IN_UNIFORM
    seed: int = 0
    value_mode: str = QC_MODE
    use_bias: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.reg_weight < 0:
            raise ValueError(f"regularization weight must be nonnegative, got {self.reg_weight}")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init!r}; expected one of {', '.join(INIT_SCHEMES)}")
        if self.value_mode not in (QC_MODE, Q_MODE):
            raise ValueError(f"value mode must be '{QC_MODE}' or '{Q_MODE}', got {self.value_mode!r}")

    def sweep_warnings(self) -> List[str]:
        """Settings outside the published hyperparameter sweep."""
        warnings = []
        if self.hidden_layers not in SWEEP_HIDDEN_LAYERS:
            warnings.append(f"hidden_layers={self.hidden_layers} is outside {SWEEP_HIDDEN_LAYERS}")
        if self.hidden_units not in SWEEP_HIDDEN_UNITS:
            warnings.append(f"hidden_units={self.hidden_units} is outside {SWEEP_HIDDEN_UNITS}")
        if self.reg_weight not in SWEEP_REG_WEIGHTS:
            warnings.append(f"reg_weight={self.reg_weight} is outside {SWEEP_REG_WEIGHTS}")
        if not math.log2(self.learning_rate).is_integer():
            warnings.append(f"learning_rate={self.learning_rate} is not a power of 2")
        return warnings

    def metadata(self) -> Dict:
        return {
            "learning_rate": self.learning_rate,
            "reg_weight": self.reg_weight,
            "hidden_layers": self.hidden_layers,
            "hidden_units": self.hidden_units,
            "init": self.init,
            "seed": self.seed,
            "value_mode": self.value_mode,
            "use_bias": self.use_bias,
        }


@dataclass
class ForwardCache:
    """Layer inputs and hidden pre-activations kept for backpropagation."""
    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    probs: np.ndarray


def _masked_softmax(logits: np.ndarray, legal_mask: np.ndarray) -> np.ndarray:
    if not legal_mask.any(axis=1).all():
        raise ValueError("every row needs at least one legal action")
    masked = np.where(legal_mask, logits, -np.inf)
    shifted = masked - masked.max(axis=1, keepdims=True)
    exps = np.where(legal_mask, np.exp(shifted), 0.0)
    return exps / exps.sum(axis=1, keepdims=True)


def forward_batch(params: MlpParams, encodings: np.ndarray, legal_mask: np.ndarray) -> ForwardCache:
    """Policy rows for a batch of encodings; illegal slots get probability 0."""
    activation = np.asarray(encodings, dtype=float)
    inputs, pre_activations = [], []
    last = len(params.weights) - 1
    for index, weight in enumerate(params.weights):
        inputs.append(activation)
        z = activation @ weight
        if params.biases is not None:
            z = z + params.biases[index]
        if index < last:
            pre_activations.append(z)
            activation = np.maximum(z, 0.0)
        else:
            activation = z
    probs = _masked_softmax(activation, np.asarray(legal_mask, dtype=bool))
    return ForwardCache(inputs=inputs, pre_activations=pre_activations, probs=probs)


def forward(params: MlpParams, encoding: np.ndarray, legal_mask: np.ndarray) -> np.ndarray:
    """
    Probabilities over the legal actions of one information state.

    Raises:
        ValueError: encoding width mismatch or no legal action
    """
    encoding = np.asarray(encoding, dtype=float)
    legal_mask = np.asarray(legal_mask, dtype=bool)
    if encoding.shape[-1] != params.input_width:
        raise ValueError(f"encoding has {encoding.shape[-1]} bits, network expects {params.input_width}")
    if not legal_mask.any():
        raise ValueError("legal mask selects no action")
    probs = forward_batch(params, encoding[None, :], legal_mask[None, :]).probs[0]
    return probs[legal_mask]


def _baseline(probs: np.ndarray, action_values: np.ndarray, baseline: Optional[np.ndarray]) -> np.ndarray:
    if baseline is None:
        return np.sum(probs * action_values, axis=1)
    return np.asarray(baseline, dtype=float)


def loss(params: MlpParams, encodings: np.ndarray, legal_mask: np.ndarray, action_values: np.ndarray,
         reg_weight: float, baseline: Optional[np.ndarray] = None) -> float:
    """
    −Σ_s π(s)·(q(s) − B(s)) + w_r/n Σθ².

    With the default baseline B(s) = π(s)·q(s) the first term vanishes, so the
    value is the regularizer alone; its gradient does not vanish.
    """
    probs = forward_batch(params, encodings, legal_mask).probs
    b = _baseline(probs, action_values, baseline)
    advantage = np.where(legal_mask, action_values - b[:, None], 0.0)
    policy_term = -float(np.sum(probs * advantage))
    return policy_term + reg_weight / params.parameter_count * params.squared_norm()


def loss_gradient(params: MlpParams, encodings: np.ndarray, legal_mask: np.ndarray,
                  action_values: np.ndarray, reg_weight: float,
                  baseline: Optional[np.ndarray] = None) -> MlpParams:
    """∂L/∂θ by backpropagation, B held constant; returned in the shape of params."""
    legal_mask = np.asarray(legal_mask, dtype=bool)
    cache = forward_batch(params, encodings, legal_mask)
    probs = cache.probs
    b = _baseline(probs, action_values, baseline)
    advantage = np.where(legal_mask, action_values - b[:, None], 0.0)
    expected = np.sum(probs * advantage, axis=1, keepdims=True)
    delta = -probs * advantage + probs * expected

    n = params.parameter_count
    weight_grads: List[np.ndarray] = [None] * len(params.weights)
    bias_grads: List[np.ndarray] = [None] * len(params.weights)
    for index in reversed(range(len(params.weights))):
        weight_grads[index] = cache.inputs[index].T @ delta + 2.0 * reg_weight / n * params.weights[index]
        if params.biases is not None:
            bias_grads[index] = delta.sum(axis=0) + 2.0 * reg_weight / n * params.biases[index]
        if index > 0:
            delta = (delta @ params.weights[index].T) * (cache.pre_activations[index - 1] > 0)
    return MlpParams(weight_grads, bias_grads if params.biases is not None else None)


def infostate_encodings(game: GameDynamics, tree: GameTree) -> np.ndarray:
    """One row per information state (global order), from its first member history."""
    rows = [game.encode(tree.histories[info.members[0]], info.player) for info in tree.infostates]
    return np.array(rows, dtype=float)


def one_hot_encodings(tree: GameTree) -> np.ndarray:
    """Identity encoding: row g has a single 1 at column g."""
    return np.eye(len(tree.infostates))


def legal_masks(tree: GameTree) -> np.ndarray:
    """[infostates, max_actions] with the first |A(s)| entries of each row set."""
    counts = np.array([info.num_actions for info in tree.infostates])
    return np.arange(tree.max_actions)[None, :] < counts[:, None]


def _slot_columns(tree: GameTree) -> np.ndarray:
    return np.arange(tree.slot_count) - tree.slot_offsets[tree.slot_infostate]


def rows_to_slots(tree: GameTree, rows: np.ndarray) -> np.ndarray:
    return rows[tree.slot_infostate, _slot_columns(tree)]


def slots_to_rows(tree: GameTree, slots: np.ndarray) -> np.ndarray:
    rows = np.zeros((len(tree.infostates), tree.max_actions))
    rows[tree.slot_infostate, _slot_columns(tree)] = slots
    return rows


@dataclass
class NeuralEdState:
    """One shared network for both players plus the tabular bookkeeping around it."""
    tree: GameTree
    params: MlpParams
    config: TrainConfig
    encodings: np.ndarray
    legal_mask: np.ndarray
    iteration: int = 0
    tracker: BestIterateTracker = field(default_factory=BestIterateTracker)
    meter: Optional[RegretMeter] = None

    @classmethod
    def initial(cls, game: GameDynamics, tree: GameTree, config: TrainConfig,
                params: Optional[MlpParams] = None, encodings: Optional[np.ndarray] = None) -> "NeuralEdState":
        """Build the network described by config unless params are given."""
        for message in config.sweep_warnings():
            logger.warning(f"Neural ED setting {message}")
        if encodings is None:
            encodings = infostate_encodings(game, tree)
        if params is None:
            params = MlpParams.initialize(
                input_width=encodings.shape[1],
                output_width=tree.max_actions,
                hidden_layers=config.hidden_layers,
                hidden_units=config.hidden_units,
                scheme=config.init,
                seed=config.seed,
                use_bias=config.use_bias,
            )
        if params.input_width != encodings.shape[1] or params.output_width != tree.max_actions:
            raise ValueError(
                f"network shape {params.input_width}->{params.output_width} does not fit "
                f"encodings of width {encodings.shape[1]} and {tree.max_actions} action slots"
            )
        logger.info(
            f"Neural ED network: {params.hidden_layers} hidden layers, {params.parameter_count} parameters"
        )
        return cls(
            tree=tree,
            params=params,
            config=config,
            encodings=encodings,
            legal_mask=legal_masks(tree),
            meter=RegretMeter(tree),
        )

    def policy(self) -> np.ndarray:
        """Network readout on every information state, as a joint slot vector."""
        probs = forward_batch(self.params, self.encodings, self.legal_mask).probs
        return rows_to_slots(self.tree, probs)


def neural_ed_step(state: NeuralEdState,
                   evaluate: bool = True) -> Tuple[NeuralEdState, Optional[ConvergenceRecord]]:
    """
    Tabular readout, best responses for both players, action values against
    them, then one gradient-descent step on the loss summed over all infostates.
    """
    tree = state.tree
    t = state.iteration + 1
    current = state.policy()

    responses = {opponent: best_response_vector(tree, current, opponent) for opponent in (0, 1)}
    action_values = np.zeros(tree.slot_count)
    for player in (0, 1):
        opponent_br, opponent_value = responses[1 - player]
        evaluation = evaluate_tree(tree, combine_players(tree, player, current, opponent_br))
        if state.config.value_mode == Q_MODE:
            values, _ = evaluation.q_action_values((player,), allow_degenerate=True)
        else:
            values = evaluation.cf_action_values
        mine = tree.slot_player == player
        action_values[mine] = values[mine]
        state.tracker.offer(player, state.iteration, -opponent_value, current)
        if state.meter is not None:
            state.meter.observe(player, -opponent_value, opponent_br)

    gradient = loss_gradient(
        state.params,
        state.encodings,
        state.legal_mask,
        slots_to_rows(tree, action_values),
        state.config.reg_weight,
    )
    params = state.params.scaled_add(gradient, -state.config.learning_rate)
    if not params.is_finite():
        raise FloatingPointError("neural ED produced non-finite network parameters")
    state.params = params
    state.iteration = t
    logger.debug(f"Neural ED iteration {t} done")
    if not evaluate:
        return state, None
    return state, record_with_tracker(tree, t, state.policy(), state.tracker)


def params_to_document(params: MlpParams) -> Dict:
    """JSON-ready description: layer shapes plus row-major weights."""
    layers = []
    for index, weight in enumerate(params.weights):
        layers.append({
            "shape": list(weight.shape),
            "weights": weight.ravel(order="C").tolist(),
            "bias": params.biases[index].tolist() if params.biases is not None else None,
        })
    return {"activation": "relu", "layers": layers}


def params_from_document(document: Dict) -> MlpParams:
    weights, biases = [], []
    for layer in document["layers"]:
        rows, cols = layer["shape"]
        weights.append(np.array(layer["weights"], dtype=float).reshape((rows, cols), order="C"))
        biases.append(None if layer["bias"] is None else np.array(layer["bias"], dtype=float))
    has_bias = [b is not None for b in biases]
    if any(has_bias) and not all(has_bias):
        raise ValueError("either every layer or no layer carries a bias")
    for previous, following in zip(weights[:-1], weights[1:]):
        if previous.shape[1] != following.shape[0]:
            raise ValueError(f"layer shapes {previous.shape} and {following.shape} do not chain")
    return MlpParams(weights, biases if all(has_bias) else None)
