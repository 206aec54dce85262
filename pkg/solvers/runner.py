"""
Run a solver for a fixed number of iterations, recording convergence on a cadence.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from errors import MissingInfoStateError, SolverError, SolverSuiteError, UnknownAlgorithmError
from game_core import GameTree, compile_tree
from games import build_game
from neural import NeuralEdState, TrainConfig, neural_ed_step
from policy import LogitTable, TabularPolicy, policy_vector, vector_to_policy
from solvers.cfr import GIGA, HEDGE, REGRET_MATCHING, CfrState, cfr_br_step, cfr_step
from solvers.ed import DEFAULT_SCHEDULES, SIMPLEX_VARIANTS, EdState, ed_step
from solvers.records import ConvergenceRecord
from solvers.schedule import StepSchedule
from solvers.xfp import XfpState, xfp_step

logger = logging.getLogger(__name__)

ALGORITHMS = (
    "xfp",
    "cfr",
    "cfr_br",
    "cfr_br_hedge",
    "ed_q_l2",
    "ed_qc_l2",
    "ed_qc_softmax",
    "ed_qc_md",
    "ed_neural",
)

CFR_BR_LEARNERS = {"cfr_br": REGRET_MATCHING, "cfr_br_hedge": HEDGE, "cfr_br_giga": GIGA}


def evaluation_schedule(iterations: int, eval_every: Optional[int] = None) -> List[int]:
    """
    Iterations that get a record: powers of two plus the last iteration by
    default, otherwise every multiple of eval_every.
    """
    if iterations <= 0:
        return []
    if eval_every is not None:
        if eval_every < 1:
            raise ValueError(f"evaluation cadence must be at least 1, got {eval_every}")
        return list(range(eval_every, iterations + 1, eval_every))
    points = []
    power = 1
    while power <= iterations:
        points.append(power)
        power *= 2
    if points[-1] != iterations:
        points.append(iterations)
    return points


def default_schedule(algorithm: str) -> StepSchedule:
    if algorithm.startswith("ed_") and algorithm[3:] in DEFAULT_SCHEDULES:
        return DEFAULT_SCHEDULES[algorithm[3:]]
    if algorithm == "cfr_br_giga":
        return StepSchedule("sqrt", 1.0)
    return StepSchedule()


@dataclass
class SolverConfig:
    """What to run: algorithm, game, budget, step schedule and starting point."""
    algorithm: str
    game: str
    iterations: int
    schedule: Optional[StepSchedule] = None
    eval_every: Optional[int] = None
    initial_policy: Optional[TabularPolicy] = None
    initial_logits: Optional[LogitTable] = None
    temperature: float = 1.0
    allow_degenerate: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    deterministic: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS and self.algorithm not in CFR_BR_LEARNERS:
            raise UnknownAlgorithmError(
                f"unknown algorithm {self.algorithm!r}; expected one of {', '.join(ALGORITHMS)}"
            )
        if self.iterations < 0:
            raise ValueError(f"iteration budget must be nonnegative, got {self.iterations}")
        if self.schedule is None:
            self.schedule = default_schedule(self.algorithm)

    def metadata(self) -> Dict:
        """Config echo written into artifacts."""
        echo = {
            "algorithm": self.algorithm,
            "game": self.game,
            "iterations": self.iterations,
            "schedule": self.schedule.describe(),
            "eval_every": self.eval_every,
            "temperature": self.temperature,
            "allow_degenerate": self.allow_degenerate,
        }
        if self.algorithm == "ed_neural":
            echo["network"] = self.train.metadata()
        return echo


@dataclass
class RunResult:
    """Records plus the policies a run reports."""
    config: SolverConfig
    records: List[ConvergenceRecord]
    reported_policy: TabularPolicy
    current_policy: TabularPolicy
    best_policy: Optional[TabularPolicy]
    state: object
    wall_seconds: float

    @property
    def final_record(self) -> Optional[ConvergenceRecord]:
        return self.records[-1] if self.records else None


StepFunction = Callable[[object, bool], Tuple[object, Optional[ConvergenceRecord]]]


def _initial_vector(tree: GameTree, config: SolverConfig) -> Optional[np.ndarray]:
    if config.initial_logits is not None:
        return policy_vector(tree, config.initial_logits.to_policy())
    if config.initial_policy is not None:
        return policy_vector(tree, config.initial_policy)
    return None


def _initial_params(tree: GameTree, config: SolverConfig, variant: str) -> Optional[np.ndarray]:
    """ED parameters: probabilities for ℓ2 variants, logits for softmax variants."""
    if variant in SIMPLEX_VARIANTS:
        return _initial_vector(tree, config)
    if config.initial_logits is not None:
        vector = np.zeros(tree.slot_count)
        for info in tree.infostates:
            if info.key not in config.initial_logits.logits:
                raise MissingInfoStateError(info.key)
            vector[info.slots] = config.initial_logits.logits[info.key]
        return vector
    if config.initial_policy is not None:
        # zero probabilities become -inf logits and stay at zero
        with np.errstate(divide="ignore"):
            return np.log(policy_vector(tree, config.initial_policy))
    return None


def build_state(config: SolverConfig) -> Tuple[object, StepFunction]:
    """Initial solver state and its step function."""
    game = build_game(config.game)
    tree = compile_tree(game)
    algorithm = config.algorithm
    if algorithm == "cfr":
        return CfrState.initial(tree, policy=_initial_vector(tree, config)), cfr_step
    if algorithm in CFR_BR_LEARNERS:
        state = CfrState.initial(
            tree,
            learner=CFR_BR_LEARNERS[algorithm],
            temperature=config.temperature,
            schedule=config.schedule,
            policy=_initial_vector(tree, config),
        )
        return state, cfr_br_step
    if algorithm == "xfp":
        return XfpState.initial(tree, policy=_initial_vector(tree, config)), xfp_step
    if algorithm == "ed_neural":
        return NeuralEdState.initial(game, tree, config.train), neural_ed_step
    variant = algorithm[len("ed_"):]
    state = EdState.initial(
        tree,
        variant,
        schedule=config.schedule,
        params=_initial_params(tree, config, variant),
        allow_degenerate=config.allow_degenerate,
    )
    return state, ed_step


def _policies(config: SolverConfig, state) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """(reported, current, best) slot vectors."""
    tree = state.tree
    if isinstance(state, XfpState):
        return state.average, state.average, None
    if isinstance(state, CfrState) and config.algorithm == "cfr":
        return state.average_policy(), state.current, None
    current = state.current if isinstance(state, CfrState) else state.policy()
    best = state.tracker.best_vector(tree)
    return (best if best is not None else current), current, best


def run(config: SolverConfig, progress: Optional[Callable[[ConvergenceRecord], None]] = None) -> RunResult:
    """
    Run config.iterations steps and collect records at the evaluation cadence.

    Deterministic given the config; wall_ms is zero in deterministic mode so
    repeated runs produce identical records.

    Raises:
        SolverError: a step failed; carries the 1-based iteration index
    """
    state, step = build_state(config)
    tree = state.tree
    checkpoints = set(evaluation_schedule(config.iterations, config.eval_every))
    records: List[ConvergenceRecord] = []
    logger.info(
        f"Running {config.algorithm} on {config.game} for {config.iterations} iterations "
        f"({len(checkpoints)} evaluations)"
    )
    started = time.perf_counter()
    for t in range(1, config.iterations + 1):
        try:
            state, record = step(state, t in checkpoints)
        except (SolverSuiteError, ArithmeticError, ValueError) as e:
            raise SolverError(t, e) from e
        if record is not None:
            record.wall_ms = 0 if config.deterministic else int((time.perf_counter() - started) * 1000)
            records.append(record)
            logger.debug(f"iteration {t}: nashconv={record.nashconv:.6g}")
            if progress is not None:
                progress(record)
    wall_seconds = time.perf_counter() - started

    reported, current, best = _policies(config, state)
    if records:
        logger.info(f"Finished {config.algorithm} on {config.game}: final nashconv {records[-1].nashconv:.6g}")
    return RunResult(
        config=config,
        records=records,
        reported_policy=vector_to_policy(tree, reported),
        current_policy=vector_to_policy(tree, current),
        best_policy=vector_to_policy(tree, best) if best is not None else None,
        state=state,
        wall_seconds=wall_seconds,
    )
