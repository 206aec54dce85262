"""
Configuration management for solver experiments.
"""
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml

from errors import UnknownAlgorithmError
from games import canonical_name
from neural import FAN_IN_UNIFORM, TrainConfig
from reporting.policy_io import load_policy
from solvers.runner import ALGORITHMS, SolverConfig
from solvers.schedule import SQRT, StepSchedule
from values import QC_MODE

logger = logging.getLogger(__name__)

DETERMINISTIC_ENV = "ED_DETERMINISTIC"
FIXED_SEED = 0

_PATH_FIELDS = ("output_path", "initial_policy_path", "policy_out", "current_policy_out", "checkpoint_out")


@dataclass
class ExperimentConfig:
    """One solver run plus where its artifacts go."""

    algorithm: str
    game: str
    iterations: int = 1000
    output_path: Path = Path("./results/curve.csv")
    eval_every: Optional[int] = None  # None: powers of two plus the last iteration

    # Step size: a number or 'sqrt' (lr_scale/√t); None picks the algorithm default
    lr: Optional[str] = None
    lr_scale: float = 1.0
    temperature: float = 1.0
    allow_degenerate: bool = False
    initial_policy_path: Optional[Path] = None

    # ed_neural network
    hidden_layers: int = 1
    hidden_units: int = 64
    reg_weight: float = 1e-5
    init: str = FAN_IN_UNIFORM
    seed: int = FIXED_SEED
    value_mode: str = QC_MODE
    use_bias: bool = True

    # Extra artifacts
    policy_out: Optional[Path] = None
    current_policy_out: Optional[Path] = None
    checkpoint_out: Optional[Path] = None
    summary: bool = False
    deterministic: bool = True

    def __post_init__(self):
        """Normalize paths and ids, apply the environment override."""
        for name in _PATH_FIELDS:
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))

        self.game = canonical_name(self.game)
        if self.algorithm not in ALGORITHMS:
            raise UnknownAlgorithmError(
                f"unknown algorithm {self.algorithm!r}; expected one of {', '.join(ALGORITHMS)}"
            )
        if self.iterations < 0:
            raise ValueError(f"iteration budget must be nonnegative, got {self.iterations}")
        if self.eval_every is not None and self.eval_every < 1:
            raise ValueError(f"evaluation cadence must be at least 1, got {self.eval_every}")
        if self.lr is not None:
            self.lr = str(self.lr)

        if os.environ.get(DETERMINISTIC_ENV) == "1":
            if self.seed != FIXED_SEED:
                logger.info(f"{DETERMINISTIC_ENV}=1: seed {self.seed} replaced by {FIXED_SEED}")
            self.seed = FIXED_SEED
            self.deterministic = True

        # Create output directory if it doesn't exist
        self.output_path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def summary_path(self) -> Path:
        return self.output_path.with_suffix(".md")

    def train_config(self) -> TrainConfig:
        learning_rate = TrainConfig.learning_rate
        if self.lr is not None:
            if self.lr.strip().lower() == SQRT:
                raise ValueError("ed_neural trains with a constant learning rate; 'sqrt' is not supported")
            learning_rate = StepSchedule.parse(self.lr, self.lr_scale).base
        return TrainConfig(
            learning_rate=learning_rate,
            reg_weight=self.reg_weight,
            hidden_layers=self.hidden_layers,
            hidden_units=self.hidden_units,
            init=self.init,
            seed=self.seed,
            value_mode=self.value_mode,
            use_bias=self.use_bias,
        )

    def to_solver_config(self) -> SolverConfig:
        """
        The SolverConfig this experiment runs.

        Raises:
            ValueError: a malformed learning rate
            PolicyFormatError: the initial policy file is unusable
        """
        neural = self.algorithm == "ed_neural"
        schedule = None
        if self.lr is not None and not neural:
            schedule = StepSchedule.parse(self.lr, self.lr_scale)
        initial_policy = None
        if self.initial_policy_path is not None:
            initial_policy = load_policy(self.initial_policy_path, game_name=self.game, require_joint=True)
        return SolverConfig(
            algorithm=self.algorithm,
            game=self.game,
            iterations=self.iterations,
            schedule=schedule,
            eval_every=self.eval_every,
            initial_policy=initial_policy,
            temperature=self.temperature,
            allow_degenerate=self.allow_degenerate,
            train=self.train_config() if neural else TrainConfig(),
            deterministic=self.deterministic,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in _PATH_FIELDS:
            if data[name] is not None:
                data[name] = str(data[name])
        return data


def config_field_names() -> List[str]:
    return [f.name for f in fields(ExperimentConfig)]


def read_yaml(path: Path) -> Dict[str, Any]:
    """A YAML mapping from disk; an empty file is an empty mapping."""
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping of option names to values")
    return data


def known_options(options: Mapping[str, Any], source: str) -> Dict[str, Any]:
    """Drop (with a warning) keys that are not ExperimentConfig fields."""
    names = set(config_field_names())
    accepted = {}
    for key, value in options.items():
        normalized = str(key).replace('-', '_')
        if normalized not in names:
            logger.warning(f"Ignoring unknown config key {key!r} in {source}")
            continue
        accepted[normalized] = value
    return accepted


def load_experiment_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a YAML file; overrides win over file values.

    Args:
        path: YAML mapping of option names to values
        overrides: values that take precedence (e.g. explicit CLI flags)
    """
    options = known_options(read_yaml(path), str(path))
    options.update(overrides or {})
    logger.info(f"Loaded experiment config from {path}")
    return ExperimentConfig(**options)


def load_batch(path: Path) -> List[ExperimentConfig]:
    """
    Experiments from a batch file: a mapping with an 'experiments' list and
    optional 'defaults' applied to every entry.
    """
    data = read_yaml(path)
    entries = data.get("experiments")
    if not isinstance(entries, list) or not entries:
        raise ValueError(f"{path}: 'experiments' must be a non-empty list")
    defaults = known_options(data.get("defaults") or {}, f"{path} defaults")
    configs = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"{path}: experiment #{index + 1} is not a mapping")
        options = dict(defaults)
        options.update(known_options(entry, f"{path} experiment #{index + 1}"))
        configs.append(ExperimentConfig(**options))
    logger.info(f"Loaded {len(configs)} experiments from {path}")
    return configs
