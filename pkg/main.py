"""
Main entry point for the exploitability descent solver suite.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from best_response import ExploitabilityReport, evaluate_exploitability
from config import ExperimentConfig, load_batch
from game_core import compile_tree
from games import GAME_NAMES, GAMES, build_game, canonical_name
from policy import policy_vector
from reporting.curves import merge_curves, write_curve, write_merged
from reporting.policy_io import load_policy, save_checkpoint, save_policy
from reporting.summary import generate_run_summary
from solvers.records import ConvergenceRecord
from solvers.runner import RunResult, SolverConfig, run

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def run_experiment(config: ExperimentConfig,
                   progress: Optional[Callable[[ConvergenceRecord], None]] = None,
                   solver_config: Optional[SolverConfig] = None) -> RunResult:
    """
    Run one experiment and write its artifacts.

    Args:
        config: experiment to run
        progress: called with every record as it is produced
        solver_config: already-built config.to_solver_config(), if any

    Returns:
        The finished run
    """
    logger.info("Starting experiment")
    logger.info(f"Game: {config.game}, algorithm: {config.algorithm}, iterations: {config.iterations}")
    logger.info(f"Output: {config.output_path}")

    if solver_config is None:
        solver_config = config.to_solver_config()
    result = run(solver_config, progress=progress)
    metadata = solver_config.metadata()
    if config.algorithm == "ed_neural":
        metadata["seed"] = config.seed
        metadata["init"] = config.init

    write_curve(result.records, config.output_path, config.game, config.algorithm, metadata)

    if config.policy_out is not None:
        save_policy(result.reported_policy, config.policy_out)
    if config.current_policy_out is not None:
        save_policy(result.current_policy, config.current_policy_out)
    if config.checkpoint_out is not None:
        if config.algorithm != "ed_neural":
            logger.warning(f"--checkpoint-out only applies to ed_neural; nothing written for {config.algorithm}")
        else:
            save_checkpoint(result.state.params, config.game, config.checkpoint_out, metadata)
    if config.summary:
        tree = compile_tree(build_game(config.game))
        generate_run_summary(result, tree, config.summary_path)

    logger.info("Experiment complete")
    return result


def evaluate_policy_file(path: Path, game: str) -> ExploitabilityReport:
    """
    NashConv and per-player exploitability of a joint policy file.

    Raises:
        PolicyFormatError: the file is unreadable or for another game
        MissingInfoStateError: the policy lacks an information state
    """
    name = canonical_name(game)
    tree = compile_tree(build_game(name))
    policy = load_policy(path, game_name=name, require_joint=True)
    report = evaluate_exploitability(tree, policy_vector(tree, policy))
    logger.info(f"Evaluated {path}: nashconv {report.nash_conv:.6g}")
    return report


def compare_curve_files(paths: Sequence[Path], output_path: Path) -> pd.DataFrame:
    """Merge curve files into one long-format CSV."""
    frame = merge_curves(paths)
    write_merged(frame, output_path)
    return frame


def list_games(names: Optional[Sequence[str]] = None, include_aliases: bool = False) -> List[Dict]:
    """Tree statistics for the named games (canonical names), or for every registered game."""
    if names is not None:
        names = sorted({canonical_name(name) for name in names})
    else:
        names = GAME_NAMES if include_aliases else sorted(GAMES)
    rows = []
    for name in names:
        tree = compile_tree(build_game(name))
        stats = tree.statistics()
        stats["name"] = name
        rows.append(stats)
    return rows


def _run_in_worker(config: ExperimentConfig) -> Dict:
    result = run_experiment(config)
    final = result.final_record
    return {
        "game": config.game,
        "algorithm": config.algorithm,
        "output": str(config.output_path),
        "nashconv": final.nashconv if final is not None else None,
    }


def run_batch(path: Path, workers: int = 1) -> List[Dict]:
    """
    Run every experiment of a batch file.

    Args:
        path: YAML batch file
        workers: process count; each experiment stays single-threaded

    Returns:
        One outcome row per experiment, in file order
    """
    configs = load_batch(path)
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers}")
    if workers == 1 or len(configs) == 1:
        return [_run_in_worker(config) for config in configs]
    logger.info(f"Running {len(configs)} experiments on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_in_worker, configs))


if __name__ == '__main__':
    # If run directly, use CLI
    from cli import main as cli_main
    cli_main()
