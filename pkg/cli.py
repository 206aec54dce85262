"""
Command-line interface for the exploitability descent solver suite.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import click
from click.core import ParameterSource

from config import ExperimentConfig, load_experiment_config
from errors import CurveFormatError, PolicyFormatError, SolverError, SolverSuiteError
from games import GAME_NAMES
from main import compare_curve_files, evaluate_policy_file, list_games, run_batch, run_experiment
from neural import INIT_SCHEMES
from solvers.runner import ALGORITHMS
from values import Q_MODE, QC_MODE

# CLI option name -> ExperimentConfig field
_SOLVE_FIELDS = {
    "game": "game",
    "algorithm": "algorithm",
    "iterations": "iterations",
    "eval_every": "eval_every",
    "lr": "lr",
    "lr_scale": "lr_scale",
    "temperature": "temperature",
    "allow_degenerate": "allow_degenerate",
    "initial_policy": "initial_policy_path",
    "hidden_layers": "hidden_layers",
    "hidden_units": "hidden_units",
    "reg_weight": "reg_weight",
    "init": "init",
    "seed": "seed",
    "value_mode": "value_mode",
    "bias": "use_bias",
    "out": "output_path",
    "policy_out": "policy_out",
    "current_policy_out": "current_policy_out",
    "checkpoint_out": "checkpoint_out",
    "summary": "summary",
    "deterministic": "deterministic",
}


def _fail(message: str) -> None:
    click.echo(f"✗ Error: {message}", err=True)
    raise click.Abort()


@click.group()
@click.option('--verbose', '-v', is_flag=True, default=False, help='Log per-iteration progress (DEBUG level)')
@click.option('--quiet', '-q', is_flag=True, default=False, help='Only log warnings and errors')
def main(verbose: bool, quiet: bool) -> None:
    """
    Solve two-player zero-sum imperfect-information games with exploitability
    descent, CFR, CFR-BR and fictitious play, and record convergence curves.
    """
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif quiet:
        logging.getLogger().setLevel(logging.WARNING)


@main.command()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help='YAML file with solve options; explicit flags win')
@click.option('--game', '-g', type=click.Choice(GAME_NAMES), default=None, help='Game to solve')
@click.option('--algorithm', '-a', type=click.Choice(ALGORITHMS), default=None, help='Solver to run')
@click.option('--iterations', '-t', type=click.IntRange(min=0), default=1000,
              help='Iteration budget (default: 1000)')
@click.option('--eval-every', type=click.IntRange(min=1), default=None,
              help='Evaluate every k iterations (default: powers of two plus the last iteration)')
@click.option('--lr', default=None,
              help="Step size: a constant or 'sqrt' for lr-scale/sqrt(t) (default depends on the algorithm)")
@click.option('--lr-scale', type=float, default=1.0, help="Numerator of the 'sqrt' schedule (default: 1.0)")
@click.option('--temperature', type=float, default=1.0, help='Hedge temperature for cfr_br_hedge (default: 1.0)')
@click.option('--allow-degenerate', is_flag=True, default=False,
              help='ed_q_l2: fall back to unnormalized values at zero-reach information states')
@click.option('--initial-policy', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help='Joint policy JSON to start from (default: uniform)')
@click.option('--hidden-layers', type=click.IntRange(min=0), default=1, help='ed_neural hidden layers (default: 1)')
@click.option('--hidden-units', type=click.IntRange(min=1), default=64, help='ed_neural units per layer (default: 64)')
@click.option('--reg-weight', type=float, default=1e-5, help='ed_neural L2 regularization weight (default: 1e-5)')
@click.option('--init', type=click.Choice(INIT_SCHEMES), default=INIT_SCHEMES[0],
              help='ed_neural weight initialization')
@click.option('--seed', type=int, default=0, help='ed_neural initialization seed (default: 0)')
@click.option('--value-mode', type=click.Choice([QC_MODE, Q_MODE]), default=QC_MODE,
              help='ed_neural action values: counterfactual (qc) or normalized (q)')
@click.option('--bias/--no-bias', default=True, help='ed_neural layers carry biases (default: on)')
@click.option('--out', '-o', type=click.Path(dir_okay=False, path_type=Path), default=Path('./results/curve.csv'),
              help='Convergence curve CSV (default: ./results/curve.csv)')
@click.option('--policy-out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write the reported policy (average or best iterate) as JSON')
@click.option('--current-policy-out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write the final current iterate as JSON')
@click.option('--checkpoint-out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='ed_neural: write the trained network as JSON')
@click.option('--summary', is_flag=True, default=False, help='Write a Markdown run summary next to the CSV')
@click.option('--deterministic/--wall-clock', default=True,
              help='Write 0 in wall_ms so reruns give identical CSVs (default), or record elapsed time')
@click.pass_context
def solve(ctx: click.Context, config_path: Optional[Path], **options) -> None:
    """Run a solver and write its convergence curve."""
    explicit = {
        _SOLVE_FIELDS[name]: value
        for name, value in options.items()
        if ctx.get_parameter_source(name) != ParameterSource.DEFAULT
    }
    try:
        if config_path is not None:
            config = load_experiment_config(config_path, overrides=explicit)
        else:
            if options["game"] is None or options["algorithm"] is None:
                raise click.UsageError("--game and --algorithm are required without --config")
            config = ExperimentConfig(**{_SOLVE_FIELDS[name]: value for name, value in options.items()})
        solver_config = config.to_solver_config()
    except (ValueError, TypeError, PolicyFormatError) as e:
        raise click.UsageError(str(e))

    try:
        result = run_experiment(config, solver_config=solver_config)
    except SolverError as e:
        _fail(f"{e} (iteration {e.iteration})")
    except (SolverSuiteError, OSError) as e:
        _fail(str(e))

    final = result.final_record
    detail = f", final NashConv {final.nashconv:.6g}" if final is not None else ""
    click.echo(f"✓ {len(result.records)} evaluations written to {config.output_path}{detail}")


@main.command(name='eval')
@click.option('--policy', '-p', 'policy_path', required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path), help='Joint policy JSON')
@click.option('--game', '-g', required=True, type=click.Choice(GAME_NAMES), help='Game the policy plays')
def evaluate(policy_path: Path, game: str) -> None:
    """Print NashConv and per-player exploitability of a policy file."""
    try:
        report = evaluate_policy_file(policy_path, game)
    except (SolverSuiteError, OSError) as e:
        _fail(str(e))
    click.echo(f"nashconv: {report.nash_conv:.12g}")
    click.echo(f"exploitability_p0: {report.exploitability[0]:.12g}")
    click.echo(f"exploitability_p1: {report.exploitability[1]:.12g}")
    click.echo(f"value_p0: {report.value_p0:.12g}")


@main.command()
@click.argument('files', nargs=-1, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--out', '-o', required=True, type=click.Path(dir_okay=False, path_type=Path),
              help='Merged long-format CSV')
def compare(files: Tuple[Path, ...], out: Path) -> None:
    """Merge convergence curves into one CSV with algorithm and game columns."""
    if not files:
        raise click.UsageError("at least one curve file is required")
    try:
        frame = compare_curve_files(list(files), out)
    except CurveFormatError as e:
        raise click.UsageError(str(e))
    except OSError as e:
        _fail(str(e))
    click.echo(f"✓ {len(frame)} rows from {len(files)} files written to {out}")


@main.command()
@click.argument('names', nargs=-1, type=click.Choice(GAME_NAMES))
def games(names: Tuple[str, ...]) -> None:
    """List games with their history and information-state counts."""
    rows = list_games(names or None)
    click.echo(f"{'game':<12} {'histories':>10} {'infostates_p0':>14} {'infostates_p1':>14} {'max_actions':>12}")
    for row in rows:
        click.echo(
            f"{row['name']:<12} {row['histories']:>10} {row['infostates_p0']:>14} "
            f"{row['infostates_p1']:>14} {row['max_actions']:>12}"
        )


@main.command()
@click.argument('batch_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--workers', '-w', type=click.IntRange(min=1), default=1,
              help='Experiments to run in parallel processes (default: 1)')
def batch(batch_file: Path, workers: int) -> None:
    """Run every experiment listed in a YAML batch file."""
    try:
        outcomes = run_batch(batch_file, workers)
    except ValueError as e:
        raise click.UsageError(str(e))
    except (SolverSuiteError, OSError) as e:
        _fail(str(e))
    for outcome in outcomes:
        nashconv = "n/a" if outcome["nashconv"] is None else f"{outcome['nashconv']:.6g}"
        click.echo(f"✓ {outcome['algorithm']} on {outcome['game']}: NashConv {nashconv} -> {outcome['output']}")


if __name__ == '__main__':
    main()
