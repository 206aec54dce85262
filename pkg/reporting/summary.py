"""
Generate a Markdown summary of a solver run.
"""
import json
import logging
from pathlib import Path

from game_core import GameTree
from solvers.runner import RunResult

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def generate_run_summary(result: RunResult, tree: GameTree, output_path: Path) -> None:
    """
    Write a Markdown summary of a finished run.

    Args:
        result: the finished run
        tree: compiled tree of the game that was solved
        output_path: Markdown file to write
    """
    logger.info(f"Generating run summary: {output_path}")
    config = result.config
    stats = tree.statistics()
    lines = []

    lines.append(f"# {config.algorithm} on {config.game}\n")

    lines.append("## Game\n")
    lines.append(f"- **Histories:** {stats['histories']} ({stats['terminals']} terminal, "
                 f"{stats['chance_nodes']} chance)")
    lines.append(f"- **Information states:** {stats['infostates_p0']} (player 0), "
                 f"{stats['infostates_p1']} (player 1)")
    lines.append(f"- **Max actions:** {stats['max_actions']}")
    lines.append("")

    lines.append("## Convergence\n")
    records = result.records
    if records:
        first, last = records[0], records[-1]
        best = min(records, key=lambda r: r.nashconv)
        lines.append("| | Iteration | NashConv |")
        lines.append("|---|---|---|")
        lines.append(f"| First evaluation | {first.iteration} | {_fmt(first.nashconv)} |")
        lines.append(f"| Last evaluation | {last.iteration} | {_fmt(last.nashconv)} |")
        lines.append(f"| Lowest evaluated | {best.iteration} | {_fmt(best.nashconv)} |")
        lines.append("")
        lines.append(f"- **Final exploitability:** {_fmt(last.exploitability_p0)} (player 0), "
                     f"{_fmt(last.exploitability_p1)} (player 1)")
        lines.append(f"- **Final value for player 0:** {_fmt(last.value_p0)}")
        if last.best_iter_nashconv is not None:
            lines.append(f"- **Best-iterate NashConv:** {_fmt(last.best_iter_nashconv)}")
    else:
        lines.append("No evaluations were recorded.")
    lines.append(f"- **Wall time:** {result.wall_seconds:.2f} s")
    lines.append("")

    lines.append("## Configuration\n")
    lines.append("```json")
    lines.append(json.dumps(config.metadata(), indent=2, sort_keys=True))
    lines.append("```")
    lines.append("")

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines))

    logger.info(f"Run summary written to: {output_path}")
