"""
Convergence curves as CSV: '#' metadata lines (game, algorithm, config echo) then one row per record.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from errors import CurveFormatError
from solvers.records import CSV_COLUMNS, ConvergenceRecord

logger = logging.getLogger(__name__)

FLOAT_COLUMNS = ("nashconv", "exploitability_p0", "exploitability_p1", "best_iter_nashconv", "value_p0")


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_curve(records: Sequence[ConvergenceRecord], output_path: Path, game: str, algorithm: str,
                config: Optional[Dict] = None) -> None:
    """
    Write records as a convergence-curve CSV.

    Args:
        records: rows in iteration order
        output_path: destination file; parent directories are created
        game: game name for the metadata header
        algorithm: algorithm id for the metadata header
        config: config echo, written as sorted JSON
    """
    logger.info(f"Writing convergence curve: {output_path}")
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', newline='', encoding='utf-8') as f:
        f.write(f"# game: {game}\n")
        f.write(f"# algorithm: {algorithm}\n")
        f.write(f"# config: {json.dumps(config or {}, sort_keys=True)}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            row = record.as_row()
            writer.writerow([_format(row[column]) for column in CSV_COLUMNS])
    logger.info(f"Wrote {len(records)} rows to {output_path}")


def read_metadata(path: Path) -> Dict[str, str]:
    """The '# key: value' lines at the top of a curve file."""
    metadata = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if not line.startswith('#'):
                break
            key, _, value = line[1:].partition(':')
            metadata[key.strip()] = value.strip()
    return metadata


def read_curve(path: Path) -> Tuple[Dict[str, str], pd.DataFrame]:
    """
    Load a curve file.

    Raises:
        CurveFormatError: the columns differ from the convergence-curve schema
    """
    path = Path(path)
    metadata = read_metadata(path)
    try:
        frame = pd.read_csv(path, comment='#', float_precision='round_trip')
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise CurveFormatError(f"{path}: not a convergence curve ({e})") from e
    if list(frame.columns) != CSV_COLUMNS:
        raise CurveFormatError(
            f"{path}: columns {list(frame.columns)} do not match {CSV_COLUMNS}"
        )
    return metadata, frame


def records_from_frame(frame: pd.DataFrame) -> List[ConvergenceRecord]:
    records = []
    for row in frame.itertuples(index=False):
        best = row.best_iter_nashconv
        records.append(ConvergenceRecord(
            iteration=int(row.iteration),
            nashconv=float(row.nashconv),
            exploitability_p0=float(row.exploitability_p0),
            exploitability_p1=float(row.exploitability_p1),
            best_iter_nashconv=None if pd.isna(best) else float(best),
            value_p0=float(row.value_p0),
            wall_ms=int(row.wall_ms),
        ))
    return records


def load_records(path: Path) -> List[ConvergenceRecord]:
    _, frame = read_curve(path)
    return records_from_frame(frame)


def merge_curves(paths: Sequence[Path]) -> pd.DataFrame:
    """
    Long-format merge of curve files with algorithm and game columns.

    The algorithm falls back to the file name stem when the metadata lacks
    it; the game falls back to an empty string.

    Raises:
        CurveFormatError: no files given, or a file breaks the schema
    """
    if not paths:
        raise CurveFormatError("no curve files given")
    frames = []
    for path in paths:
        path = Path(path)
        metadata, frame = read_curve(path)
        frame.insert(0, "game", metadata.get("game", ""))
        frame.insert(0, "algorithm", metadata.get("algorithm") or path.stem)
        frames.append(frame)
        logger.info(f"Loaded {len(frame)} rows from {path}")
    return pd.concat(frames, ignore_index=True)


def write_merged(frame: pd.DataFrame, output_path: Path) -> None:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(output_path, index=False, float_format="%.17g")
    logger.info(f"Merged curve written to: {output_path}")
