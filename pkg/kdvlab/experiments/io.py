"""
Result Files
CSV tables with round-trip exact floats and JSON reports from pydantic models
"""

import csv
from pathlib import Path
from typing import Iterable, Sequence

from loguru import logger
from pydantic import BaseModel

TRAJECTORY_COLUMNS = ("t", "l2_v", "h1_v", "l2_w", "h1_w", "c", "gamma", "cdot", "gammadot", "event")
SPECTRUM_COLUMNS = ("a", "c", "re_lambda", "im_lambda", "is_discrete_flag", "boundary_mass")


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a header plus rows; floats as repr so reading back is exact"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
            writer.writerow([_cell(value) for value in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))


def read_trajectory(path: Path) -> list[dict]:
    """Trajectory rows with numeric columns parsed back to float"""
    rows = read_csv(path)
    if rows and set(rows[0]) != set(TRAJECTORY_COLUMNS):
        raise ValueError(f"{path} is not a trajectory file (columns {sorted(rows[0])})")
    return [
        {key: (value if key == "event" else float(value)) for key, value in row.items()}
        for row in rows
    ]


def write_json(path: Path, report: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n")
    logger.debug(f"Wrote report to {path}")
    return path
