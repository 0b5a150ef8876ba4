"""CSV cells, writing and reading; standard library only so light scripts can import it."""

import csv
import math
from collections.abc import Iterable, Sequence
from lib.exceptions import OutputError, ParseError
from pathlib import Path
from typing import Any


def format_value(value: float | int | str | None) -> str:
    """CSV cell text: ``repr`` for floats (round-trips exactly), blank for missing values."""
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def ensure_dir(path: Path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], comment: str | None = None) -> Path:
    """Write a CSV with ``\\n`` line endings and an optional leading ``#`` comment line."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            if comment:
                f.write(f"# {comment}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([format_value(v) for v in row] for row in rows)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV written by ``write_csv``; ``#`` comment lines are skipped.

    Returns:
        Header and data rows, as strings.
    """
    with open(path, newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ParseError(f"{path}: no header row")
    return rows[0], rows[1:]
