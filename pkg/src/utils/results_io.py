"""
Result files and text inputs of the command line tool.

CSV and JSON writers use a fixed float format so identical runs produce identical
bytes. Channel matrices are read from CSV cells written as "a+bi".
"""
import csv
import json
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..models.errors import ChannelFileError, ConfigurationError

_COMPLEX_CELL = re.compile(
    r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"(?:(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)[ij])?$"
)


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows_csv(path: Path, rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
    return path


def write_json(path: Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def to_jsonable(value: Any) -> Any:
    """numpy arrays and scalars to plain lists and numbers"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def parse_complex_cell(text: str, row: Optional[int] = None, column: Optional[int] = None) -> complex:
    """Parse "a+bi", "a", "-bi" or "a-bj"; raises ChannelFileError naming the cell"""
    cell = text.strip().replace(" ", "")
    match = _COMPLEX_CELL.match(cell)
    if not cell or match is None or (match.group("re") is None and match.group("im") is None):
        raise ChannelFileError(f"cannot parse {text!r} as a complex number", row, column)

    real = float(match.group("re")) if match.group("re") else 0.0
    imag = 0.0
    if match.group("im") is not None:
        digits = match.group("im")
        imag = float(digits + "1") if digits in ("+", "-") else float(digits)
    return complex(real, imag)


def parse_channel_rows(lines: Sequence[Sequence[str]]) -> np.ndarray:
    """Complex matrix from rows of cells; row and column numbers in errors are 1-based"""
    rows = [list(line) for line in lines if any(cell.strip() for cell in line)]
    if not rows:
        raise ChannelFileError("channel matrix is empty")

    width = len(rows[0])
    matrix = np.empty((len(rows), width), dtype=complex)
    for r, cells in enumerate(rows, start=1):
        if len(cells) != width:
            raise ChannelFileError(f"expected {width} cells, found {len(cells)}", r, len(cells))
        for c, cell in enumerate(cells, start=1):
            matrix[r - 1, c - 1] = parse_complex_cell(cell, r, c)
    return matrix


def read_channel_csv(path: Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ChannelFileError(f"channel file {path} does not exist")
    with open(path, newline="") as f:
        return parse_channel_rows(list(csv.reader(f)))


def parse_channel_inline(text: str) -> np.ndarray:
    """Rows separated by ';', cells by ','"""
    return parse_channel_rows([row.split(",") for row in text.split(";")])


def parse_grid(text: str) -> List[float]:
    """Inclusive grid 'start:step:stop', or a comma separated list"""
    try:
        if ":" not in text:
            return [float(v) for v in text.split(",") if v.strip()]

        parts = [float(v) for v in text.split(":")]
    except ValueError as e:
        raise ConfigurationError(f"Invalid grid {text!r}: {e}") from e

    if len(parts) != 3:
        raise ConfigurationError(f"Grid {text!r} must have the form start:step:stop")

    start, step, stop = parts
    if step <= 0 or stop < start:
        raise ConfigurationError(f"Grid {text!r} needs a positive step and stop >= start")

    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def format_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    """Fixed-width text table for stdout"""
    def cell(value: Any) -> str:
        if value is None:
            return "-"
        if isinstance(value, (float, np.floating)):
            return f"{float(value):.4g}"
        return str(value)

    body = [[cell(row.get(column)) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(line[i]) for line in body]) for i, column in enumerate(columns)]
    lines = ["  ".join(column.rjust(w) for column, w in zip(columns, widths))]
    lines += ["  ".join(value.rjust(w) for value, w in zip(line, widths)) for line in body]
    return "\n".join(lines)
