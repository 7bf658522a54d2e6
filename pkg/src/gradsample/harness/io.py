"""Dataset and report files.

Numbers are written as decimal text with 17 significant digits, which
round-trips every float64 exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from gradsample.errors import DimensionMismatch, ParseError
from gradsample.linalg import Dataset

FLOAT_FORMAT = "%.17g"

# columns of a report record, in output order
REPORT_FIELDS = (
    "method", "scheme", "r", "r0", "replications", "failures", "mean_size",
    "mse", "mse_se", "coverage", "d1_ms", "d1_pilot_ms", "d2_ms",
)
TIMING_FIELDS = ("d1_ms", "d1_pilot_ms", "d2_ms")
_STR_FIELDS = {"method", "scheme"}
_INT_FIELDS = {"replications", "failures"}

_number = {"type": ["number", "null"]}
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gradsample experiment report",
    "type": "object",
    "required": ["n", "d", "seed", "records"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "source": {"type": "string"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(REPORT_FIELDS[:10]),
                "properties": {
                    "method": {"type": "string"},
                    "scheme": {"enum": ["poisson", "with_replacement"]},
                    "r": {"type": "number", "exclusiveMinimum": 0},
                    "r0": _number,
                    "replications": {"type": "integer", "minimum": 1},
                    "failures": {"type": "integer", "minimum": 0},
                    "mean_size": _number,
                    "mse": {"type": ["number", "null"], "minimum": 0},
                    "mse_se": {"type": ["number", "null"], "minimum": 0},
                    "coverage": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "d1_ms": _number,
                    "d1_pilot_ms": _number,
                    "d2_ms": _number,
                },
                "additionalProperties": False,
            },
        },
    },
}


def load_csv(path: str | os.PathLike, y_column: int | str = -1, header: bool = True) -> Dataset:
    """Read a numeric CSV table; ``y_column`` becomes the response, the rest the design.

    ``y_column`` is a column index (negative counts from the end) or, when
    the file has a header row, a column name.
    """
    with open(path, newline="") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1) if row]
    if header:
        if not rows:
            raise ParseError("file has no header row", line=1)
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    else:
        names = None
    if not rows:
        raise ParseError("file has no data rows")
    width = len(rows[0][1])
    if names is not None and len(names) != width:
        raise DimensionMismatch(f"header has {len(names)} columns but data has {width}")
    if width < 2:
        raise DimensionMismatch("need at least one predictor column and one response column")

    if isinstance(y_column, str) and not _is_int(y_column):
        if names is None or y_column not in names:
            raise ParseError(f"no column named {y_column!r}")
        ycol = names.index(y_column)
    else:
        ycol = int(y_column)
        if not -width <= ycol < width:
            raise DimensionMismatch(f"y column {ycol} out of range for {width} columns")
        ycol %= width

    table = np.empty((len(rows), width))
    for k, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DimensionMismatch(f"line {lineno} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                table[k, j] = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value {cell!r}", line=lineno, column=j + 1) from None
    if not np.all(np.isfinite(table)):
        lineno = rows[int(np.argwhere(~np.isfinite(table))[0, 0])][0]
        raise ParseError("non-finite value", line=lineno)
    return Dataset(np.delete(table, ycol, axis=1), table[:, ycol])


def _is_int(text: str) -> bool:
    try:
        int(text)
    except ValueError:
        return False
    return True


def write_csv(data: Dataset, path: str | os.PathLike, header: bool = True) -> None:
    """Write ``data`` with the predictors first and the response last."""
    table = np.column_stack([data.x, data.y])
    names = [f"x{j + 1}" for j in range(data.d)] + ["y"]
    np.savetxt(
        path, table, fmt=FLOAT_FORMAT, delimiter=",",
        header=",".join(names) if header else "", comments="",
    )


def _format_value(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def emit_report(report, fmt: str, path: str | os.PathLike | None, include_timing: bool = True) -> str:
    """Serialize ``report`` as CSV or JSON, write it to ``path`` if given, and return the text.

    ``include_timing=False`` drops the wall-clock columns, leaving output
    that is byte-identical across runs with the same config and seed.
    """
    columns = [c for c in REPORT_FIELDS if include_timing or c not in TIMING_FIELDS]
    records = [{c: getattr(rec, c) for c in columns} for rec in report.records]
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_format_value(rec[c]) for c in columns) for rec in records]
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        for rec in records:
            for key, value in rec.items():
                if isinstance(value, float) and not math.isfinite(value):
                    rec[key] = None
        doc = {"n": report.n, "d": report.d, "seed": report.seed, "source": report.source,
               "records": records}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_report_csv(path: str | os.PathLike) -> list[dict]:
    """Parse a CSV report back into a list of records."""
    with open(path, newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            rec = {}
            for key, cell in row.items():
                if key in _STR_FIELDS:
                    rec[key] = cell
                elif cell == "":
                    rec[key] = None
                elif key in _INT_FIELDS:
                    rec[key] = int(cell)
                else:
                    rec[key] = float(cell)
            out.append(rec)
    return out
