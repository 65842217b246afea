"""CSV serialization of datasets and study results.

Dataset files have the header ``d,y1..yp,z1..zk,x1..xq``. Floats are written
with ``repr``, the shortest string that round-trips, so reading a file back
reproduces the arrays bit for bit.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .montecarlo import EdfCurve, SummaryRow

SUMMARY_COLUMNS = ("variant", "N", "c", "bias", "rmse", "median", "mean_ad", "median_ad", "reps_used")
EDF_COLUMNS = ("variant", "N", "value", "fraction")

_HEADER_RE = re.compile(r"^([yzx])(\d+)$")


class DatasetFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def dataset_header(k: int, p: int, q: int) -> list[str]:
    return (
        ["d"]
        + [f"y{i}" for i in range(1, p + 1)]
        + [f"z{i}" for i in range(1, k + 1)]
        + [f"x{i}" for i in range(1, q + 1)]
    )


def write_dataset_csv(path, data: Dataset) -> None:
    k, p, q = data.dims
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset_header(k, p, q))
        for i in range(data.n):
            w.writerow(
                [str(int(data.d[i]))]
                + [fmt(v) for v in data.y[i]]
                + [fmt(v) for v in data.z[i]]
                + [fmt(v) for v in data.x[i]]
            )


def _parse_header(row: list[str]) -> tuple[int, int, int]:
    if not row or row[0].strip() != "d":
        raise DatasetFormatError("header must start with 'd'", 1)
    counts = {"y": 0, "z": 0, "x": 0}
    order = []
    for name in row[1:]:
        m = _HEADER_RE.match(name.strip())
        if not m:
            raise DatasetFormatError(f"unexpected column {name!r}", 1)
        block, idx = m.group(1), int(m.group(2))
        if idx != counts[block] + 1:
            raise DatasetFormatError(f"column {name!r} out of sequence", 1)
        counts[block] = idx
        if not order or order[-1] != block:
            order.append(block)
    if order != ["y", "z", "x"]:
        raise DatasetFormatError("columns must be ordered d, y1..yp, z1..zk, x1..xq", 1)
    return counts["z"], counts["y"], counts["x"]


def read_dataset_csv(path) -> Dataset:
    """Parse a dataset CSV; errors carry the 1-based line number."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("file is empty", 1) from None
        k, p, q = _parse_header(header)
        width = 1 + p + k + q
        d, rows = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise DatasetFormatError(f"expected {width} fields, found {len(row)}", line)
            if row[0].strip() not in ("0", "1"):
                raise DatasetFormatError(f"d must be 0 or 1, found {row[0]!r}", line)
            vals = []
            for name, cell in zip(dataset_header(k, p, q)[1:], row[1:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetFormatError(f"non-numeric {name} value {cell!r}", line) from None
                if not np.isfinite(v):
                    raise DatasetFormatError(f"non-finite {name} value {cell!r}", line)
                vals.append(v)
            d.append(int(row[0]))
            rows.append(vals)
    if not rows:
        raise DatasetFormatError("no observations")
    arr = np.array(rows, dtype=float)
    return Dataset(np.array(d), arr[:, :p], arr[:, p : p + k], arr[:, p + k :])


def write_summary_csv(path, rows: list[SummaryRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in rows:
            w.writerow([r.variant] + [fmt(getattr(r, c)) for c in SUMMARY_COLUMNS[1:]])


def write_edf_csv(path, curves: list[EdfCurve]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDF_COLUMNS)
        for cv in curves:
            for v, f in zip(cv.values, cv.fractions):
                w.writerow([cv.variant, str(cv.N), fmt(v), fmt(f)])


def format_summary_table(rows: list[SummaryRow]) -> str:
    head = f"{'variant':<10}{'N':>6}{'c':>6}{'bias':>9}{'RMSE':>8}{'median':>8}{'meanAD':>8}{'medAD':>8}{'reps':>6}"
    lines = [head, "-" * len(head)]
    for r in rows:
        c = "" if r.c is None else f"{r.c:g}"
        lines.append(
            f"{r.variant:<10}{r.N:>6}{c:>6}{r.bias:>9.3f}{r.rmse:>8.3f}{r.median:>8.3f}"
            f"{r.mean_ad:>8.3f}{r.median_ad:>8.3f}{r.reps_used:>6}"
        )
    return "\n".join(lines)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
