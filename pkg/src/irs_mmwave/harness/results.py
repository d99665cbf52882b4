"""Result rows and their CSV / JSON-lines serialization.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces the in-memory values exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, dataclass
from pathlib import Path
from typing import Iterable

COLUMNS = ("sweep_param", "sweep_value", "design", "architecture", "mean_se_bps_hz",
           "stderr", "n_trials", "n_degenerate")
PLOT_COLUMNS = ("x", "series", "y", "stderr")
FORMATS = ("csv", "jsonl")


class ResultsWriteError(OSError):
    pass


@dataclass(frozen=True)
class ExperimentResult:
    sweep_param: str
    sweep_value: float
    design: str
    architecture: str
    mean_se_bps_hz: float
    stderr: float
    n_trials: int
    n_degenerate: int

    @property
    def series(self) -> str:
        return f"{self.design}-{self.architecture}"


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _jsonable(x):
    # JSON has no NaN; an all-degenerate cell becomes null
    return None if isinstance(x, float) and math.isnan(x) else x


def format_results(results: Iterable[ExperimentResult], fmt: str = "csv") -> str:
    rows = [astuple(r) for r in results]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows([_fmt(x) for x in row] for row in rows)
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps(dict(zip(COLUMNS, map(_jsonable, row)))) + "\n" for row in rows)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ResultsWriteError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def emit_results(results: Iterable[ExperimentResult], path, fmt: str = "csv") -> Path:
    """Write ``results`` to ``path``; raises :class:`ResultsWriteError` if unwritable."""
    return _write(path, format_results(results, fmt))


def _parse(row: dict) -> ExperimentResult:
    def num(x):
        return math.nan if x is None or x == "" else float(x)
    return ExperimentResult(row["sweep_param"], num(row["sweep_value"]), row["design"],
                            row["architecture"], num(row["mean_se_bps_hz"]), num(row["stderr"]),
                            int(row["n_trials"]), int(row["n_degenerate"]))


def read_results(path, fmt: str | None = None) -> list[ExperimentResult]:
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix == ".jsonl" else "csv")
    text = path.read_text()
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [_parse(r) for r in reader]
    return [_parse(json.loads(line)) for line in text.splitlines() if line.strip()]


def plot_rows(results: Iterable[ExperimentResult]) -> list[tuple[float, str, float, float]]:
    return [(r.sweep_value, r.series, r.mean_se_bps_hz, r.stderr) for r in results]


def emit_plot_data(results: Iterable[ExperimentResult], path) -> Path:
    """``x, series, y, stderr`` rows, one per cell, for any plotting tool."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    w.writerows([_fmt(x) for x in row] for row in plot_rows(results))
    return _write(path, buf.getvalue())
