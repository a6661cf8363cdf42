"""Experiment result tables: records, CSV loading and per-model summaries."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import InvalidArgument, SchemaError

FIELD_TYPES = {
    "model": str,
    "threshold": float,
    "overlap": float,
    "size": str,
    "images_train": int,
    "instances_train": int,
    "map50": float,
    "map5095": float,
}
REQUIRED = ("model", "threshold", "overlap", "map50", "map5095")


@dataclass(frozen=True)
class ExperimentRecord:
    """One trained-and-evaluated configuration."""

    model: str
    threshold: float
    overlap: float
    map50: float
    map5095: float
    size: str | None = None
    images_train: int | None = None
    instances_train: int | None = None

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidArgument(f"threshold must be in (0, 1], got {self.threshold}")
        if not 0.0 <= self.overlap < 1.0:
            raise InvalidArgument(f"overlap must be in [0, 1), got {self.overlap}")
        for name in ("map50", "map5095"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgument(f"{name} must be in [0, 1], got {v}")


_NAMES = {f.name for f in fields(ExperimentRecord)}


def _convert(value: str, kind, column: str, loc: str):
    value = value.strip()
    if value == "" and column not in REQUIRED:
        return None
    try:
        if kind is int:
            f = float(value)
            if not f.is_integer():
                raise ValueError
            return int(f)
        return kind(value)
    except ValueError:
        raise SchemaError(f"column {column!r}: cannot parse {value!r}", loc) from None


def read_experiments(path, require: Sequence[str] = ()) -> list[ExperimentRecord]:
    """Load records from a CSV with a header row.

    Unknown columns are ignored; ``require`` adds columns beyond the always
    required ``model, threshold, overlap, map50, map5095``.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_experiments(fh, str(path), require)


def parse_experiments(lines: Iterable[str], source: str = "<csv>", require: Sequence[str] = ()) -> list[ExperimentRecord]:
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    missing = [c for c in (*REQUIRED, *require) if c not in header]
    if missing:
        raise SchemaError(f"missing column(s) {', '.join(missing)}", source)
    out = []
    for row in reader:
        loc = f"{source}:{reader.line_num}"
        kw = {c: _convert(row[c] or "", FIELD_TYPES[c], c, loc) for c in header if c in _NAMES}
        try:
            out.append(ExperimentRecord(**kw))
        except InvalidArgument as e:
            raise SchemaError(str(e), loc) from None
    return out


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("patchlab") / "data" / name))


def model_grid() -> list[ExperimentRecord]:
    """36 runs: three detectors over thresholds {0.1, 0.3, 0.5, 1.0} and overlaps {0, 0.1, 0.3}."""
    return read_experiments(bundled_path("model_grid.csv"))


def size_grid() -> list[ExperimentRecord]:
    """45 YOLOv11n runs evaluated separately per patch size class."""
    return read_experiments(bundled_path("size_grid.csv"), require=("size", "images_train", "instances_train"))


@dataclass(frozen=True)
class MetricSummary:
    model: str
    metric: str
    average: float
    maximum: float
    argmax_threshold: float
    argmax_overlap: float
    count: int


def summarize_results(records: Sequence[ExperimentRecord], metrics=("map50", "map5095")) -> list[MetricSummary]:
    """Per model and metric: mean, max and the (threshold, overlap) attaining the max.

    Ties for the max go to the first record in input order.
    """
    if not records:
        raise InvalidArgument("no records to summarize")
    models: list[str] = []
    for r in records:
        if r.model not in models:
            models.append(r.model)
    out = []
    for m in models:
        rows = [r for r in records if r.model == m]
        for metric in metrics:
            vals = [getattr(r, metric) for r in rows]
            best = max(range(len(rows)), key=lambda i: (vals[i], -i))
            out.append(MetricSummary(m, metric, math.fsum(vals) / len(vals), vals[best], rows[best].threshold,
                                     rows[best].overlap, len(rows)))
    return out


def percent(v: float, digits: int = 1) -> float:
    """``v`` as a percentage rounded half-up to ``digits`` decimals."""
    scaled = round(v * 100 * 10**digits, 6)
    return math.floor(scaled + 0.5) / 10**digits


def write_records(records: Sequence[ExperimentRecord], path) -> None:
    cols = [f.name for f in fields(ExperimentRecord)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in cols])
