"""Ingestion of timestamped sensor tables."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import IngestError
from .temporal import TimeAxis

log = logging.getLogger(__name__)

MAX_REJECT_FRACTION = 0.10


@dataclass(frozen=True)
class IngestSchema:
    timestamp: str = "date"
    features: tuple = ("Temperature", "Light", "CO2")
    label: str = "Occupancy"
    delimiter: str = ","
    classes: tuple = None
    label_names: dict = None  # raw label text -> class name

    def class_of(self, raw: str):
        raw = raw.strip()
        if self.label_names:
            if raw in self.label_names:
                return self.label_names[raw]
            try:
                key = str(int(float(raw)))
            except ValueError:
                return None
            return self.label_names.get(key)
        return raw


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_kept: int = 0
    rejected: int = 0
    reasons: dict = field(default_factory=dict)

    def reject(self, why: str):
        self.rejected += 1
        self.reasons[why] = self.reasons.get(why, 0) + 1

    def to_dict(self):
        return {"rows_read": self.rows_read, "rows_kept": self.rows_kept,
                "rejected": self.rejected, "reasons": dict(sorted(self.reasons.items()))}


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with labels and derived time coordinates.

    ``points`` are time-point indices on ``axis`` (the hour of day for the
    default axis), ``intervals`` their interval indices, ``days`` the
    calendar day ordinal used to pair consecutive intervals.
    """

    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    timestamps: tuple
    axis: TimeAxis
    points: np.ndarray = None
    intervals: np.ndarray = None
    days: np.ndarray = None
    report: IngestReport = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, len(self.feature_names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=object))
        if self.points is None:
            object.__setattr__(self, "points", np.array([ts.hour for ts in self.timestamps], dtype=int))
        if self.days is None:
            object.__setattr__(self, "days", np.array([ts.toordinal() for ts in self.timestamps], dtype=int))
        pts = np.asarray(self.points, dtype=int)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "days", np.asarray(self.days, dtype=int))
        if self.intervals is None:
            iv = self.axis.interval_of_point(pts) if pts.size else np.zeros(0, dtype=int)
            object.__setattr__(self, "intervals", np.asarray(iv, dtype=int))

    def __len__(self):
        return self.X.shape[0]

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.y.tolist()), key=str))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            self.feature_names, self.X[idx], self.y[idx],
            tuple(self.timestamps[i] for i in np.arange(len(self))[idx]),
            self.axis, self.points[idx], self.intervals[idx], self.days[idx], None,
        )


def parse_timestamp(text: str) -> datetime:
    text = text.strip().strip('"')
    for fmt in ("%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M"):
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ValueError(f"unparseable timestamp {text!r}")


def ingest(path, schema: IngestSchema = IngestSchema(), axis: TimeAxis = None) -> Dataset:
    """Read a delimited file with a header row into a :class:`Dataset`.

    Rows whose data line has one more field than the header (a leading row
    id, as in the public occupancy files) are accepted.  Malformed rows are
    dropped and counted; more than 10% rejects is an error.
    """
    axis = axis or TimeAxis.hours()
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    report = IngestReport()
    rows_x, rows_y, stamps = [], [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            header = None
        if header is None:
            return Dataset(tuple(schema.features), np.zeros((0, len(schema.features))), [], (), axis,
                           report=report)
        wanted = [schema.timestamp, *schema.features, schema.label]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise IngestError(f"columns {missing} missing from header {header}")
        cols = [header.index(c) for c in wanted]
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            report.rows_read += 1
            if len(row) == len(header) + 1:
                row = row[1:]
            if len(row) != len(header):
                report.reject("field count")
                continue
            cells = [row[c] for c in cols]
            try:
                ts = parse_timestamp(cells[0])
            except ValueError:
                report.reject("timestamp")
                continue
            try:
                x = [float(c) for c in cells[1:-1]]
            except ValueError:
                report.reject("feature value")
                continue
            if not all(math.isfinite(v) for v in x):
                report.reject("feature value")
                continue
            label = schema.class_of(cells[-1])
            if label is None or (schema.classes is not None and label not in schema.classes):
                report.reject("label")
                continue
            rows_x.append(x)
            rows_y.append(label)
            stamps.append(ts)
    report.rows_kept = len(rows_x)
    if report.rows_read and report.rejected / report.rows_read > MAX_REJECT_FRACTION:
        raise IngestError(
            f"{report.rejected} of {report.rows_read} rows rejected ({report.reasons}); limit is 10%"
        )
    if report.rejected:
        log.warning("ingest rejected %d of %d rows: %s", report.rejected, report.rows_read, report.reasons)
    X = np.array(rows_x, dtype=float).reshape(-1, len(schema.features))
    return Dataset(tuple(schema.features), X, rows_y, tuple(stamps), axis, report=report)
