"""Metric CSV parsing, window aggregation and series validation."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from . import _kernels
from .errors import (
    EmptyInputError,
    InvalidWindowError,
    RowError,
    StructuralError,
)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
DAY = timedelta(days=1)

# Columns that hold model outputs rather than inputs; never auto-selected as regressors.
OUTPUT_COLUMNS = ("U^*", "U*", "U_star")

_LEGACY_FORMATS = ("%m/%d/%y %H:%M", "%m/%d/%Y %H:%M", "%m/%d/%y %H:%M:%S", "%m/%d/%Y %H:%M:%S")


@dataclass(frozen=True)
class MetricSample:
    timestamp: datetime
    utilization: float
    regressors: tuple[float, ...]


@dataclass(frozen=True)
class MetricSeries:
    """Time-ordered samples sharing one regressor layout.

    ``counts`` is set on aggregated series and holds the number of raw
    samples averaged into each output sample.
    """

    samples: tuple[MetricSample, ...]
    sample_interval: timedelta
    regressor_names: tuple[str, ...]
    counts: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "regressor_names", tuple(self.regressor_names))
        k = len(self.regressor_names)
        prev = None
        for s in self.samples:
            if len(s.regressors) != k:
                raise ValueError(
                    f"sample at {s.timestamp} has {len(s.regressors)} regressors, expected {k}"
                )
            if prev is not None and s.timestamp < prev:
                raise ValueError("samples must be in timestamp order")
            prev = s.timestamp
        if self.sample_interval <= timedelta(0):
            raise ValueError("sample interval must be positive")
        if self.counts is not None and len(self.counts) != len(self.samples):
            raise ValueError("counts must align with samples")

    def __len__(self):
        return len(self.samples)

    @property
    def timestamps(self) -> list[datetime]:
        return [s.timestamp for s in self.samples]

    @property
    def utilization(self) -> np.ndarray:
        return np.array([s.utilization for s in self.samples], dtype=float)

    @property
    def regressor_matrix(self) -> np.ndarray:
        k = len(self.regressor_names)
        if not self.samples:
            return np.zeros((0, k))
        return np.array([s.regressors for s in self.samples], dtype=float).reshape(-1, k)

    def gaps(self) -> list[tuple[datetime, datetime]]:
        """(last-before, first-after) pairs around every missing interval."""
        out = []
        limit = self.sample_interval * 1.5
        for a, b in zip(self.samples, self.samples[1:]):
            if b.timestamp - a.timestamp > limit:
                out.append((a.timestamp, b.timestamp))
        return out

    def select(self, mask) -> "MetricSeries":
        keep = [s for s, m in zip(self.samples, mask) if m]
        counts = None
        if self.counts is not None:
            counts = [c for c, m in zip(self.counts, mask) if m]
        return MetricSeries(keep, self.sample_interval, self.regressor_names, counts)


@dataclass(frozen=True)
class ColumnMapping:
    """Assigns CSV columns to roles.

    With ``regressors=None`` every column that is not the timestamp, the
    utilization, listed in ``ignore`` or a known output column is a regressor.
    """

    timestamp: str = "timestamp"
    utilization: str = "U"
    regressors: tuple[str, ...] | None = None
    ignore: tuple[str, ...] = ()
    sample_interval: timedelta | None = None


def parse_timestamp(text: str) -> datetime:
    """Parse ``M/D/YY H:MM`` or ISO 8601 into an aware UTC datetime."""
    text = text.strip()
    for fmt in _LEGACY_FORMATS:
        try:
            return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            pass
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    ts = datetime.fromisoformat(iso)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _infer_interval(timestamps) -> timedelta | None:
    diffs = [b - a for a, b in zip(timestamps, timestamps[1:]) if b > a]
    if not diffs:
        return None
    counted = Counter(diffs).most_common()
    best = counted[0][1]
    # ties go to the shortest spacing
    return min(d for d, c in counted if c == best)


def parse_metric_csv(text, mapping: ColumnMapping | None = None) -> MetricSeries:
    """Parse metric CSV text (or an open text stream) into a series.

    Rows are returned in timestamp order. Every malformed row raises
    :class:`RowError` carrying its 1-based line number.
    """
    mapping = mapping or ColumnMapping()
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyInputError("input has no header row") from None

    def col(name):
        try:
            return header.index(name)
        except ValueError:
            raise StructuralError(f"mapped column {name!r} not in header {header}") from None

    ts_idx = col(mapping.timestamp)
    u_idx = col(mapping.utilization)
    if mapping.regressors is None:
        skip = {mapping.timestamp, mapping.utilization, *mapping.ignore, *OUTPUT_COLUMNS}
        reg_names = [h for h in header if h not in skip]
    else:
        reg_names = list(mapping.regressors)
    if not reg_names:
        raise StructuralError("no regressor columns")
    reg_idx = [col(n) for n in reg_names]

    rows = []
    for record in reader:
        line = reader.line_num
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) != len(header):
            raise RowError(line, f"expected {len(header)} fields, got {len(record)}")
        try:
            ts = parse_timestamp(record[ts_idx])
        except ValueError:
            raise RowError(line, f"unparseable timestamp {record[ts_idx]!r}") from None
        try:
            u = float(record[u_idx])
            xs = tuple(float(record[i]) for i in reg_idx)
        except ValueError as exc:
            raise RowError(line, f"non-numeric cell ({exc})") from None
        if not all(math.isfinite(v) for v in (u, *xs)):
            raise RowError(line, "non-finite value")
        rows.append(MetricSample(ts, u, xs))

    if not rows:
        raise EmptyInputError("no data rows")
    rows.sort(key=lambda s: s.timestamp)
    interval = mapping.sample_interval or _infer_interval([r.timestamp for r in rows])
    if interval is None:
        interval = timedelta(minutes=15)
    return MetricSeries(rows, interval, reg_names)


def write_metric_csv(series: MetricSeries, stream=None, *, timestamp="timestamp", utilization="U"):
    """Serialize a series in the format :func:`parse_metric_csv` reads.

    Floats are written with ``repr`` so a parse of the output reproduces the
    series exactly. Returns the text when ``stream`` is None.
    """
    own = stream is None
    if own:
        stream = io.StringIO()
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([timestamp, utilization, *series.regressor_names])
    for s in series.samples:
        w.writerow([format_timestamp(s.timestamp), repr(s.utilization), *map(repr, s.regressors)])
    if own:
        return stream.getvalue()
    return None


def _bucket_ids(timestamps, window: timedelta) -> np.ndarray:
    w = int(window.total_seconds())
    return np.array(
        [int((t - EPOCH).total_seconds()) // w for t in timestamps], dtype=np.int64
    )


def aggregate_window(series: MetricSeries, window: timedelta) -> MetricSeries:
    """Average samples into midnight-aligned windows of length ``window``.

    Each output sample is the unweighted mean of the inputs in
    ``[start, start + window)`` and is stamped with the window start. Windows
    without input are omitted rather than filled.
    """
    if window < series.sample_interval:
        raise InvalidWindowError(
            f"window {window} is shorter than the sample interval {series.sample_interval}"
        )
    secs = window.total_seconds()
    if secs != int(secs) or not (86400 % int(secs) == 0 or int(secs) % 86400 == 0):
        raise InvalidWindowError(f"window {window} does not align with midnight UTC")
    if not series.samples:
        return MetricSeries((), window, series.regressor_names, ())

    ids = _bucket_ids(series.timestamps, window)
    raw_counts = np.asarray(series.counts, dtype=float) if series.counts else None
    values = np.column_stack([series.utilization, series.regressor_matrix])
    if raw_counts is not None:
        # re-aggregating keeps the mean over raw samples
        values = values * raw_counts[:, None]
        uids, sums, _ = _kernels.group_sum_count(ids, values)
        _, csum, _ = _kernels.group_sum_count(ids, raw_counts[:, None])
        counts = csum[:, 0].astype(int)
        means = sums / csum
    else:
        uids, sums, counts = _kernels.group_sum_count(ids, values)
        means = sums / counts[:, None]

    step = int(secs)
    samples = [
        MetricSample(
            EPOCH + timedelta(seconds=int(g) * step),
            float(m[0]),
            tuple(float(v) for v in m[1:]),
        )
        for g, m in zip(uids, means)
    ]
    return MetricSeries(samples, window, series.regressor_names, tuple(int(c) for c in counts))


@dataclass
class ValidationReport:
    gaps: list[tuple[datetime, datetime]] = field(default_factory=list)
    out_of_range: list[int] = field(default_factory=list)
    duplicates: list[datetime] = field(default_factory=list)

    @property
    def findings(self) -> int:
        return len(self.gaps) + len(self.out_of_range) + len(self.duplicates)

    @property
    def ok(self) -> bool:
        return self.findings == 0

    def to_dict(self) -> dict:
        return {
            "findings": self.findings,
            "gaps": [[format_timestamp(a), format_timestamp(b)] for a, b in self.gaps],
            "out_of_range": list(self.out_of_range),
            "duplicates": [format_timestamp(t) for t in self.duplicates],
        }


def validate_series(series: MetricSeries) -> ValidationReport:
    """Report gaps, utilizations outside [0, 100] and duplicate timestamps."""
    report = ValidationReport(gaps=series.gaps())
    for i, s in enumerate(series.samples):
        if not 0.0 <= s.utilization <= 100.0:
            report.out_of_range.append(i)
    for a, b in zip(series.samples, series.samples[1:]):
        if a.timestamp == b.timestamp and (
            not report.duplicates or report.duplicates[-1] != a.timestamp
        ):
            report.duplicates.append(a.timestamp)
    return report
