"""Effective (unbounded) demand estimated from saturating utilization data.

Rows whose measured utilization is at or above the saturation threshold are
dropped before fitting, because clipping at 100% biases the regression. The
fitted model is then evaluated on every row, so saturated rows receive an
estimate of the demand the server could not serve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from . import _kernels
from .errors import ArityError, DomainError, FullySaturatedError
from .ingest import MetricSeries, format_timestamp
from .regress import DesignMatrix, OlsFit, fit_ols, predict_many

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 95.0


@dataclass(frozen=True)
class DemandPoint:
    timestamp: datetime
    utilization: float
    effective_demand: float
    clamped: bool = False


@dataclass(frozen=True)
class DemandModel:
    fit: OlsFit
    threshold: float
    training_rows: int
    excluded_rows: int

    @property
    def regressor_names(self) -> tuple[str, ...]:
        return self.fit.names

    def to_dict(self) -> dict:
        return {
            "coefficients": {k: float(v) for k, v in self.fit.params().items()},
            "r_squared": float(self.fit.r_squared),
            "threshold": self.threshold,
            "training_rows": self.training_rows,
            "excluded_rows": self.excluded_rows,
        }


@dataclass(frozen=True)
class WeeklyPeak:
    week: int
    peak_demand: float


def _check_threshold(threshold):
    if not 0.0 < threshold <= 100.0:
        raise DomainError(f"saturation threshold must lie in (0, 100], got {threshold}")


def filter_saturated(series: MetricSeries, threshold: float = DEFAULT_THRESHOLD):
    """Split off rows with utilization >= threshold.

    Returns ``(retained, excluded_count)``; the retained series keeps order.
    """
    _check_threshold(threshold)
    mask = series.utilization < threshold
    retained = series.select(mask)
    if len(retained) == 0:
        raise FullySaturatedError(
            f"all {len(series)} rows are at or above {threshold}% utilization"
        )
    return retained, int(len(series) - len(retained))


def fit_demand_model(series: MetricSeries, threshold: float = DEFAULT_THRESHOLD) -> DemandModel:
    retained, excluded = filter_saturated(series, threshold)
    design = DesignMatrix(retained.regressor_matrix, retained.utilization, series.regressor_names)
    fit = fit_ols(design)
    return DemandModel(fit, threshold, len(retained), excluded)


def _aligned_regressors(model: DemandModel, series: MetricSeries) -> np.ndarray:
    names = series.regressor_names
    wanted = model.regressor_names
    if names == wanted:
        return series.regressor_matrix
    missing = [n for n in wanted if n not in names]
    if missing or len(names) != len(wanted):
        raise ArityError(f"series regressors {names} do not match model regressors {wanted}")
    order = [names.index(n) for n in wanted]
    return series.regressor_matrix[:, order]


def effective_demand_series(model: DemandModel, series: MetricSeries) -> list[DemandPoint]:
    """Predict effective demand U* for every row, saturated rows included.

    Regressors are matched to the model by name. Negative predictions are
    clamped to zero and flagged on the point.
    """
    u_star = predict_many(model.fit, _aligned_regressors(model, series))
    out = []
    clamped = 0
    for s, v in zip(series.samples, u_star):
        v = float(v)
        neg = v < 0.0
        clamped += neg
        out.append(DemandPoint(s.timestamp, s.utilization, 0.0 if neg else v, neg))
    if clamped:
        log.warning("clamped %d negative effective-demand predictions to 0", clamped)
    return out


def _start_instant(analysis_start) -> datetime:
    if isinstance(analysis_start, datetime):
        return analysis_start.astimezone(timezone.utc)
    return datetime.combine(analysis_start, time(0), tzinfo=timezone.utc)


def week_index(ts: datetime, analysis_start) -> int:
    return (ts - _start_instant(analysis_start)) // timedelta(days=7)


def weekly_peaks(points, analysis_start: date | datetime | None = None) -> list[WeeklyPeak]:
    """Maximum effective demand in each 7-day block from ``analysis_start``.

    ``analysis_start`` defaults to midnight UTC of the first point's day.
    Weeks without points are omitted.
    """
    points = sorted(points, key=lambda p: p.timestamp)
    if not points:
        raise DomainError("weekly_peaks needs at least one point")
    if analysis_start is None:
        analysis_start = points[0].timestamp.astimezone(timezone.utc).date()
    ids = np.array([week_index(p.timestamp, analysis_start) for p in points], dtype=np.int64)
    if ids[0] < 0:
        raise DomainError(f"point at {format_timestamp(points[0].timestamp)} precedes analysis start")
    vals = np.array([p.effective_demand for p in points], dtype=float)
    weeks, peaks = _kernels.group_max(ids, vals)
    return [WeeklyPeak(int(w), float(v)) for w, v in zip(weeks, peaks)]


def split_days(series: MetricSeries) -> list[MetricSeries]:
    """Break a series into one series per UTC calendar day."""
    days: dict[date, list] = {}
    for s in series.samples:
        days.setdefault(s.timestamp.astimezone(timezone.utc).date(), []).append(s)
    return [
        MetricSeries(rows, series.sample_interval, series.regressor_names)
        for _, rows in sorted(days.items())
    ]


def daily_effective_demand(series: MetricSeries, threshold: float = DEFAULT_THRESHOLD):
    """Fit one model per UTC day and concatenate the per-day demand points.

    Returns ``(points, models)`` where ``models`` maps each day to its model.
    """
    points: list[DemandPoint] = []
    models = {}
    for day in split_days(series):
        model = fit_demand_model(day, threshold)
        models[day.samples[0].timestamp.date()] = model
        points.extend(effective_demand_series(model, day))
    return points, models
