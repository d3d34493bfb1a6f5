"""Synthetic traffic and a capacity-capped server with known true demand.

The generated days are the ground truth for the demand estimator: the true
demand ``D(t)`` is an exact linear function of the emitted regressors, while
the emitted utilization is clipped at the server cap and perturbed by
measurement noise.

Regressor contract: with coefficients ``(a0, a1, ..., ak)``, channels
``X2..Xk`` are nuisance signals and ``X1`` is solved so that
``a0 + sum(ai * Xi) == D`` holds exactly before any regressor noise.

The other channels are smooth random daily curves (a few random-phase
harmonics plus small jitter), independent of demand. Smoothness keeps their
variance through window averaging; independence keeps the design well
conditioned when saturated rows are extrapolated. X1 is unconstrained in sign.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from .errors import DomainError
from . import _kernels
from .ingest import MetricSample, MetricSeries, _bucket_ids, aggregate_window, format_timestamp

MINUTES_PER_DAY = 1440
DEFAULT_COEFFICIENTS = (2.0, 0.5, 0.3, 0.2)
DEFAULT_DAY = date(1999, 9, 29)
RAW_SAMPLE_MINUTES = 2.0


@dataclass(frozen=True)
class TrafficProfile:
    """Intensity (percent) per time-of-day bin over a 24h UTC day."""

    values: np.ndarray
    bin_minutes: float = 15.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise DomainError("profile needs a 1-d array of bins")
        if abs(v.size * self.bin_minutes - MINUTES_PER_DAY) > 1e-9:
            raise DomainError(f"{v.size} bins of {self.bin_minutes} min do not cover 24h")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def bin_hours(self) -> np.ndarray:
        return np.arange(self.values.size) * self.bin_minutes / 60.0

    @property
    def peak_time(self) -> float:
        """UTC hour of the first maximal bin."""
        return float(self.bin_hours[int(np.argmax(self.values))])

    def at(self, hours) -> np.ndarray:
        """Periodic linear interpolation at UTC hour(s)."""
        return np.interp(np.asarray(hours, dtype=float) % 24.0, self.bin_hours,
                         self.values, period=24.0)

    def integral(self) -> float:
        return float(self.values.sum() * self.bin_minutes / 60.0)


def _wrapped_bump(hours, centre, width):
    d = (hours - centre + 12.0) % 24.0 - 12.0
    return np.exp(-0.5 * (d / width) ** 2)


def unimodal_profile(peak_hour=4.0, width_hours=3.0, bin_minutes=15.0,
                     hump_hour=None, hump_height=0.0, hump_width=1.5) -> TrafficProfile:
    """Smooth single-peak daily profile scaled so its maximum is 100.

    An optional secondary hump (height relative to the main peak) can be
    placed at ``hump_hour``.
    """
    if width_hours <= 0:
        raise DomainError("profile width must be positive")
    n = int(round(MINUTES_PER_DAY / bin_minutes))
    h = np.arange(n) * bin_minutes / 60.0
    v = _wrapped_bump(h, peak_hour, width_hours)
    if hump_hour is not None and hump_height > 0:
        v = v + hump_height * _wrapped_bump(h, hump_hour, hump_width)
    return TrafficProfile(100.0 * v / v.max(), bin_minutes)


def coastal_profile(component: TrafficProfile, shift_hours: float = 3.0,
                    weights=(0.5, 0.5), rescale: bool = False) -> TrafficProfile:
    """Superpose a profile with a copy of itself ``shift_hours`` earlier in UTC.

    ``aggregate(t) = w1 * component(t) + w2 * component(t + shift)``. The
    shifted copy models the coast whose local evening arrives earlier in UTC.
    With ``rescale`` the aggregate maximum is scaled to 100.
    """
    w1, w2 = map(float, weights)
    if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-12:
        raise DomainError(f"weights must be non-negative and sum to 1, got {weights}")
    h = component.bin_hours
    agg = w1 * component.values + w2 * component.at(h + shift_hours)
    if rescale and agg.max() > 0:
        agg = 100.0 * agg / agg.max()
    return TrafficProfile(agg, component.bin_minutes)


def default_profile(bin_minutes=15.0) -> TrafficProfile:
    """Bicoastal aggregate: west-coast peak at 04:00 UTC, afternoon hump, 3h shift."""
    west = unimodal_profile(4.0, 3.0, bin_minutes, hump_hour=19.5, hump_height=0.25)
    return coastal_profile(west, 3.0, rescale=True)


def _smooth_channel(rng, hours, level=50.0, spread=30.0, jitter=2.0):
    """Random daily curve: a few random-phase harmonics plus white jitter."""
    wave = np.zeros_like(hours)
    for m in (1, 2, 3):
        wave += rng.normal() * np.cos(2 * np.pi * m * hours / 24.0 + rng.uniform(0, 2 * np.pi))
    wave /= wave.std() or 1.0
    return level + spread * wave + rng.uniform(-jitter, jitter, hours.size)


def simulate_capped_server(demand, cap: float = 100.0) -> np.ndarray:
    if not cap > 0:
        raise DomainError(f"cap must be positive, got {cap}")
    return np.minimum(np.asarray(demand, dtype=float), cap)


@dataclass(frozen=True)
class SimulatedDay:
    true_demand: np.ndarray
    series: MetricSeries
    coefficients: tuple[float, ...]
    demand_scale: float
    noise: float
    regressor_noise: float
    seed: object

    def truth_csv(self) -> str:
        return truth_csv(self.series.timestamps, self.true_demand)

    def aggregated(self, window: timedelta) -> tuple[MetricSeries, np.ndarray]:
        """Window-averaged metrics together with the window-averaged true demand."""
        series = aggregate_window(self.series, window)
        ids = _bucket_ids(self.series.timestamps, window)
        _, sums, counts = _kernels.group_sum_count(ids, self.true_demand[:, None])
        return series, sums[:, 0] / counts


def truth_csv(timestamps, demand) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["timestamp", "D"])
    for t, d in zip(timestamps, demand):
        w.writerow([format_timestamp(t), repr(float(d))])
    return out.getvalue()


def generate_day(profile: TrafficProfile | None = None, demand_scale: float = 90.0,
                 coefficients=DEFAULT_COEFFICIENTS, noise: float = 0.0, seed=None, *,
                 day: date = DEFAULT_DAY, sample_minutes: float = RAW_SAMPLE_MINUTES,
                 regressor_noise: float = 0.0, cap: float = 100.0) -> SimulatedDay:
    """Simulate one day of a capped server.

    ``D(t) = demand_scale * profile(t) / 100``; the emitted utilization is
    ``clamp(min(D, cap) + N(0, noise), 0, cap)``. ``coefficients`` is
    ``(a0, a1, ..., ak)``. Samples are ``sample_minutes`` apart (two minutes
    by default, the raw collector rate); aggregate them before fitting.
    Output is fully determined by ``seed``.
    """
    profile = profile or default_profile()
    coef = tuple(float(c) for c in coefficients)
    if not demand_scale > 0:
        raise DomainError(f"demand scale must be positive, got {demand_scale}")
    if len(coef) < 2:
        raise DomainError("coefficients need an intercept and at least one slope")
    if coef[1] == 0:
        raise DomainError("the first slope must be non-zero")
    if noise < 0 or regressor_noise < 0:
        raise DomainError("noise levels must be non-negative")

    step = float(sample_minutes)
    if step <= 0 or abs(MINUTES_PER_DAY / step - round(MINUTES_PER_DAY / step)) > 1e-9:
        raise DomainError(f"sample interval {sample_minutes} min does not divide a day")
    n = int(round(MINUTES_PER_DAY / step))
    minutes = np.arange(n) * step
    demand = demand_scale * profile.at(minutes / 60.0) / 100.0

    rng = np.random.default_rng(seed)
    k = len(coef) - 1
    x = np.empty((n, k))
    for j in range(1, k):
        x[:, j] = _smooth_channel(rng, minutes / 60.0)
    x[:, 0] = (demand - coef[0] - x[:, 1:] @ np.array(coef[2:])) / coef[1]
    if regressor_noise > 0:
        x = x + rng.normal(0.0, regressor_noise, x.shape)

    u = simulate_capped_server(demand, cap)
    if noise > 0:
        u = np.clip(u + rng.normal(0.0, noise, n), 0.0, cap)

    start = datetime.combine(day, time(0), tzinfo=timezone.utc)
    samples = [
        MetricSample(start + timedelta(minutes=float(m)), float(ui), tuple(map(float, xi)))
        for m, ui, xi in zip(minutes, u, x)
    ]
    names = tuple(f"X{i}" for i in range(1, k + 1))
    series = MetricSeries(samples, timedelta(minutes=step), names)
    return SimulatedDay(demand, series, coef, float(demand_scale), float(noise),
                        float(regressor_noise), seed)


def generate_days(n_days: int, start: date = DEFAULT_DAY, scale0: float = 80.0,
                  weekly_rate: float = 0.0, seed=None, profile: TrafficProfile | None = None,
                  **kwargs) -> list[SimulatedDay]:
    """Consecutive days whose demand scale grows as ``scale0 * exp(rate * day / 7)``.

    Each day draws from its own child seed spawned from ``seed``.
    """
    if n_days < 1:
        raise DomainError("need at least one day")
    profile = profile or default_profile()
    children = np.random.SeedSequence(seed).spawn(n_days)
    return [
        generate_day(profile, scale0 * np.exp(weekly_rate * d / 7.0), seed=children[d],
                     day=start + timedelta(days=d), **kwargs)
        for d in range(n_days)
    ]


def concat_days(days) -> tuple[MetricSeries, np.ndarray]:
    """Join simulated days into one series plus the matching true-demand vector."""
    days = list(days)
    samples = [s for d in days for s in d.series.samples]
    series = MetricSeries(samples, days[0].series.sample_interval, days[0].series.regressor_names)
    return series, np.concatenate([d.true_demand for d in days])
