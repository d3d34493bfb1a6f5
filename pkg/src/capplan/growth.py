"""Exponential growth of peak demand, projection and doubling period."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LogDomainError, NoDoublingError, UnderdeterminedError
from .regress import DesignMatrix, fit_ols

WEEKS_PER_MONTH = 4.0
CALENDAR_WEEKS_PER_MONTH = 30.44 / 7.0


@dataclass(frozen=True)
class GrowthModel:
    """``U(w) = u0 * exp(b * w)`` with ``w`` in weeks."""

    u0: float
    b: float
    fit_weeks: int = 0
    r2_log: float = 1.0
    first_week: float = 0.0
    last_week: float = 0.0

    def __post_init__(self):
        if not self.u0 > 0:
            raise LogDomainError(f"u0 must be positive, got {self.u0}")

    def extrapolates(self, w: float) -> bool:
        """True when ``w`` lies outside the weeks the model was fitted on."""
        return w < self.first_week or w > self.last_week


@dataclass(frozen=True)
class DoublingPeriod:
    weeks: float
    months: float
    calendar_months: float


def _peak_pairs(peaks):
    out = []
    for p in peaks:
        if hasattr(p, "week"):
            out.append((float(p.week), float(p.peak_demand)))
        else:
            w, v = p
            out.append((float(w), float(v)))
    return out


def fit_exponential(peaks, *, pin_u0: bool = False) -> GrowthModel:
    """Log-linear least squares of ln(peak) on week.

    ``peaks`` holds :class:`~capplan.demand.WeeklyPeak` objects or
    ``(week, value)`` pairs. With ``pin_u0`` the week-0 peak is taken as u0
    and only the rate is fitted.
    """
    pairs = _peak_pairs(peaks)
    if len({w for w, _ in pairs}) < 2:
        raise UnderdeterminedError("need peaks in at least two distinct weeks")
    bad = [v for _, v in pairs if not v > 0]
    if bad:
        raise LogDomainError(f"peak values must be positive, got {bad[0]}")
    w = np.array([p[0] for p in pairs])
    logv = np.log([p[1] for p in pairs])

    if pin_u0:
        anchors = [v for wk, v in pairs if wk == 0.0]
        if not anchors:
            raise UnderdeterminedError("pinning u0 requires a week-0 peak")
        u0 = anchors[0]
        log_u0 = math.log(u0)
        fit = fit_ols(DesignMatrix(w, logv - log_u0, ("week",)), intercept=False)
        b = float(fit.coefficients[0])
        resid = logv - log_u0 - b * w
        sst = float(((logv - logv.mean()) ** 2).sum())
        r2 = 1.0 if sst == 0.0 else max(0.0, 1.0 - float(resid @ resid) / sst)
    else:
        fit = fit_ols(DesignMatrix(w, logv, ("week",)))
        u0 = math.exp(fit.intercept)
        b = float(fit.coefficients[0])
        r2 = fit.r_squared
    return GrowthModel(u0, b, len(pairs), float(r2), float(w.min()), float(w.max()))


def project(model: GrowthModel, w: float) -> float:
    return model.u0 * math.exp(model.b * w)


def doubling_period(model: GrowthModel) -> DoublingPeriod:
    """Weeks for demand to double, ``ln 2 / b``, also in 4-week and calendar months."""
    if not model.b > 0:
        raise NoDoublingError(f"growth rate {model.b} is not positive; demand never doubles")
    weeks = math.log(2.0) / model.b
    return DoublingPeriod(weeks, weeks / WEEKS_PER_MONTH, weeks / CALENDAR_WEEKS_PER_MONTH)


def growth_report(model: GrowthModel) -> dict:
    try:
        d = doubling_period(model)
        dw, dm, dc = d.weeks, d.months, d.calendar_months
    except NoDoublingError:
        dw = dm = dc = None
    return {
        "U0": model.u0,
        "b": model.b,
        "doubling_weeks": dw,
        "doubling_months_4wk": dm,
        "doubling_months_calendar": dc,
        "r2_log": model.r2_log,
        "fit_weeks": model.fit_weeks,
    }


def projection_table(model: GrowthModel, weeks) -> list[tuple[float, float]]:
    return [(float(w), project(model, w)) for w in weeks]
