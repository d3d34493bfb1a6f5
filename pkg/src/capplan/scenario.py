"""Upgrade what-if scenarios built on a growth model and a capacity gain.

An upgrade that adds a fraction ``delta`` of capacity lowers the demand curve
as a percentage of the upgraded server by the factor ``1 - delta``. The
growth rate is untouched, so the doubling period is the same for every
scenario sharing one growth model; only the threshold crossings move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta

from .errors import DomainError
from .growth import GrowthModel, NoDoublingError, doubling_period, project
from .scaling import ScalingTable, headroom_delta

DEFAULT_THRESHOLDS = (100.0, 200.0)
NEVER = math.inf


def _check_delta(delta):
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"capacity gain must lie in [0, 1), got {delta}")


@dataclass(frozen=True)
class UpgradeScenario:
    name: str
    growth: GrowthModel
    delta: float = 0.0
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        _check_delta(self.delta)
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if any(t <= 0 for t in self.thresholds):
            raise DomainError("thresholds must be positive")


def deflate_curve(growth: GrowthModel, delta: float, w: float) -> float:
    _check_delta(delta)
    return project(growth, w) * (1.0 - delta)


def saturation_week(growth: GrowthModel, delta: float, threshold: float) -> float:
    """Week at which the deflated curve reaches ``threshold``.

    A negative week means the threshold was already exceeded at week 0.
    Returns :data:`NEVER` (``inf``) when the rate is not positive.
    """
    _check_delta(delta)
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    if growth.b <= 0:
        return NEVER
    return math.log(threshold / (growth.u0 * (1.0 - delta))) / growth.b


@dataclass
class ScenarioReport:
    name: str
    delta: float
    weeks: list[int]
    baseline: list[float]
    deflated: list[float]
    extrapolated: list[bool]
    crossings: dict[float, float]
    doubling_weeks: float | None
    doubling_months: float | None
    growth: GrowthModel
    start_date: date | None = None
    meta: dict = field(default_factory=dict)

    def already_past(self, threshold: float) -> bool:
        return self.crossings[threshold] < 0

    def week_label(self, w: float) -> str | None:
        if self.start_date is None or not math.isfinite(w):
            return None
        return (self.start_date + timedelta(days=7 * w)).isoformat()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "delta": self.delta,
            "U0": self.growth.u0,
            "b": self.growth.b,
            "horizon_weeks": self.weeks[-1],
            "doubling_weeks": self.doubling_weeks,
            "doubling_months_4wk": self.doubling_months,
            "crossings": [
                {
                    "threshold": t,
                    "week": None if math.isinf(w) else w,
                    "never": math.isinf(w),
                    "already_past": w < 0,
                    "date": self.week_label(w),
                }
                for t, w in self.crossings.items()
            ],
            "start_date": self.start_date.isoformat() if self.start_date else None,
            "meta": dict(self.meta),
        }

    def to_rows(self, fmt="{:.4f}") -> list[list[str]]:
        rows = [["week", "baseline_pct", "deflated_pct", "extrapolated"]]
        for w, b, d, x in zip(self.weeks, self.baseline, self.deflated, self.extrapolated):
            rows.append([str(w), fmt.format(b), fmt.format(d), str(int(x))])
        return rows


def run_scenario(scenario: UpgradeScenario, horizon_weeks: int,
                 start_date: date | None = None) -> ScenarioReport:
    """Weekly baseline and deflated projections for weeks 0..horizon plus crossings."""
    if horizon_weeks < 1:
        raise DomainError(f"horizon must be at least one week, got {horizon_weeks}")
    g = scenario.growth
    weeks = list(range(horizon_weeks + 1))
    base = [project(g, w) for w in weeks]
    factor = 1.0 - scenario.delta
    defl = [v * factor for v in base]
    try:
        d = doubling_period(g)
        dw, dm = d.weeks, d.months
    except NoDoublingError:
        dw = dm = None
    crossings = {t: saturation_week(g, scenario.delta, t) for t in scenario.thresholds}
    return ScenarioReport(
        scenario.name, scenario.delta, weeks, base, defl,
        [g.extrapolates(w) for w in weeks], crossings, dw, dm, g, start_date,
    )


def clock_delta_from_table(table: ScalingTable, base: tuple[str, str], target: tuple[str, str]) -> float:
    """Capacity gain between two cells, each given as ``(row, column)`` labels."""
    return headroom_delta(table.cell(*base), table.cell(*target))
