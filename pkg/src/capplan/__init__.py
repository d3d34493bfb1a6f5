"""Capacity planning from saturating server metrics.

Effective demand is estimated by regression on unsaturated samples, weekly
peaks are fitted with an exponential growth model, and CPU upgrades are
evaluated with the super-serial scaling law.
"""

from ._kernels import BACKEND
from .demand import (
    DemandModel,
    DemandPoint,
    WeeklyPeak,
    effective_demand_series,
    filter_saturated,
    fit_demand_model,
    weekly_peaks,
)
from .growth import GrowthModel, doubling_period, fit_exponential, project
from .ingest import MetricSample, MetricSeries, aggregate_window, parse_metric_csv, validate_series
from .regress import DesignMatrix, OlsFit, anova_summary, fit_ols, predict
from .scaling import (
    CpuConfig,
    ScalingModel,
    ScalingTable,
    build_scaling_table,
    calibrate_single_cpu,
    capacity_ratio,
    fit_sigma_lambda,
    headroom_delta,
    predict_throughput,
)
from .scenario import (
    UpgradeScenario,
    clock_delta_from_table,
    deflate_curve,
    run_scenario,
    saturation_week,
)

__version__ = "0.1.0"
