"""Super-serial CPU scaling: capacity ratio, throughput tables and headroom.

The capacity of a p-way server relative to one CPU is::

    C(p) = p / (1 + sigma * (p - 1) + sigma * lam * p * (p - 1))

``sigma`` is the serial contention fraction and ``lam`` the coherency
penalty. Only this reading of the denominator reproduces the published
52-way/64-way throughput tables from sigma=0.030, lam=0.002.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CellLookupError, DomainError, UnderdeterminedError
from .regress import DesignMatrix, fit_ols

log = logging.getLogger(__name__)

DEFAULT_SIGMA = 0.030
DEFAULT_LAMBDA = 0.002


def _check(p, sigma, lam):
    if not p >= 1:
        raise DomainError(f"cpu count must be >= 1, got {p}")
    if sigma < 0 or lam < 0:
        raise DomainError(f"sigma and lambda must be non-negative, got {sigma}, {lam}")


def capacity_ratio(p: float, sigma: float = DEFAULT_SIGMA, lam: float = DEFAULT_LAMBDA) -> float:
    _check(p, sigma, lam)
    return p / (1.0 + sigma * (p - 1.0) + sigma * lam * p * (p - 1.0))


def peak_cpus(sigma: float, lam: float) -> float:
    """CPU count maximizing C(p); infinite when lam or sigma is zero."""
    if sigma <= 0 or lam <= 0:
        return math.inf
    return math.sqrt((1.0 - sigma) / (sigma * lam))


@dataclass(frozen=True)
class ScalingModel:
    sigma: float = DEFAULT_SIGMA
    lam: float = DEFAULT_LAMBDA
    x1: float = 1.0
    label: str = ""

    def __post_init__(self):
        _check(1, self.sigma, self.lam)
        if not self.x1 > 0:
            raise DomainError(f"single-cpu throughput must be positive, got {self.x1}")


@dataclass(frozen=True)
class CpuConfig:
    cpus: int
    clock_mhz: float | None = None
    cache_mb: float | None = None

    def __post_init__(self):
        if self.cpus < 1:
            raise DomainError(f"cpu count must be >= 1, got {self.cpus}")

    @property
    def label(self) -> str:
        return f"{self.cpus}-way"


def predict_throughput(model: ScalingModel, p: float) -> float:
    return model.x1 * capacity_ratio(p, model.sigma, model.lam)


def calibrate_single_cpu(throughput: float, p: float, sigma: float = DEFAULT_SIGMA,
                         lam: float = DEFAULT_LAMBDA) -> float:
    """Single-CPU throughput implied by a measurement at ``p`` CPUs."""
    if not throughput > 0:
        raise DomainError(f"throughput must be positive, got {throughput}")
    return throughput / capacity_ratio(p, sigma, lam)


@dataclass(frozen=True)
class SigmaLambda:
    sigma: float
    lam: float
    warnings: tuple[str, ...] = ()


def fit_sigma_lambda(points) -> SigmaLambda:
    """Estimate (sigma, lambda) from ``(p, X(p)/X(1))`` pairs.

    Uses the linear form ``p/c - 1 = sigma*(p-1) + sigma*lam*p*(p-1)`` fitted
    through the origin. Negative estimates are clamped to zero with a warning.
    """
    pts = [(float(p), float(c)) for p, c in points]
    if any(c <= 0 for _, c in pts):
        raise DomainError("normalized capacities must be positive")
    if any(p < 1 for p, _ in pts):
        raise DomainError("cpu counts must be >= 1")
    if len({p for p, _ in pts if p > 1}) < 2:
        raise UnderdeterminedError("need at least two distinct cpu counts above 1")

    p = np.array([q for q, _ in pts])
    c = np.array([v for _, v in pts])
    x = np.column_stack([p - 1.0, p * (p - 1.0)])
    y = p / c - 1.0
    fit = fit_ols(DesignMatrix(x, y, ("sigma", "sigma_lambda")), intercept=False)
    sigma, sl = map(float, fit.coefficients)

    notes = []
    if sigma < 0:
        notes.append(f"negative sigma estimate {sigma:.3g} clamped to 0")
        sigma = 0.0
    if sl < 0:
        notes.append(f"negative sigma*lambda estimate {sl:.3g} clamped to 0")
        sl = 0.0
    if sigma == 0.0 or abs(sigma) < 1e-12:
        if sl != 0.0:
            notes.append("sigma is zero so lambda is undefined; reported as 0")
        elif not notes:
            notes.append("no contention detected; lambda undefined, reported as 0")
        lam = 0.0
        sigma = 0.0
    else:
        lam = sl / sigma
    for n in notes:
        log.warning(n)
    return SigmaLambda(sigma, lam, tuple(notes))


def headroom_delta(base: float, upgraded: float) -> float:
    """Fractional capacity gain ``(upgraded - base) / base``."""
    if not base > 0:
        raise DomainError(f"base throughput must be positive, got {base}")
    return (upgraded - base) / base


@dataclass
class ScalingTable:
    """Throughput grid: rows are CPU configurations, columns clock variants.

    Deltas compare the last row/column against the first, and the corner
    entries compare the last cell against the first (both upgrades at once).
    """

    row_labels: list[str]
    col_labels: list[str]
    cells: list[list[float]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.row_labels or not self.col_labels:
            raise DomainError("scaling table needs at least one row and one column")
        if len(self.cells) != len(self.row_labels) or any(
            len(r) != len(self.col_labels) for r in self.cells
        ):
            raise DomainError("cell grid does not match labels")

    def cell(self, row: str, col: str) -> float:
        try:
            return self.cells[self.row_labels.index(row)][self.col_labels.index(col)]
        except ValueError:
            raise CellLookupError(f"no cell ({row!r}, {col!r})") from None

    @property
    def delta_clk(self) -> list[float]:
        if len(self.col_labels) < 2:
            return []
        return [r[-1] - r[0] for r in self.cells]

    @property
    def pct_clk(self) -> list[float]:
        return [d / r[0] for d, r in zip(self.delta_clk, self.cells)]

    @property
    def delta_cpu(self) -> list[float]:
        if len(self.row_labels) < 2:
            return []
        return [b - a for a, b in zip(self.cells[0], self.cells[-1])]

    @property
    def pct_cpu(self) -> list[float]:
        return [d / a for d, a in zip(self.delta_cpu, self.cells[0])]

    @property
    def delta_both(self) -> float | None:
        if len(self.row_labels) < 2 or len(self.col_labels) < 2:
            return None
        return self.cells[-1][-1] - self.cells[0][0]

    @property
    def pct_both(self) -> float | None:
        d = self.delta_both
        return None if d is None else d / self.cells[0][0]

    def to_dict(self) -> dict:
        return {
            "meta": dict(self.meta),
            "rows": list(self.row_labels),
            "columns": list(self.col_labels),
            "cells": [list(map(float, r)) for r in self.cells],
            "delta_clk": self.delta_clk,
            "pct_clk": self.pct_clk,
            "delta_cpu": self.delta_cpu,
            "pct_cpu": self.pct_cpu,
            "delta_both": self.delta_both,
            "pct_both": self.pct_both,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingTable":
        return cls(list(d["rows"]), list(d["columns"]), [list(map(float, r)) for r in d["cells"]],
                   dict(d.get("meta", {})))

    def to_rows(self, fmt="{:.4f}") -> list[list[str]]:
        """Table laid out like the printed tables, delta and percentage margins included."""
        f = fmt.format
        has_clk = len(self.col_labels) > 1
        header = ["System", *self.col_labels] + (["dCLK", "Percentage"] if has_clk else [])
        rows = [header]
        for i, label in enumerate(self.row_labels):
            row = [label, *map(f, self.cells[i])]
            if has_clk:
                row += [f(self.delta_clk[i]), f(self.pct_clk[i])]
            rows.append(row)
        if len(self.row_labels) > 1:
            tail = [f(self.delta_both), "N/A"] if has_clk else []
            rows.append(["dCPU", *map(f, self.delta_cpu)] + tail)
            tail = ["N/A", f(self.pct_both)] if has_clk else []
            rows.append(["Percentage", *map(f, self.pct_cpu)] + tail)
        return rows


def build_scaling_table(models, configs) -> ScalingTable:
    """Predicted throughput for each configuration (row) and model (column)."""
    models = list(models)
    configs = list(configs)
    if not models or not configs:
        raise DomainError("need at least one model and one configuration")
    cells = [[predict_throughput(m, c.cpus) for m in models] for c in configs]
    labels = [m.label or f"model{i}" for i, m in enumerate(models)]
    meta = {
        "mode": "model",
        "models": [{"label": l, "sigma": m.sigma, "lambda": m.lam, "x1": m.x1}
                   for l, m in zip(labels, models)],
    }
    return ScalingTable([c.label for c in configs], labels, cells, meta)


def vendor_table(cells, row_labels, col_labels) -> ScalingTable:
    """Table built directly from quoted throughputs, with no scaling model."""
    return ScalingTable(list(row_labels), list(col_labels),
                        [list(map(float, r)) for r in cells], {"mode": "vendor"})


def calibrated_models(reference_p: int, throughputs: dict, sigma=DEFAULT_SIGMA,
                      lam=DEFAULT_LAMBDA) -> list[ScalingModel]:
    """One model per clock variant, each calibrated from its throughput at ``reference_p``."""
    return [
        ScalingModel(sigma, lam, calibrate_single_cpu(x, reference_p, sigma, lam), label)
        for label, x in throughputs.items()
    ]
