"""Multivariate ordinary least squares via Householder QR, with ANOVA diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    ArityError,
    ConsistencyError,
    SingularDesignError,
    UnderdeterminedError,
)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """n x k regressor values plus a length-n response."""

    values: np.ndarray
    response: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.response, dtype=float).ravel()
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ArityError(f"design shape {x.shape} does not match response length {y.shape[0]}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("design matrix contains non-finite values")
        names = self.names
        if names is None:
            names = tuple(f"X{i + 1}" for i in range(x.shape[1]))
        elif len(names) != x.shape[1]:
            raise ArityError("one name per regressor column required")
        object.__setattr__(self, "values", x)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "names", tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class OlsFit:
    intercept: float
    coefficients: np.ndarray
    residuals: np.ndarray
    r_squared: float
    std_errors: np.ndarray | None
    names: tuple[str, ...]
    has_intercept: bool = True

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def params(self) -> dict[str, float]:
        out = {"intercept": self.intercept} if self.has_intercept else {}
        out.update(zip(self.names, map(float, self.coefficients)))
        return out


def _back_substitute(r, z):
    p = len(z)
    beta = np.zeros(p)
    for i in range(p - 1, -1, -1):
        beta[i] = (z[i] - r[i, i + 1:] @ beta[i + 1:]) / r[i, i]
    return beta


def fit_ols(data: DesignMatrix, *, intercept: bool = True) -> OlsFit:
    """Least-squares fit of ``response`` on the regressors.

    The design (with a leading ones column when ``intercept``) is reduced by
    Householder QR. A column whose diagonal entry of R falls below
    ``RANK_TOL`` times the largest is reported as dependent.
    """
    n, k = data.n, data.k
    p = k + 1 if intercept else k
    if p == 0:
        raise UnderdeterminedError("no coefficients to fit")
    if n < p:
        raise UnderdeterminedError(f"{n} rows cannot determine {p} coefficients")

    if intercept:
        a = np.column_stack([np.ones(n), data.values])
        labels = ("intercept",) + data.names
    else:
        a = data.values
        labels = data.names

    r, z, _ = _kernels.qr_reduce(a, data.response)
    diag = np.abs(np.diag(r))
    scale = diag.max() if diag.size else 0.0
    dependent = [labels[j] for j in range(p) if scale == 0.0 or diag[j] <= RANK_TOL * scale]
    if dependent:
        raise SingularDesignError(dependent)

    beta = _back_substitute(r, z)
    fitted = a @ beta
    resid = data.response - fitted
    sse = float(resid @ resid)
    sst = _total_ss(data.response, intercept)
    r2 = _r_squared(sse, sst)

    se = None
    if n > p:
        rinv = _back_substitute_matrix(r)
        cov = (sse / (n - p)) * (rinv @ rinv.T)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    if intercept:
        return OlsFit(float(beta[0]), beta[1:].copy(), resid, r2, se, data.names, True)
    return OlsFit(0.0, beta.copy(), resid, r2, se, data.names, False)


def _back_substitute_matrix(r):
    p = r.shape[0]
    inv = np.zeros_like(r)
    eye = np.eye(p)
    for c in range(p):
        inv[:, c] = _back_substitute(r, eye[:, c])
    return inv


def _total_ss(y, intercept):
    centre = y.mean() if intercept else 0.0
    d = y - centre
    return float(d @ d)


def _r_squared(sse, sst):
    if sst == 0.0:
        return 1.0 if sse <= 1e-24 else 0.0
    return float(min(1.0, max(0.0, 1.0 - sse / sst)))


def predict(fit: OlsFit, regressors) -> float:
    """Evaluate ``a0 + sum(a_i * x_i)``. The result is not bounded."""
    x = np.asarray(regressors, dtype=float).ravel()
    if x.shape[0] != fit.k:
        raise ArityError(f"expected {fit.k} regressors, got {x.shape[0]}")
    return float(fit.intercept + fit.coefficients @ x)


def predict_many(fit: OlsFit, matrix) -> np.ndarray:
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[1] != fit.k:
        raise ArityError(f"expected {fit.k} regressor columns, got shape {x.shape}")
    return fit.intercept + x @ fit.coefficients


@dataclass(frozen=True)
class AnovaSummary:
    sse: float
    ssr: float
    sst: float
    r_squared: float
    f_statistic: float
    df_model: int
    df_resid: int
    std_errors: np.ndarray | None

    @property
    def saturated(self) -> bool:
        """True when the fit leaves no residual variance (F is infinite)."""
        return math.isinf(self.f_statistic)


def anova_summary(fit: OlsFit, data: DesignMatrix) -> AnovaSummary:
    """Sum-of-squares decomposition and overall F test for a fit on ``data``."""
    if data.k != fit.k or data.n != len(fit.residuals):
        raise ConsistencyError(
            f"fit has {fit.k} regressors/{len(fit.residuals)} rows, data {data.k}/{data.n}"
        )
    fitted = predict_many(fit, data.values)
    resid = data.response - fitted
    tol = 1e-8 * max(1.0, float(np.max(np.abs(data.response))))
    if np.max(np.abs(resid - fit.residuals)) > tol:
        raise ConsistencyError("fit residuals do not belong to this data")

    sse = float(resid @ resid)
    sst = _total_ss(data.response, fit.has_intercept)
    centre = data.response.mean() if fit.has_intercept else 0.0
    ssr = float(((fitted - centre) ** 2).sum())
    p = fit.k + (1 if fit.has_intercept else 0)
    df_model = fit.k
    df_resid = data.n - p
    if sse <= 1e-20 * max(sst, 1e-300) or sse == 0.0:
        f_stat = math.inf
    elif df_resid == 0 or df_model == 0:
        f_stat = math.nan
    else:
        f_stat = (ssr / df_model) / (sse / df_resid)
    return AnovaSummary(sse, ssr, sst, _r_squared(sse, sst), f_stat, df_model, df_resid, fit.std_errors)
