"""Detrending and pseudo-causal screening ahead of mixed-model estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .distributions import JarqueBeraResult, jarque_bera
from .errors import DegenerateModelError, InsufficientDataError, ModelStructureError
from .panel import TimeSeriesPanel

__all__ = [
    "HPResult",
    "hp_filter",
    "hp_filter_panel",
    "VarFit",
    "var_ols",
    "select_var_order",
    "diagnostics",
]

# Ravn-Uhlig smoothing for monthly data; quarterly would be 1600.
DEFAULT_HP_SMOOTHING = 129600.0


@dataclass(frozen=True)
class HPResult:
    trend: np.ndarray
    cycle: np.ndarray


def hp_filter(series, smoothing: float = DEFAULT_HP_SMOOTHING) -> HPResult:
    """Hodrick-Prescott decomposition of one series.

    The trend solves the pentadiagonal system (I + smoothing * D'D) tau = y
    where D takes second differences; the cycle is y - tau exactly.
    """
    y = np.asarray(series, dtype=float).ravel()
    t = y.size
    if t < 4:
        raise InsufficientDataError(f"need at least 4 observations, got {t}")
    if not np.all(np.isfinite(y)):
        raise ModelStructureError("input contains non-finite values")
    if not (np.isfinite(smoothing) and smoothing > 0):
        raise ModelStructureError(f"smoothing must be positive, got {smoothing}")
    d2 = sparse.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(t - 2, t), format="csc")
    system = sparse.identity(t, format="csc") + smoothing * (d2.T @ d2)
    trend = spsolve(system, y)
    return HPResult(trend=trend, cycle=y - trend)


def hp_filter_panel(panel: TimeSeriesPanel, smoothing: float = DEFAULT_HP_SMOOTHING):
    """Column-wise HP split of a panel; returns (trend_panel, cycle_panel)."""
    parts = [hp_filter(panel.series(i), smoothing) for i in range(panel.n_series)]
    trend = np.column_stack([p.trend for p in parts])
    cycle = np.column_stack([p.cycle for p in parts])
    return panel.with_values(trend), panel.with_values(cycle)


@dataclass(frozen=True)
class VarFit:
    """Least-squares causal VAR(p) fit with intercept."""

    p: int
    coeffs: np.ndarray  # (p, N, N)
    intercept: np.ndarray
    residuals: np.ndarray
    sigma: np.ndarray  # ML residual covariance

    @property
    def n_params(self) -> int:
        n = self.intercept.size
        return n * (n * self.p + 1)


def var_ols(values, p: int, first_obs: int | None = None) -> VarFit:
    """Fit a causal VAR(p) by least squares.

    ``first_obs`` fixes the first regressand row (defaults to p), which lets
    order selection score every candidate on a common sample.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    t, n = values.shape
    if p < 0:
        raise ModelStructureError(f"order must be non-negative, got {p}")
    start = p if first_obs is None else first_obs
    if start < p:
        raise ModelStructureError(f"first_obs {start} is below the order {p}")
    t_eff = t - start
    if t_eff <= n * p + 1:
        raise InsufficientDataError(f"sample of {t} too short for VAR({p})")
    y = values[start:]
    if p == 0:
        intercept = y.mean(axis=0)
        resid = y - intercept
        sigma = resid.T @ resid / t_eff
        return VarFit(p=0, coeffs=np.zeros((0, n, n)), intercept=intercept,
                      residuals=resid, sigma=sigma)
    x = np.column_stack(
        [np.ones(t_eff)] + [values[start - i : t - i] for i in range(1, p + 1)]
    )
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise DegenerateModelError(f"singular regressor matrix in VAR({p}) fit")
    resid = y - x @ coef
    sigma = resid.T @ resid / t_eff
    coeffs = np.stack([coef[1 + i * n : 1 + (i + 1) * n].T for i in range(p)])
    return VarFit(p=p, coeffs=coeffs, intercept=coef[0], residuals=resid, sigma=sigma)


def select_var_order(panel, p_max: int) -> int:
    """Smallest-BIC causal VAR order on the common sample, p = 0 .. p_max.

    Gaussian BIC: T_eff log det(Sigma_p) + (number of coefficients) log T_eff,
    with every candidate scored on the rows a VAR(p_max) can explain.
    """
    values = panel.values if isinstance(panel, TimeSeriesPanel) else np.asarray(panel, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    t, n = values.shape
    if p_max < 1:
        raise ModelStructureError(f"p_max must be >= 1, got {p_max}")
    if t <= n * p_max + 10:
        raise InsufficientDataError(
            f"need more than N * p_max + 10 = {n * p_max + 10} observations, got {t}"
        )
    t_eff = t - p_max
    best_p, best_bic = 0, np.inf
    for p in range(0, p_max + 1):
        fit_p = var_ols(values, p, first_obs=p_max)
        sign, logdet = np.linalg.slogdet(fit_p.sigma)
        if sign <= 0:
            raise DegenerateModelError(f"degenerate residual covariance at order {p}")
        bic = t_eff * logdet + fit_p.n_params * np.log(t_eff)
        if bic < best_bic - 1e-12:
            best_p, best_bic = p, bic
    return best_p


def diagnostics(panel, p: int) -> list[JarqueBeraResult]:
    """Jarque-Bera statistics of each pseudo-causal VAR(p) residual series."""
    values = panel.values if isinstance(panel, TimeSeriesPanel) else np.asarray(panel, dtype=float)
    fit_p = var_ols(values, p)
    return [jarque_bera(fit_p.residuals[:, i]) for i in range(fit_p.residuals.shape[1])]
