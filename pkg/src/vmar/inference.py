"""Common-bubble tests: likelihood ratios, information criteria, rank scans.

A rank deficit k (0 < k < N) restricts every lead matrix to rank N - k and
removes rho(N, k, s) coefficients.  Comparing the restricted and unrestricted
likelihoods gives an asymptotically chi-square LR statistic; the scan runs all
deficits plus the nested deficit-vs-deficit comparisons, labelling rows by the
lead-matrix ranks involved ("2 vs 3" tests rank 2 against full rank 3).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .distributions import chi2_quantile, chi2_sf
from .errors import EstimationError, InsufficientDataError, ModelStructureError, VMARError
from .estimate import FitOptions, FitResult, fit
from .model import ModelOrder, param_count, rho, rho_nested
from .panel import TimeSeriesPanel

__all__ = [
    "LRTest",
    "lr_test",
    "InfoCriteria",
    "info_criteria",
    "TestRow",
    "CBTestReport",
    "cb_scan",
]

# LR below this is a numerical tie between nested optima, reported as 0.
_TIE_TOL = 1e-6


@dataclass(frozen=True)
class LRTest:
    stat: float
    df: int
    pvalue: float
    reject: bool
    level: float


def _lr_stat(loglik_null: float, loglik_alt: float, context: str) -> float:
    stat = -2.0 * (loglik_null - loglik_alt)
    if stat < 0.0:
        if stat > -_TIE_TOL:
            return 0.0
        raise EstimationError(
            f"negative LR statistic {stat:.6g} in {context}; nested-start seeding "
            "should make this impossible",
            diagnostics=[{"loglik_null": loglik_null, "loglik_alt": loglik_alt}],
        )
    return stat


def lr_test(restricted: FitResult, unrestricted: FitResult, level: float = 0.95) -> LRTest:
    """Likelihood-ratio test of a rank-restricted model against the full one.

    The statistic -2 (ln L0 - ln L1) is referred to a chi-square with
    rho(N, k, s) degrees of freedom.
    """
    if restricted.restriction is None:
        raise ModelStructureError("first argument must be a restricted fit")
    if unrestricted.restriction is not None:
        raise ModelStructureError("second argument must be an unrestricted fit")
    if restricted.model.order != unrestricted.model.order:
        raise ModelStructureError(
            f"orders differ: {restricted.model.order} vs {unrestricted.model.order}"
        )
    if restricted.n_obs != unrestricted.n_obs:
        raise ModelStructureError("fits come from panels of different length")
    order = restricted.model.order
    df = rho(order.N, restricted.restriction.k, order.s)
    stat = _lr_stat(restricted.loglik, unrestricted.loglik, "lr_test")
    pvalue = chi2_sf(stat, df)
    return LRTest(
        stat=stat,
        df=df,
        pvalue=pvalue,
        reject=stat > chi2_quantile(level, df),
        level=level,
    )


@dataclass(frozen=True)
class InfoCriteria:
    bic: float
    aic: float
    hqc: float


def info_criteria(fit_result: FitResult) -> InfoCriteria:
    """BIC, AIC and HQC of a fit.

    K counts only the free lag and lead coefficients (the scale matrix and the
    degrees of freedom are common to all candidate models and cancel in
    comparisons); T is the full panel length.
    """
    order = fit_result.model.order
    k = fit_result.restriction.k if fit_result.restriction else None
    n_coeff = param_count(order, k)
    t = fit_result.n_obs
    ll = fit_result.loglik
    return InfoCriteria(
        bic=n_coeff * np.log(t) - 2.0 * ll,
        aic=2.0 * n_coeff - 2.0 * ll,
        hqc=2.0 * n_coeff * np.log(np.log(t)) - 2.0 * ll,
    )


@dataclass
class TestRow:
    """One comparison of the scan: rank deficit ``null_k`` against deficit
    ``alt_k`` (None meaning the unrestricted model)."""

    null_k: int
    alt_k: int | None
    label: str
    lr_stat: float = float("nan")
    df: int = 0
    pvalue: float = float("nan")
    reject: bool = False
    bic_delta: float = float("nan")
    aic_delta: float = float("nan")
    hqc_delta: float = float("nan")
    failed: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "rank_test": self.label,
            "null_rank_deficit": self.null_k,
            "alt_rank_deficit": self.alt_k,
            "lr": self.lr_stat,
            "df": self.df,
            "pvalue": self.pvalue,
            "reject": self.reject,
            "bic_delta": self.bic_delta,
            "aic_delta": self.aic_delta,
            "hqc_delta": self.hqc_delta,
            "failed": self.failed,
            "message": self.message,
        }


@dataclass
class CBTestReport:
    """Full rank-scan report: one row per comparison plus per-fit diagnostics."""

    order: ModelOrder
    n_obs: int
    level: float
    rows: list = field(default_factory=list)
    logliks: dict = field(default_factory=dict)
    param_counts: dict = field(default_factory=dict)
    converged: dict = field(default_factory=dict)
    fit_errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "N": self.order.N,
            "r": self.order.r,
            "s": self.order.s,
            "n_obs": self.n_obs,
            "level": self.level,
            "rows": [row.to_dict() for row in self.rows],
            "logliks": self.logliks,
            "param_counts": self.param_counts,
            "converged": self.converged,
            "fit_errors": self.fit_errors,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self, path) -> None:
        """Tabular layout: one row per rank test with LR, BIC and AIC columns."""
        import csv

        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["rank_test", "LR", "df", "pvalue", "reject", "BIC", "AIC", "HQC"])
            for row in self.rows:
                if row.failed:
                    writer.writerow([row.label, "failed", "", "", "", "", "", ""])
                    continue
                writer.writerow(
                    [
                        row.label,
                        f"{row.lr_stat:.6g}",
                        row.df,
                        f"{row.pvalue:.6g}",
                        int(row.reject),
                        f"{row.bic_delta:.6g}",
                        f"{row.aic_delta:.6g}",
                        f"{row.hqc_delta:.6g}",
                    ]
                )


def _fit_key(k: int | None) -> str:
    return "full" if k is None else f"k={k}"


def cb_scan(
    panel,
    order: ModelOrder,
    opts: FitOptions | None = None,
    level: float = 0.95,
    n_jobs: int = 1,
) -> CBTestReport:
    """Scan every rank deficit and report all comparisons.

    Fits run from the most restricted model upward, each seeded with the
    solutions of the more restricted ones (on top of the start-mode policy),
    so the best likelihoods are monotone in restriction strength and every LR
    statistic is non-negative.  A failed fit marks its rows failed without
    aborting the rest.
    """
    if order.N < 2:
        raise InsufficientDataError("common-bubble tests need N >= 2 series")
    if order.s < 1:
        raise ModelStructureError("common-bubble tests need at least one lead (s >= 1)")
    values = panel.values if isinstance(panel, TimeSeriesPanel) else np.asarray(panel, dtype=float)
    t = values.shape[0]
    n = order.N
    report = CBTestReport(order=order, n_obs=t, level=level)

    fits: dict[int | None, FitResult] = {}
    chain: list = []  # solutions of successful fits, most restricted first
    for k in [*range(n - 1, 0, -1), None]:
        key = _fit_key(k)
        try:
            result = fit(
                values,
                order,
                restriction=k,
                opts=opts,
                extra_start_models=tuple(chain),
                n_jobs=n_jobs,
            )
        except VMARError as exc:
            report.fit_errors[key] = str(exc)
            continue
        fits[k] = result
        chain.append(result.model)
        report.logliks[key] = result.loglik
        report.param_counts[key] = param_count(order, k)
        report.converged[key] = result.converged

    def add_row(null_k: int, alt_k: int | None):
        label = f"{n - null_k} vs {n if alt_k is None else n - alt_k}"
        row = TestRow(null_k=null_k, alt_k=alt_k, label=label)
        if null_k not in fits or alt_k not in fits:
            row.failed = True
            missing = [_fit_key(k) for k in (null_k, alt_k) if k not in fits]
            row.message = "fit failed: " + ", ".join(missing)
            report.rows.append(row)
            return
        if alt_k is None:
            row.df = rho(n, null_k, order.s)
        else:
            row.df = rho_nested(n, null_k, alt_k, order.s)
        row.lr_stat = _lr_stat(fits[null_k].loglik, fits[alt_k].loglik, f"scan row {label}")
        row.pvalue = chi2_sf(row.lr_stat, row.df)
        row.reject = row.lr_stat > chi2_quantile(level, row.df)
        # Exact delta arithmetic: IC_restricted - IC_unrestricted reduces to
        # these closed forms because only the coefficient count differs.
        row.bic_delta = row.lr_stat - row.df * np.log(t)
        row.aic_delta = row.lr_stat - 2.0 * row.df
        row.hqc_delta = row.lr_stat - 2.0 * row.df * np.log(np.log(t))
        report.rows.append(row)

    for k in range(1, n):
        add_row(k, None)
    for k in range(2, n):
        for l in range(k - 1, 0, -1):
            add_row(k, l)
    return report
