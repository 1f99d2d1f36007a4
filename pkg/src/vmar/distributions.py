"""Multivariate Student-t density and sampling, chi-square tails, Jarque-Bera."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special
from scipy.linalg import solve_triangular

from .errors import DegenerateModelError, ModelStructureError

__all__ = [
    "MvtParams",
    "mvt_logpdf",
    "mvt_sample",
    "chi2_sf",
    "chi2_quantile",
    "JarqueBeraResult",
    "jarque_bera",
]


@dataclass(frozen=True)
class MvtParams:
    """Scale matrix and degrees of freedom of a zero-mean multivariate Student-t.

    The scale must admit a Cholesky factorization; the degrees of freedom may
    be any positive real (the fitted values of interest are often well below 2,
    i.e. infinite variance).
    """

    scale: np.ndarray
    df: float

    def __post_init__(self):
        scale = np.atleast_2d(np.asarray(self.scale, dtype=float))
        if scale.shape[0] != scale.shape[1]:
            raise ModelStructureError(f"scale must be square, got shape {scale.shape}")
        if not np.allclose(scale, scale.T, rtol=1e-10, atol=1e-12):
            raise ModelStructureError("scale must be symmetric")
        try:
            chol = np.linalg.cholesky(scale)
        except np.linalg.LinAlgError:
            raise DegenerateModelError("scale is not positive definite") from None
        if not (np.isfinite(self.df) and self.df > 0):
            raise ModelStructureError(f"df must be positive, got {self.df}")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.scale.shape[0]

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor of the scale."""
        return self._chol

    def covariance(self) -> np.ndarray:
        """Covariance scale * df / (df - 2); undefined for df <= 2."""
        if self.df <= 2:
            raise DegenerateModelError(
                f"covariance does not exist for df={self.df} (infinite variance)"
            )
        return self.scale * (self.df / (self.df - 2.0))


def _logpdf_rows_chol(x: np.ndarray, chol: np.ndarray, df: float) -> np.ndarray:
    """Log density of each row of x given the lower Cholesky factor of the scale."""
    n = chol.shape[0]
    z = solve_triangular(chol, x.T, lower=True, check_finite=False)
    quad = np.einsum("ij,ij->j", z, z)
    half = 0.5 * (df + n)
    const = (
        special.gammaln(half)
        - special.gammaln(0.5 * df)
        - 0.5 * n * np.log(df * np.pi)
        - np.sum(np.log(np.diag(chol)))
    )
    return const - half * np.log1p(quad / df)


def mvt_logpdf(x, params: MvtParams) -> float:
    """Log density of the zero-mean multivariate Student-t at a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (params.dim,):
        raise ModelStructureError(f"x has shape {x.shape}, expected ({params.dim},)")
    return float(_logpdf_rows_chol(x[None, :], params.chol, params.df)[0])


def mvt_sample(n: int, params: MvtParams, rng: np.random.Generator) -> np.ndarray:
    """Draw n rows from the multivariate Student-t.

    Uses the normal/chi-square mixture x = L z sqrt(df / w) with w ~ chi2(df),
    so replays are bit-identical under a fixed generator state.
    """
    if n < 1:
        raise ModelStructureError(f"n must be >= 1, got {n}")
    z = rng.standard_normal((n, params.dim))
    w = rng.chisquare(params.df, size=n)
    return (z @ params.chol.T) * np.sqrt(params.df / w)[:, None]


def chi2_sf(x: float, df: float) -> float:
    """Chi-square survival function via the regularized incomplete gamma."""
    if x < 0:
        raise ModelStructureError(f"x must be >= 0, got {x}")
    if df <= 0:
        raise ModelStructureError(f"df must be positive, got {df}")
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def chi2_quantile(q: float, df: float) -> float:
    """Quantile of the chi-square law by bracketed root finding on the survival
    function (absolute tolerance 1e-10)."""
    if not (0.0 < q < 1.0):
        raise ModelStructureError(f"q must lie in (0, 1), got {q}")
    if df <= 0:
        raise ModelStructureError(f"df must be positive, got {df}")
    target = 1.0 - q
    hi = max(4.0 * df, 8.0)
    while chi2_sf(hi, df) > target:
        hi *= 2.0
    return float(optimize.brentq(lambda x: chi2_sf(x, df) - target, 0.0, hi, xtol=1e-10))


@dataclass(frozen=True)
class JarqueBeraResult:
    stat: float
    pvalue: float


def jarque_bera(x) -> JarqueBeraResult:
    """Jarque-Bera normality statistic T (S^2/6 + (K-3)^2/24) with chi2(2) p-value.

    Uses the biased (moment) estimators of skewness S and kurtosis K.
    """
    x = np.asarray(x, dtype=float).ravel()
    t = x.size
    if t < 8:
        raise ModelStructureError(f"need at least 8 observations, got {t}")
    if not np.all(np.isfinite(x)):
        raise ModelStructureError("input contains non-finite values")
    centered = x - x.mean()
    m2 = np.mean(centered**2)
    if m2 <= 0.0:
        raise DegenerateModelError("zero-variance input")
    skew = np.mean(centered**3) / m2**1.5
    kurt = np.mean(centered**4) / m2**2
    stat = t * (skew**2 / 6.0 + (kurt - 3.0) ** 2 / 24.0)
    return JarqueBeraResult(stat=float(stat), pvalue=chi2_sf(float(stat), 2.0))
