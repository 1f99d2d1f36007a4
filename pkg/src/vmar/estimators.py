"""Scikit-learn style wrappers so the models compose with the wider ecosystem.

``VMAREstimator`` exposes the multi-start ML fit through the familiar
``fit(X)`` / ``get_params`` protocol, and ``HPDetrend`` is a stateless
transformer mapping each column to its Hodrick-Prescott cycle.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .estimate import FitOptions, fit, loglik
from .model import ModelOrder, to_additive
from .preprocess import DEFAULT_HP_SMOOTHING, hp_filter

__all__ = ["VMAREstimator", "HPDetrend"]


class VMAREstimator(BaseEstimator):
    """Mixed causal-noncausal vector autoregression fitted by Student-t ML.

    Parameters
    ----------
    order : tuple of (int, int), default=(1, 1)
        Lag and lead orders (r, s).
    rank_deficit : int or None, default=None
        If set, restricts all lead matrices to rank N - rank_deficit, the
        common-bubble restriction.
    n_starts : int, default=100
        Number of optimization starts (random stationary draws).
    seed : int or None, default=0
        Seed of the random-start stream.
    max_iter : int, default=4000
        Iteration cap of each local search.
    tol : float, default=1e-8
        Convergence tolerance on the log likelihood.
    n_jobs : int, default=1
        Parallelism across starts.

    Attributes
    ----------
    result_ : FitResult
        Full fit record.
    lag_coefs_ : ndarray of shape (r, N, N)
    lead_coefs_ : ndarray of shape (s, N, N)
    scale_ : ndarray of shape (N, N)
    df_ : float
        Estimated degrees of freedom of the error distribution.
    loglik_ : float
    additive_lag_ : ndarray of shape (r, N, N)
    additive_lead_ : ndarray of shape (s, N, N)

    Examples
    --------
    >>> est = VMAREstimator(order=(1, 1), n_starts=10, seed=0)
    >>> est.fit(X)                                          # doctest: +SKIP
    >>> est.lead_coefs_.shape                               # doctest: +SKIP
    (1, 2, 2)
    """

    def __init__(
        self,
        order=(1, 1),
        rank_deficit=None,
        n_starts=100,
        seed=0,
        max_iter=4000,
        tol=1e-8,
        n_jobs=1,
    ):
        self.order = order
        self.rank_deficit = rank_deficit
        self.n_starts = n_starts
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol
        self.n_jobs = n_jobs

    def _fit_options(self) -> FitOptions:
        return FitOptions(
            n_starts=self.n_starts, seed=self.seed, max_iter=self.max_iter, tol=self.tol
        )

    def fit(self, X, y=None):
        """Fit on a (T, N) array of observations in time order."""
        X = check_array(X, ensure_min_samples=4, dtype=float)
        r, s = self.order
        model_order = ModelOrder(X.shape[1], int(r), int(s))
        self.result_ = fit(
            X,
            model_order,
            restriction=self.rank_deficit,
            opts=self._fit_options(),
            n_jobs=self.n_jobs,
        )
        model = self.result_.model
        self.lag_coefs_ = model.phi
        self.lead_coefs_ = model.psi
        self.scale_ = model.sigma
        self.df_ = model.lam
        self.loglik_ = self.result_.loglik
        additive = to_additive(model)
        self.additive_lag_ = additive.b_lag
        self.additive_lead_ = additive.b_lead
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X, y=None) -> float:
        """Average conditional log likelihood of the fitted model on X."""
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=float)
        model = self.result_.model
        n_eff = X.shape[0] - model.order.r - model.order.s
        return loglik(X, model) / n_eff


class HPDetrend(BaseEstimator, TransformerMixin):
    """Hodrick-Prescott detrending: transform returns the cycle of each column.

    Parameters
    ----------
    smoothing : float, default=129600.0
        Penalty on squared second differences of the trend (the monthly-data
        convention; use 1600 for quarterly series).
    """

    def __init__(self, smoothing=DEFAULT_HP_SMOOTHING):
        self.smoothing = smoothing

    def fit(self, X, y=None):
        check_array(X, ensure_min_samples=4, dtype=float)
        self.n_features_in_ = np.asarray(X).shape[1]
        return self

    def transform(self, X):
        X = check_array(X, ensure_min_samples=4, dtype=float)
        return np.column_stack(
            [hp_filter(X[:, i], self.smoothing).cycle for i in range(X.shape[1])]
        )

    def trend(self, X):
        """The complementary trend component (input minus the transform)."""
        X = check_array(X, ensure_min_samples=4, dtype=float)
        return np.column_stack(
            [hp_filter(X[:, i], self.smoothing).trend for i in range(X.shape[1])]
        )
