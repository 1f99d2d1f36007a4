"""Approximate maximum likelihood for unrestricted and reduced-rank VMAR models.

The likelihood is conditional: the first r and last s observations only
condition the sample, so the objective sums T - r - s Student-t log densities
of the expanded-polynomial residuals.  Optimization is multi-start Nelder-Mead
over an unconstrained parametrization (raw coefficients, log-diagonal Cholesky
of the scale, shifted-log degrees of freedom), with stationarity enforced by
rejection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize

from .distributions import _logpdf_rows_chol
from .errors import (
    EstimationError,
    InsufficientDataError,
    ModelStructureError,
)
from .model import (
    ModelOrder,
    MultiplicativeVMAR,
    ReducedRankLeads,
    Representation,
    build_reduced_rank_leads,
    decompose_reduced_rank,
    _expand_raw,
    polynomial_spectral_radius,
    to_additive,
)
from .panel import TimeSeriesPanel

__all__ = [
    "FitOptions",
    "FitResult",
    "MarGridResult",
    "loglik",
    "pack_params",
    "unpack_params",
    "fit",
    "fit_mar_grid",
]

LAMBDA_FLOOR = 0.1
RANDOM_START_RADIUS_CAP = 0.95
LAMBDA_START = 4.0


@dataclass(frozen=True)
class FitOptions:
    """Multi-start policy and optimizer knobs.

    ``start_mode`` selects where start 0 (and any further seeded starts) come
    from: "random" uses only random stationary draws, "provided" and
    "true_values" take the models in ``initial_models`` first and fill the
    remaining starts randomly.
    """

    n_starts: int = 100
    seed: int | None = 0
    max_iter: int = 4000
    tol: float = 1e-8
    start_mode: str = "random"
    initial_models: tuple = ()
    stationarity_margin: float = 1e-6

    def __post_init__(self):
        if self.n_starts < 1:
            raise ModelStructureError(f"n_starts must be >= 1, got {self.n_starts}")
        if self.start_mode not in ("random", "provided", "true_values"):
            raise ModelStructureError(f"unknown start_mode {self.start_mode!r}")
        if self.start_mode in ("provided", "true_values") and not self.initial_models:
            raise ModelStructureError(f"start_mode {self.start_mode!r} needs initial_models")
        object.__setattr__(self, "initial_models", tuple(self.initial_models))


@dataclass
class FitResult:
    """Winning model of a multi-start run plus bookkeeping.

    ``model`` is always in the lead-first representation; for restricted fits
    its lead matrices equal ``build_reduced_rank_leads(restriction)`` exactly.
    """

    model: MultiplicativeVMAR
    restriction: ReducedRankLeads | None
    loglik: float
    converged: bool
    n_effective: int
    n_obs: int
    start_index: int
    start_logliks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        additive = to_additive(self.model)
        d = {
            "model": self.model.to_dict(),
            "additive": additive.to_dict(),
            "restriction": self.restriction.to_dict() if self.restriction else None,
            "loglik": float(self.loglik),
            "converged": bool(self.converged),
            "n_effective": int(self.n_effective),
            "n_obs": int(self.n_obs),
            "start_index": int(self.start_index),
        }
        return d


class _ParamSpace:
    """Bijection between model parameters and a flat unconstrained vector.

    Layout: lag coefficients raw, lead block raw (either the s lead matrices
    or the (delta_star, loadings) pair of a rank-deficit-k restriction), then
    the lower Cholesky factor of the scale with log diagonal, then
    log(lambda - 0.1).
    """

    def __init__(self, order: ModelOrder, k: int | None = None):
        if k is not None and not (0 < k < order.N):
            raise ModelStructureError(f"rank deficit k must satisfy 0 < k < N, got k={k}")
        self.order = order
        self.k = k
        N, r, s = order.N, order.r, order.s
        self.n_phi = N * N * r
        if k is None:
            self.n_lead = N * N * s
        else:
            m = N - k
            self.n_lead = k * m + s * m * N
        self.tril = np.tril_indices(N)
        self.diag_pos = np.flatnonzero(self.tril[0] == self.tril[1])
        self.n_chol = len(self.tril[0])
        self.size = self.n_phi + self.n_lead + self.n_chol + 1

    @property
    def n_coeff(self) -> int:
        return self.n_phi + self.n_lead

    def pack(self, phi, lead, sigma, lam) -> np.ndarray:
        """``lead`` is the psi stack when unrestricted, (delta_star, gammas) when restricted."""
        N = self.order.N
        theta = np.empty(self.size)
        theta[: self.n_phi] = np.asarray(phi, dtype=float).ravel()
        if self.k is None:
            theta[self.n_phi : self.n_phi + self.n_lead] = np.asarray(lead, dtype=float).ravel()
        else:
            ds, gammas = lead
            block = np.concatenate([np.ravel(ds), np.ravel(gammas)])
            theta[self.n_phi : self.n_phi + self.n_lead] = block
        chol = np.linalg.cholesky(np.asarray(sigma, dtype=float))
        vec = chol[self.tril]
        vec[self.diag_pos] = np.log(vec[self.diag_pos])
        theta[self.n_phi + self.n_lead : -1] = vec
        theta[-1] = np.log(lam - LAMBDA_FLOOR)
        return theta

    def unpack_raw(self, theta: np.ndarray):
        """Return (phi, psi, delta_star, gammas, chol, lam); no validation."""
        N, r, s = self.order.N, self.order.r, self.order.s
        phi = theta[: self.n_phi].reshape(r, N, N)
        off = self.n_phi
        if self.k is None:
            psi = theta[off : off + self.n_lead].reshape(s, N, N)
            ds = gammas = None
        else:
            m = N - self.k
            ds = theta[off : off + self.k * m].reshape(self.k, m)
            gammas = theta[off + self.k * m : off + self.n_lead].reshape(s, m, N)
            dperp = np.vstack([-ds, np.eye(m)])
            psi = np.einsum("am,jmn->jan", dperp, gammas) if s else np.zeros((0, N, N))
        vec = theta[off + self.n_lead : -1].copy()
        with np.errstate(over="ignore"):
            vec[self.diag_pos] = np.exp(vec[self.diag_pos])
            lam = LAMBDA_FLOOR + np.exp(theta[-1])
        chol = np.zeros((N, N))
        chol[self.tril] = vec
        return phi, psi, ds, gammas, chol, float(lam)


def pack_params(model: MultiplicativeVMAR, restriction: ReducedRankLeads | None = None) -> np.ndarray:
    """Flatten a model to the unconstrained optimization vector."""
    space = _ParamSpace(model.order, restriction.k if restriction else None)
    if restriction is None:
        return space.pack(model.phi, model.psi, model.sigma, model.lam)
    return space.pack(model.phi, (restriction.delta_star, restriction.gammas), model.sigma, model.lam)


def unpack_params(
    theta: np.ndarray, order: ModelOrder, k: int | None = None
) -> tuple[MultiplicativeVMAR, ReducedRankLeads | None]:
    """Inverse of :func:`pack_params`; always returns a lead-first model."""
    space = _ParamSpace(order, k)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (space.size,):
        raise ModelStructureError(f"theta has shape {theta.shape}, expected ({space.size},)")
    phi, psi, ds, gammas, chol, lam = space.unpack_raw(theta)
    sigma = chol @ chol.T
    sigma = 0.5 * (sigma + sigma.T)
    restriction = None
    if k is not None:
        restriction = ReducedRankLeads(order=order, k=k, delta_star=ds, gammas=gammas)
        psi = build_reduced_rank_leads(restriction)
    model = MultiplicativeVMAR(
        order=order, phi=phi, psi=psi, sigma=sigma, lam=lam,
        representation=Representation.LEAD_FIRST,
    )
    return model, restriction


def _panel_values(panel) -> np.ndarray:
    if isinstance(panel, TimeSeriesPanel):
        return panel.values
    values = np.asarray(panel, dtype=float)
    return values[:, None] if values.ndim == 1 else values


def _residual_segments(values: np.ndarray, r: int, s: int):
    """Views of the sample aligned so segment j multiplies A_j, j = -s..r."""
    t = values.shape[0]
    return [values[r - j : t - s - j] for j in range(-s, r + 1)]


def residuals(panel, model: MultiplicativeVMAR) -> np.ndarray:
    """Expanded-polynomial residuals eps_t = A(L) Y_t for t = r+1 .. T-s."""
    values = _panel_values(panel)
    r, s = model.order.r, model.order.s
    if values.shape[1] != model.order.N:
        raise ModelStructureError(
            f"panel has {values.shape[1]} series, model has N={model.order.N}"
        )
    if values.shape[0] <= r + s:
        raise InsufficientDataError(f"need more than r + s = {r + s} observations")
    coeffs = _expand_raw(model.phi, model.psi, model.representation)
    segments = _residual_segments(values, r, s)
    out = np.zeros((values.shape[0] - r - s, model.order.N))
    for seg, a in zip(segments, coeffs):
        out += seg @ a.T
    return out


def loglik(panel, model: MultiplicativeVMAR) -> float:
    """Conditional Student-t log likelihood over the T - r - s interior points."""
    values = _panel_values(panel)
    r, s, N = model.order.r, model.order.s, model.order.N
    if values.shape[0] <= r + s + N:
        raise InsufficientDataError(
            f"need more than r + s + N = {r + s + N} observations, got {values.shape[0]}"
        )
    eps = residuals(values, model)
    chol = np.linalg.cholesky(model.sigma)
    return float(_logpdf_rows_chol(eps, chol, model.lam).sum())


def _make_objective(values: np.ndarray, order: ModelOrder, k: int | None, margin: float):
    """Negative conditional log likelihood over the packed parameter vector."""
    space = _ParamSpace(order, k)
    r, s = order.r, order.s
    segments = _residual_segments(values, r, s)
    n_eff = values.shape[0] - r - s
    N = order.N
    rep = Representation.LEAD_FIRST

    def negloglik(theta: np.ndarray) -> float:
        phi, psi, _, _, chol, lam = space.unpack_raw(theta)
        if not (np.isfinite(lam) and np.all(np.isfinite(chol))):
            return np.inf
        if np.any(np.diag(chol) <= 0.0):
            return np.inf
        if polynomial_spectral_radius(phi) >= 1.0 - margin:
            return np.inf
        if polynomial_spectral_radius(psi) >= 1.0 - margin:
            return np.inf
        coeffs = _expand_raw(phi, psi, rep)
        eps = np.zeros((n_eff, N))
        for seg, a in zip(segments, coeffs):
            eps += seg @ a.T
        with np.errstate(over="ignore", invalid="ignore"):
            ll = _logpdf_rows_chol(eps, chol, lam).sum()
        return -ll if np.isfinite(ll) else np.inf

    return space, negloglik


def _initial_simplex(x0: np.ndarray, step: float = 0.1) -> np.ndarray:
    """Absolute-step simplex, so searches are translation equivariant."""
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    simplex[1:] += step * np.eye(n)
    return simplex


def _local_minimize(objective, x0: np.ndarray, opts: FitOptions):
    """Nelder-Mead with restart polishing; returns (x, f, converged, n_iter)."""
    f0 = objective(x0)
    if not np.isfinite(f0):
        return None
    x, f = x0, f0
    converged = False
    n_iter = 0
    for _ in range(3):
        res = minimize(
            objective,
            x,
            method="Nelder-Mead",
            options={
                "maxiter": opts.max_iter,
                "fatol": opts.tol,
                "xatol": 1e-7,
                "adaptive": True,
                "initial_simplex": _initial_simplex(x),
            },
        )
        n_iter += res.nit
        gain = f - res.fun
        if res.fun <= f:
            x, f = res.x, float(res.fun)
        if res.success or gain < opts.tol:
            converged = bool(res.success) or gain < opts.tol
            break
    return x, f, converged, n_iter


def _pseudo_causal_sigma(values: np.ndarray, p: int) -> np.ndarray:
    """Residual covariance of a causal VAR(p) least-squares fit (scale start)."""
    from .preprocess import var_ols

    t, n = values.shape
    if p > 0 and t > n * p + n + 2:
        return var_ols(values, p).sigma
    centered = values - values.mean(axis=0)
    sigma = centered.T @ centered / max(t - 1, 1)
    return sigma + 1e-8 * np.eye(n)


def _rescaled_stack(mats: np.ndarray, cap: float) -> np.ndarray:
    """Scale C_i by c^i so the companion spectral radius drops to ``cap``."""
    radius = polynomial_spectral_radius(mats)
    if radius <= cap or radius == 0.0:
        return mats
    c = cap / radius
    powers = c ** np.arange(1, mats.shape[0] + 1)
    return mats * powers[:, None, None]


def _random_start(space: _ParamSpace, rng: np.random.Generator, sigma0, lam0) -> np.ndarray:
    order, k = space.order, space.k
    N, r, s = order.N, order.r, order.s
    cap = RANDOM_START_RADIUS_CAP * rng.uniform(0.5, 1.0)
    phi = _rescaled_stack(rng.uniform(-1.0, 1.0, size=(r, N, N)), cap) if r else np.zeros((0, N, N))
    if k is None:
        psi = _rescaled_stack(rng.uniform(-1.0, 1.0, size=(s, N, N)), cap) if s else np.zeros((0, N, N))
        return space.pack(phi, psi, sigma0, lam0)
    m = N - k
    ds = rng.uniform(-1.0, 1.0, size=(k, m))
    gammas = rng.uniform(-1.0, 1.0, size=(s, m, N))
    dperp = np.vstack([-ds, np.eye(m)])
    psi = np.einsum("am,jmn->jan", dperp, gammas)
    radius = polynomial_spectral_radius(psi)
    if radius > cap:
        c = cap / radius
        gammas = gammas * (c ** np.arange(1, s + 1))[:, None, None]
    return space.pack(phi, (ds, gammas), sigma0, lam0)


def _seed_vector(space: _ParamSpace, model: MultiplicativeVMAR) -> np.ndarray:
    """Map an arbitrary lead-first model into this parameter space."""
    if space.k is None:
        return space.pack(model.phi, model.psi, model.sigma, model.lam)
    ds, gammas = decompose_reduced_rank(model.psi, space.k)
    return space.pack(model.phi, (ds, gammas), model.sigma, model.lam)


def fit(
    panel,
    order: ModelOrder,
    restriction: int | None = None,
    opts: FitOptions | None = None,
    extra_start_models: tuple = (),
    n_jobs: int = 1,
) -> FitResult:
    """Multi-start conditional ML fit of a (possibly rank-restricted) VMAR.

    Parameters
    ----------
    panel : TimeSeriesPanel or array_like, shape (T, N)
    order : ModelOrder
    restriction : int, optional
        Rank deficit k of the lead matrices (0 < k < N); None fits the
        unrestricted model.
    opts : FitOptions
    extra_start_models : tuple of MultiplicativeVMAR
        Additional seeded starts on top of the start-mode policy; used to
        chain nested fits so likelihoods are ordered by restriction strength.
    n_jobs : int
        Parallelism across starts.  Result selection is a deterministic
        reduction by (loglik, start index) either way.

    Raises
    ------
    EstimationError
        If every start fails, with per-start diagnostics attached.
    """
    opts = opts or FitOptions()
    if restriction is not None and order.s < 1:
        raise ModelStructureError("a rank restriction needs at least one lead (s >= 1)")
    values = _panel_values(panel)
    t, n = values.shape
    if n != order.N:
        raise ModelStructureError(f"panel has {n} series, order has N={order.N}")
    if not np.all(np.isfinite(values)):
        raise ModelStructureError("panel contains non-finite values")
    if t <= order.r + order.s + order.N:
        raise InsufficientDataError(
            f"need more than r + s + N = {order.r + order.s + order.N} observations, got {t}"
        )
    space, objective = _make_objective(values, order, restriction, opts.stationarity_margin)
    if t < 5 * space.n_coeff:
        warnings.warn(
            f"sample of {t} is short for {space.n_coeff} coefficients (below 5x)",
            UserWarning,
            stacklevel=2,
        )

    seeded: list[np.ndarray] = []
    if opts.start_mode in ("provided", "true_values"):
        seeded.extend(_seed_vector(space, m) for m in opts.initial_models)
    seeded.extend(_seed_vector(space, m) for m in extra_start_models)

    rng = np.random.default_rng(opts.seed)
    n_random = max(opts.n_starts - len(seeded), 0)
    sigma0 = lam0 = None
    if n_random:
        sigma0 = _pseudo_causal_sigma(values, order.r + order.s)
        lam0 = LAMBDA_START
    starts = seeded + [_random_start(space, rng, sigma0, lam0) for _ in range(n_random)]

    if n_jobs != 1 and len(starts) > 1:
        outcomes = Parallel(n_jobs=n_jobs)(
            delayed(_local_minimize)(objective, x0, opts) for x0 in starts
        )
    else:
        outcomes = [_local_minimize(objective, x0, opts) for x0 in starts]

    diagnostics = []
    best = None
    start_logliks = []
    for idx, outcome in enumerate(outcomes):
        if outcome is None:
            diagnostics.append({"start": idx, "reason": "non-finite objective at start"})
            start_logliks.append(float("nan"))
            continue
        x, f, converged, n_iter = outcome
        start_logliks.append(-f)
        diagnostics.append({"start": idx, "loglik": -f, "converged": converged, "n_iter": n_iter})
        if np.isfinite(f) and (best is None or f < best[1]):
            best = (x, f, converged, idx)
    if best is None:
        raise EstimationError("all optimization starts failed", diagnostics=diagnostics)

    model, fitted_restriction = unpack_params(best[0], order, restriction)
    if fitted_restriction is not None:
        fitted_restriction.validate_full_rank()
    return FitResult(
        model=model,
        restriction=fitted_restriction,
        loglik=-best[1],
        converged=best[2],
        n_effective=t - order.r - order.s,
        n_obs=t,
        start_index=best[3],
        start_logliks=start_logliks,
    )


@dataclass
class MarGridResult:
    """Outcome of scanning all (r, s) with r + s = p on one series."""

    r: int
    s: int
    result: FitResult
    cell_logliks: dict
    failures: dict


def fit_mar_grid(series, p: int, opts: FitOptions | None = None) -> MarGridResult:
    """Fit every univariate MAR(r, s) with r + s = p and keep the best likelihood."""
    if p < 1:
        raise ModelStructureError(f"total order p must be >= 1, got {p}")
    values = _panel_values(series)
    if values.shape[1] != 1:
        raise ModelStructureError("grid search applies to a single series")
    cells = {}
    failures = {}
    for r in range(p, -1, -1):
        s = p - r
        try:
            cells[(r, s)] = fit(values, ModelOrder(1, r, s), opts=opts)
        except (EstimationError, InsufficientDataError) as exc:
            failures[(r, s)] = str(exc)
    if not cells:
        raise EstimationError(
            f"every (r, s) cell with r + s = {p} failed", diagnostics=[failures]
        )
    (r, s), best = max(cells.items(), key=lambda kv: (kv[1].loglik, kv[0][0]))
    return MarGridResult(
        r=r,
        s=s,
        result=best,
        cell_logliks={k: v.loglik for k, v in cells.items()},
        failures=failures,
    )
