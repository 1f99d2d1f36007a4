"""Model representations for vector mixed causal-noncausal autoregressions.

A VMAR(r, s) couples a lag polynomial ``Phi(L) = I - Phi_1 L - ... - Phi_r L^r``
with a lead polynomial ``Psi(L^-1) = I - Psi_1 L^-1 - ... - Psi_s L^-s``.  The
two matrix polynomials do not commute, so the model has two multiplicative
representations (lead polynomial applied first, or lag polynomial applied
first).  Both share a single expanded two-sided polynomial and hence a single
additive form, which is what this module computes.

The reduced-rank machinery restricts all lead matrices to a common column
space, which is the algebraic statement of a common bubble: some k independent
linear combinations of the series carry no forward-looking dynamics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateModelError, ModelStructureError

__all__ = [
    "Representation",
    "ModelOrder",
    "MultiplicativeVMAR",
    "ExpandedPolynomial",
    "AdditiveVMAR",
    "ReducedRankLeads",
    "StationarityReport",
    "expand",
    "to_additive",
    "build_reduced_rank_leads",
    "decompose_reduced_rank",
    "check_stationarity",
    "companion_matrix",
    "polynomial_spectral_radius",
    "param_count",
    "rho",
    "rho_nested",
]


class Representation(Enum):
    """Ordering of the two non-commuting polynomial factors."""

    LEAD_FIRST = "lead_first"
    LAG_FIRST = "lag_first"


def _as_coeff_stack(mats, n_mats: int, dim: int, name: str) -> np.ndarray:
    """Normalize a sequence of dim x dim matrices to a (n_mats, dim, dim) array."""
    arr = np.asarray(mats, dtype=float)
    if n_mats == 0:
        if arr.size != 0:
            raise ModelStructureError(f"{name}: expected no matrices, got {arr.shape}")
        return np.zeros((0, dim, dim))
    if arr.ndim == 2 and n_mats == 1:
        arr = arr[None, :, :]
    if arr.shape != (n_mats, dim, dim):
        raise ModelStructureError(
            f"{name}: expected {n_mats} matrices of shape ({dim}, {dim}), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ModelStructureError(f"{name}: non-finite entries")
    return arr


def _check_spd(mat: np.ndarray, name: str) -> np.ndarray:
    """Validate symmetry and positive definiteness; return the array."""
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ModelStructureError(f"{name} must be square, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
        raise ModelStructureError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(f"{name} is not positive definite") from None
    return mat


@dataclass(frozen=True)
class ModelOrder:
    """Dimension and polynomial orders of a VMAR(r, s).

    Parameters
    ----------
    N : int
        Cross-sectional dimension (>= 1).
    r : int
        Number of lag matrices (>= 0).
    s : int
        Number of lead matrices (>= 0).
    """

    N: int
    r: int
    s: int

    def __post_init__(self):
        if self.N < 1:
            raise ModelStructureError(f"N must be >= 1, got {self.N}")
        if self.r < 0 or self.s < 0:
            raise ModelStructureError(f"orders must be non-negative, got r={self.r}, s={self.s}")


@dataclass(frozen=True)
class MultiplicativeVMAR:
    """A VMAR(r, s) in one of its two multiplicative representations.

    Attributes
    ----------
    order : ModelOrder
    phi : ndarray, shape (r, N, N)
        Lag coefficient matrices.
    psi : ndarray, shape (s, N, N)
        Lead coefficient matrices.
    sigma : ndarray, shape (N, N)
        Symmetric positive-definite scale of the multivariate Student-t errors.
    lam : float
        Degrees of freedom of the error distribution (> 0).
    representation : Representation
        Which factor is applied first when forming the product polynomial.
    """

    order: ModelOrder
    phi: np.ndarray
    psi: np.ndarray
    sigma: np.ndarray
    lam: float
    representation: Representation = Representation.LEAD_FIRST

    def __post_init__(self):
        N, r, s = self.order.N, self.order.r, self.order.s
        object.__setattr__(self, "phi", _as_coeff_stack(self.phi, r, N, "phi"))
        object.__setattr__(self, "psi", _as_coeff_stack(self.psi, s, N, "psi"))
        object.__setattr__(self, "sigma", _check_spd(self.sigma, "sigma"))
        if self.sigma.shape[0] != N:
            raise ModelStructureError(
                f"sigma has dimension {self.sigma.shape[0]}, model has N={N}"
            )
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ModelStructureError(f"degrees of freedom must be positive, got {self.lam}")
        if not isinstance(self.representation, Representation):
            object.__setattr__(self, "representation", Representation(self.representation))

    def to_dict(self) -> dict:
        return {
            "N": self.order.N,
            "r": self.order.r,
            "s": self.order.s,
            "phi": [m.tolist() for m in self.phi],
            "psi": [m.tolist() for m in self.psi],
            "sigma": self.sigma.tolist(),
            "lambda": float(self.lam),
            "representation": self.representation.value,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "MultiplicativeVMAR":
        try:
            order = ModelOrder(int(d["N"]), int(d["r"]), int(d["s"]))
            return cls(
                order=order,
                phi=np.asarray(d["phi"], dtype=float).reshape(order.r, order.N, order.N),
                psi=np.asarray(d["psi"], dtype=float).reshape(order.s, order.N, order.N),
                sigma=np.asarray(d["sigma"], dtype=float),
                lam=float(d["lambda"]),
                representation=Representation(d.get("representation", "lead_first")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (ModelStructureError, DegenerateModelError)):
                raise
            raise ModelStructureError(f"malformed model mapping: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "MultiplicativeVMAR":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelStructureError(f"invalid model JSON: {exc}") from exc
        return cls.from_dict(d)


@dataclass(frozen=True)
class ExpandedPolynomial:
    """Coefficients A_j of the expanded product polynomial, j = -s, ..., r.

    ``coeffs[j + s]`` holds A_j, so ``coeffs[s]`` is the leading matrix A_0.
    """

    order: ModelOrder
    coeffs: np.ndarray

    def __post_init__(self):
        N, r, s = self.order.N, self.order.r, self.order.s
        object.__setattr__(
            self, "coeffs", _as_coeff_stack(self.coeffs, r + s + 1, N, "coeffs")
        )

    def coeff(self, j: int) -> np.ndarray:
        """Return A_j for j in {-s, ..., r}."""
        if not (-self.order.s <= j <= self.order.r):
            raise ModelStructureError(f"power {j} outside [-{self.order.s}, {self.order.r}]")
        return self.coeffs[j + self.order.s]

    @property
    def a0(self) -> np.ndarray:
        return self.coeffs[self.order.s]


@dataclass(frozen=True)
class AdditiveVMAR:
    """Additive (expanded) form: Y_t = sum_i B_i Y_{t-i} + sum_j B_{-j} Y_{t+j} + eta_t."""

    order: ModelOrder
    b_lag: np.ndarray
    b_lead: np.ndarray
    omega: np.ndarray
    lam: float

    def __post_init__(self):
        N, r, s = self.order.N, self.order.r, self.order.s
        object.__setattr__(self, "b_lag", _as_coeff_stack(self.b_lag, r, N, "b_lag"))
        object.__setattr__(self, "b_lead", _as_coeff_stack(self.b_lead, s, N, "b_lead"))
        object.__setattr__(self, "omega", _check_spd(self.omega, "omega"))
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ModelStructureError(f"degrees of freedom must be positive, got {self.lam}")

    def to_dict(self) -> dict:
        return {
            "b_lag": [m.tolist() for m in self.b_lag],
            "b_lead": [m.tolist() for m in self.b_lead],
            "omega": self.omega.tolist(),
            "lambda": float(self.lam),
        }


@dataclass(frozen=True)
class ReducedRankLeads:
    """Common-column-space factorization of all lead matrices.

    The annihilating combinations are normalized as ``delta' = [I_k, delta_star]``
    (k x N), and the complement is pinned to ``delta_perp = [-delta_star; I_{N-k}]``
    (N x (N-k)) so that ``delta' delta_perp = 0`` holds exactly.  Each lead matrix
    is ``Psi_j = delta_perp @ gammas[j]`` with gammas[j] of shape (N-k, N).
    """

    order: ModelOrder
    k: int
    delta_star: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        N, s = self.order.N, self.order.s
        if not (0 < self.k < N):
            raise ModelStructureError(f"rank deficit k must satisfy 0 < k < N, got k={self.k}")
        ds = np.asarray(self.delta_star, dtype=float)
        if ds.shape != (self.k, N - self.k):
            raise ModelStructureError(
                f"delta_star must have shape ({self.k}, {N - self.k}), got {ds.shape}"
            )
        object.__setattr__(self, "delta_star", ds)
        g = np.asarray(self.gammas, dtype=float)
        if g.shape != (s, N - self.k, N):
            raise ModelStructureError(
                f"gammas must have shape ({s}, {N - self.k}, {N}), got {g.shape}"
            )
        object.__setattr__(self, "gammas", g)
        if not (np.all(np.isfinite(ds)) and np.all(np.isfinite(g))):
            raise ModelStructureError("reduced-rank parameters must be finite")

    @property
    def delta(self) -> np.ndarray:
        """The N x k matrix of annihilating combinations (delta' = [I_k, delta_star])."""
        return np.vstack([np.eye(self.k), self.delta_star.T])

    @property
    def delta_perp(self) -> np.ndarray:
        """The N x (N-k) complement [-delta_star; I_{N-k}]."""
        return np.vstack([-self.delta_star, np.eye(self.order.N - self.k)])

    def validate_full_rank(self, tol: float = 1e-10) -> None:
        """Require each loading matrix to have full row rank N - k.

        Called when a fitted restriction is reported, not during optimization
        (search paths may pass through rank-deficient points).
        """
        m = self.order.N - self.k
        for j, g in enumerate(self.gammas):
            sv = np.linalg.svd(g, compute_uv=False)
            if sv[m - 1] <= tol * max(sv[0], 1.0):
                raise DegenerateModelError(
                    f"loading matrix {j + 1} is rank deficient (smallest singular value {sv[m - 1]:.2e})"
                )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "delta_star": self.delta_star.tolist(),
            "gammas": [g.tolist() for g in self.gammas],
        }


# ---------------------------------------------------------------------------
# polynomial expansion


def _expand_raw(phi: np.ndarray, psi: np.ndarray, representation: Representation) -> np.ndarray:
    """Convolution of the two matrix polynomial factors, no validation.

    Returns the (r + s + 1, N, N) stack of product coefficients A_j with A_{-s}
    first.  The lead factor carries powers -s..0 (identity at 0, -Psi_l at -l),
    the lag factor powers 0..r.  Matrix order inside each cross product follows
    the representation: lead-first multiplies Psi_l @ Phi_m, lag-first
    Phi_m @ Psi_l.
    """
    r, s = phi.shape[0], psi.shape[0]
    N = phi.shape[1] if r else psi.shape[1]
    out = np.zeros((r + s + 1, N, N))
    eye = np.eye(N)
    out[s] += eye  # I * I
    for m in range(1, r + 1):
        out[s + m] -= phi[m - 1]  # I * (-Phi_m)
    for l in range(1, s + 1):
        out[s - l] -= psi[l - 1]  # (-Psi_l) * I
    for l in range(1, s + 1):
        for m in range(1, r + 1):
            if representation is Representation.LEAD_FIRST:
                cross = psi[l - 1] @ phi[m - 1]
            else:
                cross = phi[m - 1] @ psi[l - 1]
            out[s + m - l] += cross  # (-Psi_l) * (-Phi_m) at power m - l
    return out


def expand(model: MultiplicativeVMAR) -> ExpandedPolynomial:
    """Expand the product of the lag and lead polynomial factors.

    Returns the two-sided polynomial A(L) = sum_{j=-s}^{r} A_j L^j with
    A_j ordered from j = -s to j = r.
    """
    coeffs = _expand_raw(model.phi, model.psi, model.representation)
    return ExpandedPolynomial(order=model.order, coeffs=coeffs)


def to_additive(model: MultiplicativeVMAR, rcond_min: float = 1e-10) -> AdditiveVMAR:
    """Convert to the additive form shared by both representations.

    The additive coefficients are B_i = -A_0^{-1} A_i (i = 1..r) and
    B_{-j} = -A_0^{-1} A_{-j} (j = 1..s); the error scale becomes
    Omega = A_0^{-1} Sigma A_0^{-T}.

    Raises
    ------
    DegenerateModelError
        If the leading coefficient A_0 has reciprocal condition number below
        ``rcond_min``.
    """
    poly = expand(model)
    a0 = poly.a0
    sv = np.linalg.svd(a0, compute_uv=False)
    if sv[-1] <= rcond_min * sv[0]:
        rcond = sv[-1] / sv[0] if sv[0] > 0 else 0.0
        raise DegenerateModelError(
            f"leading coefficient A_0 is numerically singular (rcond {rcond:.2e})"
        )
    a0_inv = np.linalg.inv(a0)
    r, s = model.order.r, model.order.s
    b_lag = np.stack([-a0_inv @ poly.coeff(i) for i in range(1, r + 1)]) if r else np.zeros((0,) + a0.shape)
    b_lead = np.stack([-a0_inv @ poly.coeff(-j) for j in range(1, s + 1)]) if s else np.zeros((0,) + a0.shape)
    omega = a0_inv @ model.sigma @ a0_inv.T
    omega = 0.5 * (omega + omega.T)
    return AdditiveVMAR(order=model.order, b_lag=b_lag, b_lead=b_lead, omega=omega, lam=model.lam)


# ---------------------------------------------------------------------------
# reduced-rank construction


def build_reduced_rank_leads(spec: ReducedRankLeads) -> np.ndarray:
    """Assemble the lead matrices Psi_j = delta_perp @ gammas[j].

    Returns an (s, N, N) stack; each matrix has rank at most N - k.
    """
    dperp = spec.delta_perp
    return np.stack([dperp @ g for g in spec.gammas]) if spec.order.s else np.zeros(
        (0, spec.order.N, spec.order.N)
    )


def decompose_reduced_rank(psi: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Best (delta_star, gammas) under the canonical normalization for given leads.

    Exact when the stacked lead matrices genuinely share a column space of
    dimension N - k and that space admits the [-delta_star; I] normalization;
    otherwise the closest fit in least squares.  Used to build starting values,
    so approximation is acceptable there.

    Parameters
    ----------
    psi : ndarray, shape (s, N, N)
    k : int
        Rank deficit, 0 < k < N.

    Returns
    -------
    delta_star : ndarray, shape (k, N - k)
    gammas : ndarray, shape (s, N - k, N)
    """
    psi = np.asarray(psi, dtype=float)
    s, N = psi.shape[0], psi.shape[1]
    if not (0 < k < N):
        raise ModelStructureError(f"rank deficit k must satisfy 0 < k < N, got k={k}")
    m = N - k
    if s == 0:
        return np.zeros((k, m)), np.zeros((0, m, N))
    stacked = np.concatenate(list(psi), axis=1)
    u, _, _ = np.linalg.svd(stacked)
    basis = u[:, :m]  # leading directions of the shared column space
    top, bottom = basis[:k, :], basis[k:, :]
    # Rotate the basis so its bottom block is the identity; fall back to a
    # pseudo-inverse when the normalization is (near-)inadmissible.
    if abs(np.linalg.det(bottom)) > 1e-12:
        rot = np.linalg.inv(bottom)
    else:
        rot = np.linalg.pinv(bottom)
    delta_star = -top @ rot
    dperp = np.vstack([-delta_star, np.eye(m)])
    dperp_pinv = np.linalg.pinv(dperp)
    gammas = np.stack([dperp_pinv @ p for p in psi]) if s else np.zeros((0, m, N))
    return delta_star, gammas


# ---------------------------------------------------------------------------
# stationarity


def companion_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Companion matrix of the polynomial I - C_1 z - ... - C_p z^p.

    ``coeffs`` is the (p, N, N) stack [C_1, ..., C_p]; for p = 0 the companion
    is the empty 0 x 0 matrix.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p = coeffs.shape[0]
    if p == 0:
        return np.zeros((0, 0))
    N = coeffs.shape[1]
    comp = np.zeros((N * p, N * p))
    comp[:N, :] = np.concatenate(list(coeffs), axis=1)
    if p > 1:
        comp[N:, :-N] = np.eye(N * (p - 1))
    return comp


def polynomial_spectral_radius(coeffs: np.ndarray) -> float:
    """Spectral radius of the companion matrix; 0.0 for an empty polynomial."""
    comp = companion_matrix(coeffs)
    if comp.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


@dataclass(frozen=True)
class StationarityReport:
    """Verdict plus the two companion spectral radii behind it."""

    stationary: bool
    lag_radius: float
    lead_radius: float
    margin: float

    def __bool__(self) -> bool:
        return self.stationary


def check_stationarity(model: MultiplicativeVMAR, margin: float = 1e-6) -> StationarityReport:
    """True iff the roots of det Phi(z) and det Psi(z) lie outside the unit circle.

    Implemented as companion spectral radii strictly below ``1 - margin``.
    """
    lag_r = polynomial_spectral_radius(model.phi)
    lead_r = polynomial_spectral_radius(model.psi)
    ok = (lag_r < 1.0 - margin) and (lead_r < 1.0 - margin)
    return StationarityReport(ok, lag_r, lead_r, margin)


# ---------------------------------------------------------------------------
# parameter counting


def rho(N: int, k: int, s: int) -> int:
    """Number of lead-coefficient restrictions imposed by rank deficit k."""
    if not (0 < k < N):
        raise ModelStructureError(f"rank deficit k must satisfy 0 < k < N, got k={k}")
    if s < 0:
        raise ModelStructureError(f"s must be non-negative, got s={s}")
    return k * k - N * k * (1 - s)


def rho_nested(N: int, k: int, l: int, s: int) -> int:
    """Free-parameter difference between rank deficits k and l (l < k).

    Computed by direct counting as rho(N, k, s) - rho(N, l, s), which is
    positive for k > l.
    """
    if not (0 < l < k < N):
        raise ModelStructureError(f"need 0 < l < k < N, got l={l}, k={k}, N={N}")
    return rho(N, k, s) - rho(N, l, s)


def param_count(order: ModelOrder, k: int | None = None) -> int:
    """Number of free lag/lead coefficients, optionally under rank deficit k."""
    ku = order.N * order.N * (order.r + order.s)
    if k is None:
        return ku
    return ku - rho(order.N, k, order.s)
