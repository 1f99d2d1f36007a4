"""Replication studies of rank-test detection frequencies.

Each design pairs a data-generating VMAR(1,1) with a truth label (which rank
deficit, if any, its lead matrix carries) and a list of comparisons to score.
A replication simulates one path, fits the models each comparison needs, and
records whether the LR test and each information criterion picked the correct
side.  Replications are seeded independently (base seed + index), so tallies
are identical whatever the execution order or degree of parallelism.
"""

from __future__ import annotations

import json
import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .distributions import chi2_quantile
from .errors import ModelStructureError, VMARError
from .estimate import FitOptions, fit
from .inference import _lr_stat
from .model import ModelOrder, MultiplicativeVMAR, Representation, check_stationarity, rho, rho_nested
from .simulate import SimulationConfig, simulate_vmar

__all__ = ["McTest", "McConfig", "McTestSummary", "McResult", "run", "builtin_designs"]


@dataclass(frozen=True)
class McTest:
    """One scored comparison: rank deficit ``null_k`` vs ``alt_k`` (None = full)."""

    null_k: int
    alt_k: int | None = None

    def label(self, n: int) -> str:
        return f"{n - self.null_k} vs {n if self.alt_k is None else n - self.alt_k}"


@dataclass(frozen=True)
class McConfig:
    """Everything one study needs: DGP, truth, sample size, tests, seeds."""

    name: str
    dgp: MultiplicativeVMAR
    truth_k: int  # 0 = no common bubble, else the DGP's rank deficit
    n_obs: int
    n_reps: int = 300
    tests: tuple = ()
    level: float = 0.95
    base_seed: int = 0
    fit_opts: FitOptions | None = None
    burn_in: int | None = None

    def __post_init__(self):
        if self.n_reps < 1:
            raise ModelStructureError(f"n_reps must be >= 1, got {self.n_reps}")
        if not check_stationarity(self.dgp):
            raise ModelStructureError(f"design {self.name!r} has a non-stationary DGP")
        if not (0 <= self.truth_k < self.dgp.order.N):
            raise ModelStructureError(f"truth_k must lie in [0, N), got {self.truth_k}")
        object.__setattr__(self, "tests", tuple(self.tests))
        if not self.tests:
            raise ModelStructureError("config needs at least one test")
        if self.fit_opts is None:
            object.__setattr__(
                self,
                "fit_opts",
                FitOptions(n_starts=1, start_mode="true_values", initial_models=(self.dgp,)),
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dgp": self.dgp.to_dict(),
            "truth_k": self.truth_k,
            "n_obs": self.n_obs,
            "n_reps": self.n_reps,
            "tests": [{"null_k": t.null_k, "alt_k": t.alt_k} for t in self.tests],
            "level": self.level,
            "base_seed": self.base_seed,
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "McConfig":
        dgp = MultiplicativeVMAR.from_dict(d["dgp"])
        return cls(
            name=str(d.get("name", "custom")),
            dgp=dgp,
            truth_k=int(d["truth_k"]),
            n_obs=int(d["n_obs"]),
            n_reps=int(d.get("n_reps", 300)),
            tests=tuple(
                McTest(int(t["null_k"]), None if t.get("alt_k") is None else int(t["alt_k"]))
                for t in d["tests"]
            ),
            level=float(d.get("level", 0.95)),
            base_seed=int(d.get("base_seed", 0)),
            burn_in=d.get("burn_in"),
        )


@dataclass
class McTestSummary:
    """Correct-decision frequencies (with binomial standard errors) for one test."""

    label: str
    null_k: int
    alt_k: int | None
    n_ok: int
    freq: dict = field(default_factory=dict)
    se: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rank_test": self.label,
            "null_rank_deficit": self.null_k,
            "alt_rank_deficit": self.alt_k,
            "n_successful_reps": self.n_ok,
            "freq": self.freq,
            "se": self.se,
        }


@dataclass
class McResult:
    config: McConfig
    tests: list
    n_failures: int
    failure_messages: list
    elapsed_seconds: float

    def to_dict(self) -> dict:
        # elapsed_seconds stays off the payload so seeded outputs are
        # byte-reproducible; it remains available on the object.
        return {
            "config": self.config.to_dict(),
            "tests": [t.to_dict() for t in self.tests],
            "n_failures": self.n_failures,
            "failure_messages": self.failure_messages[:20],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["design", "rank_test", "LR", "BIC", "AIC", "HQC", "se_LR", "n_reps_ok", "n_failures"]
            )
            for t in self.tests:
                writer.writerow(
                    [
                        self.config.name,
                        t.label,
                        f"{t.freq['lr']:.4f}",
                        f"{t.freq['bic']:.4f}",
                        f"{t.freq['aic']:.4f}",
                        f"{t.freq['hqc']:.4f}",
                        f"{t.se['lr']:.4f}",
                        t.n_ok,
                        self.n_failures,
                    ]
                )


def _replication(config: McConfig, rep: int):
    """Simulate, fit, and score one replication; returns decisions or an error string."""
    seed = config.base_seed + rep
    try:
        panel = simulate_vmar(
            config.dgp, SimulationConfig(n_obs=config.n_obs, burn_in=config.burn_in, seed=seed)
        )
        order = config.dgp.order
        deficits = sorted({t.null_k for t in config.tests}, reverse=True)
        needs_full = any(t.alt_k is None for t in config.tests)
        alt_deficits = sorted({t.alt_k for t in config.tests if t.alt_k is not None}, reverse=True)
        schedule = sorted(set(deficits) | set(alt_deficits), reverse=True) + ([None] if needs_full else [])
        fits = {}
        chain = []
        for k in schedule:
            result = fit(
                panel.values,
                order,
                restriction=k,
                opts=config.fit_opts,
                extra_start_models=tuple(chain),
            )
            fits[k] = result
            chain.append(result.model)
        n = order.N
        log_t = np.log(config.n_obs)
        decisions = {}
        for t in config.tests:
            ll_null, ll_alt = fits[t.null_k].loglik, fits[t.alt_k].loglik
            stat = _lr_stat(ll_null, ll_alt, f"replication {rep}")
            if t.alt_k is None:
                df = rho(n, t.null_k, order.s)
            else:
                df = rho_nested(n, t.null_k, t.alt_k, order.s)
            reject = stat > chi2_quantile(config.level, df)
            null_holds = config.truth_k >= t.null_k
            restricted_wins = {
                "bic": bool(stat - df * log_t < 0.0),
                "aic": bool(stat - 2.0 * df < 0.0),
                "hqc": bool(stat - 2.0 * df * np.log(log_t) < 0.0),
            }
            decisions[(t.null_k, t.alt_k)] = {
                "lr": (not reject) if null_holds else reject,
                **{
                    ic: (wins if null_holds else not wins)
                    for ic, wins in restricted_wins.items()
                },
            }
        return decisions
    except VMARError as exc:
        return f"rep {rep}: {exc}"


def run(config: McConfig, n_jobs: int = 1) -> McResult:
    """Execute the study; per-replication failures are counted, never fatal."""
    t0 = time.perf_counter()
    if n_jobs != 1 and config.n_reps > 1:
        outcomes = Parallel(n_jobs=n_jobs)(
            delayed(_replication)(config, rep) for rep in range(config.n_reps)
        )
    else:
        outcomes = [_replication(config, rep) for rep in range(config.n_reps)]

    failures = [o for o in outcomes if isinstance(o, str)]
    successes = [o for o in outcomes if not isinstance(o, str)]
    summaries = []
    n = config.dgp.order.N
    for t in config.tests:
        key = (t.null_k, t.alt_k)
        n_ok = len(successes)
        freq, se = {}, {}
        for ic in ("lr", "bic", "aic", "hqc"):
            hits = sum(1 for d in successes if d[key][ic])
            f = hits / n_ok if n_ok else float("nan")
            freq[ic] = f
            se[ic] = float(np.sqrt(f * (1.0 - f) / n_ok)) if n_ok else float("nan")
        summaries.append(
            McTestSummary(
                label=t.label(n), null_k=t.null_k, alt_k=t.alt_k, n_ok=n_ok, freq=freq, se=se
            )
        )
    return McResult(
        config=config,
        tests=summaries,
        n_failures=len(failures),
        failure_messages=failures,
        elapsed_seconds=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# the built-in study grid

_BIV_PHI = [[0.5, 0.1], [0.2, 0.3]]
_BIV_SIGMA = [[4.0, 0.5], [0.5, 1.0]]
_BIV_PSI_CB = [[0.3, 0.25], [0.6, 0.5]]  # [1, 2]' outer [0.3, 0.25]
_BIV_PSI_FULL = [[0.1, 0.4], [0.6, 0.5]]

_TRI_PHI = [[0.5, 0.1, 0.2], [0.2, 0.3, 0.1], [0.1, 0.4, 0.6]]
_TRI_SIGMA = [[2.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 4.0]]
_TRI_PSI_CB1 = [[0.3, 0.1, 0.1], [0.2, 0.3, 0.4], [0.7, 0.35, 0.4]]  # rank 2
_TRI_PSI_CB2 = [[0.15, 0.25, 0.4], [0.3, 0.5, 0.8], [0.075, 0.125, 0.2]]  # rank 1
_TRI_PSI_FULL = [[0.3, 0.2, 0.1], [0.2, 0.5, 0.4], [0.7, 0.125, 0.2]]


def _design(name, phi, psi, sigma, lam, t, truth_k, tests) -> McConfig:
    n = len(sigma)
    dgp = MultiplicativeVMAR(
        order=ModelOrder(n, 1, 1),
        phi=[phi],
        psi=[psi],
        sigma=sigma,
        lam=lam,
        representation=Representation.LEAD_FIRST,
    )
    return McConfig(name=name, dgp=dgp, truth_k=truth_k, n_obs=t, tests=tuple(tests))


def builtin_designs() -> "OrderedDict[str, McConfig]":
    """The bivariate and trivariate VMAR(1,1) study grids, keyed by name.

    Names follow ``{biv|tri}-{branch}-l{15|3}-t{500|1000}`` where the branch is
    h0/h1 for the bivariate grid and cb1/cb2/h1 (rank deficit of the DGP) for
    the trivariate grid, and l15 denotes degrees of freedom 1.5.
    """
    designs = OrderedDict()
    lam_tag = {3.0: "l3", 1.5: "l15"}
    for lam in (3.0, 1.5):
        for t in (500, 1000):
            suffix = f"{lam_tag[lam]}-t{t}"
            designs[f"biv-h0-{suffix}"] = _design(
                f"biv-h0-{suffix}", _BIV_PHI, _BIV_PSI_CB, _BIV_SIGMA, lam, t,
                truth_k=1, tests=[McTest(1, None)],
            )
            designs[f"biv-h1-{suffix}"] = _design(
                f"biv-h1-{suffix}", _BIV_PHI, _BIV_PSI_FULL, _BIV_SIGMA, lam, t,
                truth_k=0, tests=[McTest(1, None)],
            )
            designs[f"tri-cb1-{suffix}"] = _design(
                f"tri-cb1-{suffix}", _TRI_PHI, _TRI_PSI_CB1, _TRI_SIGMA, lam, t,
                truth_k=1, tests=[McTest(1, None)],
            )
            designs[f"tri-cb2-{suffix}"] = _design(
                f"tri-cb2-{suffix}", _TRI_PHI, _TRI_PSI_CB2, _TRI_SIGMA, lam, t,
                truth_k=2, tests=[McTest(2, None)],
            )
            designs[f"tri-h1-{suffix}"] = _design(
                f"tri-h1-{suffix}", _TRI_PHI, _TRI_PSI_FULL, _TRI_SIGMA, lam, t,
                truth_k=0, tests=[McTest(1, None), McTest(2, None)],
            )
    return designs
