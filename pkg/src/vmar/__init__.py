"""Vector mixed causal-noncausal autoregressions.

Simulation, multivariate Student-t maximum likelihood estimation, and
common-bubble detection through reduced-rank restrictions on the lead
polynomial.
"""

__version__ = "0.1.0"

from .distributions import (
    JarqueBeraResult,
    MvtParams,
    chi2_quantile,
    chi2_sf,
    jarque_bera,
    mvt_logpdf,
    mvt_sample,
)
from .errors import (
    DataInputError,
    DegenerateModelError,
    EstimationError,
    InsufficientDataError,
    InvalidModelError,
    ModelStructureError,
    VMARError,
)
from .estimate import (
    FitOptions,
    FitResult,
    MarGridResult,
    fit,
    fit_mar_grid,
    loglik,
    pack_params,
    unpack_params,
)
from .estimators import HPDetrend, VMAREstimator
from .inference import CBTestReport, InfoCriteria, LRTest, cb_scan, info_criteria, lr_test
from .model import (
    AdditiveVMAR,
    ExpandedPolynomial,
    ModelOrder,
    MultiplicativeVMAR,
    ReducedRankLeads,
    Representation,
    StationarityReport,
    build_reduced_rank_leads,
    check_stationarity,
    decompose_reduced_rank,
    expand,
    param_count,
    rho,
    rho_nested,
    to_additive,
)
from .montecarlo import McConfig, McResult, McTest, builtin_designs, run
from .panel import TimeSeriesPanel
from .preprocess import (
    DEFAULT_HP_SMOOTHING,
    HPResult,
    diagnostics,
    hp_filter,
    hp_filter_panel,
    select_var_order,
    var_ols,
)
from .simulate import SimulationConfig, default_burn_in, simulate_vmar, two_stage_recursion

__all__ = [
    "__version__",
    # model
    "ModelOrder",
    "MultiplicativeVMAR",
    "ExpandedPolynomial",
    "AdditiveVMAR",
    "ReducedRankLeads",
    "Representation",
    "StationarityReport",
    "expand",
    "to_additive",
    "build_reduced_rank_leads",
    "decompose_reduced_rank",
    "check_stationarity",
    "param_count",
    "rho",
    "rho_nested",
    # distributions
    "MvtParams",
    "mvt_logpdf",
    "mvt_sample",
    "chi2_sf",
    "chi2_quantile",
    "jarque_bera",
    "JarqueBeraResult",
    # panel / simulation
    "TimeSeriesPanel",
    "SimulationConfig",
    "simulate_vmar",
    "two_stage_recursion",
    "default_burn_in",
    # estimation
    "FitOptions",
    "FitResult",
    "MarGridResult",
    "fit",
    "fit_mar_grid",
    "loglik",
    "pack_params",
    "unpack_params",
    # inference
    "LRTest",
    "lr_test",
    "InfoCriteria",
    "info_criteria",
    "CBTestReport",
    "cb_scan",
    # preprocessing
    "hp_filter",
    "hp_filter_panel",
    "HPResult",
    "DEFAULT_HP_SMOOTHING",
    "select_var_order",
    "var_ols",
    "diagnostics",
    # monte carlo
    "McTest",
    "McConfig",
    "McResult",
    "run",
    "builtin_designs",
    # sklearn-style wrappers
    "VMAREstimator",
    "HPDetrend",
    # errors
    "VMARError",
    "ModelStructureError",
    "DegenerateModelError",
    "InvalidModelError",
    "DataInputError",
    "InsufficientDataError",
    "EstimationError",
]
