"""Numerical laboratory for functional-inequality constants of Gibbs measures.

Estimates and cross-validates gradient-domination (PL), Poincare, and
log-Sobolev constants attached to a potential and its low-temperature Gibbs
measures, including the scaled t -> 0 limits.
"""

from .errors import NumericalError, PreconditionError
from .potentials import (
    AnalyticConstants,
    Potential,
    Smoothness,
    check_derivatives,
    combine_separable,
    get_potential,
)
from .measures import (
    GibbsGrid,
    TestDensity,
    build_gibbs,
    density_from_masses,
    fisher_information,
    gaussian_density,
    gibbs_to_csv,
    kl_divergence,
    laplace_gap,
    rescaled_moments,
)
from .pl import (
    ConstantEstimate,
    hessian_floor_check,
    pl_constant_dynamic,
    pl_constant_static,
    quadratic_growth_margin,
)
from .poincare import (
    LyapunovParams,
    lyapunov_bound_formula,
    lyapunov_criterion_verify,
    muckenhoupt_bracket,
    poincare_spectral,
    select_lyapunov_params,
)
from .logsobolev import (
    defective_lsi_constants,
    ls_lower_bound_search,
    ls_upper_bound,
    ls_variational,
    lsi_ratio,
    tighten,
)
from .dynamics import (
    EnsembleConfig,
    ParticleEnsemble,
    TrajectoryRecord,
    empirical_kl_decay,
    fit_decay_rate,
    gradient_flow_run,
    langevin_run,
)
from .sweep import SweepConfig, SweepRow, SweepSummary, render_outputs, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AnalyticConstants",
    "ConstantEstimate",
    "EnsembleConfig",
    "GibbsGrid",
    "LyapunovParams",
    "NumericalError",
    "ParticleEnsemble",
    "Potential",
    "PreconditionError",
    "Smoothness",
    "SweepConfig",
    "SweepRow",
    "SweepSummary",
    "TestDensity",
    "TrajectoryRecord",
    "build_gibbs",
    "check_derivatives",
    "combine_separable",
    "defective_lsi_constants",
    "density_from_masses",
    "empirical_kl_decay",
    "fisher_information",
    "fit_decay_rate",
    "gaussian_density",
    "get_potential",
    "gibbs_to_csv",
    "gradient_flow_run",
    "hessian_floor_check",
    "kl_divergence",
    "langevin_run",
    "laplace_gap",
    "ls_lower_bound_search",
    "ls_upper_bound",
    "ls_variational",
    "lsi_ratio",
    "lyapunov_bound_formula",
    "lyapunov_criterion_verify",
    "muckenhoupt_bracket",
    "pl_constant_dynamic",
    "pl_constant_static",
    "poincare_spectral",
    "quadratic_growth_margin",
    "render_outputs",
    "rescaled_moments",
    "run_sweep",
    "select_lyapunov_params",
    "tighten",
]
