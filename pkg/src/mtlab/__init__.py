"""mtlab: a numerical laboratory for weighted Moser-Trudinger functionals.

The package verifies the exact change-of-variables identities behind the
weighted exponential inequalities, reproduces the concentration blow-up
experiments that witness the critical coefficient, and searches for
maximizers of the associated constrained ratio functionals.
"""

__version__ = "0.1.0"

from .errors import (
    FinitenessError,
    NonconvergentError,
    ParameterError,
    SupercriticalError,
    ZeroDenominatorError,
)
from .exponents import (
    ExponentConfig,
    ball_volume,
    config_from_text,
    config_to_text,
    critical_alpha,
    make_config,
    moser_constant,
    sphere_area,
)
from .functionals import (
    FunctionalReport,
    adachi_tanaka_ratio,
    ckn_ratio,
    exp_power_ratio,
    exp_ratio,
    phi_ratio,
    ratio_by_kind,
)
from .optimize import (
    MaximizerResult,
    OptimizerParams,
    estimate_AT,
    estimate_MT,
    maximize_ratio,
)
from .profiles import (
    ComposedProfile,
    RadialProfile,
    evaluate,
    make_profile,
    moser_sequence,
    moser_sequence_q,
    random_profile,
)
from .quadrature import (
    QuadratureSettings,
    exp_functional,
    grad_norm,
    phi_functional,
    phi_series,
    weighted_norm,
)
from .transforms import (
    IdentityReport,
    LogProfile,
    dilate,
    jacobian_det,
    log_substitution,
    peel_map,
    verify_log_identities,
    verify_nonradial_gradient_bound,
    verify_peel_identities,
)

__all__ = [name for name in dir() if not name.startswith("_")]
