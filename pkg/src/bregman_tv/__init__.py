"""Bregman-iterated total-variation reconstruction for linear inverse problems."""

from ._validation import (
    ConvergenceWarning,
    DivergenceError,
    InvalidInputError,
    InvalidParameterError,
)
from .estimator import BregmanTVReconstructor
from .forward_models import (
    DenseOperator,
    LinearOperator,
    NoisyMeasurement,
    RadonOperator,
    add_noise,
    dense_operator,
    operator_norm,
    radon_operator,
)
from .operators import bv_norm, decompose, divergence_adjoint, gradient, mean_value, tv_subgradient, tv_value
from .phantoms import make_phantom
from .proximal import prox_dual_linf, prox_indicator_nonneg, prox_update_inequality_check
from .regularization import (
    IndexFunction,
    MdpConfig,
    alpha_schedule,
    alpha_upper_bound,
    bregman_distance,
    mdp_band_check,
    objective_F,
)
from .solver import (
    RunTrace,
    SolverConfig,
    fixed_point_residual,
    inner_dual_loop,
    outer_iteration,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BregmanTVReconstructor",
    "ConvergenceWarning",
    "DenseOperator",
    "DivergenceError",
    "IndexFunction",
    "InvalidInputError",
    "InvalidParameterError",
    "LinearOperator",
    "MdpConfig",
    "NoisyMeasurement",
    "RadonOperator",
    "RunTrace",
    "SolverConfig",
    "add_noise",
    "alpha_schedule",
    "alpha_upper_bound",
    "bregman_distance",
    "bv_norm",
    "decompose",
    "dense_operator",
    "divergence_adjoint",
    "fixed_point_residual",
    "gradient",
    "inner_dual_loop",
    "make_phantom",
    "mdp_band_check",
    "mean_value",
    "objective_F",
    "operator_norm",
    "outer_iteration",
    "prox_dual_linf",
    "prox_indicator_nonneg",
    "prox_update_inequality_check",
    "radon_operator",
    "solve",
    "tv_subgradient",
    "tv_value",
]
