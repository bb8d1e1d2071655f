"""Penalized cubic B-spline least squares and strong-noise detection."""

__version__ = "0.1.0"

from .bspline import (
    Dataset,
    KnotVector,
    PenaltyOperator,
    SplineFunction,
    column_of,
    delta2_matrix,
    design_matrix,
    eval_basis,
    eval_spline,
    gram_matrix_order2,
    make_uniform_knots,
    penalty_operator,
    uniform_abscissae,
)
from .estimator import FitResult, HatMatrix, WeightMatrix, fit, hat_matrix, natural_spline_check
from .experiment import ExperimentConfig, monte_carlo, default_config
from .linalg import lambda_inf_limit, null_projector, pinv, sqrt_psd, weighted_pinv
