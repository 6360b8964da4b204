"""Optimal interval quadrature formulas for periodic convolution classes."""
from .error_profile import (
    ErrorProfile,
    error_kernel,
    error_kernel_series,
    profile,
    residual,
    worst_case_error,
    worst_case_profile,
)
from .estimator import OptimalIntervalQuadrature
from .kernels import (
    FourierKernel,
    eval_kernel,
    kernel_mean,
    kernel_series,
    make_bernoulli,
    make_rational,
    parse_kernel,
    truncation_index,
)
from .optimal import OptimalReport, optimal_error, rectangle_limit, solve_lambda_star
from .quadrature import (
    ConvolutionFunction,
    InfeasibleQuadratureError,
    IntervalQuadrature,
    PiecewiseConstant,
    apply,
    check_quadrature,
    equidistant,
    step_function,
    validate,
)
from .verify import (
    count_sign_changes,
    extremal_check,
    local_search,
    near_extremal,
    nu_table,
    perturbation_test,
    random_feasible,
)

__version__ = "0.1.0"

__all__ = [
    "ConvolutionFunction", "ErrorProfile", "FourierKernel", "InfeasibleQuadratureError",
    "IntervalQuadrature", "OptimalIntervalQuadrature", "OptimalReport", "PiecewiseConstant",
    "apply", "check_quadrature", "count_sign_changes", "equidistant", "error_kernel",
    "error_kernel_series", "eval_kernel", "extremal_check", "kernel_mean", "kernel_series",
    "local_search", "make_bernoulli", "make_rational", "near_extremal", "nu_table",
    "optimal_error", "parse_kernel", "perturbation_test", "profile", "random_feasible",
    "rectangle_limit", "residual", "solve_lambda_star", "step_function", "truncation_index",
    "validate", "worst_case_error", "worst_case_profile",
]
