"""Agnostic learning of kernel halfspaces under the zero-one loss.

The learner is absolute-loss ERM over a norm ball in the RKHS of the kernel
``K(x, x') = 1 / (1 - nu <x, x'>)``; see :mod:`kernhalf.solver`.
"""

__version__ = "0.1.0"

from .errors import (
    ApproximationError,
    DivergenceError,
    DomainError,
    InvalidArgumentError,
    InvalidInputError,
    KernhalfError,
    ParseError,
    ResourceError,
)
from .evaluation import (
    Dataset,
    ErrorReport,
    GeneratorSpec,
    abs_error,
    cross_validate_b,
    generate,
    l_for_margin,
    margin_domination_check,
    margin_error,
    sample_size_hb,
    sample_size_hphi,
    zero_one_error,
)
from .kernel import GramMatrix, KernelSpec, composed_kernel, explicit_feature_map, gram, truncated_kernel
from .polyspace import (
    LogBudget,
    PolynomialApprox,
    approx_sigmoid_chebyshev,
    b_bound_sigmoid,
    erf_taylor_coeffs,
    pb_norm,
)
from .solver import (
    DualPredictor,
    SolveReport,
    SolverOptions,
    exhaustive_erm_small,
    objective,
    predict_label,
    predict_prob,
    predict_raw,
    solve_erm,
)
from .transfer import TransferKind, Variant, eval_transfer, lipschitz_check
