"""Optimal investment in multivariate Volterra stochastic volatility models.

Computes optimal Merton portfolio weights and value functions for markets
whose variance (vector square-root case) or covariance matrix (Wishart case)
follows a convolution-type Volterra equation, covering rough volatility
through fractional kernels.  The analytic layer solves the associated
Riccati-Volterra equations with a fractional Adams scheme; the Monte Carlo
layer simulates the underlying processes to verify the closed forms.
"""

from .kernels import (
    FirstKindResolvent,
    Kernel,
    SampledFunction,
    TimeGrid,
    convolve,
    first_kind_residual,
    kernel_weights,
    mittag_leffler,
    resolvent_first_kind,
    resolvent_second_kind,
    second_kind_residual,
)
from .merton import (
    StrategyPath,
    ValueReport,
    strategy_degenerate,
    strategy_general,
    strategy_wishart,
    value_distortion,
    value_general,
    value_wishart,
)
from .models import (
    VectorModel,
    WishartModel,
    distortion_constant,
    expected_variance_curve,
    lambda_matrix,
    validate,
)
from .riccati import (
    BlowUp,
    MatrixRiccatiRHS,
    RiccatiBlowUpError,
    RiccatiPath,
    VectorRiccatiRHS,
    fixed_point_residual,
    global_existence_diagonal,
    solve_riccati_matrix,
    solve_riccati_vector,
    vector_rhs_degenerate,
    vector_rhs_general,
    wishart_rhs,
)
from .simulate import (
    McEstimate,
    PathBundle,
    SimConfig,
    SimulationError,
    compare_strategies,
    martingale_diagnostic,
    mc_utility,
    simulate_vector,
    simulate_wealth,
    simulate_wishart,
    utility_samples,
)

__version__ = "0.1.0"
