"""Tensor-train Fourier pricing of multi-asset European options.

The package builds tensor-train (matrix product state) approximations of
the characteristic-function and payoff-transform vectors of the Lewis
contour sum with TT-cross, and contracts them into a price.  Closed-form,
direct-grid, dense-Fourier and Monte Carlo reference pricers are included
for validation and benchmarking.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    MaxvolIterationError,
    NumericsError,
    OracleBudgetError,
    ResidueError,
    SingularMatrixError,
    StripConditionError,
)
from .tensor_train import (
    TensorTrain,
    pointwise_oracle,
    tt_evaluate,
    tt_evaluate_many,
    tt_inner,
    tt_load_json,
    tt_rand_sample_diff,
    tt_save_json,
    tt_to_dense,
)
from .cross import CrossConfig, CrossReport, matrix_cross, maxvol, tt_cross
from .market import (
    MarketModel,
    black_scholes_price,
    char_fn_gbm,
    corr_matrix_plus,
    payoff_call,
    payoff_fourier_call,
    payoff_fourier_min,
    payoff_min,
)
from .pricers import (
    GridSpec,
    PricingResult,
    grid_admissible,
    payoff_grid_oracle,
    phi_grid_oracle,
    price_black_scholes,
    price_direct_grid,
    price_fourier_dense,
    price_fourier_tt,
    price_monte_carlo,
    table1_hyperparams,
)
from .bench import (
    ExperimentConfig,
    run_bond_dim_sweep,
    run_experiment,
    run_price_once,
    run_single_asset_sweep,
    run_strike_sweep,
    run_table1,
)

__all__ = [
    "TensorTrain", "tt_evaluate", "tt_evaluate_many", "tt_inner",
    "tt_to_dense", "tt_rand_sample_diff", "tt_save_json", "tt_load_json",
    "pointwise_oracle",
    "CrossConfig", "CrossReport", "maxvol", "matrix_cross", "tt_cross",
    "MarketModel", "black_scholes_price", "payoff_call", "payoff_min",
    "char_fn_gbm", "payoff_fourier_call", "payoff_fourier_min",
    "corr_matrix_plus",
    "GridSpec", "PricingResult", "grid_admissible", "price_black_scholes",
    "price_direct_grid", "price_fourier_dense", "price_fourier_tt",
    "price_monte_carlo", "table1_hyperparams", "phi_grid_oracle",
    "payoff_grid_oracle",
    "ExperimentConfig", "run_single_asset_sweep", "run_table1",
    "run_bond_dim_sweep", "run_price_once", "run_strike_sweep",
    "run_experiment",
    "CapacityError", "StripConditionError", "NumericsError",
    "SingularMatrixError", "MaxvolIterationError", "OracleBudgetError",
    "ResidueError",
    "__version__",
]
