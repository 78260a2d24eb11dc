"""Classical toolkit for phase-estimation outcome statistics.

Analytic outcome distributions for a phase-register readout, a small
statevector simulator that reproduces them, maximum-precision phase
recovery by bounded nonlinear least squares on shot histograms, and
Monte Carlo benchmarking against the Cramer-Rao limit.
"""

from .bench import (
    BenchGrid,
    BenchRecord,
    ScalingSummary,
    cell_estimates,
    circular_error,
    fit_scaling_exponents,
    records_to_csv,
    run_cell,
    run_grid,
    scaling_to_json,
    trial_seed,
)
from .errors import ConfigError, DomainError, FitError
from .fitting import (
    FitBounds,
    FitResult,
    argmax_guess,
    bounded_nls,
    fit_multi,
    fit_single,
    residual_variance,
)
from .model import OutcomeDistribution, PhaseComponent, PhaseModel, RegisterSpec
from .pmf import (
    analytic_distribution,
    circuit_depth_units,
    crlb_mse,
    fisher_information,
    pmf_multi,
    pmf_single,
    pmf_vector,
    score,
    total_fisher,
)
from .simulate import (
    ShotHistogram,
    SimUnitary,
    StateVector,
    apply_inverse_fourier,
    histogram_to_probs,
    kickback_state,
    sample_shots,
    simulate_distribution,
)
from .solver import SolverResult, least_squares_box

__version__ = "0.1.0"

__all__ = [
    "BenchGrid",
    "BenchRecord",
    "ConfigError",
    "DomainError",
    "FitBounds",
    "FitError",
    "FitResult",
    "OutcomeDistribution",
    "PhaseComponent",
    "PhaseModel",
    "RegisterSpec",
    "ScalingSummary",
    "ShotHistogram",
    "SimUnitary",
    "SolverResult",
    "StateVector",
    "analytic_distribution",
    "apply_inverse_fourier",
    "argmax_guess",
    "bounded_nls",
    "cell_estimates",
    "circuit_depth_units",
    "circular_error",
    "crlb_mse",
    "fisher_information",
    "fit_multi",
    "fit_scaling_exponents",
    "fit_single",
    "histogram_to_probs",
    "kickback_state",
    "least_squares_box",
    "pmf_multi",
    "pmf_single",
    "pmf_vector",
    "records_to_csv",
    "residual_variance",
    "run_cell",
    "run_grid",
    "sample_shots",
    "scaling_to_json",
    "score",
    "simulate_distribution",
    "total_fisher",
    "trial_seed",
]
