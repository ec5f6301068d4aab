"""Solvers and convergence studies for the stochastic Gross-Pitaevskii equation

    i dphi = (-phi'' + x^2 phi + lam |phi|^2 phi) dt + alpha x^2 phi o dW

in one space dimension, with Hermite spectral, Fourier and finite-difference
discretizations.
"""
from .errors import (
    ConfigurationError,
    ContractError,
    EstimationError,
    NumericalError,
    SGPEError,
    StepError,
)
from .hermite import (
    HermiteBasis,
    build_basis,
    eval_hermite_functions,
    forward_transform,
    inverse_transform,
    project_function,
    sigma_norm_sq,
    synthesize,
)
from .nonlinearity import CutoffProfile, CutoffShape, f_L, g_L_spectral
from .operators import (
    OperatorKind,
    build_BK_smooth,
    build_x2_truncated,
    check_assumptions,
    solve_cn_system,
)
from .profiles import DEFAULT_INITIAL, InitialDatum
from .schemes import (
    GridState,
    Scheme,
    SchemeConfig,
    Trajectory,
    cn_fd_step,
    cn_hermite_step,
    evolve,
    initial_state,
    sample_state,
    split_fourier_step,
    split_hermite_step,
)
from .stochastic import BrownianPath, chi_sequence, coarsen, generate_path, stopping_index
from .experiments import (
    ErrorNorm,
    StudyConfig,
    StudyKind,
    StudyResult,
    fit_order,
    preset,
    run_study,
    truncation_frequency,
)

__version__ = "0.1.0"
