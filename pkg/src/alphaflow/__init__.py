"""Pseudospectral Maxwell-alpha / Euler-alpha solver and verification harness."""

__version__ = "0.1.0"

from .errors import (
    AlphaFlowError,
    CflViolation,
    CheckpointError,
    CheckpointFormatError,
    CheckpointTruncated,
    CheckpointVersionError,
    ConfigurationError,
    ContractViolation,
    IntegrationBlowup,
)
from .spectral import Grid
from .fields import (
    PhysicalParams,
    SpinField,
    StressField,
    VelocityField,
    corotational_commutator,
    energy,
    random_divfree,
    random_stress,
    strain,
    vorticity,
)
from .operators import (
    TestPair,
    advect,
    grad_transpose,
    gronwall_weight,
    identity_suite,
    momentum_residual,
    stress_divergence,
    stress_residual,
    trilinear_cancellation_defect,
)
from .gronwall import GronwallInput, gronwall_bound, gronwall_check
from .solver import (
    SimConfig,
    SolverState,
    Snapshot,
    Trajectory,
    energy_law_residuals,
    imex_step,
    initial_condition,
    run,
)
from .dissipative import (
    DissipativeReport,
    alpha_sweep,
    calibrate_gamma,
    dissipative_estimate_margin,
    inequality_margin,
)
from .abstract_ode import (
    MollifiedFamily,
    OdePath,
    OdeProblem,
    apriori_bound_holds,
    dissipative_margin,
    integrate,
    one_sided_bound_from_decomposition,
)
from .config import config_from_dict, config_to_dict, emit_config, parse_config
from .checkpoint import read_state, read_trajectory, write_state, write_trajectory

__all__ = [name for name in dir() if not name.startswith("_")]
