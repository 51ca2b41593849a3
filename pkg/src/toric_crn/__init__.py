"""Mass-action reaction networks that compute maximum likelihood estimators
for log-linear (toric) models, with an independent convex-optimization oracle.
"""
from .crn import (
    Reaction,
    ReactionNetwork,
    Siphon,
    balance_residuals,
    build_mld_network,
    build_mle_network,
    enumerate_siphons,
    is_critical_siphon,
    is_weakly_reversible,
    stoichiometric_subspace,
)
from .dynamics import (
    SimOptions,
    Status,
    Trajectory,
    conserved_drift,
    lyapunov_g,
    mass_action_rhs,
    monitor_lyapunov,
    perturb_rates,
    simulate,
)
from .estimator import ToricMLE
from .formats import emit_crn, parse_crn, parse_matrix_file, parse_matrix_text
from .inference import (
    DataVector,
    MleResult,
    birch_residual,
    fit_mle,
    log_likelihood,
    mld_oracle,
    theta_readout,
    verify_equivalence,
)
from .matrixcore import (
    ColumnSet,
    DesignMatrix,
    KernelBasis,
    hermite_normal_form,
    integer_kernel_basis,
    maximal_independent_columns,
    validate_design_matrix,
)
from .pipeline import CompiledModel, compile_model

__version__ = "0.1.0"
