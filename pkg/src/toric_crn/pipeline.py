"""Glue between compilation, simulation and the oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crn import ReactionNetwork, build_mld_network, build_mle_network
from .dynamics import SimOptions, Trajectory, simulate
from .exceptions import DimensionMismatch, NegativeStoichiometry, ToricCRNError
from .inference import (
    DataVector,
    MleResult,
    as_data_vector,
    birch_residual,
    log_likelihood,
    moment_residual,
)
from .matrixcore import (
    ColumnSet,
    DesignMatrix,
    KernelBasis,
    integer_kernel_basis,
    maximal_independent_columns,
    validate_design_matrix,
)


@dataclass(frozen=True, eq=False)
class CompiledModel:
    A: DesignMatrix
    B: KernelBasis
    Bp: ColumnSet
    mld: ReactionNetwork
    mle: ReactionNetwork | None

    @property
    def mle_error(self) -> str | None:
        if self.mle is None:
            return "design matrix has negative entries in an independent column"
        return None


def compile_model(A) -> CompiledModel:
    """Kernel basis, independent columns and both reaction networks for ``A``.

    The parameter network needs nonnegative columns; when that fails ``mle``
    is ``None`` and only the distribution network is available.
    """
    if not isinstance(A, DesignMatrix):
        A = validate_design_matrix(A)
    B = integer_kernel_basis(A)
    Bp = maximal_independent_columns(A)
    try:
        mle = build_mle_network(A, B, Bp)
    except NegativeStoichiometry:
        mle = None
    return CompiledModel(A, B, Bp, build_mld_network(A, B), mle)


def theta_initial(model: CompiledModel, theta0="zero") -> np.ndarray:
    if isinstance(theta0, str):
        if theta0 != "zero":
            raise ToricCRNError(f"theta0 must be 'zero' or a vector, got {theta0!r}")
        return np.zeros(model.A.m)
    t = np.asarray(theta0, dtype=float).ravel()
    if t.shape != (model.A.m,):
        raise DimensionMismatch(f"theta0 must have {model.A.m} entries")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ToricCRNError("theta0 must be finite and nonnegative")
    return t


def simulate_mld(model: CompiledModel, u, opts: SimOptions | None = None,
                 network: ReactionNetwork | None = None) -> Trajectory:
    """Run the distribution network from ``u/|u|_1``."""
    u = as_data_vector(u)
    if len(u) != model.A.n:
        raise DimensionMismatch(f"data vector has {len(u)} entries, A has {model.A.n} columns")
    return simulate(network or model.mld, u.frequencies, opts)


def simulate_mle(model: CompiledModel, u, opts: SimOptions | None = None, theta0="zero",
                 network: ReactionNetwork | None = None) -> Trajectory:
    """Run the estimator network from ``(u/|u|_1, theta0)``."""
    if model.mle is None and network is None:
        raise NegativeStoichiometry(model.mle_error)
    u = as_data_vector(u)
    if len(u) != model.A.n:
        raise DimensionMismatch(f"data vector has {len(u)} entries, A has {model.A.n} columns")
    x0 = np.concatenate([u.frequencies, theta_initial(model, theta0)])
    return simulate(network or model.mle, x0, opts)


def result_from_state(model: CompiledModel, u: DataVector, state) -> MleResult:
    """Diagnostics for a simulated ``(x, theta)`` equilibrium."""
    A = model.A
    state = np.asarray(state, dtype=float)
    x, theta = state[: A.n], state[A.n:]
    ll = log_likelihood(A, theta, u) if theta.size == A.m and np.all(theta > 0) else float("nan")
    birch = birch_residual(model.B, x) if np.all(x > 0) else float("inf")
    return MleResult(
        p_hat=x,
        theta_hat=theta,
        log_likelihood=ll,
        birch_residual=birch,
        moment_residual=moment_residual(A, x, u),
        theta_unique=A.rank == A.m,
    )
