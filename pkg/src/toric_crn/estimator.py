from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dynamics import SimOptions
from .exceptions import NonConvergence
from .inference import DataVector, fit_mle, log_likelihood, mld_oracle
from .matrixcore import validate_design_matrix
from .pipeline import compile_model, result_from_state, simulate_mld, simulate_mle


def _pooled_counts(X, n):
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise ValueError(f"X has {X.shape[1]} columns but the design matrix has {n}")
    if np.any(X < 0):
        raise ValueError("counts must be nonnegative")
    return X


class ToricMLE(TransformerMixin, BaseEstimator):
    """Maximum likelihood for a log-linear model with design matrix ``A``.

    ``method="crn"`` runs the compiled mass-action network to equilibrium;
    ``method="oracle"`` solves the maximum entropy dual directly.

    ``fit`` pools the rows of ``X`` (counts per outcome) into a single data
    vector. ``transform`` maps each row of counts to its maximum likelihood
    distribution, so it can sit in a pipeline in front of other estimators.

    Parameters
    ----------
    design_matrix : array-like of int, shape (m, n)
    method : {"crn", "oracle"}
    theta0 : "zero" or array-like of shape (m,)
        Initial parameter concentrations for the estimator network.
    rel_tol, abs_tol, equilibrium_tol, t_max : float
        Integrator settings, see :class:`~toric_crn.dynamics.SimOptions`.

    Attributes
    ----------
    p_hat_ : ndarray of shape (n,)
    theta_hat_ : ndarray of shape (m,)
    log_likelihood_ : float
    result_ : MleResult
    model_ : CompiledModel
    trajectory_ : Trajectory or None
    """

    def __init__(self, design_matrix=None, method="crn", theta0="zero", rel_tol=1e-8,
                 abs_tol=1e-10, equilibrium_tol=1e-10, t_max=1e6):
        self.design_matrix = design_matrix
        self.method = method
        self.theta0 = theta0
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.equilibrium_tol = equilibrium_tol
        self.t_max = t_max

    def _options(self):
        return SimOptions(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                          equilibrium_tol=self.equilibrium_tol, t_max=self.t_max)

    def fit(self, X, y=None):
        if self.method not in ("crn", "oracle"):
            raise ValueError(f"method must be 'crn' or 'oracle', got {self.method!r}")
        if self.design_matrix is None:
            raise ValueError("design_matrix is required")
        A = validate_design_matrix(np.asarray(self.design_matrix))
        self.model_ = compile_model(A)
        u = DataVector(_pooled_counts(X, A.n).sum(axis=0))
        self.trajectory_ = None
        if self.method == "oracle":
            self.result_ = fit_mle(A, u, self.model_.B, self.model_.Bp)
        else:
            traj = simulate_mle(self.model_, u, self._options(), self.theta0)
            if not traj.converged:
                raise NonConvergence(f"simulation ended with status {traj.status.value}: {traj.message}")
            self.trajectory_ = traj
            self.result_ = result_from_state(self.model_, u, traj.final)
        self.p_hat_ = self.result_.p_hat
        self.theta_hat_ = self.result_.theta_hat
        self.log_likelihood_ = self.result_.log_likelihood
        self.n_features_in_ = A.n
        return self

    def transform(self, X):
        """Maximum likelihood distribution for each row of counts."""
        check_is_fitted(self, "model_")
        X = _pooled_counts(X, self.model_.A.n)
        out = np.empty_like(X)
        for i, row in enumerate(X):
            if self.method == "oracle":
                out[i] = mld_oracle(self.model_.A, row)
            else:
                traj = simulate_mld(self.model_, row, self._options())
                if not traj.converged:
                    raise NonConvergence(f"row {i}: simulation ended with status {traj.status.value}")
                out[i] = traj.final
        return out

    def score(self, X, y=None):
        """Log-likelihood of the pooled counts under the fitted parameters."""
        check_is_fitted(self, "theta_hat_")
        u = _pooled_counts(X, self.model_.A.n).sum(axis=0)
        return log_likelihood(self.model_.A, self.theta_hat_, u)
