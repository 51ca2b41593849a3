"""Maximum likelihood for toric models by convex optimization.

This is the reference route that does not touch reaction networks: the
maximum likelihood distribution is the maximum entropy point of the
sufficient polytope, found here by Newton's method on the dual (log-partition)
objective. Simulated equilibria are checked against it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .exceptions import (
    DimensionMismatch,
    NonConvergence,
    NonPositiveTheta,
    NonPositiveX,
    NotInToricVariety,
    PolytopeEmptyOrBoundary,
    ToricCRNError,
)
from .matrixcore import ColumnSet, DesignMatrix, KernelBasis

MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DataVector:
    """Outcome counts, or frequencies already summing to one."""

    counts: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.counts, dtype=float).ravel()
        if u.size == 0 or not np.all(np.isfinite(u)) or np.any(u < 0):
            raise ToricCRNError("data vector must be a nonempty nonnegative vector")
        if not np.any(u > 0):
            raise ToricCRNError("data vector must not be all zeros")
        u.setflags(write=False)
        object.__setattr__(self, "counts", u)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    def __len__(self):
        return self.counts.size


def as_data_vector(u) -> DataVector:
    return u if isinstance(u, DataVector) else DataVector(u)


@dataclass(frozen=True, eq=False)
class MleResult:
    p_hat: np.ndarray
    theta_hat: np.ndarray
    log_likelihood: float
    birch_residual: float
    moment_residual: float
    theta_unique: bool
    iterations: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p_hat": [float(v) for v in self.p_hat],
            "theta_hat": [float(v) for v in self.theta_hat],
            "log_likelihood": float(self.log_likelihood),
            "residuals": {
                "birch": float(self.birch_residual),
                "moment": float(self.moment_residual),
            },
            "flags": {"theta_unique": bool(self.theta_unique)},
        }


def _check_length(A: DesignMatrix, u: DataVector):
    if len(u) != A.n:
        raise DimensionMismatch(f"data vector has length {len(u)}, design matrix has {A.n} columns")


def moment_residual(A: DesignMatrix, p, u) -> float:
    """``max |A p - A u/|u|_1|``."""
    u = as_data_vector(u)
    _check_length(A, u)
    Af = A.array.astype(float)
    return float(np.max(np.abs(Af @ np.asarray(p, float) - Af @ u.frequencies)))


def interior_margin(A: DesignMatrix, u) -> float:
    """Largest ``t`` such that some ``p`` in the closed polytope has ``min p >= t``.

    Zero (up to solver precision) means the sufficient polytope has no
    strictly positive point.
    """
    u = as_data_vector(u)
    _check_length(A, u)
    n = A.n
    Af = A.array.astype(float)
    # variables (p_1..p_n, t); maximize t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.hstack([np.vstack([Af, np.ones((1, n))]), np.zeros((A.m + 1, 1))])
    b_eq = np.concatenate([Af @ u.frequencies, [1.0]])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n + [(0, 1)], method="highs")
    if res.status != 0:
        return 0.0
    return float(res.x[-1])


def in_sufficient_polytope(A: DesignMatrix, u, p, tol: float = MEMBERSHIP_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(
        p.shape == (A.n,)
        and np.all(p > 0)
        and abs(p.sum() - 1.0) <= tol
        and moment_residual(A, p, u) <= tol
    )


def _distribution(Af: np.ndarray, y: np.ndarray) -> np.ndarray:
    s = Af.T @ y
    return np.exp(s - logsumexp(s))


def mld_oracle(A: DesignMatrix, u, *, tol: float = 1e-12, max_iter: int = 200,
               return_info: bool = False):
    """Maximum entropy point of the sufficient polytope of ``(A, u)``.

    Minimizes the dual ``psi(y) = logsumexp(A^T y) - y . b`` with
    ``b = A u/|u|_1`` by damped Newton. The gradient of ``psi`` is the moment
    gap ``A p(y) - b`` and the Hessian is the covariance ``A (diag p - p p^T) A^T``,
    which is singular along ``ker A^T`` (at least the all-ones direction,
    because the column sums are equal); steps are taken with a least squares
    solve so those directions are ignored.

    Raises
    ------
    PolytopeEmptyOrBoundary
        If no strictly positive distribution matches the moments.
    NonConvergence
        If the moment gap does not fall below ``tol`` within ``max_iter`` steps.
    """
    u = as_data_vector(u)
    _check_length(A, u)
    margin = interior_margin(A, u)
    if margin <= 1e-9:
        raise PolytopeEmptyOrBoundary(
            "the sufficient polytope has no strictly positive point; "
            "the maximum likelihood distribution lies on the simplex boundary"
        )
    Af = A.array.astype(float)
    b = Af @ u.frequencies
    y = np.zeros(A.m)

    def psi(y):
        return logsumexp(Af.T @ y) - y @ b

    val = psi(y)
    for it in range(1, max_iter + 1):
        p = _distribution(Af, y)
        grad = Af @ p - b
        if np.max(np.abs(grad)) <= tol:
            break
        hess = (Af * p) @ Af.T - np.outer(Af @ p, Af @ p)
        step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
        slope = grad @ step
        if slope >= 0:
            step, slope = -grad, -(grad @ grad)
        gap = np.max(np.abs(grad))
        t = 1.0
        while True:
            trial = psi(y + t * step)
            if trial <= val + 1e-4 * t * slope:
                break
            # near the optimum the decrease in psi drops below round-off; accept
            # any step that still shrinks the moment gap
            if np.max(np.abs(Af @ _distribution(Af, y + t * step) - b)) < gap:
                break
            t *= 0.5
            if t < 1e-12:
                raise NonConvergence("Newton line search stalled in the dual problem")
        y = y + t * step
        val = trial
    else:
        raise NonConvergence(f"moment gap still above {tol} after {max_iter} Newton steps")
    p = _distribution(Af, y)
    if return_info:
        return p, {"iterations": it, "dual": y, "margin": margin}
    return p


def theta_readout(A: DesignMatrix, Bp: ColumnSet, p_hat, *, tol: float = 1e-8):
    """Parameters ``theta`` with ``theta^{a_j} = p_j``, normalized into the model.

    Solves ``A^T log(theta) = log(p)`` in the minimum norm least squares sense
    and rescales so that ``sum_j theta^{a_j} = 1``. Returns
    ``(theta, theta_unique)``; the solution is unique iff ``A`` has full row
    rank.
    """
    p = np.asarray(p_hat, dtype=float)
    if p.shape != (A.n,):
        raise DimensionMismatch(f"expected a distribution of length {A.n}")
    if np.any(p <= 0):
        raise NotInToricVariety("p_hat must be strictly positive")
    Af = A.array.astype(float)
    logp = np.log(p)
    w = np.linalg.lstsq(Af.T, logp, rcond=None)[0]
    resid = np.max(np.abs(Af.T @ w - logp))
    if resid > tol:
        raise NotInToricVariety(f"log p_hat is not in the row span of A (residual {resid:.3g})")
    w -= logsumexp(Af.T @ w) / A.column_sum
    theta = np.exp(w)
    cols = list(Bp) if len(Bp) else range(A.n)
    mono = np.exp(Af.T @ w)
    err = max(abs(mono[j] - p[j]) for j in cols)
    if err > tol:
        raise NotInToricVariety(f"monomial check failed on the independent columns ({err:.3g})")
    return theta, A.rank == A.m


def model_distribution(A: DesignMatrix, theta) -> np.ndarray:
    """``theta^{a_j}`` normalized by the partition function."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (A.m,):
        raise DimensionMismatch(f"theta must have length {A.m}")
    if np.any(theta <= 0):
        raise NonPositiveTheta("theta must be strictly positive")
    s = A.array.astype(float).T @ np.log(theta)
    return np.exp(s - logsumexp(s))


def log_likelihood(A: DesignMatrix, theta, u) -> float:
    """``sum_j u_j log p_j(theta)`` without the multinomial coefficient."""
    u = as_data_vector(u)
    _check_length(A, u)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (A.m,):
        raise DimensionMismatch(f"theta must have length {A.m}")
    if np.any(theta <= 0):
        raise NonPositiveTheta("theta must be strictly positive")
    s = A.array.astype(float).T @ np.log(theta)
    logp = s - logsumexp(s)
    mask = u.counts > 0
    return float(u.counts[mask] @ logp[mask])


def birch_residual(B: KernelBasis, x) -> float:
    """``max_b |b . log x|`` over the kernel basis; zero on the toric variety."""
    x = np.asarray(x, dtype=float)
    if x.shape != (B.n,):
        raise DimensionMismatch(f"expected a vector of length {B.n}")
    if np.any(x <= 0):
        raise NonPositiveX("birch residual needs a strictly positive vector")
    if B.k == 0:
        return 0.0
    return float(np.max(np.abs(B.array.astype(float) @ np.log(x))))


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz @ np.log(nz)))


def fit_mle(A: DesignMatrix, u, B: KernelBasis, Bp: ColumnSet, **oracle_kw) -> MleResult:
    """Oracle MLD plus the parameter readout and diagnostics."""
    u = as_data_vector(u)
    p, info = mld_oracle(A, u, return_info=True, **oracle_kw)
    theta, unique = theta_readout(A, Bp, p)
    return MleResult(
        p_hat=p,
        theta_hat=theta,
        log_likelihood=log_likelihood(A, theta, u),
        birch_residual=birch_residual(B, p),
        moment_residual=moment_residual(A, p, u),
        theta_unique=unique,
        iterations=info["iterations"],
    )


@dataclass(frozen=True)
class EquivalenceReport:
    distance: float
    tolerance: float
    sim_moment_residual: float
    oracle_moment_residual: float
    sim_birch_residual: float
    oracle_birch_residual: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.distance) and self.distance <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "linf_distance": self.distance,
            "tolerance": self.tolerance,
            "simulation": {"moment_residual": self.sim_moment_residual,
                           "birch_residual": self.sim_birch_residual},
            "oracle": {"moment_residual": self.oracle_moment_residual,
                       "birch_residual": self.oracle_birch_residual},
        }


def verify_equivalence(A: DesignMatrix, u, sim_equilibrium, oracle_p, *,
                       B: KernelBasis | None = None, tol: float = 1e-5) -> EquivalenceReport:
    """Compare a simulated equilibrium with the oracle distribution."""
    from .matrixcore import integer_kernel_basis

    if B is None:
        B = integer_kernel_basis(A)
    x = np.asarray(sim_equilibrium, dtype=float)
    p = np.asarray(oracle_p, dtype=float)
    if x.shape != (A.n,) or p.shape != (A.n,):
        raise DimensionMismatch(f"both distributions must have length {A.n}")

    def safe_birch(v):
        return birch_residual(B, v) if np.all(v > 0) else float("inf")

    return EquivalenceReport(
        distance=float(np.max(np.abs(x - p))),
        tolerance=tol,
        sim_moment_residual=moment_residual(A, x, u),
        oracle_moment_residual=moment_residual(A, p, u),
        sim_birch_residual=safe_birch(x),
        oracle_birch_residual=safe_birch(p),
    )
