"""Deterministic mass-action dynamics.

The integrator is an explicit Dormand-Prince 5(4) pair with per-species
error weights. Every stage is a combination of reaction vectors, so linear
conservation laws hold to round-off regardless of step size.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .crn import ReactionNetwork, stoichiometric_subspace
from .exceptions import DeltaTooLarge, DimensionMismatch, NonFiniteState, NonPositiveAlpha, ToricCRNError
from .matrixcore import DesignMatrix

# Dormand & Prince (1980) tableau; the 5th order solution is propagated
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_TIME = "MaxTimeReached"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class SimOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    equilibrium_tol: float = 1e-10
    t_max: float = 1e6
    max_steps: int = 10_000_000
    record_every: int = 1

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "equilibrium_tol", "t_max"):
            if not getattr(self, name) > 0:
                raise ToricCRNError(f"{name} must be positive")
        if self.max_steps < 1 or self.record_every < 1:
            raise ToricCRNError("max_steps and record_every must be at least 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    species: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    status: Status
    steps: int = 0
    rejected: int = 0
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def equilibrium(self) -> np.ndarray | None:
        return self.states[-1] if self.converged else None

    def reversed(self) -> "Trajectory":
        """Same samples in reverse order, stamped with increasing times."""
        t = self.times[-1] - self.times[::-1]
        return Trajectory(self.species, t, self.states[::-1].copy(), self.status,
                          self.steps, self.rejected, "time reversed")

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,<species...>`` rows at 17 significant digits."""
        own = fh is None
        if own:
            fh = io.StringIO()
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t",) + tuple(self.species))
        for t, x in zip(self.times, self.states):
            w.writerow([format(t, ".17g")] + [format(v, ".17g") for v in x])
        return fh.getvalue() if own else None


class MassActionRHS:
    """Vectorized right-hand side and Jacobian of the mass-action equations."""

    def __init__(self, net: ReactionNetwork):
        self.net = net
        self.Y = net.reactant_matrix
        self.N = net.stoichiometric_matrix
        self.k = net.rates
        self.S = net.n_species

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if not len(self.k):
            return np.zeros(self.S)
        return self.N.T @ (self.k * np.prod(x ** self.Y, axis=1))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        if not len(self.k):
            return np.zeros((self.S, self.S))
        if np.all(x > 0):
            D = self.Y * (np.prod(x ** self.Y, axis=1)[:, None] / x)
        else:
            D = np.empty((len(self.k), self.S))
            for i in range(self.S):
                Ym = self.Y.copy()
                Ym[:, i] = np.maximum(Ym[:, i] - 1, 0)
                D[:, i] = self.Y[:, i] * np.prod(x ** Ym, axis=1)
        return self.N.T @ (self.k[:, None] * D)


def mass_action_rhs(net: ReactionNetwork, x) -> np.ndarray:
    """``sum_r k_r x^{y_r} (y'_r - y_r)`` with ``0^0 = 1``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n_species,):
        raise DimensionMismatch(f"expected {net.n_species} concentrations, got shape {x.shape}")
    return MassActionRHS(net)(x)


def _newton_displacement(rhs: MassActionRHS, Q: np.ndarray, x: np.ndarray, f: np.ndarray) -> float:
    # distance to the fixed point within x + H predicted by one Newton step
    if Q.shape[1] == 0:
        return 0.0
    JQ = rhs.jacobian(x) @ Q
    z = np.linalg.lstsq(JQ, f, rcond=None)[0]
    return float(np.max(np.abs(Q @ z)))


def _stable_step(rhs: MassActionRHS, x: np.ndarray) -> float:
    # the real stability interval is about [-3.3, 0]; at z = -3 the amplification
    # is 0.56, so round-off still decays instead of oscillating around equilibrium
    rho = np.max(np.abs(np.linalg.eigvals(rhs.jacobian(x))), initial=0.0)
    return 3.0 / rho if rho > 0 else np.inf


def simulate(net: ReactionNetwork, x0, opts: SimOptions | None = None) -> Trajectory:
    """Integrate the mass-action equations until equilibrium or ``t_max``.

    A state counts as an equilibrium when the velocity is below
    ``equilibrium_tol * (1 + |x|_inf)`` and a Newton step on the
    stoichiometric class predicts a remaining displacement below the same
    bound; the second test keeps slow, high-order reactions from being
    declared converged early.

    Steps that drive a concentration below ``-abs_tol`` are rejected and
    retried with a smaller step; smaller round-off negatives are clamped to 0.
    """
    opts = opts or SimOptions()
    x = np.array(x0, dtype=float)
    if x.shape != (net.n_species,):
        raise DimensionMismatch(f"expected {net.n_species} initial concentrations, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("initial state is not finite")
    if np.any(x < 0):
        raise ToricCRNError("initial concentrations must be nonnegative")

    rhs = MassActionRHS(net)
    Q = stoichiometric_subspace(net).basis
    rtol, atol, eqtol = opts.rel_tol, opts.abs_tol, opts.equilibrium_tol

    t = 0.0
    times, states = [t], [x.copy()]
    f = rhs(x)

    def at_equilibrium(x, f):
        bound = eqtol * (1.0 + np.max(np.abs(x)))
        return np.max(np.abs(f), initial=0.0) <= bound and _newton_displacement(rhs, Q, x, f) <= bound

    if at_equilibrium(x, f):
        return Trajectory(net.species, np.array(times), np.array(states), Status.CONVERGED)

    scale = atol + rtol * np.abs(x)
    d0 = np.sqrt(np.mean((x / scale) ** 2))
    d1 = np.sqrt(np.mean((f / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, opts.t_max)

    h_stable = _stable_step(rhs, x)
    K = np.empty((7, net.n_species))
    steps = rejected = 0
    status, message = Status.MAX_TIME, ""
    while True:
        if steps >= opts.max_steps:
            message = "max_steps reached"
            break
        if t >= opts.t_max:
            break
        h = min(h, opts.t_max - t, h_stable)
        if h <= 1e-14 * max(1.0, t):
            status, message = Status.STEP_FAILURE, f"step size underflow at t={t:.6g}"
            break
        K[0] = f
        for s in range(1, 7):
            K[s] = rhs(x + h * (np.asarray(_A[s]) @ K[:s]))
        x_new = x + h * (_B5 @ K)
        if not np.all(np.isfinite(x_new)):
            h *= 0.25
            rejected += 1
            if not np.isfinite(h) or h == 0:
                raise NonFiniteState(f"non-finite state at t={t:.6g}")
            continue
        err_vec = h * (_E @ K) / (atol + rtol * np.maximum(np.abs(x), np.abs(x_new)))
        err = np.sqrt(np.mean(err_vec ** 2))
        if err > 1.0 or np.any(x_new < -atol):
            h *= max(0.2, 0.9 * err ** -0.2) if err > 1.0 else 0.5
            rejected += 1
            continue
        np.maximum(x_new, 0.0, out=x_new)
        t += h
        x = x_new
        f = rhs(x) if np.any(x_new == 0) else K[6].copy()
        steps += 1
        if steps % 4 == 0 or err > 0.5:
            h_stable = _stable_step(rhs, x)
        done = at_equilibrium(x, f)
        if done or steps % opts.record_every == 0 or t >= opts.t_max:
            times.append(t)
            states.append(x.copy())
        if done:
            status = Status.CONVERGED
            break
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0 else 5.0

    if times[-1] != t:
        times.append(t)
        states.append(x.copy())
    return Trajectory(net.species, np.array(times), np.array(states), status, steps, rejected, message)


def lyapunov_g(x, alpha) -> float:
    """``sum x_i log x_i - x_i - x_i log alpha_i`` with ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if x.shape != alpha.shape:
        raise DimensionMismatch("x and alpha differ in length")
    if np.any(alpha <= 0):
        raise NonPositiveAlpha("alpha must be strictly positive")
    if np.any(x < 0):
        raise ToricCRNError("x must be nonnegative")
    safe = np.where(x > 0, x, 1.0)
    return float(np.sum(x * np.log(safe) - x - x * np.log(alpha)))


def monitor_lyapunov(traj: Trajectory, alpha) -> tuple[float, np.ndarray]:
    """Largest increase of ``g`` between consecutive samples, and the series."""
    values = np.array([lyapunov_g(x, alpha) for x in traj.states])
    if values.size < 2:
        return 0.0, values
    return float(np.max(np.diff(values))), values


@dataclass(frozen=True, eq=False)
class PerturbedRates:
    base: np.ndarray
    delta: float
    realized: np.ndarray = field(repr=False)


def perturb_rates(net: ReactionNetwork, delta: float, seed: int) -> tuple[ReactionNetwork, PerturbedRates]:
    """Draw each rate independently and uniformly from ``(k - delta, k + delta)``."""
    base = net.rates.copy()
    if delta < 0:
        raise DeltaTooLarge("delta must be nonnegative")
    if len(base) and delta >= base.min():
        raise DeltaTooLarge(f"delta={delta} would allow nonpositive rates (min rate {base.min()})")
    if delta == 0:
        return net, PerturbedRates(base, 0.0, base.copy())
    rng = np.random.default_rng(seed)
    realized = base + rng.uniform(-delta, delta, size=base.shape)
    # uniform() is half-open on the left; redraw the (measure zero) endpoint
    while np.any(hit := realized <= base - delta):
        realized[hit] = base[hit] + rng.uniform(-delta, delta, size=int(hit.sum()))
    return net.with_rates(realized), PerturbedRates(base, float(delta), realized)


def conserved_drift(traj: Trajectory, A: DesignMatrix) -> float:
    """``max_t |A x(t) - A x(0)|_inf`` over the outcome species of the trajectory."""
    if traj.states.shape[1] < A.n:
        raise DimensionMismatch(f"trajectory has {traj.states.shape[1]} species, A has {A.n} columns")
    X = traj.states[:, : A.n]
    moments = X @ A.array.astype(float).T
    return float(np.max(np.abs(moments - moments[0])))
