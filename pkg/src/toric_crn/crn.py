"""Reaction networks compiled from design matrices, and their structure.

Species are ordered ``X1..Xn`` followed by ``T1..Tm`` (the parameter species).
Reversible pairs are stored as two irreversible reactions.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import (
    DimensionMismatch,
    NegativeStoichiometry,
    NonPositiveAlpha,
    ToricCRNError,
    TooManySpecies,
)
from .matrixcore import ColumnSet, DesignMatrix, KernelBasis

MAX_SIPHON_SPECIES = 20


@dataclass(frozen=True)
class Reaction:
    reactant: tuple[int, ...]
    product: tuple[int, ...]
    rate: float = 1.0
    tag: str = ""

    def __post_init__(self):
        if len(self.reactant) != len(self.product):
            raise DimensionMismatch("reactant and product vectors differ in length")
        if any(v < 0 for v in self.reactant + self.product):
            raise NegativeStoichiometry("stoichiometric coefficients must be nonnegative")
        if self.reactant == self.product:
            raise ToricCRNError("reactant and product complexes must differ")
        if not self.rate > 0:
            raise ToricCRNError(f"rate must be positive, got {self.rate}")

    @property
    def net(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.reactant, self.product))


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...] = ()

    def __post_init__(self):
        if len(set(self.species)) != len(self.species):
            raise ToricCRNError("species names must be unique")
        for r in self.reactions:
            if len(r.reactant) != len(self.species):
                raise DimensionMismatch("reaction refers to undeclared species")

    @property
    def n_species(self) -> int:
        return len(self.species)

    def __len__(self):
        return len(self.reactions)

    @cached_property
    def reactant_matrix(self) -> np.ndarray:
        """``(n_reactions, n_species)`` reactant stoichiometry."""
        return np.array([r.reactant for r in self.reactions], dtype=float).reshape(len(self), self.n_species)

    @cached_property
    def product_matrix(self) -> np.ndarray:
        return np.array([r.product for r in self.reactions], dtype=float).reshape(len(self), self.n_species)

    @property
    def stoichiometric_matrix(self) -> np.ndarray:
        """Net change per reaction, one row per reaction."""
        return self.product_matrix - self.reactant_matrix

    @cached_property
    def rates(self) -> np.ndarray:
        return np.array([r.rate for r in self.reactions], dtype=float)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(r.tag for r in self.reactions)

    def with_rates(self, rates) -> "ReactionNetwork":
        rates = list(rates)
        if len(rates) != len(self.reactions):
            raise DimensionMismatch("one rate per reaction is required")
        return ReactionNetwork(
            self.species,
            tuple(replace(r, rate=float(k)) for r, k in zip(self.reactions, rates)),
        )

    def restrict(self, names) -> "ReactionNetwork":
        """Projection onto a subset of species, dropping reactions that become trivial."""
        idx = [self.species.index(s) for s in names]
        out = []
        for r in self.reactions:
            y = tuple(r.reactant[i] for i in idx)
            yp = tuple(r.product[i] for i in idx)
            if y != yp:
                out.append(Reaction(y, yp, r.rate, r.tag))
        return ReactionNetwork(tuple(self.species[i] for i in idx), tuple(out))


def x_names(n: int) -> tuple[str, ...]:
    return tuple(f"X{j + 1}" for j in range(n))


def theta_names(m: int) -> tuple[str, ...]:
    return tuple(f"T{i + 1}" for i in range(m))


def _split(b) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return tuple(max(v, 0) for v in b), tuple(max(-v, 0) for v in b)


def _mld_reactions(B: KernelBasis, pad: int = 0) -> list[Reaction]:
    out = []
    zeros = (0,) * pad
    for k, b in enumerate(B.vectors):
        left, right = _split(b)
        out.append(Reaction(left + zeros, right + zeros, 1.0, f"kernel:{k}:fwd"))
        out.append(Reaction(right + zeros, left + zeros, 1.0, f"kernel:{k}:rev"))
    return out


def build_mld_network(A: DesignMatrix, B: KernelBasis) -> ReactionNetwork:
    """One reversible reaction, rate 1 each way, per kernel basis vector.

    >>> from toric_crn.matrixcore import validate_design_matrix, integer_kernel_basis
    >>> A = validate_design_matrix([[2, 1, 0], [0, 1, 2]])
    >>> [r.reactant for r in build_mld_network(A, integer_kernel_basis(A)).reactions]
    [(1, 0, 1), (0, 2, 0)]
    """
    if B.n != A.n:
        raise DimensionMismatch("kernel basis length does not match the number of columns")
    return ReactionNetwork(x_names(A.n), tuple(_mld_reactions(B)))


def build_mle_network(A: DesignMatrix, B: KernelBasis, Bp: ColumnSet) -> ReactionNetwork:
    """MLD reactions plus, per column ``j`` in ``Bp``, a decay ``a_j . T -> 0``
    and a catalytic production ``Xj -> Xj + a_j . T``, all at rate 1.
    """
    if B.n != A.n:
        raise DimensionMismatch("kernel basis length does not match the number of columns")
    n, m = A.n, A.m
    reactions = _mld_reactions(B, pad=m)
    for j in Bp:
        col = A.column(j)
        if any(v < 0 for v in col):
            raise NegativeStoichiometry(
                f"column {j + 1} of A has negative entries; parameter reactions need a nonnegative A"
            )
        e = tuple(int(i == j) for i in range(n))
        reactions.append(Reaction((0,) * n + col, (0,) * (n + m), 1.0, f"column:{j}:decay"))
        reactions.append(Reaction(e + (0,) * m, e + col, 1.0, f"column:{j}:produce"))
    return ReactionNetwork(x_names(n) + theta_names(m), tuple(reactions))


@dataclass(frozen=True)
class StoichiometricSubspace:
    basis: np.ndarray
    complement: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def stoichiometric_subspace(net: ReactionNetwork) -> StoichiometricSubspace:
    """Orthonormal bases (as columns) of ``H = span{y' - y}`` and of ``H^perp``."""
    S = net.n_species
    if len(net) == 0:
        return StoichiometricSubspace(np.zeros((S, 0)), np.eye(S))
    N = net.stoichiometric_matrix
    return StoichiometricSubspace(orth(N.T), null_space(N))


@dataclass(frozen=True)
class Siphon:
    members: frozenset
    minimal: bool = True
    critical: bool | None = None

    def names(self, net: ReactionNetwork) -> list[str]:
        return [net.species[i] for i in sorted(self.members)]


def _masks(net: ReactionNetwork):
    react = [sum(1 << i for i, v in enumerate(r.reactant) if v > 0) for r in net.reactions]
    prod = [sum(1 << i for i, v in enumerate(r.product) if v > 0) for r in net.reactions]
    return react, prod


def is_siphon(net: ReactionNetwork, members) -> bool:
    T = sum(1 << i for i in members)
    react, prod = _masks(net)
    return bool(T) and all(not (p & T) or (y & T) for y, p in zip(react, prod))


def enumerate_siphons(net: ReactionNetwork, max_species: int = MAX_SIPHON_SPECIES) -> list[Siphon]:
    """All inclusion-minimal nonempty siphons, by increasing size.

    Exhaustive over subsets; supersets of an already found siphon are skipped.
    """
    S = net.n_species
    if S > max_species:
        raise TooManySpecies(f"{S} species exceeds the siphon search bound of {max_species}")
    react, prod = _masks(net)
    pairs = list(zip(react, prod))
    found: list[int] = []
    for size in range(1, S + 1):
        for combo in combinations(range(S), size):
            T = sum(1 << i for i in combo)
            if any(f & T == f for f in found):
                continue
            if all(not (p & T) or (y & T) for y, p in pairs):
                found.append(T)
    return [Siphon(frozenset(i for i in range(S) if T >> i & 1)) for T in found]


def is_critical_siphon(net: ReactionNetwork, T, tol: float = 1e-9) -> bool:
    """True iff no nonzero nonnegative conservation law is supported inside ``T``.

    Solved as the LP: maximize ``sum v`` over ``v >= 0`` supported on ``T``
    with ``v . (y' - y) = 0`` for every reaction and ``sum v <= 1``.
    """
    members = T.members if isinstance(T, Siphon) else frozenset(T)
    S = net.n_species
    c = np.array([-1.0 if i in members else 0.0 for i in range(S)])
    bounds = [(0, None) if i in members else (0, 0) for i in range(S)]
    kw = {}
    if len(net):
        kw = {"A_eq": net.stoichiometric_matrix, "b_eq": np.zeros(len(net))}
    res = linprog(c, A_ub=np.ones((1, S)), b_ub=[1.0], bounds=bounds, method="highs", **kw)
    if res.status != 0:
        raise RuntimeError(f"criticality LP failed: {res.message}")
    return bool(-res.fun <= tol)


def siphon_report(net: ReactionNetwork, max_species: int = MAX_SIPHON_SPECIES) -> list[Siphon]:
    return [replace(s, critical=is_critical_siphon(net, s))
            for s in enumerate_siphons(net, max_species)]


def complexes(net: ReactionNetwork) -> tuple[list[tuple[int, ...]], list[tuple[int, int]]]:
    """De-duplicated complexes and the reaction edges between them (by index)."""
    index: dict[tuple[int, ...], int] = {}
    edges = []
    for r in net.reactions:
        a = index.setdefault(r.reactant, len(index))
        b = index.setdefault(r.product, len(index))
        edges.append((a, b))
    return list(index), edges


def is_weakly_reversible(net: ReactionNetwork) -> bool:
    cplx, edges = complexes(net)
    if not edges:
        return True
    rows, cols = zip(*edges)
    g = csr_matrix((np.ones(len(edges)), (rows, cols)), shape=(len(cplx), len(cplx)))
    _, labels = connected_components(g, directed=True, connection="strong")
    return all(labels[a] == labels[b] for a, b in edges)


def is_reversible(net: ReactionNetwork) -> bool:
    pairs = {(r.reactant, r.product) for r in net.reactions}
    return all((b, a) in pairs for a, b in pairs)


def monomials(net: ReactionNetwork, x) -> np.ndarray:
    """``x^y`` for each reactant complex ``y`` with ``0^0 = 1``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n_species,):
        raise DimensionMismatch(f"expected {net.n_species} concentrations, got shape {x.shape}")
    return np.prod(x ** net.reactant_matrix, axis=1)


def balance_residuals(net: ReactionNetwork, alpha) -> tuple[float, float]:
    """Detailed and complex balance residuals at a positive point ``alpha``.

    The detailed residual is the largest flux mismatch over reversible pairs
    (``inf`` if some reaction has no reverse). The complex residual is the
    largest outflow/inflow mismatch over complexes.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise NonPositiveAlpha("balance point must be strictly positive")
    flux = net.rates * monomials(net, alpha)
    by_pair: dict[tuple, float] = {}
    for r, f in zip(net.reactions, flux):
        by_pair[(r.reactant, r.product)] = by_pair.get((r.reactant, r.product), 0.0) + f
    detailed = 0.0
    for (y, yp), f in by_pair.items():
        back = by_pair.get((yp, y))
        if back is None:
            detailed = float("inf")
            break
        detailed = max(detailed, abs(f - back))
    cplx, edges = complexes(net)
    balance = np.zeros(len(cplx))
    for (a, b), f in zip(edges, flux):
        balance[a] -= f
        balance[b] += f
    complex_res = float(np.max(np.abs(balance))) if len(cplx) else 0.0
    return float(detailed), complex_res
