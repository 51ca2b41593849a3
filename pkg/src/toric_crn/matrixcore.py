"""Exact integer-lattice data for design matrices.

Everything here works on Python ``int`` so intermediate values never overflow.
Results are exposed both as tuples of ints (exact) and as ``int64`` numpy
arrays for the floating point parts of the package.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyMatrix, UnequalColumnSums, ZeroColumnSum, ZeroRowWarning

IntMatrix = tuple[tuple[int, ...], ...]


def _as_int_rows(raw) -> list[list[int]]:
    rows = [list(r) for r in raw]
    if not rows or not rows[0]:
        raise EmptyMatrix("design matrix must have at least one row and one column")
    width = len(rows[0])
    out = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise EmptyMatrix(f"row {i + 1} has {len(row)} entries, expected {width}")
        conv = []
        for v in row:
            iv = int(v)
            if iv != v:
                raise TypeError(f"non-integer entry {v!r} in row {i + 1}")
            conv.append(iv)
        out.append(conv)
    return out


def _to_int64(rows) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    big = max((abs(v) for r in rows for v in r), default=0)
    if big >= 2**62:
        raise OverflowError("lattice entry does not fit in int64")
    arr = np.array(rows, dtype=np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Integer matrix whose columns all sum to the same value.

    Columns index outcomes and rows index parameters. ``entries`` is exact;
    ``array`` is a read-only ``int64`` view of the same data.
    """

    entries: IntMatrix
    column_sum: int
    dropped_rows: tuple[int, ...] = ()
    array: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "array", _to_int64(self.entries))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    @property
    def rank(self) -> int:
        return matrix_rank(self.entries)

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)


@dataclass(frozen=True, eq=False)
class KernelBasis:
    """Lattice basis of the integer kernel of a design matrix (one vector per row)."""

    vectors: IntMatrix
    n: int

    @property
    def k(self) -> int:
        return len(self.vectors)

    @property
    def array(self) -> np.ndarray:
        if not self.vectors:
            return np.zeros((0, self.n), dtype=np.int64)
        return _to_int64(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __eq__(self, other):
        if not isinstance(other, KernelBasis):
            return NotImplemented
        return self.n == other.n and self.vectors == other.vectors

    def __hash__(self):
        return hash((self.n, self.vectors))


@dataclass(frozen=True)
class ColumnSet:
    """Zero-based column indices of a maximal linearly independent set of columns."""

    indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, j):
        return j in self.indices


def validate_design_matrix(raw, *, drop_zero_rows: bool = True) -> DesignMatrix:
    """Check that ``raw`` is a design matrix and wrap it.

    All-zero rows are removed (with a :class:`ZeroRowWarning`) since they
    contribute nothing to any monomial. A common column sum of zero is rejected
    because the parameter space cannot then be normalized by rescaling.

    Raises
    ------
    EmptyMatrix
        No rows, no columns, or ragged rows.
    UnequalColumnSums
        Column sums differ; ``exc.offending`` lists the zero-based columns
        whose sum differs from the first column's.
    ZeroColumnSum
        Every column sums to zero.
    """
    rows = _as_int_rows(raw)
    n = len(rows[0])
    sums = [sum(r[j] for r in rows) for j in range(n)]
    offending = [j for j in range(n) if sums[j] != sums[0]]
    if offending:
        raise UnequalColumnSums(sums, offending)
    dropped = ()
    if drop_zero_rows:
        dropped = tuple(i for i, r in enumerate(rows) if not any(r))
        if dropped:
            warnings.warn(
                f"dropping all-zero rows {[i + 1 for i in dropped]} of the design matrix",
                ZeroRowWarning,
                stacklevel=2,
            )
            rows = [r for i, r in enumerate(rows) if i not in dropped]
            if not rows:
                raise ZeroColumnSum("design matrix has only zero rows")
    if sums[0] == 0:
        raise ZeroColumnSum("common column sum is 0; the model cannot be normalized")
    return DesignMatrix(tuple(tuple(r) for r in rows), sums[0], dropped)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # returns (g, s, t) with s*a + t*b = g >= 0
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def hermite_normal_form(M) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form with its unimodular transform.

    Returns ``(H, U)`` with ``U @ M == H``, ``|det U| == 1``. Nonzero rows of
    ``H`` come first, each pivot is positive, entries below a pivot are zero
    and entries above it lie in ``[0, pivot)``.

    >>> hermite_normal_form([[2, 1, 0], [0, 1, 2]])[0]
    ((2, 0, -2), (0, 1, 2))
    """
    H = [[int(v) for v in row] for row in M]
    r = len(H)
    c = len(H[0]) if r else 0
    U = [[int(i == j) for j in range(r)] for i in range(r)]

    def combine(i, j, a, b, cc, d):
        # (row_i, row_j) <- (a*row_i + b*row_j, cc*row_i + d*row_j)
        for X in (H, U):
            ri, rj = X[i], X[j]
            X[i] = [a * x + b * y for x, y in zip(ri, rj)]
            X[j] = [cc * x + d * y for x, y in zip(ri, rj)]

    p = 0
    for col in range(c):
        if p >= r:
            break
        nz = next((i for i in range(p, r) if H[i][col] != 0), None)
        if nz is None:
            continue
        if nz != p:
            H[p], H[nz] = H[nz], H[p]
            U[p], U[nz] = U[nz], U[p]
        for i in range(p + 1, r):
            b = H[i][col]
            if b == 0:
                continue
            a = H[p][col]
            g, s, t = _xgcd(a, b)
            combine(p, i, s, t, -b // g, a // g)
        if H[p][col] < 0:
            H[p] = [-x for x in H[p]]
            U[p] = [-x for x in U[p]]
        piv = H[p][col]
        for i in range(p):
            q = H[i][col] // piv
            if q:
                H[i] = [x - q * y for x, y in zip(H[i], H[p])]
                U[i] = [x - q * y for x, y in zip(U[i], U[p])]
        p += 1
    return tuple(map(tuple, H)), tuple(map(tuple, U))


def matrix_rank(M) -> int:
    """Exact rank of an integer matrix."""
    rows = [list(r) for r in M]
    if not rows or not rows[0]:
        return 0
    H, _ = hermite_normal_form(rows)
    return sum(1 for row in H if any(row))


def integer_kernel(M) -> IntMatrix:
    """Canonical lattice basis of ``{v in Z^n : M v = 0}`` for any integer matrix.

    The HNF transform of ``M^T`` is unimodular, so the rows that map to zero
    generate the whole integer kernel and not just a finite-index sublattice.
    Reducing those rows to Hermite normal form makes the answer unique: the
    first nonzero entry of every vector is positive.
    """
    rows = [list(r) for r in M]
    n = len(rows[0])
    H, U = hermite_normal_form([list(col) for col in zip(*rows)])
    rank = sum(1 for row in H if any(row))
    kernel_rows = [list(U[i]) for i in range(rank, n)]
    if not kernel_rows:
        return ()
    K, _ = hermite_normal_form(kernel_rows)
    return tuple(row for row in K if any(row))


def integer_kernel_basis(A: DesignMatrix) -> KernelBasis:
    """Basis of the lattice ``Z^n ∩ ker A`` in canonical (HNF-reduced) form.

    >>> integer_kernel_basis(validate_design_matrix([[2, 1, 0], [0, 1, 2]])).vectors
    ((1, -2, 1),)
    """
    return KernelBasis(integer_kernel(A.entries), A.n)


def maximal_independent_columns(A: DesignMatrix) -> ColumnSet:
    """Greedy leftmost maximal independent set of columns (zero-based indices)."""
    kept: list[tuple[int, ...]] = []
    idx: list[int] = []
    target = A.rank
    for j in range(A.n):
        col = A.column(j)
        if matrix_rank(kept + [col]) > len(kept):
            kept.append(col)
            idx.append(j)
            if len(idx) == target:
                break
    return ColumnSet(tuple(idx))


def in_lattice(basis: KernelBasis, v) -> bool:
    """True when ``v`` is an integer combination of the basis vectors."""
    v = [int(x) for x in v]
    if not basis.vectors:
        return not any(v)
    # HNF rows have strictly increasing pivot columns, so back-substitution is exact
    H, _ = hermite_normal_form(basis.vectors)
    for row in H:
        if not any(row):
            continue
        piv = next(j for j, x in enumerate(row) if x)
        if any(v[:piv]):
            return False
        q, rem = divmod(v[piv], row[piv])
        if rem:
            return False
        v = [x - q * y for x, y in zip(v, row)]
    return not any(v)
