import itertools
import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import EXAMPLE_A, random_design_matrix
from toric_crn.exceptions import EmptyMatrix, UnequalColumnSums, ZeroColumnSum, ZeroRowWarning
from toric_crn.matrixcore import (
    hermite_normal_form,
    in_lattice,
    integer_kernel,
    integer_kernel_basis,
    matrix_rank,
    maximal_independent_columns,
    validate_design_matrix,
)

int_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def test_validate_example_matrix():
    A = validate_design_matrix(EXAMPLE_A)
    assert A.shape == (2, 3)
    assert A.column_sum == 2
    assert A.rank == 2
    assert not A.array.flags.writeable


def test_unequal_column_sums_reports_columns():
    with pytest.raises(UnequalColumnSums) as exc:
        validate_design_matrix([[1, 2], [1, 1]])
    assert exc.value.offending == [1]
    assert "column sums must all be equal" in str(exc.value)


def test_zero_rows_dropped_with_warning():
    with pytest.warns(ZeroRowWarning):
        A = validate_design_matrix([[2, 1, 0], [0, 0, 0], [0, 1, 2]])
    assert A.entries == ((2, 1, 0), (0, 1, 2))
    assert A.dropped_rows == (1,)


@pytest.mark.parametrize("raw, exc", [
    ([], EmptyMatrix),
    ([[]], EmptyMatrix),
    ([[1, 2], [3]], EmptyMatrix),
    ([[1, -1], [-1, 1]], ZeroColumnSum),
])
def test_invalid_matrices(raw, exc):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroRowWarning)
        with pytest.raises(exc):
            validate_design_matrix(raw)


def test_non_integer_entry_rejected():
    with pytest.raises(TypeError):
        validate_design_matrix([[1.5, 0.5]])


@settings(max_examples=150, deadline=None)
@given(int_matrices)
def test_hnf_properties(M):
    H, U = hermite_normal_form(M)
    Us = sympy.Matrix(U)
    assert abs(Us.det()) == 1
    assert Us * sympy.Matrix(M) == sympy.Matrix(H)
    pivots = []
    zero_seen = False
    for row in H:
        if not any(row):
            zero_seen = True
            continue
        assert not zero_seen, "zero rows must come last"
        j = next(i for i, v in enumerate(row) if v)
        assert row[j] > 0
        pivots.append(j)
    assert pivots == sorted(set(pivots))
    for r, j in enumerate(pivots):
        for above in range(r):
            assert 0 <= H[above][j] < H[r][j]


@settings(max_examples=150, deadline=None)
@given(int_matrices)
def test_kernel_matches_sympy_and_rank_nullity(M):
    K = integer_kernel(M)
    n = len(M[0])
    rank = sympy.Matrix(M).rank()
    assert matrix_rank(M) == rank
    assert len(K) == n - rank
    for v in K:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in M)
        assert next(x for x in v if x) > 0
    # the rational kernel from sympy lies in the span of the lattice basis
    if K:
        span = sympy.Matrix(K).T
        for w in sympy.Matrix(M).nullspace():
            assert span.rank() == span.row_join(w).rank()


def test_kernel_examples():
    assert integer_kernel_basis(validate_design_matrix(EXAMPLE_A)).vectors == ((1, -2, 1),)
    # independence model of two binary variables
    A = validate_design_matrix([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]])
    assert integer_kernel_basis(A).vectors == ((1, -1, -1, 1),)
    assert integer_kernel_basis(validate_design_matrix([[1, 0], [0, 1]])).k == 0


def test_kernel_is_saturated():
    # a common factor in M must not leave the basis generating only a sublattice
    assert integer_kernel([[2, -2]]) == ((1, 1),)
    K = integer_kernel([[2, 2, 4]])
    assert len(K) == 2
    B = np.array(K, dtype=float).T
    for v in itertools.product(range(-3, 4), repeat=3):
        if 2 * v[0] + 2 * v[1] + 4 * v[2] == 0:
            c = np.linalg.lstsq(B, np.array(v, dtype=float), rcond=None)[0]
            assert np.allclose(c, np.round(c), atol=1e-9), v


def test_kernel_deterministic():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A = random_design_matrix(rng)
        assert integer_kernel_basis(A) == integer_kernel_basis(validate_design_matrix(A.entries))


def test_in_lattice():
    B = integer_kernel_basis(validate_design_matrix(EXAMPLE_A))
    assert in_lattice(B, (2, -4, 2))
    assert in_lattice(B, (0, 0, 0))
    assert not in_lattice(B, (1, -1, 0))


def test_maximal_independent_columns():
    A = validate_design_matrix(EXAMPLE_A)
    assert tuple(maximal_independent_columns(A)) == (0, 1)
    A = validate_design_matrix([[1, 1, 0], [1, 1, 2]])
    assert tuple(maximal_independent_columns(A)) == (0, 2)
    rng = np.random.default_rng(2)
    for _ in range(30):
        A = random_design_matrix(rng, full_row_rank=False)
        cols = maximal_independent_columns(A)
        assert len(cols) == A.rank
        assert np.linalg.matrix_rank(A.array[:, list(cols)]) == A.rank


def test_equality_and_hash():
    a = validate_design_matrix(EXAMPLE_A)
    b = validate_design_matrix(np.array(EXAMPLE_A))
    assert a == b and hash(a) == hash(b)
