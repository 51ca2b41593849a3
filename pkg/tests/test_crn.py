import itertools

import numpy as np
import pytest

from corpus import EXAMPLE_A, random_corpus
from toric_crn.crn import (
    Reaction,
    ReactionNetwork,
    balance_residuals,
    build_mld_network,
    build_mle_network,
    enumerate_siphons,
    is_critical_siphon,
    is_reversible,
    is_siphon,
    is_weakly_reversible,
    siphon_report,
    stoichiometric_subspace,
)
from toric_crn.exceptions import NegativeStoichiometry, NonPositiveAlpha, TooManySpecies
from toric_crn.matrixcore import integer_kernel_basis, maximal_independent_columns, validate_design_matrix
from toric_crn.pipeline import compile_model


@pytest.fixture(scope="module")
def example():
    return compile_model(EXAMPLE_A)


def naive_minimal_siphons(net):
    """Every subset checked directly against the definition, then minimality filtered."""
    S = net.n_species
    sets = []
    for r in range(1, S + 1):
        for T in itertools.combinations(range(S), r):
            ok = True
            for rx in net.reactions:
                if any(rx.product[i] > 0 for i in T) and not any(rx.reactant[j] > 0 for j in T):
                    ok = False
                    break
            if ok:
                sets.append(frozenset(T))
    return {s for s in sets if not any(o < s for o in sets)}


def test_example_mld_network(example):
    net = example.mld
    assert net.species == ("X1", "X2", "X3")
    assert [(r.reactant, r.product, r.rate) for r in net.reactions] == [
        ((1, 0, 1), (0, 2, 0), 1.0),
        ((0, 2, 0), (1, 0, 1), 1.0),
    ]
    assert is_reversible(net) and is_weakly_reversible(net)


def test_example_mle_network(example):
    net = example.mle
    assert net.species == ("X1", "X2", "X3", "T1", "T2")
    got = [(r.reactant, r.product) for r in net.reactions]
    assert got == [
        ((1, 0, 1, 0, 0), (0, 2, 0, 0, 0)),
        ((0, 2, 0, 0, 0), (1, 0, 1, 0, 0)),
        ((0, 0, 0, 2, 0), (0, 0, 0, 0, 0)),
        ((1, 0, 0, 0, 0), (1, 0, 0, 2, 0)),
        ((0, 0, 0, 1, 1), (0, 0, 0, 0, 0)),
        ((0, 1, 0, 0, 0), (0, 1, 0, 1, 1)),
    ]
    assert all(r.rate == 1.0 for r in net.reactions)
    assert not is_weakly_reversible(net)


def test_mle_restricted_to_x_is_mld(example):
    assert example.mle.restrict(example.mld.species).reactions == example.mld.reactions


def test_mle_rejects_negative_column():
    A = validate_design_matrix([[2, -1, 0], [0, 3, 2]])
    with pytest.raises(NegativeStoichiometry):
        build_mle_network(A, integer_kernel_basis(A), maximal_independent_columns(A))
    assert compile_model(A).mle is None


def test_reaction_validation():
    with pytest.raises(NegativeStoichiometry):
        Reaction((1, -1), (0, 1))
    with pytest.raises(ValueError):
        Reaction((1, 0), (1, 0))
    with pytest.raises(ValueError):
        Reaction((1, 0), (0, 1), rate=0.0)


@pytest.mark.parametrize("A, u", random_corpus(40, seed=3))
def test_compiled_invariants(A, u):
    model = compile_model(A)
    net = model.mld
    # two reactions per basis vector; molecule counts balance through A
    assert len(net) == 2 * model.B.k
    N = net.stoichiometric_matrix
    assert np.all(N @ A.array.T.astype(float) == 0)
    # H equals ker A
    H = stoichiometric_subspace(net)
    assert H.dim == A.n - A.rank
    assert np.allclose(A.array @ H.basis, 0)
    assert H.complement.shape[1] == A.rank
    assert is_reversible(net)
    det, cplx = balance_residuals(net, np.ones(A.n))
    assert det == 0.0 and cplx == 0.0


@pytest.mark.parametrize("A, u", random_corpus(40, seed=4))
def test_siphons_match_naive(A, u):
    net = compile_model(A).mld
    got = {s.members for s in enumerate_siphons(net)}
    assert got == naive_minimal_siphons(net)
    for s in got:
        assert is_siphon(net, s)


def test_siphons_example(example):
    sis = siphon_report(example.mld)
    assert [sorted(s.members) for s in sis] == [[0, 1], [1, 2]]
    assert not any(s.critical for s in sis)
    # hand witnesses in H^perp
    for v, T in [((2, 1, 0), {0, 1}), ((1, 1, 1), {0, 1, 2})]:
        assert np.dot(v, (1, -2, 1)) == 0
        assert not is_critical_siphon(example.mld, T)


def test_siphons_trivial_networks():
    empty = ReactionNetwork(("A", "B"))
    assert [sorted(s.members) for s in enumerate_siphons(empty)] == [[0], [1]]
    iso = ReactionNetwork(("X1", "X2"), (Reaction((1, 0), (0, 1)), Reaction((0, 1), (1, 0))))
    assert [sorted(s.members) for s in enumerate_siphons(iso)] == [[0, 1]]
    auto = ReactionNetwork(("X1",), (Reaction((1,), (2,)),))
    assert is_critical_siphon(auto, {0})


def test_lattice_basis_network_can_have_critical_siphon():
    # kernel basis (1,1,-2,0,-1,1), (0,3,1,-2,-1,-1): {X2,X5} is a siphon and any
    # v >= 0 supported there with v.b = 0 has v2 = v5 and 3 v2 = v5, so v = 0
    A = validate_design_matrix([[1, 0, 1, 0, 0, 1], [3, 2, 1, 2, 3, 0],
                                [1, 1, 1, 0, 2, 2], [0, 2, 2, 3, 0, 2]])
    net = compile_model(A).mld
    assert integer_kernel_basis(A).vectors == ((1, 1, -2, 0, -1, 1), (0, 3, 1, -2, -1, -1))
    assert is_siphon(net, {1, 4})
    assert is_critical_siphon(net, {1, 4})


def test_too_many_species():
    net = ReactionNetwork(tuple(f"S{i}" for i in range(21)))
    with pytest.raises(TooManySpecies):
        enumerate_siphons(net)


def test_weak_reversibility():
    cycle = ReactionNetwork(("A", "B", "C"), (
        Reaction((1, 0, 0), (0, 1, 0)), Reaction((0, 1, 0), (0, 0, 1)), Reaction((0, 0, 1), (1, 0, 0)),
    ))
    assert is_weakly_reversible(cycle) and not is_reversible(cycle)
    chain = ReactionNetwork(("A", "B"), (Reaction((1, 0), (0, 1)),))
    assert not is_weakly_reversible(chain)


def test_balance_residuals():
    cycle = ReactionNetwork(("A", "B", "C"), (
        Reaction((1, 0, 0), (0, 1, 0)), Reaction((0, 1, 0), (0, 0, 1)), Reaction((0, 0, 1), (1, 0, 0)),
    ))
    det, cplx = balance_residuals(cycle, (1.0, 1.0, 1.0))
    assert det == float("inf") and cplx == 0.0
    A = validate_design_matrix(EXAMPLE_A)
    net = build_mld_network(A, integer_kernel_basis(A)).with_rates([2.0, 1.0])
    det, _ = balance_residuals(net, (1.0, 1.0, 1.0))
    assert det == pytest.approx(1.0)
    with pytest.raises(NonPositiveAlpha):
        balance_residuals(net, (1.0, 0.0, 1.0))


def test_with_rates_keeps_tags(example):
    net = example.mld.with_rates([3.0, 4.0])
    assert net.tags == example.mld.tags == ("kernel:0:fwd", "kernel:0:rev")
    assert list(net.rates) == [3.0, 4.0]
