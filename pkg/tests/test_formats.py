import warnings

import numpy as np
import pytest

from corpus import EXAMPLE_A, random_corpus
from toric_crn.crn import Reaction, ReactionNetwork
from toric_crn.exceptions import DuplicateReactionWarning, ParseError, UnequalColumnSums, UndeclaredCoefficient
from toric_crn.formats import (
    apply_rate_overrides,
    emit_crn,
    format_matrix,
    format_rate,
    parse_crn,
    parse_matrix_text,
)
from toric_crn.pipeline import compile_model


def test_emit_example_networks():
    model = compile_model(EXAMPLE_A)
    assert emit_crn(model.mld) == "species: X1, X2, X3\nX1 + X3 <-> 2 X2 @ 1,1\n"
    text = emit_crn(model.mle)
    assert "2 T1 -> 0 @ 1" in text
    assert "X1 -> X1 + 2 T1 @ 1" in text
    assert "X2 -> X2 + T1 + T2 @ 1" in text


@pytest.mark.parametrize("A, u", random_corpus(30, seed=21))
def test_round_trip(A, u):
    model = compile_model(A)
    for net in (model.mld, model.mle):
        back = parse_crn(emit_crn(net, header="round trip"))
        assert back.species == net.species
        assert [(r.reactant, r.product, r.rate) for r in back.reactions] == \
               [(r.reactant, r.product, r.rate) for r in net.reactions]


def test_round_trip_odd_rates():
    rng = np.random.default_rng(3)
    model = compile_model(EXAMPLE_A)
    net = model.mle.with_rates(np.exp(rng.normal(size=len(model.mle))))
    back = parse_crn(emit_crn(net))
    assert np.array_equal(back.rates, net.rates)


def test_parse_without_declaration():
    net = parse_crn("A + 2 B -> C @ 0.5\nC <-> 0 @ 2,3  # comment\n")
    assert net.species == ("A", "B", "C")
    assert [(r.reactant, r.product, r.rate) for r in net.reactions] == [
        ((1, 2, 0), (0, 0, 1), 0.5), ((0, 0, 1), (0, 0, 0), 2.0), ((0, 0, 0), (0, 0, 1), 3.0),
    ]


@pytest.mark.parametrize("text, line, column", [
    ("X1 + -> X2 @ 1", 1, 6),
    ("X1 -> X2", 1, 9),
    ("species: X1\nX1 -> X2 @ 1", None, None),
    ("X1 => X2 @ 1", 1, 1),
    ("X1 -> X2 @ -1", 1, 11),
    ("X1 <-> X2 @ 1", 1, 12),
    ("X1 -> X1 @ 1", 1, 1),
    ("\n\nX-1 -> X2 @ 1", 3, 1),
])
def test_parse_errors(text, line, column):
    with pytest.raises(ParseError) as exc:
        parse_crn(text)
    assert exc.value.line == line
    if column is not None:
        assert exc.value.column == column


def test_zero_coefficient():
    with pytest.raises(UndeclaredCoefficient):
        parse_crn("0 X1 -> X2 @ 1")


def test_duplicate_reaction_warns():
    with pytest.warns(DuplicateReactionWarning):
        net = parse_crn("X1 -> X2 @ 1\nX1 -> X2 @ 2")
    assert len(net) == 2


def test_matrix_text():
    A = parse_matrix_text("# example example\n2 3\n2 1 0\n0 1 2\n")
    assert A.entries == ((2, 1, 0), (0, 1, 2))
    assert parse_matrix_text(format_matrix(A)) == A


@pytest.mark.parametrize("text, line", [
    ("", None),
    ("2 3\n2 1 0\n", None),
    ("2 3\n2 1 0\n0 1\n", 3),
    ("2 3\n2 1 x\n0 1 2\n", 2),
    ("3\n", 1),
    ("1 2\n1 1\n1 1\n", 3),
])
def test_matrix_text_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse_matrix_text(text)
    assert exc.value.line == line


def test_matrix_text_validation():
    with pytest.raises(UnequalColumnSums):
        parse_matrix_text("2 2\n1 2\n1 1\n")


def test_format_rate():
    assert format_rate(1.0) == "1"
    assert format_rate(0.1) == "0.1"
    assert float(format_rate(1 / 3)) == 1 / 3


def test_rate_overrides():
    model = compile_model(EXAMPLE_A)
    net = apply_rate_overrides(model.mld, parse_crn("X1 + X3 -> 2 X2 @ 2.5"))
    assert list(net.rates) == [2.5, 1.0]
    with pytest.raises(ParseError):
        apply_rate_overrides(model.mld, parse_crn("X1 -> X2 @ 1"))


def test_emit_irreversible_and_empty():
    net = ReactionNetwork(("A",), (Reaction((1,), (0,), 2.0),))
    assert emit_crn(net) == "species: A\nA -> 0 @ 2\n"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert parse_crn(emit_crn(ReactionNetwork(("A", "B")))).species == ("A", "B")
