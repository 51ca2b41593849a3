"""Exception and warning types raised across the package."""


class ToricCRNError(ValueError):
    """Base class for all input and numerical errors raised here."""


class EmptyMatrix(ToricCRNError):
    pass


class UnequalColumnSums(ToricCRNError):
    def __init__(self, sums, offending):
        self.sums = list(sums)
        self.offending = list(offending)
        super().__init__(
            f"column sums must all be equal; got {self.sums} "
            f"(differing from column 1: {', '.join(str(j + 1) for j in self.offending)})"
        )


class ZeroColumnSum(ToricCRNError):
    pass


class DimensionMismatch(ToricCRNError):
    pass


class NegativeStoichiometry(ToricCRNError):
    pass


class TooManySpecies(ToricCRNError):
    pass


class NonPositiveError(ToricCRNError):
    pass


class NonPositiveAlpha(NonPositiveError):
    pass


class NonPositiveX(NonPositiveError):
    pass


class NonPositiveTheta(NonPositiveError):
    pass


class NonFiniteState(ToricCRNError):
    pass


class DeltaTooLarge(ToricCRNError):
    pass


class PolytopeEmptyOrBoundary(ToricCRNError):
    """The moment constraints cannot be met by a strictly positive distribution."""


class NonConvergence(ToricCRNError):
    pass


class NotInToricVariety(ToricCRNError):
    pass


class ParseError(ToricCRNError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class UndeclaredCoefficient(ParseError):
    """A term carries an explicit coefficient of zero."""


class DuplicateReactionWarning(UserWarning):
    pass


class ZeroRowWarning(UserWarning):
    pass
