"""Exception hierarchy shared by all modules."""


class QWError(Exception):
    """Base class for errors raised by qwthermo."""


class InvalidInputError(QWError, ValueError):
    """An argument violates an operation's precondition."""


class BranchSingularityError(InvalidInputError):
    """A closed-form eigenvector was requested on one of its singular sets."""


class DegeneracyError(InvalidInputError):
    """The eigenbasis at the requested momentum is not unique."""


class NumericalError(QWError, ArithmeticError):
    """A numerical result violates a tolerance it is required to meet."""


class UndefinedEnergiesError(QWError, ValueError):
    """Energy levels are undefined for zero or uniform spectra."""
