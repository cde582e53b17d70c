"""Exception hierarchy shared by all modules."""


class RootDensError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(RootDensError, ValueError):
    """An argument violates the documented precondition."""


class DegenerateSampleError(InvalidInputError):
    """The sample has no spread (all points equal) or is too small."""


class IncompatibleStatesError(InvalidInputError):
    """Two state vectors or matrices live in different bases or orders."""


class NumericalError(RootDensError, ArithmeticError):
    """A numerical procedure cannot produce a meaningful answer."""


class NonContractingError(NumericalError):
    """The iteration map is not contracting for the requested parameters."""


class DegenerateSmoothingError(NumericalError):
    """Frequency truncation annihilated the state vector."""


class InvalidDensityMatrixError(NumericalError):
    """Matrix has a negative eigenvalue beyond tolerance or wrong trace."""


class TieError(NumericalError):
    """The principal component of a density matrix is not unique."""
