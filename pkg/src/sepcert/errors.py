"""Exception hierarchy shared across the package."""


class SepcertError(Exception):
    """Base class for all errors raised by this package."""


class BadKey(SepcertError):
    """A correlator key references an invalid site or site pair."""


class ValueOutOfRange(SepcertError):
    """A correlator value lies outside [-1, 1]."""


class BadNoiseLevel(SepcertError):
    """A white-noise fraction lies outside [0, 1]."""


class MissingData(SepcertError):
    """An operation needs correlators that are absent from the dataset."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class ParseError(SepcertError):
    """A dataset or witness file could not be parsed."""


class NotNormalized(SepcertError):
    """A state vector or probability vector is not normalized."""


class TooLarge(SepcertError):
    """A system size exceeds the exact-diagonalization cap."""


class BadSize(SepcertError):
    """A size precondition (e.g. divisibility by 4) is violated."""


class NotDensity(SepcertError):
    """A matrix is not a valid density matrix."""


class WrongSize(SepcertError):
    """An operation defined for a fixed system size got another size."""


class SchemeMismatch(SepcertError):
    """A symmetrization scheme is invalid for the given dataset shape."""


class NotEntangled(SepcertError):
    """Witness extraction was requested below the detection threshold."""


class SolverFailure(SepcertError):
    """The interior-point solver did not reach a certified solution."""
