"""Exception hierarchy shared by all modules."""


class GaussCapError(Exception):
    """Base class for toolkit errors."""


class InvalidArgumentError(GaussCapError, ValueError):
    """An argument is outside its documented domain."""


class InvalidStateError(GaussCapError, ValueError):
    """A covariance matrix violates positivity or the uncertainty relation."""


class InvalidMeasurementError(InvalidStateError):
    """A measured covariance matrix is too far from physical to be projected."""


class PreconditionError(GaussCapError, ValueError):
    """An operation was called on an input it is not defined for."""


class NumericalFailureError(GaussCapError, RuntimeError):
    """An iterative solve did not reach its tolerance."""


class TruncationError(GaussCapError, RuntimeError):
    """Too much probability weight was lost to the Fock cutoff."""


class DilationNotImplementedError(GaussCapError, NotImplementedError):
    """No dilation could be synthesised for the given channel."""
