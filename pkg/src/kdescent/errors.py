"""Exception types shared across the package."""


class KDescentError(Exception):
    """Base class for all package errors."""


class ParameterError(KDescentError, ValueError):
    """Invalid or out-of-range input parameters."""


class NumericalError(KDescentError, RuntimeError):
    """A numerical routine failed to converge or bracket a root."""


class VerificationError(KDescentError):
    """A cross-check failed."""
