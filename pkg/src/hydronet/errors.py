"""Exception types raised by the hydronet package."""


class HydronetError(Exception):
    """Base class for all hydronet errors."""


class ValidationError(HydronetError):
    """A network violates a structural invariant."""


class ParseError(HydronetError):
    """A network file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularNetworkError(HydronetError):
    """A weighted-Laplacian factorization failed (network numerically disconnected)."""


class JacobianError(HydronetError):
    """The fixed-point map Jacobian is not defined at the requested point."""
