"""Exception types raised across the package."""


class KernhalfError(Exception):
    """Base class for all package errors."""


class DomainError(KernhalfError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class InvalidArgumentError(KernhalfError, ValueError):
    """A parameter violates a documented precondition."""


class InvalidInputError(KernhalfError, ValueError):
    """Data (Gram matrix, dataset, model file) is malformed or inconsistent."""


class ResourceError(KernhalfError):
    """The requested computation would exceed a configured size cap."""


class ApproximationError(KernhalfError):
    """No polynomial within the degree cap meets the requested accuracy."""

    def __init__(self, message, best_error=None, best_degree=None):
        super().__init__(message)
        self.best_error = best_error
        self.best_degree = best_degree


class DivergenceError(KernhalfError):
    """The optimizer produced a non-finite objective."""


class ParseError(InvalidInputError):
    """A data file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
