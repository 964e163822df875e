"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside [0,1]^d or an argument is out of its domain."""


class DataFormatError(ValueError):
    """An input file (CSV points or histogram JSON) is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateHistogramError(ValueError):
    """Zero observations and zero total prior: no measure is defined."""


class ImproperPosteriorError(ValueError):
    """Some posterior concentration is zero; supply a positive prior."""


class CapacityError(RuntimeError):
    """A size cap was exceeded (atom count, dense cell budget)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class ConsistencyError(ValueError):
    """Masses handed to the multiresolution bound do not form a probability."""
