"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed FCIDUMP content; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConsistencyError(ValueError):
    """Conflicting duplicate data (e.g. two values for the same integral)."""


class DomainError(ValueError):
    """Input outside an operation's domain."""


class DegeneracyError(DomainError):
    """Near-degenerate orbital energies where a finite denominator is required."""


class ConvergenceError(RuntimeError):
    """Optimizer hit its iteration cap; carries the best result found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PopulationCollapseError(RuntimeError):
    """Walker population hit zero during a QMC run."""


class EstimatorUndefined(RuntimeError):
    """Projected-energy denominator was zero over the sampled window."""
