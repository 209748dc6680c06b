"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of an operation."""


class InsufficientSamplesError(RuntimeError):
    """A Monte Carlo estimate was requested with too few samples to be meaningful."""
