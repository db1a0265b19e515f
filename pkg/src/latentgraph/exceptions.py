"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A dense linear-algebra kernel failed (eigensolver, factorization)."""


class DivergenceError(RuntimeError):
    """An iterative solver produced a non-finite iterate."""


class DataError(ValueError):
    """Input data is unreadable, malformed, or violates a precondition."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""
