"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where an operation is defined."""


class PriorError(ValueError):
    """A prior specification is malformed or violates the mass condition."""


class ConfigError(ValueError):
    """A solver, simulation or run configuration is invalid."""


class ConvergenceError(RuntimeError):
    """An iterative procedure failed to reach its tolerance."""


class SolverError(RuntimeError):
    """The boundary equations could not be solved at some time node."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node
