"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A measure spec or experiment config violates its invariants."""


class SingularityError(ValueError):
    """Evaluation requested exactly on an atom of the measure."""


class PoleError(ValueError):
    """Evaluation requested exactly at a pole (a root of the polynomial)."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"evaluation point coincides with root index {index}")


class DomainError(ValueError):
    """Input outside the documented domain of an operation."""


class SolverFailure(RuntimeError):
    """Root solver failed to certify after all precision escalations."""

    def __init__(self, worst_residual: float, message: str | None = None):
        self.worst_residual = worst_residual
        super().__init__(
            message or f"solver failed to certify; worst residual {worst_residual:.3e}"
        )


class IndeterminateCountError(RuntimeError):
    """A ball-count query has a certified point too close to the boundary."""
