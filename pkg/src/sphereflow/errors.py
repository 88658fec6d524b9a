"""Exception types shared across the package."""


class SphereflowError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SphereflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(SphereflowError, ValueError):
    """A grid, flow or scenario configuration is invalid."""


class NotARadialGraphError(SphereflowError, ValueError):
    """The requested surface cannot be written as a radial graph over the origin."""


class NumericalError(SphereflowError, RuntimeError):
    """Non-finite values or a numerically meaningless state was encountered."""


class FlowSingularityError(SphereflowError, RuntimeError):
    """Mean curvature lost positivity; the inverse-mean-curvature speed is undefined."""


class DegenerateError(SphereflowError, RuntimeError):
    """A quantity needed to fix a sign or a direction is numerically zero."""


class UsageError(SphereflowError, ValueError):
    """An operation was called on data that does not carry what it needs."""


class NonConvergenceError(SphereflowError, RuntimeError):
    """An iterative procedure exceeded its iteration budget."""


class HypothesisViolationError(SphereflowError, ValueError):
    """Recorded data violates a hypothesis required by a monotonicity check."""
