"""
Exception hierarchy shared by every package.

Each class also derives from the builtin the code would otherwise raise,
so ``except ValueError`` / ``except RuntimeError`` keep working.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ToolkitError, ValueError):
    """A parameter lies outside its mathematical domain."""


class AdmissibilityError(DomainError):
    """
    A spectrum lies outside the open cone of the operator.

    Attributes:
        spectrum: The offending eigenvalue vector (list of floats)
        violated: Name of the failing cone inequality
        node: Grid index when raised from a field, else None
    """

    def __init__(self, message: str, spectrum=None, violated: str = None, node=None):
        super().__init__(message)
        self.spectrum = None if spectrum is None else [float(x) for x in spectrum]
        self.violated = violated
        self.node = node


class RangeError(DomainError):
    """A level value cannot be reached along a ray."""


class ParameterError(DomainError):
    """Inconsistent combination of parameters."""


class MetricError(DomainError):
    """Metric tensor is singular or not positive definite."""


class ProblemInfeasibleError(DomainError):
    """A pre-solve gate (delta_{psi,f} or subsolution) failed."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ConfigError(ToolkitError, ValueError):
    """Config file missing, empty or unparsable."""

    def __init__(self, message: str, location: str = None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class SamplingError(ToolkitError, RuntimeError):
    """No admissible samples could be produced."""

    def __init__(self, message: str, diagnostics: dict = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalError(ToolkitError, RuntimeError):
    """An iterative numerical method failed."""


class LinearSolverError(NumericalError):
    """Krylov breakdown or non-finite linear solve."""


class NonconvergenceError(NumericalError):
    """
    Newton or continuation gave up.

    Attributes:
        snapshot: dict with the last good state (u values, t, iteration, residual)
    """

    def __init__(self, message: str, snapshot: dict = None):
        super().__init__(message)
        self.snapshot = snapshot or {}
