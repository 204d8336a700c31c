"""Exception hierarchy shared by every subsystem."""


class SirDelayError(Exception):
    """Base class for all package errors."""


class DomainError(SirDelayError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConfigurationError(SirDelayError, ValueError):
    """Integrator or scenario settings cannot be honoured."""


class RangeError(SirDelayError, ValueError):
    """A dense-output query falls outside the computed span."""


class NumericalBlowup(SirDelayError, ArithmeticError):
    """A non-finite state was produced during integration."""

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"non-finite state at t={self.time:.9g}")


class AnalysisError(SirDelayError):
    """Base class for failures in equilibrium / stability analysis."""


class NonConvergence(AnalysisError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")


class NoEndemicEquilibrium(AnalysisError):
    """The equilibrium solver converged to a point that is not strictly positive."""

    def __init__(self, point):
        self.point = tuple(point)
        super().__init__("no endemic equilibrium: converged to "
                         + ", ".join(f"{v:.6g}" for v in self.point))


class ScenarioError(SirDelayError, ValueError):
    """A scenario document failed to parse or validate.

    ``field`` names the offending key (dotted path) when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
