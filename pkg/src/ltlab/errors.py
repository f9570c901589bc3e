"""Exception types raised by the library.

Every numerical failure has its own class so the CLI can map it onto an
exit code without parsing messages.
"""


class LTLError(Exception):
    """Base class for all library errors."""


class DomainError(LTLError, ValueError):
    """Input lies outside the domain of the operation (or the annuli are inadmissible)."""


class CentreSingularity(DomainError):
    """Polar angle requested at an annulus centre."""


class DegenerateTriangle(DomainError):
    """The centre/centre/point triangle is flat, so the angle alpha is 0 or pi."""


class SeamDerivative(DomainError):
    """Derivative requested within tolerance of a seam where the coordinates are only piecewise smooth."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class NumericalFailure(LTLError, RuntimeError):
    """Base class for failures detected while running an experiment."""


class SeamEncounter(NumericalFailure):
    """An orbit point landed on a seam; re-seeding is advised."""


class NonFiniteAccumulation(NumericalFailure):
    """A Lyapunov accumulator became inf or nan."""


class NoReturnWithinBudget(NumericalFailure):
    """The orbit did not re-enter S within the iteration budget."""


class LiftAmbiguity(NumericalFailure):
    """Consecutive curve points are too far apart for a unique continuous lift."""


class PointBudgetExceeded(NumericalFailure):
    """Adaptive curve refinement needed more points than allowed."""
