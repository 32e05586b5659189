"""Exception types raised across the package."""

from __future__ import annotations

__all__ = [
    "RelaxPrcError",
    "ShapeError",
    "BranchOutOfDomain",
    "OnSeparatrix",
    "SlowFieldVanishes",
    "NoCrossing",
    "StepSizeUnderflow",
    "NonFiniteState",
    "NoOscillation",
    "NotConverged",
    "SampleErrors",
    "ConfigError",
    "ParseError",
    "ValidationError",
    "MonodromyIllConditioned",
]


class RelaxPrcError(Exception):
    """Base class for all errors raised by relaxprc."""


class ShapeError(RelaxPrcError, ValueError):
    """The fast nullcline is not S-shaped."""


class BranchOutOfDomain(RelaxPrcError, ValueError):
    """A branch of the critical manifold was evaluated outside its z-interval."""


class OnSeparatrix(RelaxPrcError, ValueError):
    """The point lies on the repelling branch; its asymptotic phase is undefined."""


class SlowFieldVanishes(RelaxPrcError):
    """The reduced flow has an equilibrium on the requested arc."""


class NoCrossing(RelaxPrcError):
    """An impulse of the given sign and size never crosses the separatrix."""


class StepSizeUnderflow(RelaxPrcError):
    """The adaptive integrator could not meet its tolerances."""


class NonFiniteState(RelaxPrcError):
    """The integrated state became NaN or infinite."""


class NoOscillation(RelaxPrcError):
    """No periodic orbit was found within the time budget."""


class NotConverged(RelaxPrcError):
    """The asymptotic phase shift did not settle within the horizon."""


class SampleErrors(RelaxPrcError):
    """One or more samples of a curve failed.

    ``failures`` holds ``(index, theta, exception)`` triples.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        idx = ", ".join(str(i) for i, _, _ in self.failures[:10])
        more = "" if len(self.failures) <= 10 else ", ..."
        super().__init__(f"{len(self.failures)} sample(s) failed at indices [{idx}{more}]")


class ConfigError(RelaxPrcError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ValidationError(ConfigError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(field if not message else f"{field}: {message}")


class MonodromyIllConditioned(RuntimeWarning):
    """Warning: the transverse Floquet mode decays too fast to be resolved."""
