"""Typed exceptions shared across the package."""


class VaxGameError(Exception):
    """Base class for all package errors."""


class InvalidParams(VaxGameError, ValueError):
    """A model parameter violates its admissibility constraint."""


class DomainError(VaxGameError, ValueError):
    """A fraction argument lies outside the population simplex."""


class DegenerateState(VaxGameError, ArithmeticError):
    """Total event rate vanished; no transition can be sampled."""


class FrozenTrajectory(VaxGameError, RuntimeError):
    """The near-extinction freeze fired inside the requested tail window."""


class StepFailure(VaxGameError, RuntimeError):
    """The ODE integrator could not make progress."""


class IndicatorNonstationary(VaxGameError, RuntimeError):
    """Threshold policy has no fixed point; the limit object is a cycle."""


class MarginalRegime(VaxGameError, ValueError):
    """Parameters sit on a regime boundary where no attractor is claimed."""


class NoCoexistence(VaxGameError, ValueError):
    """The co-existence equilibrium would have a non-positive infected share."""


class RegimeMismatch(VaxGameError, ValueError):
    """Requested formula is not valid for the supplied parameters."""


class ComplexRoot(VaxGameError, ArithmeticError):
    """Equilibrium quadratic has a negative discriminant."""


class EquilibriumNotFound(VaxGameError, RuntimeError):
    """Root-finding for a (perturbed) equilibrium did not converge."""


class ConfigError(VaxGameError, ValueError):
    """Experiment configuration file is malformed or inconsistent."""
