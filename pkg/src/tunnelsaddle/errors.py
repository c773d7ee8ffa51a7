"""Exception types shared across the package.

Every numerical failure raises a subclass of TunnelError so callers can
distinguish math trouble from programming errors. Solvers that keep a
best-so-far iterate attach it to the exception.
"""


class TunnelError(Exception):
    """Base class for numerical failures in this package."""


class NoConvergence(TunnelError):
    """An iteration hit its cap without meeting tolerance.

    Carries the best iterate and its residual for diagnostics.
    """

    def __init__(self, message, best=None, residual=None, history=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.history = history if history is not None else []


class AmbiguousRoot(TunnelError):
    """Refined roots collided with other roots of the polynomial."""


class DomainError(TunnelError):
    """Input lies outside the mathematically valid region."""


class CutCollision(TunnelError):
    """The inner branch cut is not isolated from the outer roots."""


class BranchAmbiguity(TunnelError):
    """The integrand modulus dropped too low to track the branch."""


class FitIllConditioned(TunnelError):
    """Design matrix of a least-squares fit is numerically singular."""


class EnergyDriftExceeded(TunnelError):
    """Energy conservation of an integrated path failed its budget."""

    def __init__(self, message, drift=None, budget=None):
        super().__init__(message)
        self.drift = drift
        self.budget = budget


class Escaped(TunnelError):
    """The path left the configured ceiling radius before t_max."""

    def __init__(self, message, t_escape=None):
        super().__init__(message)
        self.t_escape = t_escape


class InsufficientCycles(TunnelError):
    """Too few inner cycles for the requested fit."""


class NoExit(TunnelError):
    """The path never crossed the barrier exit."""


class ModulusOutOfRange(TunnelError):
    """Landen recursion failed to contract for this modulus."""


class PhaseConstraintViolated(TunnelError):
    """Im epsilon^(n/2-1) vanishes; no outward spiral exists there."""


class WrongBasin(TunnelError):
    """A solve converged to a different cycle count than requested."""

    def __init__(self, message, requested=None, converged=None, best=None):
        super().__init__(message)
        self.requested = requested
        self.converged = converged
        self.best = best


class NoExponentialWindow(TunnelError):
    """No time window with a clean exponential decay was found."""


class CFLQualityWarning(UserWarning):
    """Time step is large for the potential scale; accuracy may suffer."""
