"""Exception types shared across the package."""


class RicciOvalsError(Exception):
    """Base class for all package errors."""


class DegenerateProfile(RicciOvalsError):
    """Profile radius hit zero (or below) at an interior node."""


class InvalidTime(RicciOvalsError):
    """Physical time must be negative (flow becomes extinct at t = 0)."""


class OutOfWindow(RicciOvalsError):
    """A gauge-shifted time falls outside the stored trajectory window."""


class TipInRange(RicciOvalsError):
    """A cylindrical-region operation was asked to cross a tip (u -> 0)."""


class CflViolation(RicciOvalsError):
    """Requested explicit time step exceeds the parabolic CFL bound."""


class BlowUpDetected(RicciOvalsError):
    """max |du/dtau| crossed the blow-up threshold during a run."""


class NonMonotone(RicciOvalsError):
    """Profile inversion requires u strictly monotone on the branch."""


class EmptyRegion(RicciOvalsError):
    """A requested region contains no grid nodes for these (theta, L, tau)."""


class StepFailure(RicciOvalsError):
    """Adaptive ODE integration could not satisfy the tolerance."""


class UnderResolved(RicciOvalsError):
    """Grid too coarse for the requested quadrature / norm accuracy."""


class SymmetryViolation(RicciOvalsError):
    """Input breaks reflection symmetry beyond tolerance (odd mode present)."""


class WindowTooShort(RicciOvalsError):
    """Time series too sparse to form unit-window integrals."""


class NotASolution(RicciOvalsError):
    """Supplied trajectory does not satisfy the PDE to tolerance."""


class NoConvergence(RicciOvalsError):
    """Iterative fit failed to converge."""


class RegionViolation(RicciOvalsError):
    """Field violates a support/region precondition."""


class DegenerateY(RicciOvalsError):
    """Tip chart needs Y > 0 on the requested range."""


class ParseError(RicciOvalsError):
    """Config file is not valid JSON; carries line/column info."""


class SchemaError(RicciOvalsError):
    """Config contains an unknown or ill-typed key."""
