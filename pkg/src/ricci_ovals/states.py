"""Domain types: profile states in the three charts and gauge parameters.

All types are immutable value objects; operations elsewhere are pure
functions of them, so everything is safe to share across threads.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProfile, InvalidTime

SQRT2 = math.sqrt(2.0)


def _ro(arr) -> np.ndarray:
    a = np.ascontiguousarray(arr, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProfileState:
    """Unrescaled rotationally symmetric metric g = phi^2 dx^2 + psi^2 g_can.

    x_grid is uniform on [-1, 1] with the poles on the end nodes.  psi is
    the S^2 fiber radius (length units), positive at interior nodes; closed
    profiles have psi = 0 pinned at x = +-1 with arclength slope -+1
    (smooth closure).  Open test fields (cylinder segments) carry
    closed=False and positive endpoint values.  ``tau_offset`` relabels
    rescaled time after a parabolic rescaling of the solution (u and sigma
    are invariant under it); physical runs anchored at t = -1 use it to
    carry the effective tau = -log(-t) + tau_offset.
    """

    x_grid: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    t: float
    tau_offset: float = 0.0
    closed: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "x_grid", _ro(self.x_grid))
        object.__setattr__(self, "phi", _ro(self.phi))
        object.__setattr__(self, "psi", _ro(self.psi))
        if self.t >= 0.0:
            raise InvalidTime(f"need t < 0, got {self.t}")
        if not (self.x_grid.shape == self.phi.shape == self.psi.shape):
            raise ValueError("x_grid, phi, psi must share a shape")
        if self.closed is None:
            tiny = 1e-12 * float(self.psi.max())
            object.__setattr__(self, "closed", bool(self.psi[0] <= tiny and self.psi[-1] <= tiny))
        if np.any(self.psi[1:-1] <= 0.0) or (not self.closed and np.any(self.psi <= 0.0)):
            raise DegenerateProfile("psi must be positive at interior nodes")
        if np.any(self.phi <= 0.0):
            raise DegenerateProfile("phi must be positive")

    @property
    def h(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def tau(self) -> float:
        return -math.log(-self.t) + self.tau_offset

    def reflection_defect(self) -> float:
        """max |psi(x) - psi(-x)| + max |phi(x) - phi(-x)| on the grid."""
        return float(
            np.abs(self.psi - self.psi[::-1]).max()
            + np.abs(self.phi - self.phi[::-1]).max()
        )


@dataclass(frozen=True)
class RescaledState:
    """Type-I rescaled profile u(sigma, tau) with tip locations sigma+-.

    Reference solutions carry closed-form derivative arrays (du, d2u) so
    identity checks can separate the algebra of the equation from stencil
    truncation; grid-only states leave them as None.  x_grid/phi, when
    present, let from_rescaled invert to the exact originating ProfileState.
    """

    sigma_grid: np.ndarray
    u: np.ndarray
    tau: float
    sigma_plus: float = math.nan
    sigma_minus: float = math.nan
    du: np.ndarray | None = None
    d2u: np.ndarray | None = None
    x_grid: np.ndarray | None = field(default=None, repr=False)
    phi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma_grid", _ro(self.sigma_grid))
        object.__setattr__(self, "u", _ro(self.u))
        for name in ("du", "d2u", "x_grid", "phi"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _ro(v))
        if self.sigma_grid.shape != self.u.shape:
            raise ValueError("sigma_grid and u must share a shape")
        if np.any(self.u < 0.0):
            raise DegenerateProfile("u must be nonnegative")

    @property
    def h(self) -> float:
        return float(self.sigma_grid[1] - self.sigma_grid[0])

    @property
    def has_tips(self) -> bool:
        return math.isfinite(self.sigma_plus) and math.isfinite(self.sigma_minus)

    def reflection_defect(self) -> float:
        return float(np.abs(self.u - self.u[::-1]).max())

    def interpolator(self):
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.sigma_grid, self.u)


@dataclass(frozen=True)
class CurvatureField:
    """Sectional curvatures of the ansatz and the scalar curvature.

    K1 is the curvature of a plane tangent to the S^2 fiber, K0 of an
    orthogonal plane; R = 4 K0 + 2 K1 holds by construction.
    """

    K0: np.ndarray
    K1: np.ndarray
    R: np.ndarray

    @classmethod
    def from_sectional(cls, K0, K1) -> "CurvatureField":
        K0 = _ro(K0)
        K1 = _ro(K1)
        return cls(K0=K0, K1=K1, R=_ro(4.0 * K0 + 2.0 * K1))


@dataclass(frozen=True)
class GaugeParams:
    """Time-translation / parabolic-dilation pair (beta, gamma).

    Acts on rescaled profiles by
        u^{bg}(sigma, tau) = c * u(sigma/c, tau + gamma - log c^2),
        c = sqrt(1 + beta e^tau).
    Internally beta is stored as the product beta*e^{tau0} ("beta_at_tau0"):
    raw beta scales like e^{-tau0} and overflows float64 for tau0 < -708,
    while the product stays O(eps/|tau0|) on the admissible box.
    """

    gamma: float
    tau0: float
    beta_at_tau0: float

    @classmethod
    def from_raw(cls, beta: float, gamma: float, tau0: float) -> "GaugeParams":
        return cls(gamma=gamma, tau0=tau0, beta_at_tau0=beta * math.exp(tau0))

    @classmethod
    def from_scaled(cls, beta_at_tau0: float, gamma: float, tau0: float) -> "GaugeParams":
        return cls(gamma=gamma, tau0=tau0, beta_at_tau0=beta_at_tau0)

    @classmethod
    def identity(cls, tau0: float) -> "GaugeParams":
        return cls(gamma=0.0, tau0=tau0, beta_at_tau0=0.0)

    @property
    def beta(self) -> float:
        """Raw beta; may overflow to inf for tau0 < -708 (use the scaled form)."""
        try:
            return self.beta_at_tau0 * math.exp(-self.tau0)
        except OverflowError:
            return math.inf if self.beta_at_tau0 > 0 else -math.inf

    def beta_exp_tau(self, tau) -> float:
        """beta * e^tau, computed overflow-free."""
        return self.beta_at_tau0 * np.exp(tau - self.tau0)

    def scale(self, tau) -> float:
        """sqrt(1 + beta e^tau); requires 1 + beta e^tau > 0."""
        q = 1.0 + self.beta_exp_tau(tau)
        if np.any(np.asarray(q) <= 0.0):
            raise InvalidTime("1 + beta e^tau must stay positive")
        return np.sqrt(q)

    def shifted_tau(self, tau) -> float:
        return tau + self.gamma - np.log1p(self.beta_exp_tau(tau))

    def b(self, tau) -> float:
        """b = sqrt(1 + beta e^tau) - 1."""
        return self.scale(tau) - 1.0

    def Gamma(self, tau) -> float:
        """(gamma - log(1 + beta e^tau)) / tau."""
        return (self.gamma - np.log1p(self.beta_exp_tau(tau))) / tau

    def is_admissible(self, eps: float, tau0: float | None = None) -> bool:
        """|beta| <= eps e^{-tau0}/|tau0| and |gamma| <= eps |tau0|."""
        t0 = self.tau0 if tau0 is None else tau0
        bhat = self.beta_at_tau0 * math.exp(t0 - self.tau0)
        return abs(bhat) <= eps / abs(t0) and abs(self.gamma) <= eps * abs(t0)

    def inverse(self) -> "GaugeParams":
        """Group inverse: composing with it returns the original solution."""
        return GaugeParams(
            gamma=-self.gamma,
            tau0=self.tau0,
            beta_at_tau0=-self.beta_at_tau0 * math.exp(-self.gamma),
        )

    def compose(self, other: "GaugeParams") -> "GaugeParams":
        """Gauge of a gauge: apply self first, then other."""
        t0 = self.tau0
        b1 = self.beta_at_tau0
        b2 = other.beta_at_tau0 * math.exp(t0 - other.tau0)
        return GaugeParams(
            gamma=self.gamma + other.gamma,
            tau0=t0,
            beta_at_tau0=b2 + math.exp(other.gamma) * b1,
        )
