"""Tip chart Y(u, tau) = u_sigma^2, soliton frame Z(rho), region partitions.

The chart inverts the monotone branch of u between the equator and a tip,
turning the slope field into a function of the level u.  It is used for
diagnostics and norms only, never advanced in time.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import EmptyRegion, NonMonotone
from .states import GaugeParams, RescaledState, _ro


@dataclass(frozen=True)
class TipProfile:
    """Slope field on a u-grid over one tip branch.

    Y = u_sigma^2 with 0 <= Y <= 1 and Y -> 1 at the tip (smooth closure);
    Psi = sqrt(Y); sigma_of_u is the branch inverse, strictly monotone.
    """

    u_grid: np.ndarray
    Y: np.ndarray
    Psi: np.ndarray
    sigma_of_u: np.ndarray
    tau: float
    theta: float

    def __post_init__(self):
        for name in ("u_grid", "Y", "Psi", "sigma_of_u"):
            object.__setattr__(self, name, _ro(getattr(self, name)))

    @property
    def du(self) -> float:
        return float(self.u_grid[1] - self.u_grid[0])

    def rho(self) -> np.ndarray:
        return self.u_grid * math.sqrt(-self.tau)


@dataclass(frozen=True)
class RegionPartition:
    """Index ranges of the standard regions on a u-grid.

    cylindrical: u >= theta/4;  D_theta: theta/4 <= u <= theta/2;
    D_4theta: theta <= u <= 2 theta;  tip: u <= 2 theta;
    collar: L/sqrt|tau| <= u <= 2 theta;  soliton: u <= L/sqrt|tau|.
    """

    theta: float
    L: float
    tau: float
    cylindrical: np.ndarray
    d_theta: np.ndarray
    d_4theta: np.ndarray
    tip: np.ndarray
    collar: np.ndarray
    soliton: np.ndarray


def partition(u_values, theta: float, L: float, tau: float) -> RegionPartition:
    """Boolean masks for the regions; raises EmptyRegion when the collar or
    soliton region holds no grid nodes (the theta-L-tau compatibility
    check: needs L/sqrt|tau| < 2 theta and nodes below L/sqrt|tau|)."""
    if not (0.0 < theta < math.sqrt(2.0)):
        raise ValueError("theta must lie in (0, sqrt 2)")
    if L < 1.0:
        raise ValueError("need L >= 1")
    u = np.asarray(u_values, dtype=float)
    lam = L / math.sqrt(-tau)
    masks = dict(
        cylindrical=u >= theta / 4.0,
        d_theta=(u >= theta / 4.0) & (u <= theta / 2.0),
        d_4theta=(u >= theta) & (u <= 2.0 * theta),
        tip=u <= 2.0 * theta,
        collar=(u >= lam) & (u <= 2.0 * theta),
        soliton=u <= lam,
    )
    if lam >= 2.0 * theta or not masks["collar"].any():
        raise EmptyRegion(
            f"collar [{lam:.4g}, {2*theta:.4g}] holds no nodes; "
            "increase |tau| or theta"
        )
    if not masks["soliton"].any():
        raise EmptyRegion(f"soliton region u <= {lam:.4g} holds no grid nodes")
    return RegionPartition(theta=theta, L=L, tau=tau, **masks)


def invert_profile(state: RescaledState, theta: float, n_u: int = 257,
                   side: str = "right", u_min: float | None = None) -> TipProfile:
    """Monotone-cubic inversion of u onto [u_min, 2 theta] on one branch.

    sigma(u) solves the forward interpolant to 1e-12 (Newton-free brentq per
    node), so the round trip |u(sigma(u)) - u| is solver tolerance, not
    interpolation error.  NonMonotone if u_sigma changes sign inside the
    requested range.
    """
    sig = state.sigma_grid
    u = state.u
    i0 = int(np.argmax(u))
    if side == "right":
        branch = slice(i0, u.size)
        uu, ss = u[branch], sig[branch]
        uu, ss = uu[::-1], ss[::-1]      # ascending u toward the equator
    else:
        branch = slice(0, i0 + 1)
        uu, ss = u[branch], sig[branch]
    umax_excl = u[i0] - 1e-6
    keep = uu < umax_excl
    uu, ss = uu[keep], ss[keep]
    if np.any(np.diff(uu) <= 0.0):
        raise NonMonotone("u_sigma changes sign on the requested branch")
    hi = min(2.0 * theta, uu[-1])
    # the chart excludes u = 0 (1/u^2 terms); start at the first positive level
    lo = max(uu[0], hi / (n_u - 1)) if u_min is None else max(u_min, uu[0])
    if hi <= lo:
        raise EmptyRegion("no branch segment below u = 2 theta")
    u_grid = np.linspace(lo, hi, n_u)

    fwd_u = PchipInterpolator(ss, uu) if ss[0] < ss[-1] else PchipInterpolator(ss[::-1], uu[::-1])
    inv = PchipInterpolator(uu, ss)
    sigma_u = inv(u_grid)
    s_lo, s_hi = min(ss[0], ss[-1]), max(ss[0], ss[-1])
    for k, target in enumerate(u_grid):
        f = lambda s: float(fwd_u(s)) - target
        a, b = sigma_u[k] - 2.0 * abs(ss[1] - ss[0]), sigma_u[k] + 2.0 * abs(ss[1] - ss[0])
        a, b = max(a, s_lo), min(b, s_hi)
        try:
            if f(a) * f(b) <= 0.0:
                sigma_u[k] = brentq(f, a, b, xtol=1e-13, rtol=8.9e-16)
        except ValueError:
            pass

    if state.du is not None:
        dd = PchipInterpolator(sig, state.du)(sigma_u)
        Y = dd * dd
    else:
        du_grid = np.gradient(u, sig)
        Y = PchipInterpolator(sig, du_grid)(sigma_u) ** 2
    Y = np.clip(Y, 0.0, 1.0)
    return TipProfile(
        u_grid=u_grid,
        Y=Y,
        Psi=np.sqrt(Y),
        sigma_of_u=sigma_u,
        tau=state.tau,
        theta=theta,
    )


def y_derivs(tp: TipProfile):
    """(Y_u, Y_uu) on the u-grid; even parity Y(-u) = Y(u) feeds the ghost
    at the tip end when the grid starts near u = 0."""
    Y = tp.Y
    du = tp.du
    n = Y.size
    Y_u = np.empty(n)
    Y_uu = np.empty(n)
    Y_u[1:-1] = (Y[2:] - Y[:-2]) / (2.0 * du)
    Y_uu[1:-1] = (Y[2:] - 2.0 * Y[1:-1] + Y[:-2]) / (du * du)
    u0 = tp.u_grid[0]
    if u0 <= 1.5 * du:
        # ghost by even reflection through u = 0: Y(-u0) ~ Y(u0) + O(u0 du)
        Y_u[0] = (Y[1] - Y[0]) / (2.0 * du) * (2.0 * u0 / (u0 + du))
        Y_uu[0] = (Y[1] - Y[0]) * 2.0 / (du * (du + 2.0 * u0))
    else:
        Y_u[0] = (-3.0 * Y[0] + 4.0 * Y[1] - Y[2]) / (2.0 * du)
        Y_uu[0] = (2.0 * Y[0] - 5.0 * Y[1] + 4.0 * Y[2] - Y[3]) / (du * du)
    Y_u[-1] = (3.0 * Y[-1] - 4.0 * Y[-2] + Y[-3]) / (2.0 * du)
    Y_uu[-1] = (2.0 * Y[-1] - 5.0 * Y[-2] + 4.0 * Y[-3] - Y[-4]) / (du * du)
    return Y_u, Y_uu


def rhs_Y(tp: TipProfile, Y_u=None, Y_uu=None):
    """Spatial side of the chart equation, moved to one side:

        Y Y_uu - (Y_u)^2/2 + (1 - Y) Y_u/u + 2 (1 - Y) Y/u^2 - (u/2) Y_u.

    A time series of profiles satisfies the chart equation when the finite
    difference of Y in tau matches this field (residual operator only).
    """
    if Y_u is None or Y_uu is None:
        Y_u, Y_uu = y_derivs(tp)
    u = tp.u_grid
    Y = tp.Y
    return (
        Y * Y_uu
        - 0.5 * Y_u * Y_u
        + (1.0 - Y) * Y_u / u
        + 2.0 * (1.0 - Y) * Y / (u * u)
        - 0.5 * u * Y_u
    )


def to_soliton_frame(tp: TipProfile):
    """(rho, Z) with rho = u sqrt|tau| and Z(rho) = Y(u); Z(0) -> 1."""
    return tp.rho(), tp.Y.copy()


def gauge_tip(tp: TipProfile, g: GaugeParams) -> TipProfile:
    """Gauge action in tip coordinates: Y^{bg}(u, tau) = Y(u/c, tau').

    Quasi-static single-profile form (the profile stands in for its own
    time slice at tau'), matching apply_gauge's convention.
    """
    c = float(g.scale(tp.tau))
    pulled = tp.u_grid / c
    lo, hi = tp.u_grid[0], tp.u_grid[-1]
    Y = PchipInterpolator(tp.u_grid, tp.Y)(np.clip(pulled, lo, hi))
    sig = c * PchipInterpolator(tp.u_grid, tp.sigma_of_u)(np.clip(pulled, lo, hi))
    Y = np.clip(Y, 0.0, 1.0)
    return TipProfile(
        u_grid=tp.u_grid,
        Y=Y,
        Psi=np.sqrt(Y),
        sigma_of_u=sig,
        tau=tp.tau,
        theta=tp.theta,
    )


def default_L(table=None) -> float:
    """Far-field onset of the reference soliton profile (smallest rho with
    rho^2 Z0 >= 1); partitions default to it when no L is given."""
    from . import bryant

    table = table or bryant.default_table()
    return table.farfield_onset()
