"""Coordinate transforms, curvature diagnostics, gauge action, references.

Chart conventions: the physical chart carries (x, phi, psi, t) with
d/ds = phi^-1 d/dx; the rescaled chart carries u(sigma, tau) with
u = psi/sqrt(-t), sigma = s/sqrt(-t), tau = -log(-t) (+ tau_offset).
"""

import math

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import kernels
from .errors import InvalidTime, OutOfWindow
from .states import SQRT2, CurvatureField, GaugeParams, ProfileState, RescaledState


def pole_grid(n: int) -> np.ndarray:
    """Uniform nodes on [-1, 1] with the poles on the end nodes (n even)."""
    if n % 2 != 0:
        raise ValueError("pole grids use an even interval count n")
    return np.linspace(-1.0, 1.0, n + 1)


def arclength(state: ProfileState):
    """Distance from the equator, s(x) = integral_0^x phi dx' (trapezoid).

    Returns (s, s_minus, s_plus); the poles sit on the end nodes, so the
    tip distances are grid values.  For even phi the cumulative sum is
    exactly antisymmetric about the equator node x = 0.
    """
    x, phi, h = state.x_grid, state.phi, state.h
    n = x.size
    if n % 2 != 1:
        raise ValueError("profile grids carry an odd node count (equator node)")
    T = np.empty(n)
    T[0] = 0.0
    np.cumsum((phi[1:] + phi[:-1]) * (0.5 * h), out=T[1:])
    s = T - T[n // 2]
    return s, float(s[0]), float(s[-1])


def curvatures(state) -> CurvatureField:
    """Sectional curvatures K1 = (1 - psi_s^2)/psi^2, K0 = -psi_ss/psi.

    The same formulas apply verbatim in (u, sigma) for rescaled states.
    Near a smooth pole both ratios have regular even limits; they are
    evaluated by the pole-regularized extrapolation in ``kernels``.
    """
    if isinstance(state, ProfileState):
        s, _, _ = arclength(state)
        a, b, _, _ = kernels.ratio_fields(state.psi, state.phi, state.h, s, closed=state.closed)
        return CurvatureField.from_sectional(K0=-a, K1=b)
    return _curvatures_rescaled(state)


def _curvatures_rescaled(state: RescaledState) -> CurvatureField:
    sig = state.sigma_grid
    u = state.u
    closed = state.has_tips
    if state.du is not None and state.d2u is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            a = state.d2u / u
            b = (1.0 - state.du * state.du) / (u * u)
        if closed:
            _extrapolate_tip_ratios(a, b, sig, u, state.sigma_minus, state.sigma_plus)
        return CurvatureField.from_sectional(K0=-a, K1=b)
    ones = np.ones_like(u)
    a, b, _, _ = kernels.ratio_fields(u, ones, float(sig[1] - sig[0]), sig, closed=closed)
    return CurvatureField.from_sectional(K0=-a, K1=b)


def _extrapolate_tip_ratios(a, b, sig, u, sigma_minus, sigma_plus):
    """Even-polynomial extrapolation of a, b through the two tips in place."""
    umax = u.max()
    imax = int(np.argmax(u))
    n = u.size
    d2 = np.empty(n)
    d2[:imax] = (sig[:imax] - sigma_minus) ** 2
    d2[imax:] = (sig[imax:] - sigma_plus) ** 2
    frac = u / umax
    for lo_i, hi_i in ((0, imax), (imax, n)):
        idx = np.arange(lo_i, hi_i)
        fix = idx[frac[idx] < kernels.FIX_FRAC]
        if fix.size == 0:
            continue
        fit = idx[(frac[idx] >= kernels.FIT_LO) & (frac[idx] <= kernels.FIT_HI)]
        if fit.size < 3:
            continue
        kernels._even_fit_replace(a, d2, fix, fit)
        kernels._even_fit_replace(b, d2, fix, fit)


def tip_chart_curvatures(u, Y, Y_u) -> CurvatureField:
    """Curvatures in the tip chart: K1 = (1-Y)/u^2, K0 = -Y_u/(2u)."""
    u = np.asarray(u, dtype=float)
    return CurvatureField.from_sectional(K0=-np.asarray(Y_u) / (2.0 * u),
                                         K1=(1.0 - np.asarray(Y)) / (u * u))


def to_rescaled(state: ProfileState) -> RescaledState:
    """Type-I rescaling psi = sqrt(-t) u, sigma = s/sqrt(-t), tau = -log(-t).

    Carries the x-chart so from_rescaled is an exact inverse.
    """
    if state.t >= 0.0:
        raise InvalidTime("type-I rescaling needs t < 0")
    root = math.sqrt(-state.t)
    s, s_minus, s_plus = arclength(state)
    return RescaledState(
        sigma_grid=s / root,
        u=state.psi / root,
        tau=state.tau,
        sigma_plus=s_plus / root,
        sigma_minus=s_minus / root,
        x_grid=state.x_grid,
        phi=state.phi / root,
    )


def from_rescaled(rs: RescaledState, t: float = -1.0, n: int = 512) -> ProfileState:
    """Inverse of to_rescaled, anchored at representation time t (< 0).

    With a carried x-chart the inversion is exact; otherwise the profile is
    resampled onto a staggered x-grid proportional to sigma.  tau_offset is
    set so the state's effective tau equals rs.tau.
    """
    if t >= 0.0:
        raise InvalidTime("need t < 0")
    root = math.sqrt(-t)
    tau_offset = rs.tau + math.log(-t)
    if rs.x_grid is not None and rs.phi is not None:
        return ProfileState(
            x_grid=rs.x_grid,
            phi=rs.phi * root,
            psi=rs.u * root,
            t=t,
            tau_offset=tau_offset,
        )
    if not rs.has_tips:
        raise ValueError("resampling from_rescaled needs tip locations")
    x = pole_grid(n)
    half = 0.5 * (rs.sigma_plus - rs.sigma_minus)
    mid = 0.5 * (rs.sigma_plus + rs.sigma_minus)
    sig = mid + half * x
    u_of_sig = PchipInterpolator(rs.sigma_grid, rs.u)
    psi = np.clip(u_of_sig(sig), 0.0, None) * root
    psi[0] = 0.0
    psi[-1] = 0.0
    phi = np.full(x.size, half * root)
    return ProfileState(x_grid=x, phi=phi, psi=psi, t=t, tau_offset=tau_offset, closed=True)


def apply_gauge(state: RescaledState, g: GaugeParams, lookup=None) -> RescaledState:
    """Gauge action u^{bg}(sigma,tau) = c u(sigma/c, tau'), c = sqrt(1+beta e^tau).

    ``lookup(sig_array, tau) -> u values`` supplies the profile at the
    shifted time tau' = tau + gamma - log c^2; without it the state's own
    profile is used as tau-independent, which is exact for the self-similar
    references (cylinder, sphere) and for gamma-free snapshots.
    """
    c = float(g.scale(state.tau))
    tau_shift = float(g.shifted_tau(state.tau))
    sig = state.sigma_grid
    pulled = sig / c
    if lookup is not None:
        u_src = np.asarray(lookup(pulled, tau_shift), dtype=float)
        du = d2u = None
    else:
        u_src = _eval_profile(state, pulled)
        du = _eval_profile(state, pulled, order=1) if state.du is not None else None
        d2u = (
            _eval_profile(state, pulled, order=2) / c
            if state.d2u is not None
            else None
        )
    return RescaledState(
        sigma_grid=sig,
        u=c * u_src,
        tau=state.tau,
        sigma_plus=c * state.sigma_plus,
        sigma_minus=c * state.sigma_minus,
        du=du,
        d2u=d2u,
    )


def _eval_profile(state: RescaledState, sig, order: int = 0):
    src = {0: state.u, 1: state.du, 2: state.d2u}[order]
    interp = PchipInterpolator(state.sigma_grid, src)
    lo, hi = state.sigma_grid[0], state.sigma_grid[-1]
    out = interp(np.clip(sig, lo, hi))
    if state.has_tips:
        out = np.where((sig < state.sigma_minus) | (sig > state.sigma_plus), 0.0, out)
    return out


def apply_gauge_trajectory(times, u_matrix, sigma_grid, g: GaugeParams, out_times=None):
    """Gauge an entire stored trajectory.

    times: increasing tau samples; u_matrix: (len(times), len(sigma_grid)).
    Interpolation is cubic in tau and monotone cubic in sigma.  Raises
    OutOfWindow when a shifted time leaves the stored window.
    Returns (out_times, gauged matrix on sigma_grid).
    """
    times = np.asarray(times, dtype=float)
    u_matrix = np.asarray(u_matrix, dtype=float)
    if out_times is None:
        out_times = times
    out_times = np.atleast_1d(np.asarray(out_times, dtype=float))
    in_tau = CubicSpline(times, u_matrix, axis=0)
    out = np.empty((out_times.size, sigma_grid.size))
    slack = 1e-9 * (1.0 + abs(times[0]))
    for k, tau in enumerate(out_times):
        c = float(g.scale(tau))
        tau_shift = float(g.shifted_tau(tau))
        if tau_shift < times[0] - slack or tau_shift > times[-1] + slack:
            raise OutOfWindow(
                f"shifted time {tau_shift:.6f} outside stored window "
                f"[{times[0]:.6f}, {times[-1]:.6f}]"
            )
        profile = in_tau(np.clip(tau_shift, times[0], times[-1]))
        in_sig = PchipInterpolator(sigma_grid, profile)
        pulled = np.clip(sigma_grid / c, sigma_grid[0], sigma_grid[-1])
        out[k] = c * in_sig(pulled)
    return out_times, out


def reference_solution(kind: str, tau: float | None = None, t: float | None = None,
                       n: int = 257, domain: float = 24.0):
    """Exact solutions of the flow in either chart.

    kind='cylinder': u = sqrt(2) (rescaled) or psi = sqrt(-2t) (physical,
    a test field without smooth closure).  kind='sphere': u = 2 cos(sigma/2)
    on [-pi, pi] (rescaled) or radius law r^2 = -4t (physical).  Rescaled
    references carry closed-form derivative arrays.
    """
    if (tau is None) == (t is None):
        raise ValueError("pass exactly one of tau, t")
    if kind == "cylinder":
        if tau is not None:
            sig = np.linspace(-domain, domain, n)
            return RescaledState(
                sigma_grid=sig,
                u=np.full(n, SQRT2),
                tau=tau,
                du=np.zeros(n),
                d2u=np.zeros(n),
            )
        x = pole_grid(n if n % 2 == 0 else n - 1)
        m = x.size
        return ProfileState(
            x_grid=x,
            phi=np.ones(m),
            psi=np.full(m, math.sqrt(-2.0 * t)),
            t=t,
            closed=False,
        )
    if kind == "sphere":
        if tau is not None:
            sig = np.linspace(-math.pi, math.pi, n)
            return RescaledState(
                sigma_grid=sig,
                u=2.0 * np.cos(sig / 2.0),
                tau=tau,
                sigma_plus=math.pi,
                sigma_minus=-math.pi,
                du=-np.sin(sig / 2.0),
                d2u=-0.5 * np.cos(sig / 2.0),
            )
        if t >= 0.0:
            raise InvalidTime("sphere exists for t < 0 (extinction at 0)")
        r = 2.0 * math.sqrt(-t)
        x = pole_grid(n if n % 2 == 0 else n - 1)
        m = x.size
        psi = r * np.cos(math.pi * x / 2.0)
        psi[0] = 0.0
        psi[-1] = 0.0
        return ProfileState(
            x_grid=x,
            phi=np.full(m, math.pi * r / 2.0),
            psi=psi,
            t=t,
            closed=True,
        )
    raise ValueError(f"unknown reference kind {kind!r}")


def gauged_sphere(g: GaugeParams, tau: float, n: int = 257) -> RescaledState:
    """Closed-form gauge orbit of the rescaled sphere.

    u^{bg}(sigma, tau) = 2c cos(sigma/(2c)) with c = c(tau); an exact,
    genuinely tau-dependent solution used as ground truth in tests.
    """
    c = float(g.scale(tau))
    sig = np.linspace(-math.pi * c, math.pi * c, n)
    return RescaledState(
        sigma_grid=sig,
        u=2.0 * c * np.cos(sig / (2.0 * c)),
        tau=tau,
        sigma_plus=math.pi * c,
        sigma_minus=-math.pi * c,
        du=-np.sin(sig / (2.0 * c)),
        d2u=-np.cos(sig / (2.0 * c)) / (2.0 * c),
    )
