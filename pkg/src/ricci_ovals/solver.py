"""Method-of-lines integration of the flow in both charts, plus the
approximate-ancient oval initial data.

Physical chart: d/dt (psi, phi) on the staggered x-grid, poles handled by
the regularized ratio fields.  Rescaled chart: the commuting-variable
equation for u on a fixed tip-free sigma-grid (the sigma-edges are outflow
for near-cylindrical data, so one-sided stencils close the system).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import bryant, kernels
from .errors import BlowUpDetected, CflViolation, TipInRange
from .geometry import arclength, from_rescaled
from .states import SQRT2, ProfileState, RescaledState

BLOWUP_THRESHOLD = 1e6


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.  tau bounds apply to rescaled runs, t bounds to
    physical ones; exactly one pair is consulted per mode."""

    kind: str = "cylinder"            # cylinder | sphere | oval | custom
    n: int = 256
    tau_init: float = -20.0
    tau_end: float = -10.0
    t_init: float = -1.0
    t_end: float = -0.0625
    cfl: float = 0.2
    theta: float = 0.1
    cadence: float = 0.5
    domain: float = 24.0
    u_floor: float = 0.5
    perturb_eps: float = 0.0
    perturb_mode: int = 0
    stop_radius: float | None = None

    def __post_init__(self):
        if self.n < 64:
            raise ValueError("need n >= 64")
        if not (0.0 < self.cfl <= 0.5):
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.mode == "rescaled" and not (self.tau_init < self.tau_end <= -10.0):
            raise ValueError("rescaled runs need tau_init < tau_end <= -10")

    @property
    def mode(self) -> str:
        return "physical" if self.kind == "sphere" else "rescaled"


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshots of a run plus per-step diagnostics."""

    times: np.ndarray
    states: tuple
    kind: str
    termination: str = "completed"
    max_rhs: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("snapshot times must increase strictly")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return len(self.states)

    def u_matrix(self):
        """(times, u values) on the shared sigma-grid (rescaled runs only)."""
        return np.stack([s.u for s in self.states])

    def lookup(self, sig, tau):
        """Profile at arbitrary (sigma, tau) by cubic-in-tau + pchip-in-sigma."""
        from scipy.interpolate import CubicSpline

        mat = self.u_matrix()
        prof = CubicSpline(self.times, mat, axis=0)(np.clip(tau, self.times[0], self.times[-1]))
        grid = self.states[0].sigma_grid
        return PchipInterpolator(grid, prof)(np.clip(sig, grid[0], grid[-1]))


def compute_J(state: RescaledState, window: slice | None = None):
    """Nonlocal term J(sigma) = 2 integral_0^sigma u_ss/u, cumulative trapezoid.

    Uses the carried closed-form u_ss when present.  The range must stay in
    the cylindrical region (TipInRange otherwise).
    """
    sl = window or slice(None)
    u = state.u[sl]
    sig = state.sigma_grid[sl]
    if np.any(u <= 0.0):
        raise TipInRange("J integral range touches u = 0")
    if state.d2u is not None:
        d2u = state.d2u[sl]
    else:
        _, d2u = kernels.sigma_derivs(u, state.h)
    icenter = int(np.argmin(np.abs(sig)))
    if abs(sig[icenter]) > 1e-9 * max(1.0, abs(sig[-1])):
        raise ValueError("sigma-grid must contain the symmetry point sigma = 0")
    return kernels.cumtrapz_center(2.0 * d2u / u, state.h, icenter)


def rhs_rescaled(state: RescaledState, u_min: float | None = None):
    """Full commuting-variable right-hand side

        u_t = u_ss - (sigma/2) u_s - J u_s + u_s^2/u - 1/u + u/2

    on the largest centered window with u >= u_min (default theta/8 with
    theta = 0.1).  Returns (values, window slice); raises TipInRange when
    even the center violates the floor.
    """
    floor = 0.1 / 8.0 if u_min is None else u_min
    u = state.u
    if u.min() >= floor:
        window = slice(None)
    else:
        icenter = int(np.argmin(np.abs(state.sigma_grid)))
        if u[icenter] < floor:
            raise TipInRange("profile below the cylindrical floor at sigma = 0")
        bad = np.nonzero(u < floor)[0]
        lo = bad[bad < icenter].max() + 1 if (bad < icenter).any() else 0
        hi = bad[bad > icenter].min() if (bad > icenter).any() else u.size
        window = slice(lo, hi)
    uu = u[window]
    sig = state.sigma_grid[window]
    if state.du is not None and state.d2u is not None:
        du, d2u = state.du[window], state.d2u[window]
    else:
        du, d2u = kernels.sigma_derivs(uu, state.h)
    icenter = int(np.argmin(np.abs(sig)))
    J = kernels.cumtrapz_center(2.0 * d2u / uu, state.h, icenter)
    vals = d2u - (0.5 * sig + J) * du + (du * du - 1.0) / uu + 0.5 * uu
    return vals, window


def _rescaled_rhs_arrays(u, sig, h, icenter):
    du, d2u = kernels.sigma_derivs(u, h)
    return kernels.rescaled_rhs_core(u, du, d2u, sig, h, icenter)


def _rk4_rescaled(u, sig, h, icenter, dt):
    k1 = _rescaled_rhs_arrays(u, sig, h, icenter)
    k2 = _rescaled_rhs_arrays(u + 0.5 * dt * k1, sig, h, icenter)
    k3 = _rescaled_rhs_arrays(u + 0.5 * dt * k2, sig, h, icenter)
    k4 = _rescaled_rhs_arrays(u + dt * k3, sig, h, icenter)
    return kernels.rk4_axpy(u, k1, k2, k3, k4, dt), float(np.abs(k1).max())


def step_rescaled(state: RescaledState, dt: float, cfl: float = 0.2) -> RescaledState:
    """One classical RK4 step of the commuting-variable equation."""
    h = state.h
    if dt > cfl * h * h * (1.0 + 1e-12):
        raise CflViolation(f"dt = {dt:.3e} exceeds {cfl:.2f} * dsigma^2 = {cfl*h*h:.3e}")
    sig = state.sigma_grid
    icenter = int(np.argmin(np.abs(sig)))
    u_new, _ = _rk4_rescaled(state.u, sig, h, icenter, dt)
    return RescaledState(
        sigma_grid=sig,
        u=u_new,
        tau=state.tau + dt,
        sigma_plus=state.sigma_plus,
        sigma_minus=state.sigma_minus,
    )


def _unpack_physical(state: ProfileState):
    """Evolution runs in the proportional-arclength gauge: phi uniform."""
    phi0 = float(state.phi[0])
    if not np.allclose(state.phi, phi0, rtol=1e-12, atol=0.0):
        raise ValueError("physical stepping needs a uniform-phi state; resample first")
    return state.psi**2, -phi0, phi0


def _rk4_physical(Q, xi, h, sm, sp, closed, dt):
    """RK4 on the gauge-fixed system (Q = psi^2, s_minus, s_plus)."""
    kq1, km1, kp1 = kernels.physical_q_rhs(Q, xi, h, sm, sp, closed)
    kq2, km2, kp2 = kernels.physical_q_rhs(Q + 0.5 * dt * kq1, xi, h,
                                           sm + 0.5 * dt * km1, sp + 0.5 * dt * kp1, closed)
    kq3, km3, kp3 = kernels.physical_q_rhs(Q + 0.5 * dt * kq2, xi, h,
                                           sm + 0.5 * dt * km2, sp + 0.5 * dt * kp2, closed)
    kq4, km4, kp4 = kernels.physical_q_rhs(Q + dt * kq3, xi, h,
                                           sm + dt * km3, sp + dt * kp3, closed)
    return (
        kernels.rk4_axpy(Q, kq1, kq2, kq3, kq4, dt),
        sm + (dt / 6.0) * (km1 + 2.0 * km2 + 2.0 * km3 + km4),
        sp + (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4),
        float(np.abs(kq1).max()),
    )


def _pack_physical(state: ProfileState, q_new, sm, sp, t_new) -> ProfileState:
    L = 0.5 * (sp - sm)
    return ProfileState(
        x_grid=state.x_grid,
        phi=np.full(state.x_grid.size, L),
        psi=np.sqrt(np.maximum(q_new, 0.0)),
        t=t_new,
        tau_offset=state.tau_offset,
        closed=state.closed,
    )


def step_physical(state: ProfileState, dt: float, cfl: float = 0.2) -> ProfileState:
    """One RK4 step of the unrescaled flow (squared-profile gauge form)."""
    h = state.h
    ds_min = float((state.phi.min()) * h)
    if dt > cfl * ds_min * ds_min * (1.0 + 1e-12):
        raise CflViolation(f"dt = {dt:.3e} exceeds {cfl:.2f} * ds^2 = {cfl*ds_min*ds_min:.3e}")
    Q, sm, sp = _unpack_physical(state)
    q_new, sm, sp, _ = _rk4_physical(Q, state.x_grid, h, sm, sp, state.closed, dt)
    if np.any(q_new[1:-1] <= 0.0):
        raise BlowUpDetected(f"profile extinction reached at t = {state.t + dt:.6g}")
    return _pack_physical(state, q_new, sm, sp, state.t + dt)


def initial_state(config: SolverConfig):
    from .geometry import reference_solution

    if config.kind == "cylinder":
        st = reference_solution("cylinder", tau=config.tau_init,
                                n=config.n + 1 - (config.n % 2), domain=config.domain)
        if config.perturb_eps != 0.0:
            from .spectral import hermite_sigma

            bump = hermite_sigma(config.perturb_mode, st.sigma_grid)
            taper = np.exp(-((st.sigma_grid / config.domain) ** 8))
            u = st.u + config.perturb_eps * bump * taper
            st = RescaledState(sigma_grid=st.sigma_grid, u=u, tau=st.tau)
        return st
    if config.kind == "sphere":
        return reference_solution("sphere", t=config.t_init, n=config.n)
    if config.kind == "oval":
        rs = oval_ansatz(config.tau_init, theta=config.theta, n=2 * config.n + 1)
        return crop_to_window(rs, config.u_floor)
    raise ValueError("custom runs must pass initial_state to run()")


def run(config: SolverConfig, start=None) -> Trajectory:
    """Integrate from the configured initial data, emitting snapshots at the
    cadence.  Deterministic for a fixed config.  On blow-up the trajectory
    ends at the last good state with termination = 'blow_up'."""
    state = start if start is not None else initial_state(config)
    physical = isinstance(state, ProfileState)
    time_of = (lambda s: s.t) if physical else (lambda s: s.tau)
    t_end = config.t_end if physical else config.tau_end

    snaps = [state]
    times = [time_of(state)]
    max_rhs = []
    next_snap = times[0] + config.cadence
    termination = "completed"
    if not physical:
        icenter = int(np.argmin(np.abs(state.sigma_grid)))

    while time_of(state) < t_end - 1e-14:
        target = min(t_end, next_snap)
        blew = False
        m = 0.0
        while time_of(state) < target - 1e-14:
            if physical:
                ds_min = float(state.phi.min() * state.h)
                dt = min(config.cfl * ds_min * ds_min, target - state.t)
                Q, sm, sp = _unpack_physical(state)
                q_new, sm, sp, mk = _rk4_physical(Q, state.x_grid, state.h, sm, sp,
                                                  state.closed, dt)
                if np.any(q_new[1:-1] <= 0.0):
                    blew = True
                    break
                nxt = _pack_physical(state, q_new, sm, sp, state.t + dt)
            else:
                dt = min(config.cfl * state.h * state.h, target - state.tau)
                u_new, mk = _rk4_rescaled(state.u, state.sigma_grid, state.h, icenter, dt)
                nxt = RescaledState(sigma_grid=state.sigma_grid, u=u_new, tau=state.tau + dt,
                                    sigma_plus=state.sigma_plus, sigma_minus=state.sigma_minus)
            m = max(m, mk)
            if mk > BLOWUP_THRESHOLD:
                blew = True
                break
            state = nxt
        max_rhs.append(m)
        if blew:
            termination = "blow_up"
            break
        if time_of(state) >= next_snap - 1e-12:
            snaps.append(state)
            times.append(time_of(state))
            next_snap += config.cadence
        if physical and config.stop_radius is not None and state.psi.max() <= config.stop_radius:
            termination = "target_radius"
            if times[-1] < time_of(state):
                snaps.append(state)
                times.append(time_of(state))
            break
    if times[-1] < time_of(state) and termination == "completed":
        snaps.append(state)
        times.append(time_of(state))
    return Trajectory(
        times=np.array(times),
        states=tuple(snaps),
        kind="physical" if physical else "rescaled",
        termination=termination,
        max_rhs=np.array(max_rhs) if max_rhs else None,
    )


def crop_to_window(rs: RescaledState, u_floor: float) -> RescaledState:
    """Restrict a profile with tips to the largest centered tip-free window
    u >= u_floor.  The sigma-edges of such a window are outflow for oval
    data (sigma/2 + J > 0 there), so the cropped state can be advanced by
    the commuting-variable equation with one-sided edge stencils; the tip
    caps are reconstructed by the tip chart instead of being evolved."""
    i0 = int(np.argmin(np.abs(rs.sigma_grid)))
    ok = rs.u >= u_floor
    hi = i0
    while hi + 1 < rs.u.size and ok[hi + 1]:
        hi += 1
    lo = i0
    while lo - 1 >= 0 and ok[lo - 1]:
        lo -= 1
    half = min(hi - i0, i0 - lo)
    window = slice(i0 - half, i0 + half + 1)
    return RescaledState(
        sigma_grid=rs.sigma_grid[window],
        u=rs.u[window],
        tau=rs.tau,
    )


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def oval_slope_sq(u, tau, table: bryant.BryantTable | None = None):
    """Composite slope field Y(u) = u_sigma^2 = Z0(u sqrt|tau|) (1 - u^2/2).

    Multiplicative matched composite of the soliton cap and the intermediate
    profile: since rho^2 Z0 -> 1, integrating dsigma/du = -1/sqrt(Y) away
    from the cap reproduces u = sqrt(2 - z^2/2) exactly, while near the tip
    Y -> Z0 with Y(0) = 1 (smooth closure).  0 < Y <= 1 and Y is decreasing
    in u, so the resulting profile is concave with |u_sigma| <= 1.
    """
    table = table or bryant.default_table()
    u = np.asarray(u, dtype=float)
    z0, _ = table.evaluate(u * math.sqrt(-tau))
    return z0 * (1.0 - 0.5 * u * u)


def oval_ansatz(tau: float, theta: float = 0.1, n: int = 4097,
                table: bryant.BryantTable | None = None) -> RescaledState:
    """Approximate-ancient oval profile at rescaled time tau <= -100.

    The tip-to-equator branch integrates dsigma/du = -1/sqrt(Y) for the
    composite slope field ``oval_slope_sq`` (Bryant cap matched onto the
    intermediate profile sqrt(2 - z^2/2)); the equator region |sigma| <=
    2|tau|^(1/4) swaps in the inner expansion
    sqrt(2) (1 - (sigma^2-2)/(8|tau|)) through a quintic blend.  theta only
    sets how far the returned metadata considers "tip"; the composite itself
    is parameter-free.
    """
    if tau > -100.0:
        raise ValueError("oval ansatz needs tau <= -100")
    table = table or bryant.default_table()
    at = -tau
    rt = math.sqrt(at)

    # substitute v = sqrt(2) sin(w): dv/sqrt(1 - v^2/2) = sqrt(2) dw keeps the
    # integrand bounded at the equator where Y -> 0
    w = np.linspace(0.0, 0.5 * math.pi, 20001)
    v = SQRT2 * np.sin(w)
    z0, _ = table.evaluate(v * rt)
    integv = SQRT2 / np.sqrt(z0)
    T = np.concatenate([[0.0], np.cumsum(0.5 * (integv[1:] + integv[:-1]) * np.diff(w))])
    sigma_plus = float(T[-1])
    sig_branch = sigma_plus - T          # sigma(v): sigma_+ at the tip, 0 at the equator

    m = n if n % 2 == 1 else n + 1
    sig = np.linspace(-sigma_plus, sigma_plus, m)
    u = np.empty(m)
    right = np.abs(sig)

    branch = PchipInterpolator(sig_branch[::-1], v[::-1])
    u[:] = branch(np.clip(right, 0.0, sigma_plus))

    t4 = at**0.25
    near = right < 2.0 * t4
    u_inner = SQRT2 * (1.0 - (right[near] ** 2 - 2.0) / (8.0 * at))
    eta = _smoothstep((right[near] - t4) / t4)
    u[near] = (1.0 - eta) * u_inner + eta * u[near]

    u[0] = 0.0
    u[-1] = 0.0
    return RescaledState(
        sigma_grid=sig,
        u=u,
        tau=tau,
        sigma_plus=sigma_plus,
        sigma_minus=-sigma_plus,
    )
