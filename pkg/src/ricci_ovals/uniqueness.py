"""Two-solution comparison harness: cutoffs, difference fields, error terms,
gauge fitting, the neutral-mode ODE, and the norm-comparison ledger.

"Two solutions" at desk scale are gauge- or perturbation-related runs of
the same equation; every formula below is agnostic to where the pair came
from.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import spectral
from .errors import NoConvergence, OutOfWindow, RegionViolation
from .geometry import apply_gauge_trajectory
from .kernels import cumtrapz_center, sigma_derivs
from .solver import Trajectory
from .states import GaugeParams, RescaledState, _ro
from .tip import invert_profile
from .weights import build_weight, tip_norm_sq


def _quintic(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def _dquintic(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    tt = t[inside]
    out[inside] = 30.0 * tt * tt * (1.0 + tt * (tt - 2.0))
    return out


def _ddquintic(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    tt = t[inside]
    out[inside] = 60.0 * tt * (1.0 + tt * (2.0 * tt - 3.0))
    return out


def build_cutoffs(u1, theta: float):
    """Cylindrical and tip cutoffs keyed to level sets of u1.

    phi_C = 1 where u1 >= theta/2, 0 where u1 <= theta/4 (quintic ramp in
    the level); phi_T = 1 where u1 <= theta, 0 where u1 >= 2 theta.
    Returns (phi_C, phi_T) sampled on u1's own shape.
    """
    u1 = np.asarray(u1, dtype=float)
    ramp = (u1 - theta / 4.0) / (theta / 4.0)
    phi_C = _quintic(ramp)
    phi_T = 1.0 - _quintic((u1 - theta) / theta)
    return phi_C, phi_T


@dataclass(frozen=True)
class PairSlice:
    """One common-grid snapshot of a pair (u1, u2 = gauged second solution),
    with closed-form derivatives when available."""

    sigma: np.ndarray
    tau: float
    u1: np.ndarray
    du1: np.ndarray
    d2u1: np.ndarray
    u2: np.ndarray
    du2: np.ndarray
    d2u2: np.ndarray
    u1_t: np.ndarray
    theta: float

    def __post_init__(self):
        for name in ("sigma", "u1", "du1", "d2u1", "u2", "du2", "d2u2", "u1_t"):
            object.__setattr__(self, name, _ro(getattr(self, name)))


def pair_slice_from_states(s1: RescaledState, s2: RescaledState, theta: float,
                           window_floor: float | None = None) -> PairSlice:
    """Restrict two states on a common sigma-grid to the centered window
    where u1 stays above theta/8, differentiating as needed."""
    if s1.sigma_grid.shape != s2.sigma_grid.shape or np.abs(s1.sigma_grid - s2.sigma_grid).max() > 1e-12:
        raise ValueError("pair slices need a common sigma-grid")
    floor = theta / 8.0 if window_floor is None else window_floor
    sig = s1.sigma_grid
    i0 = int(np.argmin(np.abs(sig)))
    ok = (s1.u >= floor) & (s2.u >= floor)
    if not ok[i0]:
        raise RegionViolation("pair dips below theta/8 at the equator")
    hi = i0
    while hi + 1 < sig.size and ok[hi + 1]:
        hi += 1
    lo = i0
    while lo - 1 >= 0 and ok[lo - 1]:
        lo -= 1
    half = min(hi - i0, i0 - lo)
    wdw = slice(i0 - half, i0 + half + 1)
    h = float(sig[1] - sig[0])

    def derivs(state):
        uu = state.u[wdw]
        if state.du is not None and state.d2u is not None:
            return uu, state.du[wdw], state.d2u[wdw]
        du, d2u = sigma_derivs(uu, h)
        return uu, du, d2u

    u1, du1, d2u1 = derivs(s1)
    u2, du2, d2u2 = derivs(s2)
    sigw = sig[wdw]
    icenter = int(np.argmin(np.abs(sigw)))
    J1 = cumtrapz_center(2.0 * d2u1 / u1, h, icenter)
    u1_t = d2u1 - (0.5 * sigw + J1) * du1 + (du1 * du1 - 1.0) / u1 + 0.5 * u1
    return PairSlice(sigma=sigw, tau=s1.tau, u1=u1, du1=du1, d2u1=d2u1,
                     u2=u2, du2=du2, d2u2=d2u2, u1_t=u1_t, theta=theta)


@dataclass(frozen=True)
class ErrorTerms:
    """The three error fields of the cutoff difference equation."""

    E: np.ndarray        # nonlinearity
    Ebar: np.ndarray     # cutoff
    Enl: np.ndarray      # nonlocal
    w: np.ndarray
    w_C: np.ndarray
    dw_C: np.ndarray
    phi_C: np.ndarray
    sigma: np.ndarray

    def total(self):
        return self.E + self.Ebar + self.Enl


def error_terms(ps: PairSlice) -> ErrorTerms:
    """Evaluate the nonlinear, cutoff, and nonlocal error terms of the
    equation for w_C = phi_C (u1 - u2):

      E    = (w_s/u1 + 2 u2_s/u1 - J1)(w_C)_s
             - (w/(2u1) + u2_s^2/(u1 u2) + (u2^2-2)/(2 u1 u2)) w_C
      Ebar = phi_C,t w - phi_C,ss w - 2 phi_C,s w_s + (s/2) phi_C,s w
             - phi_C,s w w_s/u1 - 2 phi_C,s u2_s w/u1 + J1 phi_C,s w
      Enl  = u2_s phi_C (J2 - J1),
             J2 - J1 = -2 int_0^s (w_ss/u1 - u2_ss w/(u1 u2))
    (the identity u1_ss/u1 - u2_ss/u2 = w_ss/u1 - u2_ss w/(u1 u2) is exact).
    """
    sig = ps.sigma
    h = float(sig[1] - sig[0])
    icenter = int(np.argmin(np.abs(sig)))
    u1, du1, d2u1 = ps.u1, ps.du1, ps.d2u1
    u2, du2, d2u2 = ps.u2, ps.du2, ps.d2u2
    w = u1 - u2
    dw = du1 - du2
    d2w = d2u1 - d2u2
    theta = ps.theta

    ramp = (u1 - theta / 4.0) / (theta / 4.0)
    S = _quintic(ramp)
    dS = _dquintic(ramp) * (4.0 / theta)
    ddS = _ddquintic(ramp) * (4.0 / theta) ** 2
    phi_C = S
    phi_Cs = dS * du1
    phi_Css = ddS * du1 * du1 + dS * d2u1
    phi_Ct = dS * ps.u1_t

    w_C = phi_C * w
    dw_C = phi_Cs * w + phi_C * dw

    J1 = cumtrapz_center(2.0 * d2u1 / u1, h, icenter)
    E = (dw / u1 + 2.0 * du2 / u1 - J1) * dw_C - (
        w / (2.0 * u1) + du2 * du2 / (u1 * u2) + (u2 * u2 - 2.0) / (2.0 * u1 * u2)
    ) * w_C
    Ebar = (
        phi_Ct * w
        - phi_Css * w
        - 2.0 * phi_Cs * dw
        + 0.5 * sig * phi_Cs * w
        - phi_Cs * w * dw / u1
        - 2.0 * phi_Cs * du2 * w / u1
        + J1 * phi_Cs * w
    )
    J21 = -cumtrapz_center(2.0 * (d2w / u1 - d2u2 * w / (u1 * u2)), h, icenter)
    Enl = du2 * phi_C * J21
    return ErrorTerms(E=E, Ebar=Ebar, Enl=Enl, w=w, w_C=w_C, dw_C=dw_C,
                      phi_C=phi_C, sigma=sig)


def consistency_residual(slices, dtau: float):
    """Master check: d/dtau w_C - L w_C - (E + Ebar + Enl) on the middle
    snapshot of a consecutive triple, sup-norm over the interior."""
    if len(slices) != 3:
        raise ValueError("pass three consecutive slices")
    terms = [error_terms(ps) for ps in slices]
    wC_m, wC_0, wC_p = (t.w_C for t in terms)
    wdot = (wC_p - wC_m) / (2.0 * dtau)
    ps = slices[1]
    h = float(ps.sigma[1] - ps.sigma[0])
    d1, d2 = sigma_derivs(terms[1].w_C, h)
    Lw = d2 - 0.5 * ps.sigma * d1 + terms[1].w_C
    res = wdot - Lw - terms[1].total()
    inner = slice(4, -4)
    return float(np.abs(res[inner]).max()), res


def projections_of_pair(traj1: Trajectory, traj2: Trajectory, g: GaugeParams,
                        tau0: float, theta: float,
                        quad: spectral.GaussianQuadrature | None = None):
    """(<phi_C w, psi_0>, <phi_C w, psi_2>) at tau0 for w = u1 - u2^g."""
    quad = quad or spectral.default_quadrature()
    grid1 = traj1.states[0].sigma_grid
    u1 = traj1.lookup(grid1, tau0)
    _, mat = apply_gauge_trajectory(
        traj2.times, traj2.u_matrix(), traj2.states[0].sigma_grid, g, out_times=[tau0]
    )
    u2g = PchipInterpolator(traj2.states[0].sigma_grid, mat[0])(
        np.clip(grid1, traj2.states[0].sigma_grid[0], traj2.states[0].sigma_grid[-1])
    )
    w = u1 - u2g
    phi_C, _ = build_cutoffs(u1, theta)
    wc = phi_C * w
    f = (grid1, wc)
    fv, _ = spectral._as_node_values(f, quad)
    p0 = quad.integrate(fv)
    p2 = quad.integrate(fv * spectral.hermite_sigma(2, quad.sigma))
    scale = math.sqrt(max(quad.integrate(fv * fv), 1e-300))
    return np.array([p0, p2]), scale


def fit_gauge(traj1: Trajectory, traj2: Trajectory, tau0: float, theta: float,
              quad: spectral.GaussianQuadrature | None = None,
              max_iter: int = 50, tol: float = 1e-12,
              seed_params: GaugeParams | None = None,
              gamma_span: float | None = None):
    """Root-find (beta, gamma) zeroing the psi_0 and psi_2 projections of
    phi_C (u1 - u2^{beta gamma}) at tau0.

    Runs in the scaled coordinates (beta e^{tau0}, gamma) and exploits the
    near-triangular structure: beta moves the psi_0 slot with an O(1)
    response while gamma's psi_0 response is exponentially amplified and
    strongly curved, which defeats a joint Newton step.  The solve nests a
    1D secant for beta(gamma) (psi_0 = 0) inside a 1D secant/bisection for
    gamma (psi_2 = 0).  Returns (GaugeParams, info dict).
    """
    quad = quad or spectral.default_quadrature()
    evals = 0

    def G(bh, gm):
        nonlocal evals
        evals += 1
        g = GaugeParams.from_scaled(bh, gm, tau0)
        return projections_of_pair(traj1, traj2, g, tau0, theta, quad)

    g0, scale0 = G(0.0, 0.0)
    floor = max(scale0, 1e-300)
    gate = tol * floor
    bh_seed = seed_params.beta_at_tau0 if seed_params is not None else 0.0

    def beta_for(gm, bh_start):
        """Inner secant: beta-hat with psi_0 projection zero at this gamma."""
        b0 = bh_start
        p0 = G(b0, gm)[0]
        if abs(p0[0]) <= gate:
            return b0, p0
        b1 = b0 + 1e-3 / abs(tau0)
        p1 = G(b1, gm)[0]
        for _ in range(max_iter):
            denom = p1[0] - p0[0]
            if denom == 0.0:
                break
            b2 = b1 - p1[0] * (b1 - b0) / denom
            b0, p0 = b1, p1
            b1 = b2
            p1 = G(b1, gm)[0]
            if abs(p1[0]) <= gate or abs(b1 - b0) <= 1e-16 * (1.0 + abs(b1)):
                break
        return b1, p1

    def outer(gm, bh_start):
        bh, p = beta_for(gm, bh_start)
        return bh, p

    span = gamma_span if gamma_span is not None else 0.45 * (
        min(traj2.times[-1] - tau0, tau0 - traj2.times[0])
    )
    gm0 = seed_params.gamma if seed_params is not None else 0.0
    bh0, p_at = outer(gm0, bh_seed)
    if abs(p_at[1]) <= gate and abs(p_at[0]) <= gate:
        g = GaugeParams.from_scaled(bh0, gm0, tau0)
        return g, {"iterations": 0, "residual": float(np.abs(p_at).sum()),
                   "scale": scale0, "evaluations": evals}
    # secant in gamma on the beta-eliminated psi_2 slot, bisection fallback
    gm1 = gm0 + max(1e-4, 0.02 * span)
    bh1, p1 = outer(gm1, bh0)
    it = 0
    while it < max_iter:
        it += 1
        denom = p1[1] - p_at[1]
        if denom == 0.0:
            break
        gm2 = gm1 - p1[1] * (gm1 - gm0) / denom
        gm2 = float(np.clip(gm2, -span, span))
        if abs(gm2 - gm1) <= 1e-15 * (1.0 + abs(gm1)):
            break
        bh2, p2 = outer(gm2, bh1)
        gm0, p_at = gm1, p1
        gm1, p1, bh1 = gm2, p2, bh2
        if abs(p1[1]) <= gate and abs(p1[0]) <= gate:
            break
    res = float(np.abs(p1).sum())
    if res > 1e-8 * floor:
        raise NoConvergence(
            f"gauge fit stalled: projections {p1} after {it} outer iterations"
        )
    g = GaugeParams.from_scaled(bh1, gm1, tau0)
    return g, {"iterations": it, "residual": res, "scale": scale0,
               "evaluations": evals}


def neutral_mode_series(slices, quad: spectral.GaussianQuadrature | None = None):
    """a(tau) = <w_C, psi_2>/||psi_2||^2 and the forcing F(tau) of
    a' = 2a/|tau| + F, from the error terms with the a/(8|tau|) psi_2^2
    subtractions applied to the nonlinearity and the nonlocal term."""
    quad = quad or spectral.default_quadrature()
    p2 = spectral.hermite_sigma(2, quad.sigma)
    n2 = spectral.norm_sq_H(2)
    taus, a_vals, F_vals = [], [], []
    for ps in slices:
        terms = error_terms(ps)
        sig = ps.sigma

        def at_nodes(vals):
            interp = PchipInterpolator(sig, vals)
            out = np.zeros_like(quad.sigma)
            inside = (quad.sigma >= sig[0]) & (quad.sigma <= sig[-1])
            out[inside] = interp(quad.sigma[inside])
            return out

        wc = at_nodes(terms.w_C)
        a = quad.integrate(wc * p2) / n2
        sub = (a / (8.0 * abs(ps.tau))) * p2 * p2
        F = (
            quad.integrate((at_nodes(terms.E) - sub) * p2)
            + quad.integrate(at_nodes(terms.Ebar) * p2)
            + quad.integrate((at_nodes(terms.Enl) - sub) * p2)
        ) / n2
        taus.append(ps.tau)
        a_vals.append(a)
        F_vals.append(F)
    return np.array(taus), np.array(a_vals), np.array(F_vals)


def solve_neutral_ode(taus, F, a_end: float = 0.0):
    """Integrate a' = 2a/|tau| + F backward from a(tau0) = a_end via the
    exact integrating factor: (tau^2 a)' = tau^2 F, so

        a(tau) = tau^-2 [ tau0^2 a_end - int_tau^tau0 F s^2 ds ].

    Exact (to quadrature) for tabulated F; exact to roundoff for F = 0.
    """
    taus = np.asarray(taus, dtype=float)
    F = np.asarray(F, dtype=float)
    tau0 = taus[-1]
    s2F = F * taus * taus
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (s2F[1:] + s2F[:-1]) * np.diff(taus))])
    total = cum[-1]
    integral_to_end = total - cum            # int_tau^tau0
    return (tau0 * tau0 * a_end - integral_to_end) / (taus * taus)


def norm_ledger(slices, theta: float, tau0: float,
                quad: spectral.GaussianQuadrature | None = None,
                tip_series=None):
    """The six windowed norms of the comparison argument plus their ratios.

    tip_series, when given, is (taus, ||W_T||^2 series, ||W chi_[theta,2theta]||^2
    series) sharing one mu_ref.  Cylinder-type pairs (no tips) report the
    tip entries as 0.
    """
    quad = quad or spectral.default_quadrature()
    p2 = spectral.hermite_sigma(2, quad.sigma)
    n2 = spectral.norm_sq_H(2)
    taus = []
    per = {k: [] for k in ("wC_H", "wC_D", "hat_H", "hat_D", "chiD_H", "a", "dw4_H")}
    for ps in slices:
        terms = error_terms(ps)
        sig = ps.sigma
        taus.append(ps.tau)

        def at_nodes(vals):
            interp = PchipInterpolator(sig, vals)
            out = np.zeros_like(quad.sigma)
            inside = (quad.sigma >= sig[0]) & (quad.sigma <= sig[-1])
            out[inside] = interp(quad.sigma[inside])
            return out

        wc = at_nodes(terms.w_C)
        dwc = at_nodes(terms.dw_C)
        a = quad.integrate(wc * p2) / n2
        hat = wc - a * p2
        dhat = dwc - a * 2.0 * quad.sigma
        chiD = (ps.u1 >= theta / 4.0) & (ps.u1 <= theta / 2.0)
        w_chi = at_nodes(np.where(chiD, terms.w, 0.0))
        chi4 = (ps.u1 >= theta) & (ps.u1 <= 2.0 * theta)
        dw4 = at_nodes(np.where(chi4, ps.du1 - ps.du2, 0.0))

        per["wC_H"].append(math.sqrt(max(quad.integrate(wc * wc), 0.0)))
        per["wC_D"].append(math.sqrt(max(quad.integrate(wc * wc + dwc * dwc), 0.0)))
        per["hat_H"].append(math.sqrt(max(quad.integrate(hat * hat), 0.0)))
        per["hat_D"].append(math.sqrt(max(quad.integrate(hat * hat + dhat * dhat), 0.0)))
        per["chiD_H"].append(math.sqrt(max(quad.integrate(w_chi * w_chi), 0.0)))
        per["a"].append(abs(a))
        per["dw4_H"].append(math.sqrt(max(quad.integrate(dw4 * dw4), 0.0)))

    taus = np.array(taus)
    win = lambda vals: spectral.windowed_norm(taus, np.array(vals), tau=tau0)
    out = {
        "wC_D_inf": win(per["wC_D"]),
        "hat_wC_D_inf": win(per["hat_D"]),
        "w_chiD_H_inf": win(per["chiD_H"]),
        "P0_wC_D_inf": win(per["a"]) * math.sqrt(spectral.norm_sq_D(2)),
        "dw_chiD4_H_inf": win(per["dw4_H"]),
        "W_T_2inf": 0.0,
        "W_chi_2inf": 0.0,
    }
    if tip_series is not None:
        from .weights import windowed_tip_norm

        t_taus, wt_sq, wchi_sq = tip_series
        out["W_T_2inf"] = windowed_tip_norm(t_taus, wt_sq, tau=tau0)
        out["W_chi_2inf"] = windowed_tip_norm(t_taus, wchi_sq, tau=tau0)
    out["dominance_ratio"] = (
        out["hat_wC_D_inf"] / out["P0_wC_D_inf"] if out["P0_wC_D_inf"] > 0 else math.inf
    )
    if out["W_chi_2inf"] > 0:
        out["tip_gronwall_factor"] = out["W_T_2inf"] * math.sqrt(abs(tau0)) / out["W_chi_2inf"]
    if out["dw_chiD4_H_inf"] > 0 and out["W_chi_2inf"] > 0:
        out["transition_constant"] = out["W_chi_2inf"] / out["dw_chiD4_H_inf"]
    return out


def tip_difference_series(states1, states2, theta: float, n_u: int = 257,
                          mu_ref: float | None = None):
    """Per-tau tip integrals of W = Psi_1 - Psi_2 for paired state lists:
    ||W phi_T||^2 and ||W chi_[theta, 2theta]||^2 with a shared mu_ref.
    Returns (taus, wt_sq, wchi_sq, mu_ref)."""
    taus, wt_sq, wchi_sq = [], [], []
    ref = mu_ref
    for s1, s2 in zip(states1, states2):
        tp1 = invert_profile(s1, theta=theta, n_u=n_u)
        tp2 = invert_profile(s2, theta=theta, n_u=n_u)
        Psi2 = PchipInterpolator(tp2.u_grid, tp2.Psi)(
            np.clip(tp1.u_grid, tp2.u_grid[0], tp2.u_grid[-1])
        )
        W = tp1.Psi - Psi2
        tw = build_weight(tp1)
        if ref is None:
            ref = float(tw.mu[-1])
        _, phi_T = build_cutoffs(tp1.u_grid, theta)
        chi = (tp1.u_grid >= theta) & (tp1.u_grid <= 2.0 * theta)
        wt_sq.append(tip_norm_sq(W * phi_T, tw, mu_ref=ref))
        wchi_sq.append(tip_norm_sq(np.where(chi, W, 0.0), tw, mu_ref=ref))
        taus.append(s1.tau)
    return np.array(taus), np.array(wt_sq), np.array(wchi_sq), ref
