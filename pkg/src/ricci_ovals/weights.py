"""Tip-region weight mu(u, tau), tip norms, and the weighted inequalities.

The weight interpolates the cylindrical Gaussian exponent -sigma^2/4 (where
the cutoff zeta is 1) and the soliton-adapted primitive of (1-Y)/(uY)
(where zeta is 0).  mu ~ -|tau|, so e^mu underflows float64; every routine
here weighs by e^(mu - mu_ref) with an explicit reference value, which
cancels in all the ratios and two-sided comparisons the norms feed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateY, UnderResolved
from .states import _ro
from .tip import TipProfile, y_derivs

RAMP_ROUND = 0.1   # relative rounding width of the C^2 zeta ramp


def _smoothstep_integral(x):
    x = np.clip(x, 0.0, 1.0)
    return x**4 * (x * (x - 3.0) + 2.5)


def build_zeta(theta: float, u):
    """C^2 mollified linear ramp: 0 below theta/4, 1 above theta/2.

    The derivative is a plateau with quintic-smoothstep shoulders of
    relative width RAMP_ROUND; max |zeta'| = 1/(w (1-r)) = 4.44/theta,
    inside the 5/theta budget that a cubic smoothstep (6/theta) violates.
    Returns (zeta, dzeta).
    """
    u = np.asarray(u, dtype=float)
    w = theta / 4.0
    r = RAMP_ROUND
    A = 1.0 / (w * (1.0 - r))
    t = (u - theta / 4.0) / w
    t = np.clip(t, 0.0, 1.0)
    dz = np.where(
        t <= r,
        _quintic(t / r),
        np.where(t >= 1.0 - r, _quintic((1.0 - t) / r), 1.0),
    )
    dz = A * dz * ((u > theta / 4.0) & (u < theta / 2.0))
    zeta = np.where(
        t <= r,
        r * _smoothstep_integral(t / r),
        np.where(
            t >= 1.0 - r,
            (1.0 - 2.0 * r) + r / 2.0 + r * (0.5 - _smoothstep_integral((1.0 - t) / r)),
            r / 2.0 + (t - r),
        ),
    )
    zeta = A * w * zeta
    zeta[u <= theta / 4.0] = 0.0
    zeta[u >= theta / 2.0] = 1.0
    return zeta, dz


def _quintic(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@dataclass(frozen=True)
class TipWeight:
    """mu(u, tau) with its u-derivative and the chart data it was built from."""

    u_grid: np.ndarray
    mu: np.ndarray
    mu_u: np.ndarray
    zeta: np.ndarray
    theta: float
    tau: float
    sigma_of_u: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        for name in ("u_grid", "mu", "mu_u", "zeta", "sigma_of_u", "Y"):
            object.__setattr__(self, name, _ro(getattr(self, name)))

    @property
    def du(self) -> float:
        return float(self.u_grid[1] - self.u_grid[0])

    @property
    def Psi(self) -> np.ndarray:
        return np.sqrt(self.Y)

    def mu_uu(self) -> np.ndarray:
        out = np.gradient(self.mu_u, self.u_grid)
        return out

    def weight_exp(self, mu_ref: float | None = None, sign: float = 1.0):
        """e^{sign (mu - mu_ref)}; defaults mu_ref to the outer-edge value."""
        ref = self.mu[-1] if mu_ref is None else mu_ref
        return np.exp(sign * (self.mu - ref)), ref


def build_weight(tp: TipProfile, theta: float | None = None) -> TipWeight:
    """Assemble mu from the chart:

        mu_u = zeta (-sigma^2/4)_u + (1-zeta) (1-Y)/(u Y),
        (-sigma^2/4)_u = sigma/(2 sqrt Y) on the right branch,

    anchored so that mu = -sigma^2(u, tau)/4 identically on u >= theta/2
    (the closed form is used there outright; the anchored trapezoid only
    integrates the zeta-blend and soliton zones, keeping the cylindrical
    identity exact instead of quadrature-limited).
    """
    theta = tp.theta if theta is None else theta
    u = tp.u_grid
    Y = tp.Y
    if np.any(Y <= 0.0):
        raise DegenerateY("Y must be positive on the weight range")
    sig = np.abs(tp.sigma_of_u)
    zeta, _ = build_zeta(theta, u)
    neg_quarter_sq_u = sig / (2.0 * np.sqrt(Y))
    mu_u = zeta * neg_quarter_sq_u + (1.0 - zeta) * (1.0 - Y) / (u * Y)

    mu = np.empty_like(u)
    outer = u >= theta / 2.0
    mu[outer] = -0.25 * sig[outer] ** 2
    j0 = int(np.argmax(outer))          # first node in the closed-form zone
    for j in range(j0 - 1, -1, -1):
        mu[j] = mu[j + 1] - 0.5 * (mu_u[j] + mu_u[j + 1]) * (u[j + 1] - u[j])
    return TipWeight(
        u_grid=u,
        mu=mu,
        mu_u=mu_u,
        zeta=zeta,
        theta=theta,
        tau=tp.tau,
        sigma_of_u=tp.sigma_of_u,
        Y=Y,
    )


def tip_norm_sq(W, tw: TipWeight, mu_ref: float | None = None) -> float:
    """||W||^2 = integral W^2 Psi^-2 e^(mu - mu_ref) du over the tip grid.

    Values carry the e^-mu_ref normalization (ratios of tip norms with a
    shared mu_ref are exact).  UnderResolved when the weight factor jumps
    more than 10% between adjacent nodes near u = 0.
    """
    w, _ = tw.weight_exp(mu_ref)
    integrand = np.asarray(W, dtype=float) ** 2 * w / tw.Y
    factor = w / tw.Y
    lead = factor[: max(8, factor.size // 16)]
    steps = np.abs(np.diff(np.log(np.maximum(lead, 1e-300))))
    if steps.max() > math.log(1.1) * 4.0:
        raise UnderResolved("tip weight varies too fast between adjacent nodes")
    return float(np.trapezoid(integrand, tw.u_grid))


def windowed_tip_norm(taus, norm_sq_series, tau: float | None = None) -> float:
    """sup over tau' <= tau of |tau'|^(-1/4) (int_{tau'-1}^{tau'} ||W||^2)^(1/2)."""
    from .spectral import windowed_norm

    vals = np.sqrt(np.maximum(np.asarray(norm_sq_series, dtype=float), 0.0))
    return windowed_norm(taus, vals, tau=tau, power=-0.25)


def weight_properties(family, tau: float, theta: float, L: float,
                      dtau: float = 0.1) -> dict:
    """Measured constants of the weighted-estimate battery.

    ``family(tau) -> (TipProfile, TipWeight)`` supplies the chart at nearby
    times for the tau-derivatives (centered differences over dtau).  Each
    entry reports the measured eta of one inequality over its region
    (collar for the derivative bounds, whole tip for the mu_tau bound).
    """
    tp, tw = family(tau)
    tp_m, tw_m = family(tau - dtau)
    tp_p, tw_p = family(tau + dtau)
    u = tw.u_grid
    at = -tau
    lam = L / math.sqrt(at)
    collar = (u >= lam) & (u <= 2.0 * theta)
    if not collar.any():
        raise ValueError("collar empty at these (theta, L, tau)")
    Y = tw.Y
    Y_u, Y_uu = y_derivs(tp)
    mu_uu = tw.mu_uu()

    Y_tau = (tp_p.Y - tp_m.Y) / (2.0 * dtau)
    mu_tau = (tw_p.mu - tw_m.mu) / (2.0 * dtau)
    # u_tau at fixed sigma from the moving branch: u(sigma, tau) has
    # u_tau = -sigma_tau(u) * u_sigma at fixed u-level
    sig_tau = (tp_p.sigma_of_u - tp_m.sigma_of_u) / (2.0 * dtau)
    u_tau = sig_tau * np.sqrt(Y)

    rho = u * math.sqrt(at)
    mutau_gate = at * (1.0 + (rho < 1.0) / np.maximum(rho, 1e-12))

    report = {
        "eta_good1": float(np.abs(tw.mu_u * u * Y / (1.0 - Y) - 1.0)[collar].max()),
        "eta_good5": float(np.abs(1.0 / (u**2 * Y * at) - 1.0)[collar].max()),
        "eta_utau": float((u * np.abs(u_tau))[collar].max()),
        "eta_Yu": float((u * np.abs(Y_u))[collar].max()),
        "eta_Yuu": float((u**2 * np.sqrt(Y) * np.abs(Y_uu))[collar].max()),
        "eta_Ytau": float((u**2 * np.abs(Y_tau))[collar].max()),
        "eta_muu": float((mu_uu / tw.mu_u**2)[collar].max()),
        "eta_mutau": float((mu_tau / mutau_gate).max()),
        "mu_max": float(tw.mu.max()),
        "collar_bounds": (float(lam), float(2.0 * theta)),
    }
    return report


def poincare_ratio(f, f_u, tw: TipWeight) -> float:
    """LHS/RHS of the weighted Poincare inequality for one test function:

        int mu_u^2 f^2 e^-mu  vs  int f_u^2 e^-mu + int f^2/u^2 e^-mu.
    """
    w = np.exp(-(tw.mu - tw.mu.min()))
    u = tw.u_grid
    lhs = np.trapezoid(tw.mu_u**2 * f * f * w, u)
    rhs = np.trapezoid(f_u * f_u * w, u) + np.trapezoid(f * f / (u * u) * w, u)
    if rhs == 0.0:
        return 0.0
    return float(lhs / rhs)


def poincare_defect(f, f_u, tw: TipWeight) -> float:
    """Completing-the-square form: 2 int f_u^2 e^-mu + int mu_uu f^2 e^-mu
    - (1/2) int mu_u^2 f^2 e^-mu, nonnegative up to quadrature error."""
    w = np.exp(-(tw.mu - tw.mu.min()))
    u = tw.u_grid
    mu_uu = tw.mu_uu()
    return float(
        2.0 * np.trapezoid(f_u**2 * w, u)
        + np.trapezoid(mu_uu * f * f * w, u)
        - 0.5 * np.trapezoid(tw.mu_u**2 * f * f * w, u)
    )


def smooth_bump(u, center, width):
    """C^infty bump exp(1 - 1/(1-xi^2)) on |xi| < 1, xi = (u-center)/width."""
    xi = (np.asarray(u, dtype=float) - center) / width
    out = np.zeros_like(xi)
    inside = np.abs(xi) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi[inside] ** 2))
    return out


def poincare_battery(tw: TipWeight, n_cases: int = 100, seed: int = 20109):
    """Max Poincare ratio over seeded random smooth bumps supported in the
    tip region (vanishing at u = 0 like the test-function class requires).

    Bump widths scale with the local weight (width ~ c/|mu_u| at the
    center) and centers sample the soliton-scale zone rho in [0.5, 4],
    where the weight structure is tau-invariant: those are the
    near-saturating test functions of the inequality, so the battery
    probes the same constant at every tau instead of drifting with the
    enlarging collar.  Returns (max_ratio, min_defect)."""
    rng = np.random.default_rng(seed)
    u = tw.u_grid
    lo, hi = u[0], u[-1]
    rt = math.sqrt(-tw.tau)
    c_lo = max(lo + 0.02 * (hi - lo), 0.5 / rt)
    c_hi = min(hi - 0.02 * (hi - lo), 4.0 / rt)
    if c_hi <= c_lo:
        c_lo, c_hi = lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)
    max_ratio = 0.0
    min_defect = math.inf
    for _ in range(n_cases):
        center = rng.uniform(c_lo, c_hi)
        mu_u_c = abs(float(np.interp(center, u, tw.mu_u))) + 4.0 / (hi - lo)
        width = rng.uniform(0.5, 3.0) / mu_u_c
        width = min(width, 0.9 * (center - lo), 0.9 * (hi - center))
        if width <= 2.0 * tw.du:
            continue
        amp = rng.uniform(0.5, 2.0)
        f = amp * smooth_bump(u, center, width)
        f_u = np.gradient(f, u)
        max_ratio = max(max_ratio, poincare_ratio(f, f_u, tw))
        min_defect = min(min_defect, poincare_defect(f, f_u, tw))
    return max_ratio, min_defect


def diff_inequality_fit(taus, tip_integrals, band_integrals, c_theta: float):
    """Largest lambda with d/dtau X <= -2 lambda |tau| X + C(theta) B
    pointwise on the series (X = tip integral, B = transition-band
    integral).  Returns (lambda_fit, per-tau lambda array)."""
    taus = np.asarray(taus, dtype=float)
    X = np.asarray(tip_integrals, dtype=float)
    B = np.asarray(band_integrals, dtype=float)
    dX = np.gradient(X, taus)
    lam = (c_theta * B - dX) / (2.0 * np.abs(taus) * np.maximum(X, 1e-300))
    inner = slice(1, -1)
    return float(lam[inner].min()), lam
