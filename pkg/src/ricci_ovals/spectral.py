"""Gaussian-weight Hilbert space tools around the cylinder linearization.

The operator L f = f'' - (sigma/2) f' + f is self-adjoint in
H = L^2(R, exp(-sigma^2/4) dsigma) with eigenfunctions psi_n(sigma) =
H_n(sigma/2) (physicists' Hermite) and eigenvalues 1 - n/2.  D adds the
derivative term to the norm; D* is the dual, computed spectrally.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss, hermval
from scipy.interpolate import CubicSpline

from .errors import NotASolution, SymmetryViolation, UnderResolved, WindowTooShort
from .states import _ro

TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


def hermite_sigma(n: int, sigma):
    """psi_n(sigma) = H_n(sigma/2); psi_0 = 1, psi_2 = sigma^2 - 2."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    return hermval(np.asarray(sigma, dtype=float) / 2.0, c)


def eigenvalue(n: int) -> float:
    return 1.0 - n / 2.0


def norm_sq_H(n: int) -> float:
    """||psi_n||_H^2 = 2 sqrt(pi) 2^n n!."""
    return TWO_SQRT_PI * (2.0**n) * math.factorial(n)


def norm_sq_D(n: int) -> float:
    """||psi_n||_D^2 = (1 + n/2) ||psi_n||_H^2 (since psi_n' = n psi_{n-1})."""
    return (1.0 + n / 2.0) * norm_sq_H(n)


@dataclass(frozen=True)
class GaussianQuadrature:
    """Nodes/weights for integral f(sigma) exp(-sigma^2/4) dsigma.

    Realized by sigma = 2x on the classical exp(-x^2) rule, so the default
    64-node table is exact through polynomial degree 127.
    """

    sigma: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", _ro(self.sigma))
        object.__setattr__(self, "weights", _ro(self.weights))

    @classmethod
    def build(cls, n: int = 64) -> "GaussianQuadrature":
        x, w = hermgauss(n)
        return cls(sigma=2.0 * x, weights=2.0 * w)

    def integrate(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))

    def inner(self, f_values, g_values) -> float:
        return float(self.weights @ (np.asarray(f_values) * np.asarray(g_values)))


_default_quad: GaussianQuadrature | None = None


def default_quadrature() -> GaussianQuadrature:
    global _default_quad
    if _default_quad is None:
        _default_quad = GaussianQuadrature.build(64)
    return _default_quad


def _as_node_values(f, quad: GaussianQuadrature, df=None, tol: float = 1e-3):
    """Evaluate f (callable or (grid, values)) at the quadrature nodes.

    Grid fields are interpolated by cubic spline; the spline-vs-linear
    difference at the nodes is a (conservative, linear-order) bound on the
    interpolation error and trips UnderResolved beyond tol relative to the
    field scale.  Fields are zero-extended outside their grid (compactly
    supported cutoffs).  Returns (f_nodes, df_nodes or None).
    """
    if callable(f):
        return np.asarray(f(quad.sigma), dtype=float), None if df is None else np.asarray(df(quad.sigma), dtype=float)
    grid, values = f
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    spline = CubicSpline(grid, values)
    inside = (quad.sigma >= grid[0]) & (quad.sigma <= grid[-1])
    out = np.zeros_like(quad.sigma)
    out[inside] = spline(quad.sigma[inside])
    lin = np.zeros_like(out)
    lin[inside] = np.interp(quad.sigma[inside], grid, values)
    scale = max(np.abs(values).max(), 1e-300)
    if np.abs(out - lin).max() > tol * scale:
        raise UnderResolved("grid too coarse for quadrature-node interpolation")
    dout = None
    if df is None:
        dout = np.zeros_like(out)
        dout[inside] = spline(quad.sigma[inside], 1)
    else:
        dgrid, dvalues = df
        dout = np.zeros_like(out)
        dout[inside] = CubicSpline(np.asarray(dgrid, float), np.asarray(dvalues, float))(quad.sigma[inside])
    return out, dout


def norms(f, df=None, quad: GaussianQuadrature | None = None, n_max: int = 40):
    """(||f||_H, ||f||_D, ||f||_D*) of a field.

    f: callable sigma -> values, or a (grid, values) pair.  The dual norm is
    the Riesz diagonal sum over the eigenbasis truncated at n_max; the
    truncated tail goes into the reported value through Parseval's remainder
    (capped by ||f||_H, which dominates ||.||_D*).
    """
    quad = quad or default_quadrature()
    fv, dfv = _as_node_values(f, quad, df)
    h2 = quad.integrate(fv * fv)
    d2 = h2 + (quad.integrate(dfv * dfv) if dfv is not None else 0.0)
    # spectral dual norm: sum c_n^2 ||psi_n||^2 / (1 + n/2)
    dual2 = 0.0
    captured = 0.0
    for n in range(0, n_max + 1):
        pn = hermite_sigma(n, quad.sigma)
        cn = quad.integrate(fv * pn) / norm_sq_H(n)
        dual2 += cn * cn * norm_sq_H(n) / (1.0 + n / 2.0)
        captured += cn * cn * norm_sq_H(n)
    tail = max(h2 - captured, 0.0)
    dual2 += tail / (1.0 + (n_max + 1) / 2.0)
    return math.sqrt(max(h2, 0.0)), math.sqrt(max(d2, 0.0)), math.sqrt(max(dual2, 0.0))


def apply_L(sigma_grid, f_values, df=None, d2f=None):
    """L f = f'' - (sigma/2) f' + f, second-order stencils on a uniform grid.

    Closed-form derivative arrays take precedence when provided.
    """
    from .kernels import sigma_derivs

    f = np.asarray(f_values, dtype=float)
    sig = np.asarray(sigma_grid, dtype=float)
    if df is None or d2f is None:
        h = float(sig[1] - sig[0])
        df_, d2f_ = sigma_derivs(f, h)
        df = df_ if df is None else df
        d2f = d2f_ if d2f is None else d2f
    return np.asarray(d2f) - 0.5 * sig * np.asarray(df) + f


@dataclass(frozen=True)
class SpectralDecomposition:
    """Coefficients against psi_0, psi_2 plus the high-mode remainder."""

    a0: float
    a2: float
    remainder: np.ndarray      # P_- f at the quadrature nodes
    sigma: np.ndarray
    norm_sq_total: float
    norm_sq_remainder: float

    def __post_init__(self):
        object.__setattr__(self, "remainder", _ro(self.remainder))
        object.__setattr__(self, "sigma", _ro(self.sigma))

    @property
    def parseval_defect(self) -> float:
        lhs = self.norm_sq_total
        rhs = (
            self.a0 * self.a0 * norm_sq_H(0)
            + self.a2 * self.a2 * norm_sq_H(2)
            + self.norm_sq_remainder
        )
        return abs(lhs - rhs)


def project(f, quad: GaussianQuadrature | None = None,
            symmetry_tol: float = 1e-10) -> SpectralDecomposition:
    """Orthogonal projections onto psi_0, psi_2 and the stable remainder.

    Reflection-symmetric inputs carry no psi_1 component; a coefficient above
    symmetry_tol (relative to ||f||_H) raises SymmetryViolation.
    """
    quad = quad or default_quadrature()
    fv, _ = _as_node_values(f, quad)
    h = math.sqrt(max(quad.integrate(fv * fv), 0.0))
    c1 = quad.integrate(fv * quad.sigma) / norm_sq_H(1)
    if abs(c1) * math.sqrt(norm_sq_H(1)) > symmetry_tol * max(h, 1e-300):
        raise SymmetryViolation(f"psi_1 coefficient {c1:.3e} breaks reflection symmetry")
    a0 = quad.integrate(fv) / norm_sq_H(0)
    p2 = hermite_sigma(2, quad.sigma)
    a2 = quad.integrate(fv * p2) / norm_sq_H(2)
    rem = fv - a0 - a2 * p2
    return SpectralDecomposition(
        a0=a0,
        a2=a2,
        remainder=rem,
        sigma=quad.sigma,
        norm_sq_total=quad.integrate(fv * fv),
        norm_sq_remainder=quad.integrate(rem * rem),
    )


def windowed_norm(taus, values, tau: float | None = None, power: float = 0.0):
    """sup over tau' <= tau of (integral_{tau'-1}^{tau'} values^2 ds)^(1/2).

    values are per-time norms ||f(s)||; integration is trapezoid on the
    stored grid, windows clipped to stored coverage.  power adds the
    |tau'|^power prefactor used by the tip norm (power = -1/4 there).
    """
    taus = np.asarray(taus, dtype=float)
    vals = np.asarray(values, dtype=float)
    if taus.size < 2:
        raise WindowTooShort("need at least two samples")
    step = np.diff(taus).max()
    if step > 0.5:
        raise WindowTooShort(f"series step {step:.3f} too coarse for unit windows")
    if tau is None:
        tau = taus[-1]
    sq = vals * vals
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (sq[1:] + sq[:-1]) * np.diff(taus))])

    def window_integral(t1):
        t0 = t1 - 1.0
        if t0 < taus[0] - 1e-12:
            return None
        a = np.interp(t0, taus, cum)
        b = np.interp(t1, taus, cum)
        return b - a

    best = 0.0
    endpoints = taus[(taus <= tau + 1e-12) & (taus >= taus[0] + 1.0 - 1e-12)]
    if endpoints.size == 0:
        raise WindowTooShort("series shorter than one unit window")
    for t1 in endpoints:
        w = window_integral(t1)
        if w is None:
            continue
        best = max(best, abs(t1) ** (2.0 * power) * w)
    return math.sqrt(best)


def linear_theory_check(taus, f_matrix, g_matrix, sigma_grid,
                        quad: GaussianQuadrature | None = None,
                        T: float = 1.0, residual_tol: float = 1e-6):
    """Empirical constant for the backward-window estimate on f_t = L f + g.

    Verifies the PDE residual first (NotASolution beyond residual_tol), then
    evaluates, over blocks I_n = [tau0-(n+1)T, tau0-nT],

        sup ||f_hat||_H^2 + C^-1 sup_n int_{I_n} ||f_hat||_D^2
            <= ||P_+ f(tau0)||_H^2 + C sup_n int_{I_n} ||g_hat||_D*^2

    and reports the smallest admissible C (root of the quadratic in C).
    """
    quad = quad or default_quadrature()
    taus = np.asarray(taus, dtype=float)
    f_matrix = np.asarray(f_matrix, dtype=float)
    g_matrix = np.asarray(g_matrix, dtype=float)
    dt = taus[1] - taus[0]

    # PDE residual on interior snapshots
    scale = max(np.abs(f_matrix).max(), 1e-300)
    for k in range(1, taus.size - 1):
        fdot = (f_matrix[k + 1] - f_matrix[k - 1]) / (2.0 * dt)
        Lf = apply_L(sigma_grid, f_matrix[k])
        res = np.abs(fdot - Lf - g_matrix[k])[2:-2].max()
        if res > residual_tol * scale:
            raise NotASolution(f"PDE residual {res:.3e} at tau={taus[k]:.3f}")

    def hat_norms(mat):
        hs, ds, dstars = [], [], []
        for row in mat:
            dec = project((sigma_grid, row), quad)
            hat_vals = row - dec.a2 * hermite_sigma(2, sigma_grid)
            nh, nd, ndual = norms((sigma_grid, hat_vals), quad=quad)
            hs.append(nh)
            ds.append(nd)
            dstars.append(ndual)
        return np.array(hs), np.array(ds), np.array(dstars)

    fh, fd, _ = hat_norms(f_matrix)
    _, _, gdual = hat_norms(g_matrix)

    tau0 = taus[-1]
    sup_fh2 = float((fh**2).max())
    blocks = []
    t_hi = tau0
    while t_hi - T >= taus[0] - 1e-9:
        m = (taus >= t_hi - T - 1e-12) & (taus <= t_hi + 1e-12)
        if m.sum() >= 2:
            blocks.append(m)
        t_hi -= T
    if not blocks:
        raise WindowTooShort("trajectory shorter than one block")
    int_fd2 = max(float(np.trapezoid((fd[m]) ** 2, taus[m])) for m in blocks)
    int_gd2 = max(float(np.trapezoid((gdual[m]) ** 2, taus[m])) for m in blocks)

    dec0 = project((sigma_grid, f_matrix[-1]), quad)
    fplus0_sq = dec0.a0**2 * norm_sq_H(0)

    # smallest C with sup + A/C <= B + C G  (A = int_fd2, B = fplus0_sq, G = int_gd2)
    S, A, B, G = sup_fh2, int_fd2, fplus0_sq, int_gd2
    if G <= 0.0:
        c_star = math.inf if S > B else A / max(B - S, 1e-300)
    else:
        disc = (S - B) ** 2 + 4.0 * G * A
        c_star = ((S - B) + math.sqrt(disc)) / (2.0 * G)
    return {
        "c_star": float(c_star),
        "sup_hat_H_sq": S,
        "block_D_sq": A,
        "fplus_tau0_sq": B,
        "block_g_dual_sq": G,
        "n_blocks": len(blocks),
    }
