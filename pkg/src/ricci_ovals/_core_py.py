"""Pure-numpy kernel backend.

Same call signatures as the compiled backend in ``_core.pyx``.  These are the
hot loops of the method-of-lines integrators; everything here is plain array
arithmetic with no object allocation beyond the outputs.
"""

import numpy as np

BACKEND_NAME = "numpy"


def physical_derivs(psi, phi, h, closed):
    """First and second s-derivatives of psi on the pole-inclusive x-grid.

    d/ds = phi^-1 d/dx, and psi_ss = psi_xx/phi^2 - psi_x phi_x/phi^3 with
    direct second differences (the nested D1(D1 .) form is transparent to
    the sawtooth mode and unusable for stiff diffusion).  For closed
    profiles the poles sit on the end nodes with psi = 0; ghosts use the
    smooth-closure parities (psi odd through each pole, phi even).  Open
    test fields fall back to one-sided second-order stencils.
    Returns (psi_s, psi_ss).
    """
    n = psi.shape[0]
    hh = h * h
    psi_x = np.empty(n)
    psi_xx = np.empty(n)
    phi_x = np.empty(n)
    psi_x[1:-1] = (psi[2:] - psi[:-2]) / (2.0 * h)
    psi_xx[1:-1] = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / hh
    phi_x[1:-1] = (phi[2:] - phi[:-2]) / (2.0 * h)
    if closed:
        psi_x[0] = psi[1] / h            # ghost psi(-1-h) = -psi[1]
        psi_x[-1] = -psi[-2] / h         # ghost psi(1+h) = -psi[-2]
        psi_xx[0] = 0.0                  # odd psi: curvature vanishes on the node
        psi_xx[-1] = 0.0
        phi_x[0] = 0.0                   # even phi through the pole
        phi_x[-1] = 0.0
    else:
        psi_x[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h)
        psi_x[-1] = (3.0 * psi[-1] - 4.0 * psi[-2] + psi[-3]) / (2.0 * h)
        psi_xx[0] = (2.0 * psi[0] - 5.0 * psi[1] + 4.0 * psi[2] - psi[3]) / hh
        psi_xx[-1] = (2.0 * psi[-1] - 5.0 * psi[-2] + 4.0 * psi[-3] - psi[-4]) / hh
        phi_x[0] = (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h)
        phi_x[-1] = (3.0 * phi[-1] - 4.0 * phi[-2] + phi[-3]) / (2.0 * h)
    phi2 = phi * phi
    psi_s = psi_x / phi
    psi_ss = psi_xx / phi2 - psi_x * phi_x / (phi2 * phi)
    return psi_s, psi_ss


def physical_q_rhs(Q, xi, h, s_minus, s_plus, closed):
    """Stepping form of the flow in the proportional-arclength gauge.

    Unknowns: the squared profile Q = psi^2 on the fixed grid xi in [-1, 1]
    (arclength s = c + L xi with L = (s_plus - s_minus)/2), plus the two tip
    arclengths.  At a material point the nonlinear terms cancel and Q obeys
    the linear equation Q_t = Q_ss - 2 exactly; holding xi fixed instead
    adds the commuting-variable advection

        Q_t|_xi = Q_ss - 2 + Q_s [ c' + xi L' - Jcal(s) ],

    where Jcal(s) = integral_0^s 2 psi_ss/psi ds' is the arc-stretch
    integral and s_pm' = Jcal(s_pm).  On exact spheres the bracket vanishes
    identically.  The ratio G = 2 psi_ss/psi = (Q_ss - Q_s^2/(2Q))/Q is 0/0
    at the poles; G is even in pole distance d and d^2 = Q (1 + O(Q)), so
    near-pole values come from a polynomial fit of G against Q anchored at
    a fixed profile fraction.  Returns (Q_t, j_minus, j_plus).
    """
    n = Q.shape[0]
    L = 0.5 * (s_plus - s_minus)
    hh = (h * L) * (h * L)
    Q_s = np.empty(n)
    Q_ss = np.empty(n)
    Q_s[1:-1] = (Q[2:] - Q[:-2]) / (2.0 * h * L)
    Q_ss[1:-1] = (Q[2:] - 2.0 * Q[1:-1] + Q[:-2]) / hh
    if closed:
        Q_s[0] = 0.0                                  # Q even through the pole
        Q_s[-1] = 0.0
        Q_ss[0] = 2.0 * (Q[1] - Q[0]) / hh
        Q_ss[-1] = 2.0 * (Q[-2] - Q[-1]) / hh
    else:
        Q_s[0] = (-3.0 * Q[0] + 4.0 * Q[1] - Q[2]) / (2.0 * h * L)
        Q_s[-1] = (3.0 * Q[-1] - 4.0 * Q[-2] + Q[-3]) / (2.0 * h * L)
        Q_ss[0] = (2.0 * Q[0] - 5.0 * Q[1] + 4.0 * Q[2] - Q[3]) / hh
        Q_ss[-1] = (2.0 * Q[-1] - 5.0 * Q[-2] + 4.0 * Q[-3] - Q[-4]) / hh
    Q_t = Q_ss - 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (Q_ss - Q_s * Q_s / (2.0 * Q)) / Q
    if closed:
        _fit_pole_ratio(G, Q)
    icenter = n // 2
    Jcal = cumtrapz_center(G, h * L, icenter)
    j_minus = Jcal[0]
    j_plus = Jcal[-1]
    A = 0.5 * (j_plus + j_minus) + 0.5 * xi * (j_plus - j_minus) - Jcal
    Q_t += Q_s * A
    if closed:
        Q_t[0] = 0.0
        Q_t[-1] = 0.0
    return Q_t, j_minus, j_plus


# Pole fit window for the phi-driving ratio G = 2 psi_ss/psi, as fractions of
# max psi.  G is smooth and even in pole distance d, and d^2 = Q (1 + O(Q)),
# so a polynomial fit of G against Q from nodes at a fixed profile fraction
# extends it onto the nodes where the raw ratio is 0/0 or noise-dominated.
G_FIX_FRAC = 0.12
G_FIT_LO = 0.12
G_FIT_HI = 0.45


def _fit_pole_ratio(G, Q):
    n = Q.shape[0]
    qmax = Q.max()
    imax = int(np.argmax(Q))
    for lo_i, hi_i in ((0, imax), (imax, n)):
        idx = np.arange(lo_i, hi_i)
        frac2 = Q[idx] / qmax
        fix = idx[frac2 < G_FIX_FRAC**2]
        if fix.size == 0:
            continue
        hi = G_FIT_HI
        fit = idx[(frac2 >= G_FIT_LO**2) & (frac2 <= hi * hi)]
        while fit.size < 5 and hi < 0.95:
            hi += 0.1
            fit = idx[(frac2 >= G_FIT_LO**2) & (frac2 <= hi * hi)]
        if fit.size < 3:
            continue
        v = Q[fit] / qmax
        A = np.stack([np.ones_like(v), v, v * v], axis=1)
        coef, *_ = np.linalg.lstsq(A, G[fit], rcond=None)
        w = Q[fix] / qmax
        G[fix] = coef[0] + coef[1] * w + coef[2] * w * w


def sigma_derivs(u, h):
    """First and second derivatives on a uniform sigma-grid.

    Central stencils inside, one-sided second-order at the two edge nodes
    (tip-free domains only; the edges are outflow for near-cylindrical data).
    Returns (u_s, u_ss).
    """
    n = u.shape[0]
    u_s = np.empty(n)
    u_s[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
    u_s[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    u_s[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)

    u_ss = np.empty(n)
    u_ss[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    u_ss[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h)
    u_ss[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / (h * h)
    return u_s, u_ss


def cumtrapz_center(z, h, icenter):
    """Cumulative trapezoid of z on a uniform grid, zeroed at index icenter."""
    n = z.shape[0]
    out = np.empty(n)
    out[0] = 0.0
    np.cumsum((z[1:] + z[:-1]) * (0.5 * h), out=out[1:])
    out -= out[icenter]
    return out


def rescaled_rhs_core(u, u_s, u_ss, sigma, h, icenter):
    """Commuting-variable right-hand side on a tip-free sigma-grid.

    u_t = u_ss - (sigma/2) u_s - J u_s + u_s^2/u - 1/u + u/2,
    J(sigma) = 2 * integral_0^sigma u_ss/u.
    Derivatives are passed in so reference profiles can supply exact ones.
    """
    J = cumtrapz_center(2.0 * u_ss / u, h, icenter)
    return u_ss - (0.5 * sigma + J) * u_s + (u_s * u_s - 1.0) / u + 0.5 * u


def rk4_axpy(u, k1, k2, k3, k4, dt):
    """Classical RK4 combination step."""
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
