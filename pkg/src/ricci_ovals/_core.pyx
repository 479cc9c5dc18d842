# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: hot loops of the method-of-lines integrators.

Mirrors _core_py.py exactly; ricci_ovals.kernels selects whichever imports.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def physical_derivs(const double[::1] psi, const double[::1] phi, double h, bint closed):
    cdef Py_ssize_t n = psi.shape[0]
    cdef cnp.ndarray[double, ndim=1] psi_s_a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] psi_ss_a = np.empty(n)
    cdef double[::1] psi_s = psi_s_a
    cdef double[::1] psi_ss = psi_ss_a
    cdef Py_ssize_t j
    cdef double hh = h * h
    cdef double psi_x, psi_xx, phi_x, p2, p3
    for j in range(1, n - 1):
        psi_x = (psi[j + 1] - psi[j - 1]) / (2.0 * h)
        psi_xx = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / hh
        phi_x = (phi[j + 1] - phi[j - 1]) / (2.0 * h)
        p2 = phi[j] * phi[j]
        p3 = p2 * phi[j]
        psi_s[j] = psi_x / phi[j]
        psi_ss[j] = psi_xx / p2 - psi_x * phi_x / p3
    if closed:
        psi_s[0] = psi[1] / h / phi[0]
        psi_s[n - 1] = -psi[n - 2] / h / phi[n - 1]
        psi_ss[0] = 0.0
        psi_ss[n - 1] = 0.0
    else:
        psi_x = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h)
        psi_xx = (2.0 * psi[0] - 5.0 * psi[1] + 4.0 * psi[2] - psi[3]) / hh
        phi_x = (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h)
        psi_s[0] = psi_x / phi[0]
        psi_ss[0] = psi_xx / (phi[0] * phi[0]) - psi_x * phi_x / (phi[0] ** 3)
        psi_x = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * h)
        psi_xx = (2.0 * psi[n - 1] - 5.0 * psi[n - 2] + 4.0 * psi[n - 3] - psi[n - 4]) / hh
        phi_x = (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) / (2.0 * h)
        psi_s[n - 1] = psi_x / phi[n - 1]
        psi_ss[n - 1] = psi_xx / (phi[n - 1] * phi[n - 1]) - psi_x * phi_x / (phi[n - 1] ** 3)
    return psi_s_a, psi_ss_a


cdef void _fit_pole_ratio_c(double[::1] G, const double[::1] Q, Py_ssize_t n) noexcept:
    """Polynomial fit of G against Q from a fixed-profile-fraction window,
    written onto the 0/0 nodes near each pole (see the numpy backend)."""
    cdef double qmax = 0.0
    cdef Py_ssize_t imax = 0
    cdef Py_ssize_t j, lo_i, hi_i, side
    cdef double fix_gate, lo_gate, hi_gate
    cdef double s0, s1, s2, s3, s4, b0, b1, b2
    cdef double a00, a01, a02, a11, a12, a22, det
    cdef double c0, c1, c2, v, w
    cdef Py_ssize_t count
    for j in range(n):
        if Q[j] > qmax:
            qmax = Q[j]
            imax = j
    fix_gate = 0.12 * 0.12 * qmax
    lo_gate = 0.12 * 0.12 * qmax
    for side in range(2):
        if side == 0:
            lo_i = 0
            hi_i = imax
        else:
            lo_i = imax
            hi_i = n
        hi_gate = 0.45 * 0.45 * qmax
        count = 0
        for j in range(lo_i, hi_i):
            if Q[j] >= lo_gate and Q[j] <= hi_gate:
                count += 1
        while count < 5 and hi_gate < 0.9 * qmax:
            hi_gate = min(hi_gate + 0.1 * qmax, 0.9025 * qmax)
            count = 0
            for j in range(lo_i, hi_i):
                if Q[j] >= lo_gate and Q[j] <= hi_gate:
                    count += 1
        if count < 3:
            continue
        s0 = s1 = s2 = s3 = s4 = 0.0
        b0 = b1 = b2 = 0.0
        for j in range(lo_i, hi_i):
            if Q[j] >= lo_gate and Q[j] <= hi_gate:
                v = Q[j] / qmax
                s0 += 1.0
                s1 += v
                s2 += v * v
                s3 += v * v * v
                s4 += v * v * v * v
                b0 += G[j]
                b1 += G[j] * v
                b2 += G[j] * v * v
        # normal equations for (c0, c1, c2) against basis (1, v, v^2)
        a00, a01, a02 = s0, s1, s2
        a11, a12, a22 = s2, s3, s4
        det = (a00 * (a11 * a22 - a12 * a12)
               - a01 * (a01 * a22 - a12 * a02)
               + a02 * (a01 * a12 - a11 * a02))
        if det == 0.0:
            continue
        c0 = ((b0 * (a11 * a22 - a12 * a12)
               - a01 * (b1 * a22 - a12 * b2)
               + a02 * (b1 * a12 - a11 * b2)) / det)
        c1 = ((a00 * (b1 * a22 - b2 * a12)
               - b0 * (a01 * a22 - a12 * a02)
               + a02 * (a01 * b2 - b1 * a02)) / det)
        c2 = ((a00 * (a11 * b2 - a12 * b1)
               - a01 * (a01 * b2 - b1 * a02)
               + b0 * (a01 * a12 - a11 * a02)) / det)
        for j in range(lo_i, hi_i):
            if Q[j] < fix_gate:
                w = Q[j] / qmax
                G[j] = c0 + c1 * w + c2 * w * w


def physical_q_rhs(const double[::1] Q, const double[::1] xi, double h,
                   double s_minus, double s_plus, bint closed):
    cdef Py_ssize_t n = Q.shape[0]
    cdef double L = 0.5 * (s_plus - s_minus)
    cdef double hL = h * L
    cdef double hh = hL * hL
    cdef cnp.ndarray[double, ndim=1] Qt_a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] G_a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] Qs_a = np.empty(n)
    cdef double[::1] Q_t = Qt_a
    cdef double[::1] G = G_a
    cdef double[::1] Q_s = Qs_a
    cdef Py_ssize_t j
    cdef double q_s, q_ss
    for j in range(1, n - 1):
        q_s = (Q[j + 1] - Q[j - 1]) / (2.0 * hL)
        q_ss = (Q[j + 1] - 2.0 * Q[j] + Q[j - 1]) / hh
        Q_s[j] = q_s
        Q_t[j] = q_ss - 2.0
        G[j] = (q_ss - q_s * q_s / (2.0 * Q[j])) / Q[j]
    if closed:
        Q_s[0] = 0.0
        Q_s[n - 1] = 0.0
        q_ss = 2.0 * (Q[1] - Q[0]) / hh
        Q_t[0] = q_ss - 2.0
        G[0] = 0.0
        q_ss = 2.0 * (Q[n - 2] - Q[n - 1]) / hh
        Q_t[n - 1] = q_ss - 2.0
        G[n - 1] = 0.0
        _fit_pole_ratio_c(G, Q, n)
    else:
        q_s = (-3.0 * Q[0] + 4.0 * Q[1] - Q[2]) / (2.0 * hL)
        q_ss = (2.0 * Q[0] - 5.0 * Q[1] + 4.0 * Q[2] - Q[3]) / hh
        Q_s[0] = q_s
        Q_t[0] = q_ss - 2.0
        G[0] = (q_ss - q_s * q_s / (2.0 * Q[0])) / Q[0]
        q_s = (3.0 * Q[n - 1] - 4.0 * Q[n - 2] + Q[n - 3]) / (2.0 * hL)
        q_ss = (2.0 * Q[n - 1] - 5.0 * Q[n - 2] + 4.0 * Q[n - 3] - Q[n - 4]) / hh
        Q_s[n - 1] = q_s
        Q_t[n - 1] = q_ss - 2.0
        G[n - 1] = (q_ss - q_s * q_s / (2.0 * Q[n - 1])) / Q[n - 1]

    # Jcal = cumulative trapezoid of G from the center node
    cdef cnp.ndarray[double, ndim=1] Jcal_a = np.empty(n)
    cdef double[::1] Jcal = Jcal_a
    cdef Py_ssize_t icenter = n // 2
    cdef double acc = 0.0
    Jcal[0] = 0.0
    for j in range(1, n):
        acc += 0.5 * (G[j] + G[j - 1]) * hL
        Jcal[j] = acc
    cdef double j0 = Jcal[icenter]
    for j in range(n):
        Jcal[j] -= j0
    cdef double j_minus = Jcal[0]
    cdef double j_plus = Jcal[n - 1]
    cdef double cdot = 0.5 * (j_plus + j_minus)
    cdef double ldot = 0.5 * (j_plus - j_minus)
    for j in range(n):
        Q_t[j] += Q_s[j] * (cdot + xi[j] * ldot - Jcal[j])
    if closed:
        Q_t[0] = 0.0
        Q_t[n - 1] = 0.0
    return Qt_a, j_minus, j_plus


def sigma_derivs(const double[::1] u, double h):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] us_a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] uss_a = np.empty(n)
    cdef double[::1] u_s = us_a
    cdef double[::1] u_ss = uss_a
    cdef Py_ssize_t j
    cdef double hh = h * h
    for j in range(1, n - 1):
        u_s[j] = (u[j + 1] - u[j - 1]) / (2.0 * h)
        u_ss[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / hh
    u_s[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
    u_s[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
    u_ss[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / hh
    u_ss[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / hh
    return us_a, uss_a


def cumtrapz_center(const double[::1] z, double h, Py_ssize_t icenter):
    cdef Py_ssize_t n = z.shape[0]
    cdef cnp.ndarray[double, ndim=1] out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef Py_ssize_t j
    cdef double acc = 0.0
    out[0] = 0.0
    for j in range(1, n):
        acc += 0.5 * (z[j] + z[j - 1]) * h
        out[j] = acc
    cdef double c = out[icenter]
    for j in range(n):
        out[j] -= c
    return out_a


def rescaled_rhs_core(const double[::1] u, const double[::1] u_s, const double[::1] u_ss,
                      const double[::1] sigma, double h, Py_ssize_t icenter):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] out_a = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] J_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef double[::1] J = J_a
    cdef Py_ssize_t j
    cdef double acc = 0.0
    cdef double zprev = 2.0 * u_ss[0] / u[0]
    cdef double z
    J[0] = 0.0
    for j in range(1, n):
        z = 2.0 * u_ss[j] / u[j]
        acc += 0.5 * (z + zprev) * h
        J[j] = acc
        zprev = z
    cdef double c = J[icenter]
    for j in range(n):
        out[j] = (u_ss[j] - (0.5 * sigma[j] + J[j] - c) * u_s[j]
                  + (u_s[j] * u_s[j] - 1.0) / u[j] + 0.5 * u[j])
    return out_a


def rk4_axpy(const double[::1] u, const double[::1] k1, const double[::1] k2,
             const double[::1] k3, const double[::1] k4, double dt):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef Py_ssize_t j
    cdef double w = dt / 6.0
    for j in range(n):
        out[j] = u[j] + w * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
    return out_a
