"""Backend selection and pole-regularized diagnostic fields.

The compiled Cython core is preferred; set RICCI_OVALS_PURE=1 to force the
numpy fallback.  Both backends implement identical bulk stencils; the O(1)
near-pole corrections live here in Python since they touch a handful of
nodes per call.
"""

import os

import numpy as np

from .errors import DegenerateProfile

if os.environ.get("RICCI_OVALS_PURE", "") == "1":
    from . import _core_py as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _core_py as _impl

        BACKEND = "numpy"

physical_derivs = _impl.physical_derivs
physical_q_rhs = _impl.physical_q_rhs
sigma_derivs = _impl.sigma_derivs
cumtrapz_center = _impl.cumtrapz_center
rescaled_rhs_core = _impl.rescaled_rhs_core
rk4_axpy = _impl.rk4_axpy

# Pole fit window, as fractions of the profile maximum: nodes below FIX_FRAC
# get even-extrapolated ratio fields; the fit samples [FIT_LO, FIT_HI].
# Dividing (1 - psi_s^2) by psi^2 where psi ~ h amplifies O(h^2) stencil
# noise to O(1) relative error, so near-pole values must come from outside.
FIX_FRAC = 0.12
FIT_LO = 0.12
FIT_HI = 0.45
MIN_FIT_NODES = 4


def _even_fit_replace(field, d2, fix_idx, fit_idx):
    """Replace field[fix_idx] by an even-polynomial fit in d^2 on fit_idx."""
    v = d2[fit_idx]
    scale = v.max()
    vv = v / scale
    A = np.stack([np.ones_like(vv), vv, vv * vv], axis=1)
    coef, *_ = np.linalg.lstsq(A, field[fit_idx], rcond=None)
    w = d2[fix_idx] / scale
    field[fix_idx] = coef[0] + coef[1] * w + coef[2] * w * w


def ratio_fields(psi, phi, h, s, closed=True):
    """K0-type and K1-type ratio fields with near-pole regularization.

    Returns (a, b, psi_s, psi_ss) where a = psi_ss/psi and
    b = (1 - psi_s^2)/psi^2.  Both ratios extend evenly and smoothly through
    a smooth pole; for closed profiles the nodes nearest each pole (where
    the raw division is 0/0 or noise-dominated) are replaced by an
    even-polynomial extrapolation in squared pole distance.
    """
    interior = psi[1:-1] if closed else psi
    if np.any(interior <= 0.0):
        raise DegenerateProfile("psi must be positive at interior nodes")
    psi_s, psi_ss = physical_derivs(psi, phi, h, closed)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = psi_ss / psi
        b = (1.0 - psi_s * psi_s) / (psi * psi)
    if not closed:
        return a, b, psi_s, psi_ss

    pmax = psi.max()
    n = psi.shape[0]
    imax = int(np.argmax(psi))
    s_left, s_right = s[0], s[-1]
    d2 = np.empty(n)
    d2[:imax] = (s[:imax] - s_left) ** 2
    d2[imax:] = (s[imax:] - s_right) ** 2
    frac = psi / pmax
    for lo_i, hi_i in ((0, imax), (imax, n)):
        idx = np.arange(lo_i, hi_i)
        fix = idx[frac[idx] < FIX_FRAC]
        if fix.size == 0:
            continue
        hi = FIT_HI
        fit = idx[(frac[idx] >= FIT_LO) & (frac[idx] <= hi)]
        while fit.size < MIN_FIT_NODES and hi < 0.95:
            hi += 0.1
            fit = idx[(frac[idx] >= FIT_LO) & (frac[idx] <= hi)]
        if fit.size < 3:
            continue
        _even_fit_replace(a, d2, fix, fit)
        _even_fit_replace(b, d2, fix, fit)
    return a, b, psi_s, psi_ss


def physical_rhs(psi, phi, h, s, closed=True):
    """Diagnostic-grade time derivatives (psi_t, phi_t) of the unrescaled flow.

    psi_t = psi_ss - (1 - psi_s^2)/psi and phi_t = 2 phi psi_ss/psi, written
    as psi (a - b) and 2 phi a with the pole-regular ratio fields, which are
    second-order accurate up to the poles.  Time stepping uses the raw form
    ``physical_rhs_raw`` instead (locally coupled, hence stable).
    """
    a, b, _, _ = ratio_fields(psi, phi, h, s, closed=closed)
    return psi * (a - b), 2.0 * phi * a
