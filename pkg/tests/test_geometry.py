import math

import numpy as np
import pytest

from ricci_ovals import geometry as geo
from ricci_ovals.errors import InvalidTime
from ricci_ovals.states import SQRT2, GaugeParams, ProfileState, RescaledState


def test_curvatures_cylinder_rescaled():
    st = geo.reference_solution("cylinder", tau=-20.0, n=257)
    cf = geo.curvatures(st)
    assert np.abs(cf.K0).max() < 1e-12
    assert np.abs(cf.K1 - 0.5).max() < 1e-12
    assert np.abs(cf.R - 1.0).max() < 1e-12


def test_curvatures_sphere_physical():
    ps = geo.reference_solution("sphere", t=-1.0, n=512)
    cf = geo.curvatures(ps)
    r2 = -4.0 * ps.t
    assert np.abs(cf.K0 - 1.0 / r2).max() < 2e-3
    assert np.abs(cf.K1 - 1.0 / r2).max() < 2e-3
    assert np.abs(cf.R - 6.0 / r2).max() < 6e-3


def test_scalar_curvature_identity_machine_precision():
    ps = geo.reference_solution("sphere", t=-0.7, n=256)
    cf = geo.curvatures(ps)
    scale = np.abs(cf.R).max()
    assert np.abs(cf.R - 4.0 * cf.K0 - 2.0 * cf.K1).max() <= 4 * np.finfo(float).eps * scale


def test_bryant_tip_series_in_tip_chart():
    # Z = 1 - rho^2/6 gives K0 = K1 = 1/6, R = 1 at the tip
    rho = np.linspace(1e-3, 0.3, 200)
    Z = 1.0 - rho**2 / 6.0
    Z_r = -rho / 3.0
    cf = geo.tip_chart_curvatures(rho, Z, Z_r)
    assert abs(cf.K0[0] - 1.0 / 6.0) < 1e-9
    assert abs(cf.K1[0] - 1.0 / 6.0) < 1e-9
    assert abs(cf.R[0] - 1.0) < 1e-8


def test_arclength_constant_phi():
    x = geo.pole_grid(128)
    st = ProfileState(x_grid=x, phi=np.full(x.size, 2.0),
                      psi=np.ones(x.size), t=-1.0, closed=False)
    s, sm, sp = geo.arclength(st)
    assert np.abs(s - 2.0 * x).max() < 1e-14
    assert abs(sp - 2.0) < 1e-14 and abs(sm + 2.0) < 1e-14


def test_arclength_round_sphere_closed_form():
    ps = geo.reference_solution("sphere", t=-1.0, n=512)
    s, _, _ = geo.arclength(ps)
    exact = math.pi * ps.x_grid  # phi = pi r / 2 with r = 2
    assert np.abs(s - exact).max() < 1e-10


def test_arclength_antisymmetry():
    ps = geo.reference_solution("sphere", t=-1.0, n=256)
    s, sm, sp = geo.arclength(ps)
    assert np.abs(s + s[::-1]).max() < 1e-13
    assert abs(sm + sp) < 1e-13


def test_to_rescaled_cylinder():
    ps = geo.reference_solution("cylinder", t=-2.0, n=256)
    rs = geo.to_rescaled(ps)
    assert np.abs(rs.u - SQRT2).max() < 1e-14


def test_to_rescaled_sphere_profile():
    ps = geo.reference_solution("sphere", t=-0.25, n=512)
    rs = geo.to_rescaled(ps)
    expect = 2.0 * np.cos(rs.sigma_grid / 2.0)
    assert np.abs(rs.u - expect).max() < 1e-12


def test_rescale_round_trip_exact():
    ps = geo.reference_solution("sphere", t=-0.3, n=256)
    back = geo.from_rescaled(geo.to_rescaled(ps), t=ps.t)
    assert np.abs(back.psi - ps.psi).max() < 1e-14 * ps.psi.max()
    assert np.abs(back.phi - ps.phi).max() < 1e-14 * ps.phi.max()
    assert back.tau == pytest.approx(ps.tau, abs=1e-12)


def test_from_rescaled_rejects_nonnegative_time():
    rs = geo.reference_solution("sphere", tau=-20.0, n=129)
    with pytest.raises(InvalidTime):
        geo.from_rescaled(rs, t=0.5)


def test_gauge_identity_bitwise():
    st = geo.reference_solution("sphere", tau=-20.0, n=257)
    out = geo.apply_gauge(st, GaugeParams.identity(-20.0))
    assert np.array_equal(out.u, st.u)


def test_gauge_cylinder_gamma_invariance():
    st = geo.reference_solution("cylinder", tau=-30.0, n=257)
    g = GaugeParams.from_raw(0.0, 0.27, -30.0)
    out = geo.apply_gauge(st, g)
    assert np.abs(out.u - SQRT2).max() < 1e-12


def test_gauge_cylinder_beta_deviation_within_admissible_box():
    # u^{bg} = sqrt(1 + beta e^tau) sqrt(2): the deviation is O(eps/|tau0|)
    tau0 = -30.0
    st = geo.reference_solution("cylinder", tau=tau0, n=257)
    eps = 0.5
    g = GaugeParams.from_scaled(eps / abs(tau0), 0.0, tau0)
    out = geo.apply_gauge(st, g)
    dev = np.abs(out.u - SQRT2).max()
    assert dev <= SQRT2 * eps / abs(tau0)
    assert dev > 0.0


def test_gauge_composition_inverse_round_trip():
    st = geo.reference_solution("sphere", tau=-25.0, n=513)
    g = GaugeParams.from_scaled(3e-3, 2e-3, -25.0)
    there = geo.apply_gauge(st, g)
    back = geo.apply_gauge(there, g.inverse())
    inner = np.abs(st.sigma_grid) < 2.5
    assert np.abs(back.u - st.u)[inner].max() < 1e-8


def test_gauged_sphere_solves_commuting_equation():
    from ricci_ovals.solver import rhs_rescaled

    g = GaugeParams.from_scaled(2e-4, 3e-4, -20.0)
    tau = -20.0
    dtau = 1e-5
    lo = geo.gauged_sphere(g, tau - dtau, n=2001)
    hi = geo.gauged_sphere(g, tau + dtau, n=2001)
    mid = geo.gauged_sphere(g, tau, n=2001)
    # common interior window
    sig = mid.sigma_grid
    udot = (np.interp(sig, hi.sigma_grid, hi.u) - np.interp(sig, lo.sigma_grid, lo.u)) / (2 * dtau)
    vals, window = rhs_rescaled(mid, u_min=0.05)
    inner = np.abs(sig[window]) < 2.5
    assert np.abs((vals - udot[window])[inner]).max() < 1e-7


def test_reference_sphere_stationarity_identity():
    # u_ss + u_s^2/u - 1/u + u/2 = 0 for u = 2 cos(sigma/2)
    st = geo.reference_solution("sphere", tau=-20.0, n=1001)
    keep = st.u > 0.2
    res = (st.d2u + st.du**2 / st.u - 1.0 / st.u + st.u / 2.0)[keep]
    assert np.abs(res).max() < 1e-12


def test_reflection_symmetry_of_outputs():
    ps = geo.reference_solution("sphere", t=-0.5, n=256)
    assert ps.reflection_defect() < 1e-12
    rs = geo.to_rescaled(ps)
    assert rs.reflection_defect() < 1e-12


def test_gauge_admissibility_box():
    tau0 = -400.0
    ok = GaugeParams.from_scaled(0.9 / abs(tau0), 0.9 * abs(tau0), tau0)
    bad = GaugeParams.from_scaled(1.5 / abs(tau0), 0.0, tau0)
    assert ok.is_admissible(1.0)
    assert not bad.is_admissible(1.0)


def test_gauge_compose_matches_sequential_application():
    st = geo.reference_solution("sphere", tau=-25.0, n=513)
    g1 = GaugeParams.from_scaled(1e-3, 2e-3, -25.0)
    g2 = GaugeParams.from_scaled(-5e-4, 1e-3, -25.0)
    seq = geo.apply_gauge(geo.apply_gauge(st, g1), g2)
    combo = geo.apply_gauge(st, g1.compose(g2))
    inner = np.abs(st.sigma_grid) < 2.5
    assert np.abs(seq.u - combo.u)[inner].max() < 1e-8
