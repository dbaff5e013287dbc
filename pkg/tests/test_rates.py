"""Energy-rate shapes: gain f and G/H, loss closed forms, stability windows."""

import math

import numpy as np
import pytest

from sedlab.orbits import OrbitParams
from sedlab.rates import (EccentricLimitParams, G_of_mu, H_of_mu,
                          circular_total_product_form,
                          critical_dipole_strength, f0_closed_form,
                          f0_scaling_integral, field_gain_f,
                          per_period_delta_d0, per_period_delta_dipole,
                          radiative_loss, total_rate)

F0 = 0.5880841551165783  # 16/(5 pi sqrt(3))


def loss_by_quadrature(params, n=16384):
    # time average of r^-4 + 2 d r^-5 + d^2 r^-6 via the anomaly measure
    # dt = rho da / k^3; trapezoid on a periodic integrand is spectral
    a = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    rho = 1.0 - params.eps * np.cos(a)
    k, d = params.k, params.d
    acc = 0.0
    for m, w in ((4, 1.0), (5, 2.0 * d), (6, d * d)):
        acc += w * k ** (2 * m) * np.mean(rho ** (1 - m))
    return -acc


def test_field_gain_circular_value():
    assert field_gain_f(1.0) == pytest.approx(0.5, abs=1e-12)


def test_f0_routes_agree():
    assert f0_closed_form() == pytest.approx(F0, rel=1e-15)
    assert f0_scaling_integral() == pytest.approx(F0, rel=1e-10)


def test_field_gain_panel_stability():
    assert field_gain_f(0.3) == pytest.approx(
        field_gain_f(0.3, panels_per_period=20), rel=1e-10)


def test_field_gain_monotone_decreasing():
    kappas = np.linspace(0.05, 1.0, 12)
    vals = [field_gain_f(k) for k in kappas]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(F0, abs=5e-3)
    for bad in (0.0, -0.2, 1.2):
        with pytest.raises(ValueError):
            field_gain_f(bad)


def test_radiative_loss_closed_vs_quadrature():
    rng = np.random.default_rng(21)
    assert radiative_loss(OrbitParams.from_k_eps(1.0, 0.0)) == pytest.approx(-1.0)
    for _ in range(6):
        k = rng.uniform(0.5, 1.6)
        eps = rng.uniform(0.0, 0.8)
        d = rng.uniform(-0.3 * (1 - eps * eps) / (k * k), 0.24)
        p = OrbitParams.from_k_eps(k, eps, d=d)
        assert radiative_loss(p) == pytest.approx(loss_by_quadrature(p),
                                                  rel=1e-10)


def test_total_rate_circular_balance():
    # gain k^9 f(1) and loss k^8 <r^-4> cross at k = 2 for d = 0
    bd = total_rate(OrbitParams.from_k_eps(2.0, 0.0))
    assert abs(bd.total_rate) <= 1e-9
    assert bd.gain_rate == pytest.approx(256.0, rel=1e-12)
    assert bd.loss_rate == pytest.approx(-256.0, rel=1e-12)
    below = total_rate(OrbitParams.from_k_eps(1.9, 0.0))
    above = total_rate(OrbitParams.from_k_eps(2.1, 0.0))
    assert below.total_rate < 0.0 < above.total_rate


def test_total_rate_reports_per_period():
    p = OrbitParams.from_k_eps(1.3, 0.45)
    bd = total_rate(p)
    assert bd.total_rate == pytest.approx(bd.gain_rate + bd.loss_rate, rel=1e-14)
    assert bd.delta_per_period == pytest.approx(
        bd.total_rate * 2.0 * math.pi / p.k ** 3, rel=1e-14)


def test_total_rate_eccentric_dipole_rejected():
    with pytest.raises(ValueError):
        total_rate(OrbitParams.from_k_eps(1.0, 0.3, d=0.1))


def test_circular_dipole_continuity():
    for s in (1e-9, -1e-9):
        t0 = total_rate(OrbitParams.from_k_eps(1.2, 0.0)).total_rate
        t1 = total_rate(OrbitParams.from_k_eps(1.2, 0.0, d=s)).total_rate
        assert t1 == pytest.approx(t0, abs=1e-6)


def test_product_form_matches_total():
    rng = np.random.default_rng(22)
    for _ in range(20):
        k = rng.uniform(0.4, 2.5)
        d = rng.uniform(1e-3, 0.24)
        p = OrbitParams.from_k_eps(k, 0.0, d=d)
        assert circular_total_product_form(k, d) == pytest.approx(
            total_rate(p).total_rate, rel=1e-12)


def test_per_period_sign_flip_at_f0():
    assert per_period_delta_d0(F0) == pytest.approx(0.0, abs=1e-12)
    assert per_period_delta_d0(F0 - 1e-3) > 0.0
    assert per_period_delta_d0(F0 + 1e-3) < 0.0
    with pytest.raises(ValueError):
        per_period_delta_d0(0.0)


def test_near_parabolic_limit_of_total_rate():
    # as k -> 0 at fixed L the per-period change approaches the scaled form
    for L in (0.5, 0.8, 1.2):
        p = OrbitParams.from_k_L(0.05, L)
        assert total_rate(p).delta_per_period == pytest.approx(
            per_period_delta_d0(L), rel=2e-3)


def test_G_anchor_and_asymptote():
    assert G_of_mu(1.0) == pytest.approx(1.5 * F0, rel=5e-9)
    # pinned regression value for the default panel counts
    assert G_of_mu(1.0) == pytest.approx(0.88212623231580767, rel=1e-12)
    assert G_of_mu(10.0) == pytest.approx((35.0 / 16.0) * 1000.0 - 18.75,
                                          rel=5e-5)
    with pytest.raises(ValueError):
        G_of_mu(-0.5)


def test_H_values():
    assert H_of_mu(1.0) == 0.0
    assert H_of_mu(0.0) == pytest.approx(8.0 * G_of_mu(0.0) / 7.0, rel=1e-12)
    assert H_of_mu(0.0) == pytest.approx(5.9833451524131425, rel=1e-8)
    assert H_of_mu(10.0) == pytest.approx(0.5 - 1.0 / 400.0, abs=3e-5)
    assert H_of_mu(10.0) == pytest.approx(0.49749378500425911, rel=1e-8)


def test_dipole_routes_agree():
    rng = np.random.default_rng(23)
    for _ in range(20):
        mu = rng.choice([rng.uniform(0.1, 0.95), rng.uniform(1.05, 3.0)])
        kbar = rng.uniform(0.3, 3.0)
        d = (mu * mu - 1.0) / (kbar * kbar)
        g = per_period_delta_dipole(mu, d, route="gain_loss")
        s = per_period_delta_dipole(mu, d, route="stability")
        assert g == pytest.approx(s, rel=1e-10, abs=1e-12)


def test_dipole_kbar_handling():
    with pytest.raises(ValueError):
        per_period_delta_dipole(1.0, 0.0)
    with pytest.raises(ValueError):
        per_period_delta_dipole(0.8, 0.1)  # kbar^2 < 0
    with pytest.raises(ValueError):
        per_period_delta_dipole(1.2, 0.1, kbar=1.0)  # inconsistent
    kbar = 0.7
    want = 2.0 * math.pi * (kbar ** 6 * G_of_mu(1.0) - 1.5 * kbar ** 5)
    assert per_period_delta_dipole(1.0, 0.0, kbar=kbar) == pytest.approx(
        want, rel=1e-12)
    with pytest.raises(ValueError):
        per_period_delta_dipole(0.5, -1.0, route="nonsense")


def test_strong_negative_dipole_growth_window():
    # sqrt(40) = 6.32 sits just below the interior H maximum, so a growth
    # window survives at d = -40 even though H(0)^2 = 35.8 < 40
    assert per_period_delta_dipole(0.5, -40.0) > 0.0
    assert H_of_mu(0.0) ** 2 < 40.0


def test_critical_dipole_interior_maximum():
    d_c = critical_dipole_strength(grid_size=24, refine=0.25)
    assert d_c == pytest.approx(-53.691109458683286, abs=0.1)
    assert d_c < -H_of_mu(0.0) ** 2 - 10.0


def test_eccentric_limit_params():
    lp = EccentricLimitParams.from_L_d(0.8, 0.2)
    assert lp.kbar == pytest.approx(1.0 / math.sqrt(0.8 ** 2 - 0.2), rel=1e-14)
    assert lp.mu == pytest.approx(0.8 * lp.kbar, rel=1e-14)
    assert lp.G_value == pytest.approx(G_of_mu(lp.mu), rel=1e-14)
    assert lp.H_value == pytest.approx(H_of_mu(lp.mu), rel=1e-14)
    with pytest.raises(ValueError):
        EccentricLimitParams.from_L_d(0.4, 0.2)
    lp2 = EccentricLimitParams.from_mu_d(1.2, 0.1)
    assert lp2.kbar == pytest.approx(math.sqrt((1.44 - 1.0) / 0.1), rel=1e-14)
    with pytest.raises(ValueError):
        EccentricLimitParams.from_mu_d(1.0, 0.0)
