"""Ground-state phase-space density: marginals, normalization, L-curve."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

from sedlab.phase_space import (GroundStateParams, PhaseSpacePoint,
                                conjecture_L_curve, density_Ppr, dist_E_Leff,
                                dist_E_kappa, momentum_marginal, psi0)


def closed_L_curve(L):
    # integrating the (E, L) density over energies at d = 0 gives
    # L^2 Gamma(7/2) Q(7/2, 4 L^2) with Q the regularized upper gamma
    L = np.asarray(L, dtype=float)
    return L * L * gamma_fn(3.5) * gammaincc(3.5, 4.0 * L * L)


def test_ground_state_params():
    p0 = GroundStateParams(d=0.0)
    assert p0.l0 == 0.0
    assert p0.energy0 == pytest.approx(-0.5)
    p = GroundStateParams(d=3.0 / 16.0)
    assert p.l0 == pytest.approx(-0.25, rel=1e-14)
    assert p.energy0 == pytest.approx(-8.0 / 9.0, rel=1e-14)
    pc = GroundStateParams(d=0.25)
    assert pc.l0 == pytest.approx(-0.5, rel=1e-7)
    pn = GroundStateParams(d=-3.0)
    assert pn.l0 == pytest.approx(0.5 * (math.sqrt(13.0) - 1.0), rel=1e-14)
    with pytest.raises(ValueError):
        GroundStateParams(d=0.26)


def test_psi0_coulomb_and_normalization():
    p0 = GroundStateParams(d=0.0)
    for r in (0.2, 1.0, 2.5):
        assert psi0(r, p0) == pytest.approx(math.exp(-r) / math.sqrt(math.pi),
                                            rel=1e-13)
    for d in (0.0, -1.0, 0.2):
        p = GroundStateParams(d=d)
        val, err = quad(lambda r: 4.0 * math.pi * r * r * psi0(r, p) ** 2,
                        0.0, np.inf)
        assert val == pytest.approx(1.0, abs=max(1e-10, 10.0 * err))


def test_phase_space_point_geometry():
    pt = PhaseSpacePoint.from_angles(0.8, 2.0, 0.7)
    v2 = 2.0 / 0.8 - 2.0 / 2.0
    assert pt.p_r ** 2 + pt.Leff ** 2 / pt.r ** 2 == pytest.approx(v2,
                                                                   rel=1e-14)
    assert pt.p_r == pytest.approx(math.sqrt(v2) * math.cos(0.7), rel=1e-14)
    assert pt.Leff == pytest.approx(0.8 * math.sqrt(v2) * math.sin(0.7),
                                    rel=1e-14)
    with pytest.raises(ValueError):
        PhaseSpacePoint.from_angles(1.0, 0.9, 0.3)
    with pytest.raises(ValueError):
        density_Ppr(PhaseSpacePoint(r=2.0, R=1.5, Leff=0.1, p_r=0.0,
                                    angle_m=0.5), GroundStateParams(d=0.0))


def test_momentum_marginal_closes_to_psi0_squared():
    # the defining property of the density: integrating out the momentum
    # variables returns the configuration density
    for d in (0.0, -1.0, 0.2, 0.25):
        p = GroundStateParams(d=d)
        for r in (0.3, 1.0, 3.0):
            want = psi0(r, p) ** 2
            got = momentum_marginal(r, p)
            assert got == pytest.approx(want, rel=1e-10)


def test_dist_E_kappa_shape_and_domain():
    p = GroundStateParams(d=0.2)
    sig = 2.0 + 4.0 * p.l0
    a = dist_E_kappa(-0.4, 0.3, p)
    b = dist_E_kappa(-0.4, 0.6, p)
    assert a > 0.0
    assert b / a == pytest.approx(2.0 ** sig, rel=1e-12)
    for bad_e, bad_k in ((0.0, 0.5), (0.1, 0.5), (-0.4, -0.1), (-0.4, 1.1)):
        with pytest.raises(ValueError):
            dist_E_kappa(bad_e, bad_k, p)


def test_dist_normalization():
    # kappa dependence factorizes as kappa^sigma, so the double integral
    # reduces to a 1d energy quadrature
    for d in (0.0, 0.2, -1.0):
        p = GroundStateParams(d=d)
        sig = 2.0 + 4.0 * p.l0

        def energy_density(e):
            return dist_E_kappa(e, 0.5, p) / 0.5 ** sig

        val, err = quad(energy_density, -np.inf, 0.0)
        total = val / (sig + 1.0)
        assert total == pytest.approx(1.0, abs=max(1e-8, 10.0 * err))


def test_dist_E_Leff_jacobian():
    p = GroundStateParams(d=0.1)
    for e, L in ((-0.5, 0.4), (-0.125, 0.9), (-2.0, 0.3)):
        kappa = L * math.sqrt(2.0 * abs(e))
        want = dist_E_kappa(e, kappa, p) * math.sqrt(2.0 * abs(e))
        assert dist_E_Leff(e, L, p) == pytest.approx(want, rel=1e-13)
    with pytest.raises(ValueError):
        dist_E_Leff(-0.5, 1.2, p)  # implied kappa > 1


def test_L_curve_matches_closed_form():
    L = np.linspace(0.05, 2.0, 40)
    got = conjecture_L_curve(L)
    assert np.allclose(got, closed_L_curve(L), rtol=1e-10)
    with pytest.raises(ValueError):
        conjecture_L_curve(L, params=GroundStateParams(d=0.1))


def test_L_curve_golden_values():
    # pinned against an independent adaptive quadrature of the raw
    # two-variable density
    for L, want in ((0.2, 0.132917498546159),
                    (0.588084, 1.040983742506356),
                    (1.0, 1.105326268968445)):
        assert float(conjecture_L_curve(L)) == pytest.approx(want, rel=1e-9)


def test_L_curve_small_L_and_total_mass():
    assert float(conjecture_L_curve(1e-3)) / 1e-6 == pytest.approx(
        gamma_fn(3.5), rel=1e-4)
    val, err = quad(lambda L: float(conjecture_L_curve(L)), 0.0, 6.0,
                    limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)
