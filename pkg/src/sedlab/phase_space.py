"""Ground-state phase-space densities for the dipole-extended problem.

The radial potential -1/r - d/(2 r^2) folds its dipole term into an
effective angular momentum, L_eff^2 = L^2 - d, so a bound orbit is fixed by
the energy radius R = -1/energy together with L_eff.  All densities below
live on these orbit coordinates; the ground-state exponent l0 solves
l0 (l0 + 1) = -d on the branch that joins l0 = 0 at d = 0.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, roots_genlaguerre, roots_jacobi

from .quadrature import gauss_legendre_panels

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GroundStateParams:
    """Dipole strength d and the derived ground-state constants.

    l0 = -1/2 + sqrt(1 - 4 d)/2 requires d <= 1/4; beyond it the effective
    centrifugal barrier is supercritical and no ground state of this family
    exists.
    """

    d: float

    def __post_init__(self):
        if self.d > 0.25:
            raise ValueError("no ground state for d > 1/4 (supercritical dipole)")

    @property
    def l0(self):
        return -0.5 + 0.5 * math.sqrt(1.0 - 4.0 * self.d)

    @property
    def energy0(self):
        return -1.0 / (2.0 * (1.0 + self.l0) ** 2)

    @property
    def norm_C(self):
        # overall constant of the (r, R, L_eff) density
        l0 = self.l0
        return (2.0 ** (2.0 + 6.0 * l0)
                / (math.pi ** 3
                   * (1.0 + l0) ** (6.0 + 4.0 * l0)
                   * gamma(3.0 + 4.0 * l0)))


@dataclass(frozen=True)
class PhaseSpacePoint:
    """One point of the bound-orbit phase space at field point radius r.

    R is the energy radius -1/energy, p_r the radial velocity, and angle_m
    in [0, pi] the polar angle of the velocity against the radial direction,
    with L_eff = r v sin(angle_m) and p_r = v cos(angle_m) for the effective
    speed v = sqrt(2/r - 2/R).
    """

    r: float
    R: float
    Leff: float
    p_r: float
    angle_m: float

    @classmethod
    def from_angles(cls, r, R, angle_m):
        if R <= r:
            raise ValueError("unreachable point: need R > r")
        v = math.sqrt(2.0 / r - 2.0 / R)
        return cls(r=r, R=R, Leff=r * v * math.sin(angle_m),
                   p_r=v * math.cos(angle_m), angle_m=angle_m)


def psi0(r, params):
    """Radial ground-state amplitude; 4 pi Int r^2 psi0^2 dr = 1."""
    l0 = params.l0
    r = np.asarray(r, dtype=float)
    norm = (2.0 ** l0 * (1.0 + l0) ** (-2.0 - l0)
            / math.sqrt(math.pi * gamma(2.0 + 2.0 * l0)))
    return norm * r ** l0 * np.exp(-r / (1.0 + l0))


def density_Ppr(point, params):
    """Phase-space density at a PhaseSpacePoint, per dV_p = dR dmu dnu Leff/(r R^2).

    The point must be reachable (R > r); the density depends on the momentum
    direction only through L_eff.
    """
    if point.R <= point.r:
        raise ValueError("unreachable point: need R > r")
    l0 = params.l0
    R, Leff = point.R, point.Leff
    return (params.norm_C * (Leff ** 2 * R) ** (2.0 * l0) * Leff * R ** 3
            * math.exp(-2.0 * R / (1.0 + l0)))


def momentum_marginal(r, params, n_radial=32, n_angle=32):
    """Int dV_p density_Ppr over all reachable momenta at radius r.

    Closes the loop with the configuration-space amplitude: the result
    equals psi0(r)^2.  The integrand carries algebraic endpoint factors,
    (R - r)^(1 + 2 l0) at the inner radial edge and sin(mu)^(2 + 4 l0) at
    the angle ends, so the nodes come from the matching generalized
    Laguerre and Jacobi families and the measured density is divided by
    those extracted weights.
    """
    l0 = params.l0
    alpha = 1.0 + 2.0 * l0
    sig = 2.0 + 4.0 * l0
    u, wu = roots_genlaguerre(n_radial, alpha)
    x, wx = roots_jacobi(n_angle, 0.5 * (sig - 1.0), 0.5 * (sig - 1.0))
    R = r + 0.5 * (1.0 + l0) * u
    mu = np.arccos(x)
    pre_R = math.exp(-2.0 * r / (1.0 + l0)) * (0.5 * (1.0 + l0)) ** (alpha + 1.0)
    total = 0.0
    for Ri, wi in zip(R, wu):
        w_R = (Ri - r) ** alpha * math.exp(-2.0 * Ri / (1.0 + l0))
        for mj, wj in zip(mu, wx):
            pt = PhaseSpacePoint.from_angles(r, Ri, mj)
            f = density_Ppr(pt, params) * pt.Leff / (r * Ri ** 2)
            total += wi * wj * f / (w_R * math.sin(mj) ** sig)
    return TWO_PI * pre_R * total


def dist_E_kappa(energy, kappa, params):
    """Joint density of (energy, kappa), kappa = sqrt(2 |energy|) L_eff in [0, 1].

    Normalized to 1 over energy < 0, 0 <= kappa <= 1.
    """
    if energy >= 0.0:
        raise ValueError("bound orbits need energy < 0")
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    l0 = params.l0
    e = abs(energy)
    norm = 2.0 ** (3.0 + 4.0 * l0) / ((1.0 + l0) ** (6.0 + 4.0 * l0)
                                      * gamma(3.0 + 4.0 * l0))
    return (norm * kappa ** (2.0 + 4.0 * l0) * e ** (-6.0 - 4.0 * l0)
            * math.exp(-2.0 / ((1.0 + l0) * e)))


def dist_E_Leff(energy, Leff, params):
    """Joint density of (energy, L_eff): dist_E_kappa times dkappa/dLeff."""
    if energy >= 0.0:
        raise ValueError("bound orbits need energy < 0")
    root = math.sqrt(2.0 * abs(energy))
    kappa = root * Leff
    if kappa > 1.0:
        raise ValueError("kappa = sqrt(2|energy|) L_eff exceeds 1: not a bound orbit")
    return dist_E_kappa(energy, kappa, params) * root


def conjecture_L_curve(L, params=None, n_panels=24):
    """Marginal density of L_eff at d = 0: Int dist_E_Leff over bound energies.

    The energy runs over |energy| <= 1/(2 L^2), the range with kappa <= 1.
    Vectorized over L; the curve integrates to 1 and rises like L^2 at
    small L.
    """
    if params is None:
        params = GroundStateParams(d=0.0)
    if params.d != 0.0:
        raise ValueError("the L-curve marginal is defined for d = 0")
    L = np.atleast_1d(np.asarray(L, dtype=float))
    out = np.zeros_like(L)
    l0 = params.l0
    for i, li in enumerate(L):
        if li <= 0.0:
            continue
        # u = 2/((1+l0)|E|) runs over [4 L^2/(1+l0), inf)
        u0 = 4.0 * li ** 2 / (1.0 + l0)

        def integrand(x):
            u = u0 + np.tan(x)
            jac = 1.0 / np.cos(x) ** 2
            e = 2.0 / ((1.0 + l0) * u)
            de_du = e / u
            val = np.array([
                dist_E_Leff(-ei, li, params) * dei
                for ei, dei in zip(e, de_du)])
            return val * jac

        hi = math.pi / 2.0 * (1.0 - 1e-12)
        nodes, wts = gauss_legendre_panels(0.0, hi, n_panels)
        out[i] = float(np.sum(integrand(nodes) * wts))
    return out if out.size > 1 else float(out[0])
