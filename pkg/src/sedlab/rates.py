"""Orbit-averaged energy budget of the noisy, damped bound orbit.

All rates are quoted per beta^2 (beta is the single small parameter
multiplying both the noise drive and the damping, so it factors out of
every average at working order).  Gain refers to energy absorbed from the
fluctuating field, loss to the radiated power; both are averaged over one
radial period.

The gain for a general d=0 orbit is k^9/kappa^6 (1+eps^2/2) f(kappa) with

    f(kappa) = 6 kappa^6 / (pi^2 (3-kappa^2)) *
               int_{-pi}^{pi} da int_{-inf}^{a} db rho_a rho_b gdot / tau^4

evaluated here by an exact one-period reduction: the 2*pi-periodic parts
P, Q of rho_a rho_b gdot = P + Q tau are folded against Hurwitz-zeta tail
kernels, so no truncation depth enters.  The near-parabolic scaling limit
(kappa -> 0 at fixed angular momentum) has its own two-variable integrand
h(x, y; mu) which also covers the dipole case through mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import greens
from ._gmu_series import gmu_diag_coeffs
from .orbits import OrbitParams, tau_difference
from .quadrature import gauss_legendre_panels, panel_sum, periodic_tail_kernel

TWO_PI = 2.0 * math.pi
_LD = np.longdouble


@dataclass(frozen=True)
class RateBreakdown:
    """Per-beta^2 energy rates for one orbit, plus the per-period total."""

    gain_rate: float
    loss_rate: float
    total_rate: float
    delta_per_period: float


@dataclass(frozen=True)
class EccentricLimitParams:
    """Scaled parameters of the near-parabolic limit.

    kbar = k/kappa = 1/L_eff stays finite as kappa -> 0; mu^2 = 1 + d*kbar^2.
    """

    kbar: float
    mu: float
    G_value: float
    H_value: float

    @classmethod
    def from_L_d(cls, L, d):
        if L * L <= d:
            raise ValueError("L^2 <= d: no effective barrier in the scaled limit")
        kbar = 1.0 / math.sqrt(L * L - d)
        mu = L * kbar
        return cls(kbar=kbar, mu=mu, G_value=G_of_mu(mu), H_value=H_of_mu(mu))

    @classmethod
    def from_mu_d(cls, mu, d):
        kbar = _kbar_from_mu_d(mu, d)
        return cls(kbar=kbar, mu=mu, G_value=G_of_mu(mu), H_value=H_of_mu(mu))


def _kbar_from_mu_d(mu, d):
    if mu == 1.0:
        if d != 0.0:
            raise ValueError("mu=1 requires d=0")
        raise ValueError("mu=1, d=0 leaves kbar free; supply kbar directly")
    k2 = (mu * mu - 1.0) / d if d != 0.0 else None
    if k2 is None or k2 <= 0.0:
        raise ValueError("inconsistent (mu, d): kbar^2 = (mu^2-1)/d must be positive")
    return math.sqrt(k2)


# --- d=0 gain integral ----------------------------------------------------

def _inner_period_reduced(a, eps, panels_per_period, guard):
    """int_{-inf}^{a} rho_a rho_b gdot / tau^4 db, exactly reduced to one period."""
    # direct part: b in [a-2pi, a-guard]
    b, wb = gauss_legendre_panels(a - TWO_PI, a - guard, 2 * panels_per_period)
    P, Q = greens.pq_terms(eps, a, b)
    t = tau_difference(a, b, eps)
    F = (P + Q * t) / t ** 4
    val = panel_sum(F + P * periodic_tail_kernel(4, t) + Q * periodic_tail_kernel(3, t), wb)

    # guard strip: the quartic-cancelling combination from its series,
    # the tail kernels directly (they are regular on the diagonal)
    w, ww = gauss_legendre_panels(0.0, guard, max(2, panels_per_period // 4))
    bg = a - w
    t = tau_difference(a, bg, eps)
    cs = greens.diag_series_coeffs(eps, np.full_like(w, a))
    M = cs[-1]
    for cn in cs[-2::-1]:
        M = M * w + cn
    val += panel_sum(M * w ** 4 / t ** 4, ww)
    P, Q = greens.pq_terms(eps, a, bg)
    val += panel_sum(P * periodic_tail_kernel(4, t) + Q * periodic_tail_kernel(3, t), ww)
    return val


def field_gain_f(kappa, panels_per_period=12, guard=None):
    """Shape function f(kappa) of the averaged field gain, f(1) = 1/2.

    kappa in (0, 1].  panels_per_period=12 gives ~1e-12 stability; the
    diagonal guard must stay inside the validity of the stored series.
    """
    if not (0.0 < kappa <= 1.0):
        raise ValueError("kappa must lie in (0, 1]")
    if guard is None:
        guard = greens.DIAG_GUARD
    if not (0.0 < guard <= greens.DIAG_GUARD):
        raise ValueError("guard must lie in (0, %g]" % greens.DIAG_GUARD)
    eps = math.sqrt(max(0.0, 1.0 - kappa * kappa))
    aa, wa = gauss_legendre_panels(-math.pi, math.pi, 2 * panels_per_period)
    tot = math.fsum(w * _inner_period_reduced(a, eps, panels_per_period, guard)
                    for a, w in zip(aa, wa))
    return 6.0 * kappa ** 6 / (math.pi ** 2 * (3.0 - kappa ** 2)) * tot


def f0_closed_form():
    """Limit value f(0) = 16/(5 pi sqrt(3))."""
    return 16.0 / (5.0 * math.pi * math.sqrt(3.0))


def f0_scaling_integral(n_panels=40):
    """f(0) from the scaled two-variable integral (independent route).

    Both axes are mapped to finite intervals by a tangent substitution;
    the integrand decays rationally, no tail handling needed.
    """
    cut = 0.5 * math.pi * (1.0 - 1e-13)
    th, wth = gauss_legendre_panels(-cut, cut, n_panels)
    u = np.tan(th)
    tot = 0.0
    for uv, w in zip(u, wth):
        ps, wps = gauss_legendre_panels(-cut, math.atan(uv), n_panels)
        v = np.tan(ps)
        num = 5.0 + 3.0 * uv ** 2 + 8.0 * uv * v - v ** 2 + 4.0 * uv ** 3 * v + uv ** 2 * v ** 2
        den = (1.0 + uv ** 2) ** 2 * (3.0 + uv ** 2 + uv * v + v ** 2) ** 4
        tot += w * (1.0 + uv ** 2) * panel_sum(num / den * (1.0 + v ** 2), wps)
    return 648.0 / (5.0 * math.pi ** 2) * tot


# --- radiated power -------------------------------------------------------

def radiative_loss(params: OrbitParams):
    """Orbit-averaged radiated power per beta^2 (always <= 0).

    Equals -< r^-4 + 2 d r^-5 + d^2 r^-6 > in closed form.
    """
    k, kappa, d = params.k, params.kappa, params.d
    k2 = kappa * kappa
    val = (3.0 - k2) / (2.0 * kappa ** 5)
    val += d * k * k * (5.0 - 3.0 * k2) / kappa ** 7
    val += d * d * k ** 4 * (35.0 - 30.0 * k2 + 3.0 * k2 * k2) / (8.0 * kappa ** 9)
    return -k ** 8 * val


# --- combined rates -------------------------------------------------------

def _circular_gain_bracket(lam):
    # spectral weights of the three response lines of a circular orbit
    if lam <= 1.0:
        return (1.0 - 6.0 * lam ** 2 + 5.0 * lam ** 3 + 9.0 * lam ** 4
                - 12.0 * lam ** 5 + 4.0 * lam ** 6)
    return lam ** 3


def circular_total_product_form(k, d):
    """Factorized circular total rate for d > 0, per beta^2.

    Algebraically identical to gain + loss; the factor (1-4d)k^2 - 4
    makes the stability boundary explicit.
    """
    lam2 = 1.0 + d * k * k
    return (0.5 * k ** 8 * lam2 ** 1.5
            * ((1.0 - 4.0 * d) * k * k - 4.0) / (k + 2.0 * math.sqrt(lam2)))


def total_rate(params: OrbitParams):
    """Gain, loss, total and per-period energy change, per beta^2.

    Closed results exist for any eccentricity at d=0 and for circular
    orbits at any d; the eccentric d != 0 regime is only meaningful in
    the near-parabolic scaling limit (see per_period_delta_dipole).
    """
    k = params.k
    if params.d == 0.0:
        kappa = params.kappa
        gain = (k ** 9 / kappa ** 6) * (1.0 + 0.5 * params.eps ** 2) * field_gain_f(kappa)
    elif params.eps < greens.CIRCULAR_EPS:
        gain = 0.5 * k ** 9 * _circular_gain_bracket(params.lam)
    else:
        raise ValueError("no closed total rate for eccentric d != 0 orbits; "
                         "use the scaled-limit per-period forms")
    loss = radiative_loss(params)
    tot = gain + loss
    return RateBreakdown(gain_rate=gain, loss_rate=loss, total_rate=tot,
                         delta_per_period=tot * TWO_PI / k ** 3)


def per_period_delta_d0(L):
    """Per-period energy change 3 pi (f(0) - L)/L^6 in the k->0 limit.

    Positive (runaway toward ionisation) for L below f(0).
    """
    if L <= 0.0:
        raise ValueError("L must be positive")
    return 3.0 * math.pi * (f0_closed_form() - L) / L ** 6


# --- scaled near-parabolic limit with dipole ------------------------------

def dipole_h_integrand(x, y, mu):
    """Two-variable gain integrand h(x, y; mu) of the scaling limit.

    The angle 2*mu*(arctan x - arctan y) uses the continuous branch (the
    difference, not the principal single-arctan form): the orbit angle
    accumulates monotonically.  Evaluated in extended precision; the
    regulator term removes the simple pole left by the main part at the
    u = x - y -> 0 and u -> -1 points after the quartic cancellation.
    """
    x = np.asarray(x, dtype=_LD)
    y = np.asarray(y, dtype=_LD)
    mu = _LD(mu)
    mu2 = mu * mu
    atd = np.arctan(x) - np.arctan(y)
    phi = 2.0 * mu * atd
    cph = np.cos(phi)
    sph_over_mu = np.sin(phi) / mu if mu != 0 else 2.0 * atd
    x2 = x * x
    y2 = y * y
    opx2 = 1.0 + x2
    opy2 = 1.0 + y2

    hc = (15 + y2 ** 3 * (2 * mu2 + x2 - 1)
          + 5 * y2 ** 2 * (x2 * (-2 * mu2 * (x2 + 2) + 2 * x2 + 5) + 1)
          + 10 * mu2 * x * opx2 ** 2 * y * y2
          + 5 * y2 * (x2 * (-6 * mu2 * (x2 + 2) + 4 * x2 + 11) + 1)
          + 2 * x * y * (mu2 * (19 * x2 ** 2 + 30 * x2 - 5)
                         + 2 * (x2 ** 3 + 4 * x2 ** 2 + 5 * x2 + 10))
          + 5 * x2 * (-2 * mu2 * (x2 ** 2 + x2 - 1) + 2 * x2 + 3)
          - 10 * (mu2 - 1) * x * opx2 ** 2 * opy2 ** 2 * atd)

    hs = (4 * mu2 * x ** 7 + 10 * mu2 * x ** 6 * y
          + x ** 5 * (8 * mu2 ** 2 + mu2 * (26 - 10 * y2) + 5 * opy2 ** 2)
          + 10 * x ** 3 * (-2 * mu2 * (y2 - 2) + opy2 ** 2 + mu2 ** 2 * opy2 ** 2)
          - 10 * mu2 * x2 ** 2 * y * (mu2 * (3 + y2) - 1)
          - 2 * mu2 * x2 * y * (2 * y2 ** 2 - 5 + 10 * mu2 * (3 + y2))
          + 5 * x * (opy2 ** 2 - 2 * mu2 * (2 * y2 ** 2 + 5 * y2 - 3)
                     + 2 * mu2 ** 2 * (3 * y2 ** 2 + 6 * y2 - 1))
          - 2 * mu2 * y * (15 - 2 * y2 ** 2 + mu2 * (4 * y2 ** 2 + 5 * y2 - 5))
          + 10 * mu2 * (mu2 - 1) * opx2 ** 2 * opy2 ** 2 * atd)

    h0 = (5 * opy2 / (9 * opx2)
          * (-2 * mu2 * x2 ** 3 - 12 * mu2 * x2 ** 2
             + 4 * (mu2 - 1) * x ** 3 * y * (y2 + 3)
             - 18 * mu2 * x2 + 12 * (mu2 - 1) * x * y * (y2 + 3)
             - 2 * (mu2 - 1) * y2 * (y2 + 3) ** 2
             + 2 * x2 ** 3 + 12 * x2 ** 2 + 18 * x2 - 27 * opx2 ** 4))

    kden = _LD(5) / 324 * opx2 ** 2 * (3 * x + x ** 3 - 3 * y - y ** 3) ** 4
    u = x - y
    hreg = 64 * (1 - mu2) * x / (3 * opx2 ** 5 * u * (u + 1.0))
    return (hc * cph + hs * sph_over_mu + h0) / kden + hreg


@lru_cache(maxsize=512)
def _G_cached(mu, refine, eta0):
    eta = min(eta0, 0.25 / max(mu, 1.0))
    panels_per_pi = max(10, int(math.ceil(3.0 * mu)))
    n_out = int(math.ceil(panels_per_pi * refine))
    cut = 0.5 * math.pi * (1.0 - 1e-14)
    th, wth = gauss_legendre_panels(-cut, cut, n_out)
    xs = np.tan(th)

    total = _LD(0)
    for xv, wx in zip(xs, wth):
        psi_g = math.atan(xv - eta)
        span = psi_g + 0.5 * math.pi
        n_in = max(8, int(math.ceil(panels_per_pi * refine * span / math.pi)))
        ps, wps = gauss_legendre_panels(-cut, psi_g, n_in)
        ys = np.tan(ps)
        vals = dipole_h_integrand(np.full_like(ys, xv), ys, mu)
        inner = np.dot(vals * (1.0 + ys ** 2), wps.astype(_LD))
        # guard strip next to the diagonal from the stored series
        gg = gmu_diag_coeffs(_LD(xv), _LD(mu))
        strip = sum(_LD(gn) * _LD(eta) ** (n + 1) / (n + 1)
                    for n, gn in enumerate(gg))
        total += _LD(wx) * (1.0 + _LD(xv) ** 2) * (inner + strip)
    return float(3.0 / math.pi ** 2 * total)


def G_of_mu(mu, refine=1.0):
    """Scaled-limit per-period gain shape G(mu); G(1) = (3/2) f(0).

    Grows like (35/16) mu^3 - (15/8) mu for large mu.  refine multiplies
    the panel counts (refine=1 is accurate to ~1e-9 over mu <= 10).
    """
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    return _G_cached(float(mu), float(refine), 0.02)


def H_of_mu(mu, refine=1.0):
    """Gain-to-loss shape H(mu) = 8 sqrt|mu^2-1| G(mu)/(7 - 30 mu^2 + 35 mu^4).

    H(1) = 0; the sign of H(mu) - sqrt|d| decides per-period growth.
    """
    if mu == 1.0:
        return 0.0
    return (8.0 * math.sqrt(abs(mu * mu - 1.0)) * G_of_mu(mu, refine)
            / (7.0 - 30.0 * mu * mu + 35.0 * mu ** 4))


def per_period_delta_dipole(mu, d, kbar=None, route="gain_loss"):
    """Per-period energy change in the scaled limit, per beta^2.

    route="gain_loss":  2 pi [kbar^6 G(mu) - kbar^5 (12 + 40 d kbar^2
    + 35 d^2 kbar^4)/8];  route="stability": the algebraically equal form
    2 pi |mu^2-1|^{5/2} (7 - 30 mu^2 + 35 mu^4)/(8 |d|^3) [H(mu)-sqrt|d|].
    A consistent (mu, d) pair fixes kbar except at mu=1, d=0 where kbar
    must be supplied.
    """
    if mu == 1.0 and d == 0.0:
        if kbar is None:
            raise ValueError("mu=1, d=0 leaves kbar free; supply kbar")
    else:
        implied = _kbar_from_mu_d(mu, d)
        if kbar is None:
            kbar = implied
        elif abs(kbar - implied) > 1e-9 * implied:
            raise ValueError("kbar inconsistent with (mu, d)")

    if route == "gain_loss":
        dk2 = d * kbar * kbar
        loss_poly = 12.0 + 40.0 * dk2 + 35.0 * dk2 * dk2
        return TWO_PI * (kbar ** 6 * G_of_mu(mu) - kbar ** 5 * loss_poly / 8.0)
    if route == "stability":
        if d == 0.0:
            # mu=1 limit of the stability form: fall back to gain/loss split
            return TWO_PI * (kbar ** 6 * G_of_mu(1.0) - kbar ** 5 * 1.5)
        pre = (abs(mu * mu - 1.0) ** 2.5 * (7.0 - 30.0 * mu * mu + 35.0 * mu ** 4)
               / (8.0 * abs(d) ** 3))
        return TWO_PI * pre * (H_of_mu(mu) - math.sqrt(abs(d)))
    raise ValueError("unknown route %r" % (route,))


def critical_dipole_strength(grid_size=64, refine=0.5):
    """Most negative d with a growth window: -[sup H on mu in [0,1]]^2.

    A coarse grid locates the maximizer, golden-section refines if it is
    interior, and the supremum itself is re-evaluated at full accuracy.
    H peaks inside the interval (near mu = 0.59, where the loss polynomial
    7 - 30 mu^2 + 35 mu^4 dips), not at the mu = 0 endpoint, so the result
    is noticeably more negative than -H(0)^2.
    """
    mus = np.linspace(0.0, 1.0, grid_size)
    vals = [H_of_mu(m, refine=refine) for m in mus]
    i = int(np.argmax(vals))
    if i == 0 or i == grid_size - 1:
        best = mus[i]
    else:
        lo, hi = mus[i - 1], mus[i + 1]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = hi - invphi * (hi - lo)
        dd = lo + invphi * (hi - lo)
        fc, fd = H_of_mu(c, refine=refine), H_of_mu(dd, refine=refine)
        while hi - lo > 1e-4:
            if fc > fd:
                hi, dd, fd = dd, c, fc
                c = hi - invphi * (hi - lo)
                fc = H_of_mu(c, refine=refine)
            else:
                lo, c, fc = c, dd, fd
                dd = lo + invphi * (hi - lo)
                fd = H_of_mu(dd, refine=refine)
        best = 0.5 * (lo + hi)
    h_sup = H_of_mu(best, refine=2.0)
    return -h_sup * h_sup
