"""Exact bound-orbit kinematics for the potential V(r) = -1/r - d/(2 r^2).

All quantities are in scaled (Bohr-like) units.  A bound orbit is labelled
by an energy scale k (energy E = -k^2/2), an eccentricity eps in [0,1),
and the dipole coefficient d.  Derived quantities:

    kappa = sqrt(1 - eps^2)
    lam   = k*L          (L = scalar angular momentum)
    delta = d*k^2
    lam^2 = kappa^2 + delta
    mu    = lam/kappa = L/sqrt(L^2 - d)

The radial motion is parametrized by the eccentric anomaly a:

    k^2 r = rho_a = 1 - eps*cos(a),   k^3 t = tau_a = a - eps*sin(a)

and the accumulated (unwound) angle is

    phi_a = 2*mu*[arctan(sqrt((1+eps)/(1-eps)) tan(a/2)) + pi*floor((pi+a)/2pi)]

which advances by 2*pi*mu per radial period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitParams:
    """Consistent parameter set for one bound orbit.

    Attributes
    ----------
    k : energy scale, E = -k^2/2, k > 0
    eps : eccentricity in [0, 1)
    kappa : sqrt(1 - eps^2)
    L : scalar angular momentum (>= 0)
    lam : k*L
    d : dipole coefficient
    delta : d*k^2
    mu : lam/kappa, the angular winding per radial period divided by 2*pi
    chi : orientation angle of the orbit in its plane (radians)
    """

    k: float
    eps: float
    kappa: float
    L: float
    lam: float
    d: float
    delta: float
    mu: float
    chi: float = 0.0

    def __post_init__(self):
        if not (self.k > 0.0):
            raise ValueError("k must be positive")
        if not (0.0 <= self.eps < 1.0):
            raise ValueError("eccentricity must lie in [0, 1); the radial "
                             "eps=1 orbit is degenerate and not supported")
        if abs(self.kappa ** 2 + self.eps ** 2 - 1.0) > 1e-12:
            raise ValueError("kappa inconsistent with eps")
        if abs(self.lam ** 2 - (self.kappa ** 2 + self.delta)) > 1e-10:
            raise ValueError("lam^2 = kappa^2 + d*k^2 violated")
        if self.d > 0.0 and self.L ** 2 <= self.d:
            raise ValueError("attractive dipole requires L^2 > d "
                             "(spiral regime is out of scope)")
        if self.d < 0.0 and math.sqrt(abs(self.delta)) > self.kappa + 1e-12:
            raise ValueError("repulsive dipole requires sqrt|d*k^2| <= kappa")

    @classmethod
    def from_k_eps(cls, k, eps, d=0.0, chi=0.0):
        """Build from (k, eps, d); L follows from lam^2 = kappa^2 + d*k^2."""
        kappa = math.sqrt(max(0.0, 1.0 - eps * eps))
        lam2 = kappa * kappa + d * k * k
        if lam2 < 0.0:
            raise ValueError("lam^2 < 0: no real angular momentum for these "
                             "(k, eps, d); orbit would spiral")
        lam = math.sqrt(lam2)
        mu = lam / kappa if kappa > 0 else float("inf")
        return cls(k=k, eps=eps, kappa=kappa, L=lam / k, lam=lam,
                   d=d, delta=d * k * k, mu=mu, chi=chi)

    @classmethod
    def from_k_L(cls, k, L, d=0.0, chi=0.0):
        """Build from (k, L, d); eccentricity follows."""
        lam = k * L
        delta = d * k * k
        kappa2 = lam * lam - delta
        if kappa2 <= 0.0:
            raise ValueError("L^2 <= d: spiral regime is out of scope")
        if kappa2 > 1.0 + 1e-12:
            raise ValueError("no bound orbit: kappa^2 = k^2(L^2-d) exceeds 1")
        kappa = math.sqrt(min(kappa2, 1.0))
        eps = math.sqrt(max(0.0, 1.0 - kappa2))
        return cls(k=k, eps=eps, kappa=kappa, L=L, lam=lam,
                   d=d, delta=delta, mu=lam / kappa, chi=chi)

    @property
    def period(self):
        return TWO_PI / self.k ** 3

    @property
    def energy(self):
        return -0.5 * self.k ** 2

    @property
    def L_eff(self):
        # sqrt(L^2 - d) = kappa/k: effective angular momentum of the
        # combined centrifugal + dipole barrier
        return self.kappa / self.k


@dataclass(frozen=True)
class AnomalyState:
    """Orbit state at one eccentric anomaly."""

    a: float
    tau: float       # tau_a = a - eps*sin(a), scaled time k^3 t
    rho: float       # rho_a = 1 - eps*cos(a), scaled radius k^2 r
    phi: float       # accumulated angle, continuous in a
    r: float
    rdot: float
    t: float


def solve_eccentric_anomaly(tau, eps):
    """Invert tau = a - eps*sin(a) for the eccentric anomaly a.

    Safeguarded Newton iteration (bisection fallback) started from a=tau,
    after reducing tau by full periods.  Residual |a - eps sin a - tau|
    <= 1e-12.  Accepts scalars or arrays.
    """
    if not (0.0 <= eps < 1.0):
        raise ValueError("eps must lie in [0, 1)")
    tau_arr = np.asarray(tau, dtype=float)
    scalar = tau_arr.ndim == 0
    tau_arr = np.atleast_1d(tau_arr)

    n = np.floor((tau_arr + math.pi) / TWO_PI)
    tr = tau_arr - TWO_PI * n  # in [-pi, pi)

    a = tr.copy()
    lo = np.full_like(tr, -math.pi)
    hi = np.full_like(tr, math.pi)
    for _ in range(100):
        g = a - eps * np.sin(a) - tr
        done = np.abs(g) <= 1e-12
        if done.all():
            break
        # maintain the bracket, then Newton with clamping
        neg = g < 0
        lo = np.where(neg & ~done, a, lo)
        hi = np.where(~neg & ~done, a, hi)
        step = g / (1.0 - eps * np.cos(a))
        trial = a - step
        bad = (trial <= lo) | (trial >= hi)
        trial = np.where(bad, 0.5 * (lo + hi), trial)
        a = np.where(done, a, trial)
    else:
        raise RuntimeError("eccentric-anomaly iteration failed to converge")

    out = a + TWO_PI * n
    return float(out[0]) if scalar else out


def tau_difference(a, b, eps):
    """tau_a - tau_b evaluated without large-argument cancellation."""
    return (np.asarray(a) - b) - 2.0 * eps * np.cos(0.5 * (np.asarray(a) + b)) \
        * np.sin(0.5 * (np.asarray(a) - b))


def _reduce(a):
    n = np.floor((np.asarray(a, dtype=float) + math.pi) / TWO_PI)
    return a - TWO_PI * n, n


def true_anomaly(a, params):
    """Accumulated angle phi_a, continuous and unwound in a.

    Uses the explicit floor construction (not incremental accumulation),
    so the result is independent of evaluation order.
    """
    eps, kappa, mu = params.eps, params.kappa, params.mu
    ar, n = _reduce(a)
    phi = 2.0 * mu * np.arctan2((1.0 + eps) * np.sin(0.5 * ar),
                                kappa * np.cos(0.5 * ar))
    return phi + TWO_PI * mu * n


def _angle_periodic_part(a, params):
    # psi_a = phi_a - mu*tau_a, a pure 2*pi-periodic function of a
    eps, kappa, mu = params.eps, params.kappa, params.mu
    ar, _ = _reduce(a)
    phi_r = 2.0 * mu * np.arctan2((1.0 + eps) * np.sin(0.5 * ar),
                                  kappa * np.cos(0.5 * ar))
    return phi_r - mu * (ar - eps * np.sin(ar))


def angle_difference(a, b, params):
    """phi_a - phi_b through the secular/periodic split.

    Equals true_anomaly(a) - true_anomaly(b) but stays accurate when a and
    b are many revolutions out: the secular part mu*(tau_a - tau_b) is
    formed from the stable difference, the rest is periodic.
    """
    sec = params.mu * tau_difference(a, b, params.eps)
    return sec + _angle_periodic_part(a, params) - _angle_periodic_part(b, params)


def rotation_kinematics(a, b, eps, mu=1.0):
    """cos and sin of phi_a - phi_b in closed form; valid only for mu=1.

    For d=0 (mu=1) the rotation between two anomalies has rational
    closed forms in (a, b, eps).  They do not hold for mu != 1.
    """
    if abs(mu - 1.0) > 1e-12:
        raise ValueError("closed-form rotation kinematics requires mu=1 (d=0)")
    a = np.asarray(a, dtype=float)
    kappa = math.sqrt(1.0 - eps * eps)
    rho_a = 1.0 - eps * np.cos(a)
    rho_b = 1.0 - eps * np.cos(b)
    cosd = (np.cos(a - b) - eps * (np.cos(a) + np.cos(b))
            + eps * eps * (1.0 - np.sin(a) * np.sin(b))) / (rho_a * rho_b)
    sind = kappa * (np.sin(a - b) - eps * (np.sin(a) - np.sin(b))) / (rho_a * rho_b)
    return cosd, sind


def orbit_state(params, a):
    """Full kinematic state at eccentric anomaly a."""
    eps, k = params.eps, params.k
    rho = 1.0 - eps * np.cos(a)
    tau = a - eps * np.sin(a)
    return AnomalyState(
        a=a, tau=tau, rho=rho,
        phi=true_anomaly(a, params),
        r=rho / k ** 2,
        rdot=k * eps * np.sin(a) / rho,
        t=tau / k ** 3,
    )


def cartesian_state(params, a):
    """Position and velocity 3-vectors in the orbit plane (z = 0).

    The in-plane polar angle is chi + phi_a; radial and transverse
    velocity components are rdot and L/r.
    """
    st = orbit_state(params, a)
    ang = params.chi + st.phi
    c, s = np.cos(ang), np.sin(ang)
    pos = np.array([st.r * c, st.r * s, 0.0])
    vt = params.L / st.r
    vel = np.array([st.rdot * c - vt * s, st.rdot * s + vt * c, 0.0])
    return pos, vel
