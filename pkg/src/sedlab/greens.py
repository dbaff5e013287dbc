"""Linear response of a perturbed bound orbit on the comoving frame.

The linearization of  r'' = -r/r^3 - d r/r^4  about an exact orbit has six
homogeneous solutions with closed forms in the eccentric anomaly.  Paired
up they give the matrix propagator Gamma(t, s) with Gamma(t,t) = 0 and
d/dt Gamma(t,t) = 1 (a matrix Wronskian).  The fixed-frame trace

    g(t, s) = tr G,   G = R(t) Gamma(t,s) R(s)^T

and its subtracted time derivative  gdot = d/dt tr G - 3  are the
building blocks of the field-gain integrands.  Everything here is
parametrized by anomalies (a, b), never raw times; the closed forms are
native in anomaly and k enters only through overall factors.

Conventions: vectors live on the comoving basis (radial, in-plane
transverse, out-of-plane).  Scaled variables rho = k^2 r, tau = k^3 t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orbits import (angle_difference, rotation_kinematics, tau_difference,
                     true_anomaly)

# below this eccentricity the 1/eps pair sums are replaced by their
# analytic circular limits (the pair differences are O(eps))
CIRCULAR_EPS = 1e-6

# |a-b| below which the d=0 subtracted integrand switches to its series;
# the degree-12 truncation is accurate to ~1e-14 relative at the guard
DIAG_GUARD = 0.1


@dataclass(frozen=True)
class HomogeneousBasis:
    """The six homogeneous solutions evaluated at one anomaly.

    h[i-1] is the 3-vector h^(i); h^(2) and h^(4) include their secular
    contributions.  secular_tau and secular_phi hold tau_a and phi_a so a
    consumer can re-split the secular parts (differences of secular terms
    at two times must be formed from stable difference formulas).
    """

    h: np.ndarray
    secular_tau: float
    secular_phi: float


@dataclass(frozen=True)
class GreensEval:
    """Propagator sample: comoving-frame matrix plus trace quantities."""

    gamma: np.ndarray   # 3x3, comoving frame
    g: float            # tr G (fixed frame)
    gdot: float         # d/dt tr G - 3
    g33: float          # out-of-plane entry of Gamma
    a: float
    b: float


def _plane_parts(params, a):
    """In-plane periodic parts of the basis and their d/da derivatives.

    Returns the 2-vectors h1, p2, h3, q4 (h2 = p2 + 3 eps tau h1 and
    h4 = q4 + c4 phi h3 carry the secular growth) and their derivatives,
    as a dict of component arrays.
    """
    eps, kappa, mu = params.eps, params.kappa, params.mu
    s, c = np.sin(a), np.cos(a)
    rho = 1.0 - eps * c
    k2 = kappa * kappa

    h1 = (eps * s / rho, kappa * mu / rho)
    p2 = (k2 * (c - eps) / rho - 2.0 * eps * rho,
          -kappa * mu * (k2 + rho) * s / rho)
    h3 = (np.zeros_like(rho), rho)
    q4 = (mu * kappa * (eps - c) / rho, mu * mu * (k2 + rho) * s / rho)

    d_h1 = (eps * (c - eps) / rho ** 2, -kappa * mu * eps * s / rho ** 2)
    d_p2 = (-kappa ** 4 * s / rho ** 2 - 2.0 * eps * eps * s,
            -kappa * mu * (k2 * (c - eps) / rho ** 2 + c))
    d_h3 = (np.zeros_like(rho), eps * s)
    d_q4 = (mu * kappa ** 3 * s / rho ** 2,
            mu * mu * (k2 * (c - eps) / rho ** 2 + c))

    return dict(rho=rho, s=s, c=c, h1=h1, p2=p2, h3=h3, q4=q4,
                d_h1=d_h1, d_p2=d_p2, d_h3=d_h3, d_q4=d_q4)


def homogeneous_solutions(params, a):
    """Evaluate the six homogeneous solutions at anomaly a.

    Valid for any d through mu = lam/kappa; at mu=1 the forms reduce to
    the pure-Coulomb basis.
    """
    P = _plane_parts(params, a)
    eps, kappa, mu = params.eps, params.kappa, params.mu
    rho = P["rho"]
    tau = a - eps * np.sin(a)
    phi = true_anomaly(a, params)
    c4 = eps * (mu * mu - 1.0) / (kappa * mu)

    h = np.zeros((6, 3))
    h[0, :2] = P["h1"]
    h[1, :2] = (P["p2"][0] + 3.0 * eps * tau * P["h1"][0],
                P["p2"][1] + 3.0 * eps * tau * P["h1"][1])
    h[2, :2] = P["h3"]
    h[3, :2] = (P["q4"][0] + c4 * phi * P["h3"][0],
                P["q4"][1] + c4 * phi * P["h3"][1])
    h[4, 2] = rho * np.sin(phi)
    h[5, 2] = (eps / (kappa * mu)) * rho * np.cos(phi)
    return HomogeneousBasis(h=h, secular_tau=tau, secular_phi=phi)


def _plane_pair_sums(params, a, b, want_derivative=False):
    """k^3 Gamma on the in-plane block (times eps), optionally with d/da.

    The secular pieces of h^(2), h^(4) enter only through the differences
    tau_ab and phi_ab, so no large-anomaly cancellation occurs.
    """
    eps, kappa, mu = params.eps, params.kappa, params.mu
    A = _plane_parts(params, a)
    B = _plane_parts(params, b)
    tau_ab = tau_difference(a, b, eps)
    phi_ab = angle_difference(a, b, params)
    c4 = eps * (mu * mu - 1.0) / (kappa * mu)

    def outer(u, v):
        return (u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])

    def comb(pa, qa, pb, qb, sec, oaa):
        # pa(a) x qb(b) - qa(a) x pb(b) - sec * oaa
        t1 = outer(pa, qb)
        t2 = outer(qa, pb)
        return tuple(t1[i] - t2[i] - sec * oaa[i] for i in range(4))

    o11 = outer(A["h1"], B["h1"])
    o33 = outer(A["h3"], B["h3"])
    pair = comb(A["h1"], A["p2"], B["h1"], B["p2"], 3.0 * eps * tau_ab, o11)
    pair3 = comb(A["h3"], A["q4"], B["h3"], B["q4"], c4 * phi_ab, o33)
    block = tuple(pair[i] + pair3[i] for i in range(4))
    if not want_derivative:
        return block, tau_ab, phi_ab

    rho_a = A["rho"]
    dphi = kappa * mu / rho_a
    o11d = outer(A["d_h1"], B["h1"])
    o33d = outer(A["d_h3"], B["h3"])
    d1 = tuple(outer(A["d_h1"], B["p2"])[i] - outer(A["d_p2"], B["h1"])[i]
               - 3.0 * eps * (rho_a * o11[i] + tau_ab * o11d[i])
               for i in range(4))
    d3 = tuple(outer(A["d_h3"], B["q4"])[i] - outer(A["d_q4"], B["h3"])[i]
               - c4 * (dphi * o33[i] + phi_ab * o33d[i])
               for i in range(4))
    dblock = tuple(d1[i] + d3[i] for i in range(4))
    return block, tau_ab, phi_ab, dblock


def _rotation(params, a, b, phi_ab):
    if abs(params.mu - 1.0) < 1e-12:
        # rational closed form, exact for d=0
        return rotation_kinematics(a, b, params.eps)
    return np.cos(phi_ab), np.sin(phi_ab)


def _circular_gamma(params, a, b):
    mu, k3 = params.mu, params.k ** 3
    t = np.asarray(a, dtype=float) - b
    g11 = np.sin(t) / k3
    g12 = 2.0 * mu * (1.0 - np.cos(t)) / k3
    g22 = (4.0 * mu * mu * np.sin(t) + (1.0 - 4.0 * mu * mu) * t) / k3
    g33 = np.sin(mu * t) / (mu * k3)
    return g11, g12, -g12, g22, g33, t


def _circular_gdot(params, a, b):
    mu = params.mu
    t = np.asarray(a, dtype=float) - b
    return ((2.0 + np.cos(t)) * np.cos(mu * t)
            + mu * (3.0 - 4.0 * mu * mu) * np.sin(t) * np.sin(mu * t)
            - mu * (1.0 - 4.0 * mu * mu) * t * np.sin(mu * t) - 3.0)


def greens_matrix(params, a, b):
    """Propagator Gamma(t, s) between anomalies b <= a, plus traces."""
    eps, kappa, mu, k3 = params.eps, params.kappa, params.mu, params.k ** 3

    if eps < CIRCULAR_EPS:
        g11, g12, g21, g22, g33, t = _circular_gamma(params, a, b)
        gamma = np.array([[g11, g12, 0.0], [g21, g22, 0.0], [0.0, 0.0, g33]])
        cosd, sind = np.cos(mu * t), np.sin(mu * t)
        g = (g11 + g22) * cosd + (g12 - g21) * sind + g33
        gdot = _circular_gdot(params, a, b)
        return GreensEval(gamma=gamma, g=g, gdot=gdot, g33=g33, a=a, b=b)

    block, tau_ab, phi_ab = _plane_pair_sums(params, a, b)
    pre = 1.0 / (eps * k3)
    rho_a = 1.0 - eps * np.cos(a)
    rho_b = 1.0 - eps * np.cos(b)
    g33 = rho_a * rho_b * np.sin(phi_ab) / (kappa * mu * k3)
    gamma = np.array([[block[0] * pre, block[1] * pre, 0.0],
                      [block[2] * pre, block[3] * pre, 0.0],
                      [0.0, 0.0, g33]])
    cosd, sind = _rotation(params, a, b, phi_ab)
    g = (gamma[0, 0] + gamma[1, 1]) * cosd + (gamma[0, 1] - gamma[1, 0]) * sind + g33
    return GreensEval(gamma=gamma, g=g, gdot=gdot_subtracted(params, a, b),
                      g33=g33, a=a, b=b)


# --- compact d=0 closed forms -------------------------------------------

def compact_AB(eps, a, b):
    """A, B and their d/da derivatives for the d=0 trace closed form.

    tr G = (A + B*tau_ab)/(rho_a rho_b k^3), A antisymmetric, B symmetric.
    """
    a = np.asarray(a, dtype=float)
    e2 = eps * eps
    A = (5.0 * np.sin(a - b) + 0.5 * np.sin(2.0 * (a - b))
         + 1.5 * e2 * (np.sin(2.0 * a) - np.sin(2.0 * b) + 2.0 * np.sin(a - b))
         - 2.0 * eps * (3.0 * (np.sin(a) - np.sin(b))
                        + np.sin(a - 2.0 * b) + np.sin(2.0 * a - b)))
    B = -3.0 * np.cos(a - b) + 3.0 * e2 * np.cos(a) * np.cos(b)
    A_a = (5.0 * np.cos(a - b) + np.cos(2.0 * (a - b))
           + 1.5 * e2 * (2.0 * np.cos(2.0 * a) + 2.0 * np.cos(a - b))
           - 2.0 * eps * (3.0 * np.cos(a)
                          + np.cos(a - 2.0 * b) + 2.0 * np.cos(2.0 * a - b)))
    B_a = 3.0 * np.sin(a - b) - 3.0 * e2 * np.sin(a) * np.cos(b)
    return A, B, A_a, B_a


def pq_terms(eps, a, b):
    """P, Q with gdot = (P + Q*tau_ab)/(rho_a rho_b) for d=0.

    P(a,a) = 0 and Q(a,a) = 3 eps sin(a)/rho_a; the combination
    P + Q*tau_ab vanishes to third order on the diagonal.
    """
    A, B, A_a, B_a = compact_AB(eps, a, b)
    rho_a = 1.0 - eps * np.cos(a)
    rho_b = 1.0 - eps * np.cos(b)
    es = eps * np.sin(a)
    P = A_a / rho_a + B - A * es / rho_a ** 2 - 3.0 * rho_a * rho_b
    Q = B_a / rho_a - B * es / rho_a ** 2
    return P, Q


def diag_series_coeffs(eps, a):
    """Taylor coefficients c4..c12 of M(a, w) = P + Q*tau at b = a - w.

    gdot(a, a-w) = M/(rho_a rho_b); the w<DIAG_GUARD series removes the
    catastrophic quartic cancellation of the direct form (d=0 only).
    """
    a = np.asarray(a, dtype=float)
    rho = 1.0 - eps * np.cos(a)
    x1 = eps * np.cos(a)
    x3 = -eps * np.sin(a) / rho
    x4 = 1.0 / rho ** 2
    x5 = eps * eps
    x6 = (eps * np.cos(a)) ** 2
    c4 = 0.25 * np.ones_like(a)
    c5 = 0.15 * x3
    c6 = -x4 * (8.0 - 13.0 * x1 - 3.0 * x5 + 8.0 * x6) / 120.0
    c7 = -(3.0 / 140.0) * x3
    c8 = x4 * (13.0 - 20.0 * x1 - 6.0 * x5 + 13.0 * x6) / 2240.0
    c9 = (3.0 / 2240.0) * x3
    c10 = -x4 * (166.0 - 251.0 * x1 - 81.0 * x5 + 166.0 * x6) / 604800.0
    c11 = -x3 / 19800.0
    c12 = x4 * (677.0 - 1018.0 * x1 - 336.0 * x5 + 677.0 * x6) / 79833600.0
    return c4, c5, c6, c7, c8, c9, c10, c11, c12


def _gdot_d0(eps, a, b):
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    scalar = a_arr.ndim == 0 and b_arr.ndim == 0
    shape = np.broadcast(a_arr, b_arr).shape
    aa = np.broadcast_to(a_arr, shape).ravel()
    bb = np.broadcast_to(b_arr, shape).ravel()
    w = aa - bb
    out = np.empty(aa.shape)

    m = np.abs(w) >= DIAG_GUARD
    if m.any():
        P, Q = pq_terms(eps, aa[m], bb[m])
        tau = tau_difference(aa[m], bb[m], eps)
        ra = 1.0 - eps * np.cos(aa[m])
        rb = 1.0 - eps * np.cos(bb[m])
        out[m] = (P + Q * tau) / (ra * rb)
    if (~m).any():
        an, wn = aa[~m], w[~m]
        cs = diag_series_coeffs(eps, an)
        M = cs[-1]
        for cn in cs[-2::-1]:
            M = M * wn + cn
        M = M * wn ** 4
        ra = 1.0 - eps * np.cos(an)
        rb = 1.0 - eps * np.cos(an - wn)
        out[~m] = M / (ra * rb)

    out = out.reshape(shape)
    return float(out) if scalar else out


def trace_g(params, a, b, method="auto"):
    """tr G between anomalies b <= a.

    method: "auto" picks the d=0 compact closed form when available,
    otherwise assembles the propagator pair sums; "compact" and
    "assembled" force a path (compact requires d=0).
    """
    if method == "auto":
        method = "compact" if params.d == 0.0 else "assembled"
    if params.eps < CIRCULAR_EPS:
        g11, g12, g21, g22, g33, t = _circular_gamma(params, a, b)
        mu = params.mu
        return (g11 + g22) * np.cos(mu * t) + (g12 - g21) * np.sin(mu * t) + g33
    if method == "compact":
        if params.d != 0.0:
            raise ValueError("compact trace form requires d=0")
        A, B, _, _ = compact_AB(params.eps, a, b)
        tau = tau_difference(a, b, params.eps)
        rho_a = 1.0 - params.eps * np.cos(a)
        rho_b = 1.0 - params.eps * np.cos(b)
        return (A + B * tau) / (rho_a * rho_b * params.k ** 3)
    if method != "assembled":
        raise ValueError("unknown method %r" % (method,))
    block, tau_ab, phi_ab = _plane_pair_sums(params, a, b)
    eps, kappa, mu, k3 = params.eps, params.kappa, params.mu, params.k ** 3
    rho_a = 1.0 - eps * np.cos(a)
    rho_b = 1.0 - eps * np.cos(b)
    g33 = rho_a * rho_b * np.sin(phi_ab) / (kappa * mu)
    cosd, sind = _rotation(params, a, b, phi_ab)
    tr = (block[0] + block[3]) / eps * cosd + (block[1] - block[2]) / eps * sind + g33
    return tr / k3


def gdot_subtracted(params, a, b):
    """d/dt tr G - 3, the subtracted integrand of the field-gain average.

    Vanishes as (t-s)^4 on the diagonal for d=0; for d != 0 the residual
    small-lag behavior is d*(t-s)^2/(2 r(t)^4) plus a cubic term whose
    orbit average vanishes.
    """
    if params.eps < CIRCULAR_EPS:
        return _circular_gdot(params, a, b)
    if params.d == 0.0:
        return _gdot_d0(params.eps, a, b)

    block, tau_ab, phi_ab, dblock = _plane_pair_sums(params, a, b,
                                                     want_derivative=True)
    eps, kappa, mu = params.eps, params.kappa, params.mu
    rho_a = 1.0 - eps * np.cos(a)
    rho_b = 1.0 - eps * np.cos(b)
    dphi = kappa * mu / rho_a
    cosd, sind = _rotation(params, a, b, phi_ab)

    t_sum = (block[0] + block[3]) / eps
    t_dif = (block[1] - block[2]) / eps
    d_sum = (dblock[0] + dblock[3]) / eps
    d_dif = (dblock[1] - dblock[2]) / eps
    g33t = rho_a * rho_b * np.sin(phi_ab) / (kappa * mu)
    d_g33 = (eps * np.sin(a) * rho_b * np.sin(phi_ab)
             + kappa * mu * rho_b * np.cos(phi_ab)) / (kappa * mu)

    dS = (d_sum * cosd - t_sum * sind * dphi
          + d_dif * sind + t_dif * cosd * dphi + d_g33)
    return dS / rho_a - 3.0


def regulator_subtraction(params, a, lag):
    """Quadratic-in-lag counterterm -d*lag^2/(2 r(a)^4) for d != 0.

    The cubic small-lag term is not subtracted pointwise: its coefficient
    is odd in sin(a), so it cancels when integrated over a full orbit.
    """
    if params.d == 0.0:
        return 0.0 * (np.asarray(a, dtype=float) * np.asarray(lag))
    r = (1.0 - params.eps * np.cos(a)) / params.k ** 2
    return -params.d * np.asarray(lag) ** 2 / (2.0 * r ** 4)
