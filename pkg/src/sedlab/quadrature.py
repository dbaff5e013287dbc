"""Panel quadrature helpers for the rate integrals.

Two kinds of improper integral occur: semi-infinite inner integrals whose
integrand decays like (a-b)^-4, and integrands with a removable quartic
singularity on the diagonal a=b that is tamed analytically by stored
short-lag series.  The generic engine here handles the first kind with a
truncation depth plus an analytic quartic tail correction; the exact
one-period reduction used by the production rate integrals (periodic
numerators against Hurwitz-zeta kernels) is also provided.

Panel sums are accumulated with exact compensated summation (math.fsum),
so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _si
from scipy.special import zeta as _hurwitz_zeta

TWO_PI = 2.0 * math.pi

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and cut parameters for the integration engine.

    tail_cut is the inner-variable truncation depth; beyond it the
    integrand is replaced by its fitted quartic tail.  diag_guard is the
    |a-b| below which direct evaluation must be replaced by series forms
    (enforced by the integrand supplier, not here).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tail_cut: float = 60.0
    diag_guard: float = 0.1
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.tail_cut <= 0.0 or self.max_subdivisions < 10:
            raise ValueError("invalid tail_cut/max_subdivisions")


DEFAULT_SPEC = QuadratureSpec()


def gauss_legendre_panels(lo, hi, n_panels, n_nodes=None):
    """Composite Gauss-Legendre rule: flattened (nodes, weights)."""
    if n_nodes is None:
        x, w = _GL_NODES, _GL_WEIGHTS
    else:
        x, w = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * np.broadcast_to(w, (n_panels, w.size))).ravel()
    return nodes, weights


def panel_sum(values, weights):
    """Order-independent weighted sum (exact compensated accumulation)."""
    return math.fsum(np.asarray(values, dtype=float) * np.asarray(weights, dtype=float))


def periodic_tail_kernel(s, tau):
    """Sum of (tau + 2*pi*n)^-s over n >= 1, via the Hurwitz zeta function.

    Folding a (t-s)^-s tail of a 2*pi-periodic numerator into one period
    replaces 1/tau^s by this kernel added to the direct term.
    """
    q = 1.0 + np.asarray(tau, dtype=float) / TWO_PI
    return _hurwitz_zeta(s, q) / TWO_PI ** s


def integrate_1d(f, lo, hi, spec=DEFAULT_SPEC):
    """Adaptive 1d integral of f over (lo, hi); returns (value, error).

    Endpoints may be infinite.  If the subdivision limit is reached the
    partial value is returned and a QuadratureWarning is issued.
    """
    out = _si.quad(f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                   limit=spec.max_subdivisions, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3:
        warnings.warn("subdivision limit reached: %s" % out[3],
                      QuadratureWarning, stacklevel=2)
    return value, err


def integrate_double_tail(f, outer, spec=DEFAULT_SPEC, diag_series=None,
                          n_outer_panels=24, n_inner_panels=48):
    """Integrate f(x, y) over x in outer, y in (-inf, x].

    The inner integral is truncated at depth spec.tail_cut and closed with
    an analytic quartic tail: C(x)/(c+x-y)^4 is fitted to the samples at
    depths tail_cut/2 and tail_cut, so f must decay like a (possibly
    shifted) quartic.  A measured decay slower than quartic between those
    depths raises a QuadratureWarning.  diag_series(x, w), when given, supplies the
    integrand for the strip 0 < w = x-y < spec.diag_guard where direct
    evaluation loses precision.
    """
    lo, hi = outer
    xs, wxs = gauss_legendre_panels(lo, hi, n_outer_panels)
    guard = spec.diag_guard if diag_series is not None else 0.0
    T = spec.tail_cut

    inner_vals = np.empty_like(xs)
    worst_ratio = None
    for i, x in enumerate(xs):
        ys, wys = gauss_legendre_panels(x - T, x - guard, n_inner_panels)
        vals = f(x, ys)
        total = panel_sum(vals, wys)
        if guard > 0.0:
            ws, wws = gauss_legendre_panels(0.0, guard, 4)
            total += panel_sum(diag_series(x, ws), wws)
        # quartic tail closure: the two samples fix the shift c in
        # C/(c+u)^4, whose remaining tail is f_T*(c+T)/3; c=0 recovers the
        # plain u^-4 fit and is the fallback for non-quartic sample pairs
        f_T = float(f(x, np.array([x - T]))[0])
        f_T2 = float(f(x, np.array([x - T / 2.0]))[0])
        c = 0.0
        if f_T != 0.0 and f_T2 != 0.0:
            ratio = f_T2 / f_T
            if worst_ratio is None or abs(ratio) < abs(worst_ratio):
                worst_ratio = ratio
            if ratio > 1.0:
                r = ratio ** 0.25
                c = T * (1.0 - 0.5 * r) / (r - 1.0)
                if not -0.25 * T < c < 10.0 * T:
                    c = 0.0
        total += f_T * (c + T) / 3.0
        inner_vals[i] = total

    if worst_ratio is not None and abs(worst_ratio) < 8.0:
        warnings.warn("inner decay slower than quartic at the tail cut "
                      "(ratio %.3g, expected ~16)" % worst_ratio,
                      QuadratureWarning, stacklevel=2)

    value = panel_sum(inner_vals, wxs)
    # tail-closure uncertainty dominates the panel error for smooth f
    tail_part = panel_sum([abs(float(f(x, np.array([x - T]))[0])) * T / 3.0
                           for x in xs], np.abs(wxs))
    err = max(spec.abs_tol, tail_part * 4.0 / T)
    return value, err
