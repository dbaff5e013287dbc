"""Seedable synthesis of the fluctuating vacuum field in the dipole approximation.

Each Cartesian component is an independent stationary Gaussian process with
autocorrelation

    C_E(tau) = (6/pi) Re (tau + i tau_c)^-4,

realized as a finite cosine sum E_i(t) = sum_n amp cos(omega_n t + phase).
The one-sided spectral density recovered from C_E by Fourier inversion is
S(omega) = omega^3 exp(-omega tau_c)/pi; mode amplitudes are Rayleigh with
mean square 2 S(omega_n) d_omega (independent Gaussian quadratures), phases
uniform, so the ensemble statistics reproduce C_E up to spectral
discretization.  No spatial dependence: the field is evaluated at the atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi

# spectral mass above 30/tau_c is < 1e-9 of the total
OMEGA_MAX_FACTOR = 30.0


def exact_autocorrelation(lag, tau_c):
    """C_E(lag) = (6/pi) Re (lag + i tau_c)^-4, per component."""
    z = np.asarray(lag, dtype=complex) + 1j * tau_c
    out = 6.0 / math.pi * (1.0 / z ** 4).real
    return float(out) if np.isscalar(lag) else out


def spectral_density(omega, tau_c):
    """One-sided per-component density S(omega) = omega^3 e^{-omega tau_c}/pi."""
    omega = np.asarray(omega, dtype=float)
    out = omega ** 3 * np.exp(-omega * tau_c) / math.pi
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FieldRealization:
    """One drawn field sample: a per-component mode table (freq, amp, phase).

    Immutable; evaluation is pure.  The window [0, duration] is the span on
    which the discrete spectrum faithfully emulates the continuum (mode
    spacing <= 2 pi / duration).
    """

    seed: int
    tau_c: float
    omega_max: float
    n_modes: int
    duration: float
    modes: tuple  # 3 arrays, each (n_modes, 3): columns freq, amp, phase

    @cached_property
    def _packed(self):
        # cos(w t + th) = cos(th) cos(w t) - sin(th) sin(w t); share the
        # frequency grid across components so evaluate() does one cos/sin pass
        freqs = self.modes[0][:, 0]
        ac = np.empty((3, self.n_modes))
        as_ = np.empty((3, self.n_modes))
        for i, tab in enumerate(self.modes):
            ac[i] = tab[:, 1] * np.cos(tab[:, 2])
            as_[i] = -tab[:, 1] * np.sin(tab[:, 2])
        return freqs, ac, as_


def build_realization(seed, tau_c, duration, n_modes, omega_max=None):
    """Draw one realization; deterministic in (seed, tau_c, duration, n_modes).

    Uniform midpoint frequency grid up to omega_max (default 30/tau_c).  The
    grid must be dense enough for the requested window: spacing <= 2pi/duration.
    """
    if tau_c <= 0.0:
        raise ValueError("tau_c must be positive")
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if omega_max is None:
        omega_max = OMEGA_MAX_FACTOR / tau_c
    d_omega = omega_max / n_modes
    if d_omega > TWO_PI / duration * (1.0 + 1e-12):
        raise ValueError(
            "insufficient mode density: spacing %.3g exceeds 2pi/duration %.3g; "
            "need n_modes >= %d" % (d_omega, TWO_PI / duration,
                                    int(math.ceil(omega_max * duration / TWO_PI))))
    freqs = (np.arange(n_modes) + 0.5) * d_omega
    sigma = np.sqrt(spectral_density(freqs, tau_c) * d_omega)
    rng = np.random.default_rng(seed)
    ab = rng.normal(size=(3, 2, n_modes)) * sigma
    modes = []
    for i in range(3):
        a, b = ab[i]
        amp = np.hypot(a, b)
        phase = np.arctan2(-b, a)
        modes.append(np.column_stack([freqs, amp, phase]))
    return FieldRealization(seed=int(seed), tau_c=float(tau_c),
                            omega_max=float(omega_max), n_modes=int(n_modes),
                            duration=float(duration), modes=tuple(modes))


def evaluate(realization, t):
    """Field 3-vector at time t inside the synthesized window."""
    t = float(t)
    if not (0.0 <= t <= realization.duration):
        raise ValueError("t=%g outside the synthesized window [0, %g]"
                         % (t, realization.duration))
    freqs, ac, as_ = realization._packed
    c = np.cos(freqs * t)
    s = np.sin(freqs * t)
    return ac @ c + as_ @ s


def evaluate_grid(realization, t0, dt, n):
    """Field on the uniform grid t0 + dt*[0..n): (n, 3) array.

    FFT synthesis when the grid is commensurate with the mode spacing,
    otherwise a blocked direct mode sum; both match evaluate() pointwise.
    """
    t_end = t0 + dt * (n - 1)
    if not (0.0 <= t0 and t_end <= realization.duration + 1e-9):
        raise ValueError("grid leaves the synthesized window")
    freqs, ac, as_ = realization._packed
    d_omega = freqs[1] - freqs[0] if len(freqs) > 1 else freqs[0] * 2.0
    ratio = TWO_PI / (d_omega * dt)
    nfft = int(round(ratio))
    bins = np.rint(freqs / d_omega - 0.5).astype(int)
    aligned = np.allclose((bins + 0.5) * d_omega, freqs, rtol=1e-9, atol=0.0)
    out = np.empty((n, 3))
    if (abs(ratio - nfft) < 1e-9 * ratio and nfft >= n and t0 == 0.0
            and aligned and bins.max(initial=0) < nfft):
        # omega = (bin+1/2) d_omega on t_j = j dt: a half-bin-shifted FFT
        coef = (ac - 1j * as_).astype(complex)  # amp * e^{i phase} per mode
        buf = np.zeros((3, nfft), dtype=complex)
        buf[:, bins] = coef
        spec = np.fft.ifft(buf, axis=1) * nfft  # positive-exponent transform
        shift = np.exp(1j * math.pi * np.arange(n) / nfft)
        out[:] = (spec[:, :n] * shift).real.T
        return out
    block = max(1, int(2e6 // max(1, len(freqs))))
    for i in range(0, n, block):
        tt = t0 + dt * np.arange(i, min(i + block, n))
        ph = np.outer(tt, freqs)
        out[i:i + len(tt)] = np.cos(ph) @ ac.T + np.sin(ph) @ as_.T
    return out


def build_band_realization(seed, tau_c, duration, omega_lo, omega_hi):
    """Realization carrying only the modes with omega_lo <= omega < omega_hi.

    The mode grid stays the global midpoint grid with spacing 2pi/duration,
    so band realizations share bin alignment with full ones and the FFT
    grid-synthesis path applies.  Statistics inside the band match the full
    field; outside the band the sample carries nothing.
    """
    if not (0.0 <= omega_lo < omega_hi):
        raise ValueError("need 0 <= omega_lo < omega_hi")
    d_omega = TWO_PI / duration
    n_lo = int(math.floor(omega_lo / d_omega))
    n_hi = max(n_lo + 1, int(math.ceil(omega_hi / d_omega)))
    freqs = (np.arange(n_lo, n_hi) + 0.5) * d_omega
    sigma = np.sqrt(spectral_density(freqs, tau_c) * d_omega)
    rng = np.random.default_rng(seed)
    ab = rng.normal(size=(3, 2, len(freqs))) * sigma
    modes = []
    for i in range(3):
        a, b = ab[i]
        modes.append(np.column_stack([freqs, np.hypot(a, b), np.arctan2(-b, a)]))
    return FieldRealization(seed=int(seed), tau_c=float(tau_c),
                            omega_max=float(freqs[-1] + 0.5 * d_omega),
                            n_modes=len(freqs), duration=float(duration),
                            modes=tuple(modes))


def realization_correlator(realization, lags):
    """Phase-averaged per-realization correlator sum_n (amp^2/2) cos(omega lag).

    Equals the infinite-window time average of E(t)E(t+lag) for this mode
    table; its ensemble mean is the discretized spectral integral of C_E.
    Averaged over the three components.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    freqs = realization.modes[0][:, 0]
    p2 = np.stack([tab[:, 1] ** 2 for tab in realization.modes]).mean(axis=0)
    return np.cos(np.outer(lags, freqs)) @ (0.5 * p2)


def autocorrelation_estimate(seeds, lags, tau_c, n_modes=1024):
    """Ensemble autocorrelation estimate: list of (lag, mean, stderr).

    Uses the per-realization phase-averaged correlator, so the only
    statistical scatter is the amplitude draw; at least 100 seeds required
    for a meaningful stderr.
    """
    seeds = list(seeds)
    if len(seeds) < 100:
        raise ValueError("need at least 100 seeds, got %d" % len(seeds))
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    omega_max = OMEGA_MAX_FACTOR / tau_c
    duration = TWO_PI * n_modes / omega_max
    if lags.max(initial=0.0) > duration:
        raise ValueError("largest lag exceeds the synthesized window")
    acc = np.zeros((len(seeds), len(lags)))
    for j, seed in enumerate(seeds):
        real = build_realization(seed, tau_c, duration, n_modes)
        acc[j] = realization_correlator(real, lags)
    mean = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / math.sqrt(len(seeds))
    return [(float(l), float(m), float(s)) for l, m, s in zip(lags, mean, stderr)]
