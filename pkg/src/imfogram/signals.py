"""Synthetic test signals: chirp compositions, a noisy triple, a driven
Duffing oscillator, piecewise-stationary multisines, and two-tone sums.

Everything here is deterministic given its parameters (and seed, where one
applies), which the file-level golden tests rely on.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .spectral import Signal

__all__ = [
    "gen_chirp_pair",
    "gen_noisy_triple",
    "gen_duffing_velocity",
    "gen_piecewise_multisine",
    "gen_two_tone",
]

GENERATOR_KINDS = ("chirp-pair", "noisy-triple", "duffing", "multi-sine-piecewise", "two-tone")


def gen_chirp_pair(n: int = 2000, sample_rate: float = 2000.0) -> Signal:
    """Sum of a fast linear chirp and a slow cubic-phase chirp on t in [0, 1].

    Component one sweeps 120 to 600 Hz, component two roughly 12 to 50 Hz.
    """
    t = np.arange(n) / sample_rate
    s1 = np.cos(480.0 * np.pi * t**2 + 240.0 * np.pi * t)
    s2 = np.cos(np.pi * t**3 + 36.0 * np.pi * t**2 + 24.0 * np.pi * t + 2.0 * np.pi)
    return Signal(s1 + s2, sample_rate)


def gen_noisy_triple(n: int = 2000, sample_rate: float = 2000.0, seed: int = 0) -> Signal:
    """Two crossing chirps plus a 200 Hz carrier with white Gaussian amplitude.

    The carrier amplitude is drawn i.i.d. per sample from N(0, 0.18^2);
    higher sample moments vary per realization.
    """
    t = np.arange(n) / sample_rate
    s1 = np.cos(50.0 * np.pi * t**2 + 100.0 * np.pi * t)
    s2 = np.cos(-10.0 * np.pi * t**2 + 40.0 * np.pi * t)
    amp = np.random.default_rng(seed).normal(0.0, 0.18, n)
    s3 = amp * np.cos(400.0 * np.pi * t)
    return Signal(s1 + s2 + s3, sample_rate)


def _duffing_accel(t, x, v, alpha, beta, gamma, omega):
    return -alpha * x - beta * x**3 + gamma * math.cos(omega * t)


def gen_duffing_velocity(
    n: int,
    sample_rate: float,
    alpha: float = -1.0,
    beta: float = 1.0,
    gamma: float = 0.1,
    omega: float = 1.0,
    x0: float = 1.0,
    v0: float = 0.0,
) -> Signal:
    """Velocity of x'' + alpha x + beta x^3 = gamma cos(omega t).

    Integrated with fixed-step classical RK4 at step 1/sample_rate from the
    initial state (x0, v0); the returned samples are v(t_j) for the first n
    grid points.

    Parameters
    ----------
    n, sample_rate
        Sample count and rate; the time span is n / sample_rate.
    alpha, beta
        Linear and cubic stiffness.
    gamma, omega
        Amplitude and angular frequency of the cosine forcing.
    x0, v0
        Initial position and velocity.
    """
    for name, val in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("omega", omega),
                      ("x0", x0), ("v0", v0)):
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val}")
    dt = 1.0 / sample_rate
    x, v = float(x0), float(v0)
    out = np.empty(n)
    out[0] = v
    t = 0.0
    for j in range(1, n):
        k1x = v
        k1v = _duffing_accel(t, x, v, alpha, beta, gamma, omega)
        k2x = v + 0.5 * dt * k1v
        k2v = _duffing_accel(t + 0.5 * dt, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v,
                             alpha, beta, gamma, omega)
        k3x = v + 0.5 * dt * k2v
        k3v = _duffing_accel(t + 0.5 * dt, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v,
                             alpha, beta, gamma, omega)
        k4x = v + dt * k3v
        k4v = _duffing_accel(t + dt, x + dt * k3x, v + dt * k3v,
                             alpha, beta, gamma, omega)
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t += dt
        out[j] = v
    return Signal(out, sample_rate)


def gen_piecewise_multisine(
    window_tones: Sequence[Sequence[tuple]],
    window_samples: int,
    sample_rate: float,
) -> Signal:
    """Concatenate stationary multisine segments.

    window_tones[i] lists (amplitude, frequency_hz, phase) triples for
    window i; every frequency must sit on an exact DFT bin of the window
    length so the per-window spectrum is leakage-free, and the sorted
    frequencies of a window must be genuinely separated (no repeats, ratio
    of neighbors bounded away from 1).
    """
    J = int(window_samples)
    if J < 2:
        raise ValueError(f"window_samples must be >= 2, got {J}")
    if not window_tones:
        raise ValueError("need at least one window")
    n = J * len(window_tones)
    bin_width = sample_rate / J
    for i, tones in enumerate(window_tones):
        freqs = []
        for a, f, phi in tones:
            k = f / bin_width
            if abs(k - round(k)) > 1e-9:
                nearest = round(k) * bin_width
                raise ValueError(
                    f"window {i}: frequency {f} Hz is off-bin for J={J} at rate "
                    f"{sample_rate}; nearest admissible bin is {nearest} Hz"
                )
            if not 0 < f <= sample_rate / 2:
                raise ValueError(f"window {i}: frequency {f} Hz outside (0, Nyquist]")
            freqs.append(f)
        freqs.sort(reverse=True)
        for hi, lo in zip(freqs, freqs[1:]):
            ratio = lo / hi
            if not 1.0 / n < ratio < 1.0 - 1.0 / n:
                raise ValueError(
                    f"window {i}: tone ratio {ratio:.6g} outside the resolvable band"
                )
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    for i, tones in enumerate(window_tones):
        sl = slice(i * J, (i + 1) * J)
        for a, f, phi in tones:
            out[sl] += a * np.cos(2.0 * np.pi * f * t[sl] + phi)
    return Signal(out, sample_rate)


def gen_two_tone(
    a: float,
    f: float,
    phi: float,
    n: int,
    sample_rate: float,
) -> Signal:
    """cos(2 pi t) + a cos(2 pi f t + phi) on the sample grid.

    Frequencies are in cycles per time unit of the grid; callers map them to
    physical Hz through their choice of sample_rate.
    """
    t = np.arange(n) / sample_rate
    return Signal(np.cos(2.0 * np.pi * t) + a * np.cos(2.0 * np.pi * f * t + phi), sample_rate)
