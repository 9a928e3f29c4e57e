"""Signal container, DFT layer, and the energy norms used throughout.

Conventions are fixed here once and consumed by every other module: the
forward transform is unscaled (the inverse carries 1/n), a signal of n
samples at rate ``sample_rate`` lives on the interval of duration
L = n / sample_rate, and the frequency grid is xi_k = k / L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Signal",
    "Spectrum",
    "dft",
    "idft",
    "norm2",
    "spectrum_norm2",
    "local_norm2",
    "l1_fourier_energy",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real-valued time series.

    Grid points are t_j = t0 + j / sample_rate, derived on demand; no time
    array is stored. Samples are copied and frozen at construction.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True).ravel()
        if samples.size < 2:
            raise ValueError(f"signal needs at least 2 samples, got {samples.size}")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains non-finite samples")
        object.__setattr__(self, "samples", _readonly(samples))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length L of the time interval covered by the n samples."""
        return self.n / self.sample_rate

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) / self.sample_rate

    def with_samples(self, samples) -> "Signal":
        """Same grid, new values."""
        return Signal(samples, self.sample_rate, self.t0)

    def same_grid(self, other: "Signal", rtol: float = 1e-12) -> bool:
        return (
            self.n == other.n
            and math.isclose(self.sample_rate, other.sample_rate, rel_tol=rtol)
            and math.isclose(self.t0, other.t0, rel_tol=rtol, abs_tol=1e-12)
        )


@dataclass(frozen=True, eq=False)
class Spectrum:
    """DFT coefficients of a signal; bin k sits at frequency k * frequency_step."""

    coefficients: np.ndarray
    frequency_step: float
    t0: float = 0.0  # bookkeeping so dft/idft round-trips the time origin

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128, copy=True).ravel()
        if coeffs.size < 2:
            raise ValueError(f"spectrum needs at least 2 bins, got {coeffs.size}")
        if not self.frequency_step > 0:
            raise ValueError(f"frequency_step must be positive, got {self.frequency_step}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("spectrum contains non-finite coefficients")
        object.__setattr__(self, "coefficients", _readonly(coeffs))
        object.__setattr__(self, "frequency_step", float(self.frequency_step))

    @property
    def n(self) -> int:
        return self.coefficients.size

    @property
    def duration(self) -> float:
        return 1.0 / self.frequency_step

    @property
    def sample_rate(self) -> float:
        return self.n * self.frequency_step

    def frequencies(self) -> np.ndarray:
        return np.arange(self.n) * self.frequency_step


def dft(signal: Signal) -> Spectrum:
    """Forward DFT, unscaled: s_hat(k) = sum_j s_j exp(-2*pi*i*j*k/n)."""
    coeffs = np.fft.fft(signal.samples)
    return Spectrum(coeffs, 1.0 / signal.duration, signal.t0)


def idft(spectrum: Spectrum) -> Signal:
    """Inverse DFT (carries the 1/n factor); the real part is returned.

    For conjugate-symmetric input the imaginary residue is at round-off
    level and discarding it is exact up to that residue.
    """
    values = np.fft.ifft(spectrum.coefficients)
    return Signal(values.real, spectrum.sample_rate, spectrum.t0)


def norm2(signal: Signal) -> float:
    """Normalized 2-norm (L/n) * sqrt(sum s_j^2)."""
    s = signal.samples
    return signal.duration / signal.n * math.sqrt(float(np.dot(s, s)))


def spectrum_norm2(spectrum: Spectrum) -> float:
    """norm2 of the time-domain signal, evaluated from its DFT via Parseval."""
    c = spectrum.coefficients
    total = float(np.sum(c.real * c.real + c.imag * c.imag))
    return spectrum.duration / spectrum.n * math.sqrt(total / spectrum.n)


def local_norm2(signal: Signal, a: float, b: float) -> float:
    """Normalized 2-norm of the restriction to [a, b], endpoints inclusive.

    Both endpoints must coincide with sample-grid points.
    """
    i = _grid_index(signal, a, "a")
    j = _grid_index(signal, b, "b")
    if i >= j:
        raise ValueError(f"need a < b on the grid, got indices {i} >= {j}")
    seg = signal.samples[i : j + 1]
    return signal.duration / signal.n * math.sqrt(float(np.dot(seg, seg)))


def _grid_index(signal: Signal, t: float, name: str) -> int:
    pos = (t - signal.t0) * signal.sample_rate
    idx = int(round(pos))
    if abs(pos - idx) > 1e-9 * max(1.0, abs(pos)):
        raise ValueError(f"{name}={t} is not on the sample grid (offset {pos - idx:.3g} samples)")
    if not 0 <= idx < signal.n:
        raise ValueError(f"{name}={t} lies outside the signal's time span")
    return idx


def l1_fourier_energy(signal: Signal) -> float:
    """Sum of the moduli of all DFT coefficients."""
    return float(np.sum(np.abs(np.fft.fft(signal.samples))))
