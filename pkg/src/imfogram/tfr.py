"""Time-frequency representations built from IMF decompositions.

Each IMF yields an instantaneous amplitude (envelope through the peaks of
its rectified samples) and an instantaneous frequency (from zero-crossing
spacing). Window averages of those tracks address one matrix cell per IMF
and window; accumulating the local amplitudes there gives the IMF-based
time-frequency map. Rectangular-window spectrograms and the periodogram are
provided as the baselines it is compared against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fif import ImfSet
from .filters import local_maxima_indices
from .spectral import Signal

__all__ = [
    "AveragingWindows",
    "InstantaneousTrack",
    "TfrMatrix",
    "instantaneous_amplitude",
    "instantaneous_frequency",
    "instantaneous_track",
    "window_starts",
    "local_average",
    "imfogram",
    "spectrogram",
    "periodogram",
    "hadamard_square",
    "compare_tfr",
    "write_tfr_csv",
    "write_tfr_db_csv",
    "write_tfr_pgm",
]


@dataclass(frozen=True)
class AveragingWindows:
    """Window length J and hop H, in samples. H = J means non-overlapping."""

    window_length_samples: int
    hop_samples: int

    def __post_init__(self):
        if self.window_length_samples < 1:
            raise ValueError("window length must be >= 1 sample")
        if not 1 <= self.hop_samples <= self.window_length_samples:
            raise ValueError(
                f"need 1 <= hop <= window length, got hop={self.hop_samples}, "
                f"J={self.window_length_samples}"
            )


@dataclass(frozen=True, eq=False)
class InstantaneousTrack:
    """Per-sample amplitude (signal units) and frequency (Hz) of one IMF."""

    amplitude: np.ndarray
    frequency: np.ndarray


@dataclass(frozen=True, eq=False)
class TfrMatrix:
    """Nonnegative amplitude matrix, rows = frequency bins, cols = windows."""

    values: np.ndarray
    freq_axis: np.ndarray
    time_axis: np.ndarray
    window_length_samples: int
    hop_samples: int
    clamped_cells: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d matrix")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix contains non-finite values")
        if np.any(values < 0):
            raise ValueError("matrix values must be nonnegative")
        if values.shape != (self.freq_axis.size, self.time_axis.size):
            raise ValueError("axes do not match the matrix shape")
        if np.any(np.diff(self.freq_axis) <= 0):
            raise ValueError("frequency axis must be strictly increasing")
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def instantaneous_amplitude(imf: Signal) -> np.ndarray:
    """Envelope through the local maxima of |IMF|, floored by |IMF| itself.

    Outside the first and last maximum the envelope holds the nearest
    maximum's value. A mode with no interior peak degenerates to the
    constant max |IMF| (with a warning).
    """
    rect = np.abs(imf.samples)
    peaks = local_maxima_indices(rect)
    if peaks.size == 0:
        warnings.warn(
            "IMF has no interior peak; amplitude track degenerates to a constant",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.full(imf.n, float(rect.max()))
    envelope = np.interp(np.arange(imf.n), peaks, rect[peaks])
    return np.maximum(envelope, rect)


def _zero_crossings(imf: Signal) -> np.ndarray:
    """Crossing times of the linear interpolant, sub-sample accurate."""
    s = imf.samples
    t = imf.times()
    crossings = list(t[s == 0.0])
    prod = s[:-1] * s[1:]
    for j in np.flatnonzero(prod < 0.0):
        frac = s[j] / (s[j] - s[j + 1])
        crossings.append(t[j] + frac * imf.dt)
    return np.unique(np.asarray(crossings))


def instantaneous_frequency(imf: Signal) -> np.ndarray:
    """Frequency track from zero-crossing spacing.

    Consecutive crossings are half a period apart, so the gap [z_j, z_{j+1}]
    carries frequency 1 / (2 (z_{j+1} - z_j)), anchored at z_j; the track is
    the linear interpolation of those knots onto the sample grid, held
    constant beyond the first and last genuine gap and clipped at Nyquist.
    IMFs with fewer than 2 crossings are trend-like and return all zeros.
    """
    z = _zero_crossings(imf)
    if z.size < 2:
        warnings.warn(
            "IMF has fewer than 2 zero crossings; frequency track is zero",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.zeros(imf.n)
    gaps = np.diff(z)
    freqs = 1.0 / (2.0 * gaps)
    track = np.interp(imf.times(), z[:-1], freqs)
    return np.minimum(track, imf.sample_rate / 2.0)


def instantaneous_track(imf: Signal) -> InstantaneousTrack:
    return InstantaneousTrack(instantaneous_amplitude(imf), instantaneous_frequency(imf))


def window_starts(n: int, windows: AveragingWindows) -> np.ndarray:
    """Window start indices: every hop, trailing partial window included."""
    if windows.window_length_samples > n:
        raise ValueError(
            f"window length {windows.window_length_samples} exceeds track length {n}"
        )
    return np.arange(0, n, windows.hop_samples)


def local_average(track: np.ndarray, windows: AveragingWindows) -> np.ndarray:
    """Arithmetic mean of the track over each window.

    For hop = length this is exactly the block-averaging matrix action; a
    trailing partial window is averaged over its actual sample count.
    """
    track = np.asarray(track, dtype=np.float64)
    starts = window_starts(track.size, windows)
    J = windows.window_length_samples
    return np.asarray([track[s : s + J].mean() for s in starts])


def _window_centers(signal_like, starts: np.ndarray, J: int, n: int) -> np.ndarray:
    lengths = np.minimum(starts + J, n) - starts
    return signal_like.t0 + (starts + (lengths - 1) / 2.0) / signal_like.sample_rate


def imfogram(
    imf_set: ImfSet,
    windows: AveragingWindows,
    n_freq_bins: int,
) -> TfrMatrix:
    """Accumulate each IMF's local amplitude at its local frequency.

    For every IMF k and window j the window means LA, LF of the
    instantaneous tracks are formed and LA is added to the cell whose bin
    center is nearest LF (ties round down). Bins span [0, Nyquist]; local
    frequencies above Nyquist are counted and clamped into the top bin. The
    trend takes no part in the accumulation.
    """
    if len(imf_set.imfs) == 0:
        raise ValueError("imfogram needs at least one IMF")
    if n_freq_bins < 2:
        raise ValueError(f"n_freq_bins must be >= 2, got {n_freq_bins}")
    ref = imf_set.trend
    nyquist = ref.sample_rate / 2.0
    freq_axis = np.linspace(0.0, nyquist, n_freq_bins)
    bin_step = nyquist / (n_freq_bins - 1)
    starts = window_starts(ref.n, windows)
    values = np.zeros((n_freq_bins, starts.size))
    clamped = 0
    for imf in imf_set.imfs:
        track = instantaneous_track(imf)
        la = local_average(track.amplitude, windows)
        lf = local_average(track.frequency, windows)
        over = lf > nyquist
        clamped += int(np.count_nonzero(over))
        # nearest bin with .5 ties resolved downward
        bins = np.ceil(lf / bin_step - 0.5).astype(int)
        bins = np.clip(bins, 0, n_freq_bins - 1)
        for j in range(starts.size):
            values[bins[j], j] += la[j]
    return TfrMatrix(
        values=values,
        freq_axis=freq_axis,
        time_axis=_window_centers(ref, starts, windows.window_length_samples, ref.n),
        window_length_samples=windows.window_length_samples,
        hop_samples=windows.hop_samples,
        clamped_cells=clamped,
    )


def spectrogram(signal: Signal, window_samples: int, hop_samples: int) -> TfrMatrix:
    """One-sided rectangular-window amplitude spectrogram.

    Column j is the DFT of the raw segment starting at j * hop; stored
    values are 2 |s_hat(k)| / J on the half spectrum (DC and Nyquist
    unhalved) so an in-bin unit-amplitude sine reads 1. Only full windows
    are placed.
    """
    J = int(window_samples)
    H = int(hop_samples)
    if J < 2 or J > signal.n:
        raise ValueError(f"need 2 <= window <= n, got window={J}, n={signal.n}")
    if H < 1:
        raise ValueError(f"hop must be >= 1, got {H}")
    starts = np.arange(0, signal.n - J + 1, H)
    half = J // 2
    scale = np.full(half + 1, 2.0 / J)
    scale[0] = 1.0 / J
    if J % 2 == 0:
        scale[half] = 1.0 / J
    values = np.empty((half + 1, starts.size))
    for j, s0 in enumerate(starts):
        seg = signal.samples[s0 : s0 + J]
        values[:, j] = np.abs(np.fft.fft(seg)[: half + 1]) * scale
    freq_axis = np.arange(half + 1) * signal.sample_rate / J
    return TfrMatrix(
        values=values,
        freq_axis=freq_axis,
        time_axis=signal.t0 + (starts + (J - 1) / 2.0) / signal.sample_rate,
        window_length_samples=J,
        hop_samples=H,
    )


def periodogram(signal: Signal) -> TfrMatrix:
    """Whole-signal spectrogram: one window covering everything."""
    return spectrogram(signal, signal.n, signal.n)


def hadamard_square(matrix: TfrMatrix) -> TfrMatrix:
    """Entrywise square; the axes are carried over untouched."""
    return TfrMatrix(
        values=matrix.values**2,
        freq_axis=matrix.freq_axis,
        time_axis=matrix.time_axis,
        window_length_samples=matrix.window_length_samples,
        hop_samples=matrix.hop_samples,
        clamped_cells=matrix.clamped_cells,
    )


def compare_tfr(a: TfrMatrix, b: TfrMatrix) -> float:
    """Relative Frobenius error ||a - b||_F / ||b||_F.

    The matrices must share shape and axes."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not np.allclose(a.freq_axis, b.freq_axis, rtol=1e-9, atol=1e-12) or not np.allclose(
        a.time_axis, b.time_axis, rtol=1e-9, atol=1e-12
    ):
        raise ValueError("axes mismatch")
    denom = float(np.linalg.norm(b.values))
    diff = float(np.linalg.norm(a.values - b.values))
    if denom == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / denom


def write_tfr_csv(matrix: TfrMatrix, path) -> None:
    """First row is the time axis, first column the frequency axis."""
    with open(path, "w", newline="\n") as fh:
        fh.write("," + ",".join(f"{t:.17g}" for t in matrix.time_axis) + "\n")
        for i in range(matrix.freq_axis.size):
            row = ",".join(f"{v:.17g}" for v in matrix.values[i])
            fh.write(f"{matrix.freq_axis[i]:.17g},{row}\n")


def write_tfr_db_csv(matrix: TfrMatrix, path, floor_db: float = -120.0) -> None:
    """Max-normalized dB variant for plotting."""
    peak = float(matrix.values.max())
    if peak > 0:
        with np.errstate(divide="ignore"):
            db = 20.0 * np.log10(matrix.values / peak)
    else:
        db = np.full_like(matrix.values, floor_db)
    db = np.maximum(db, floor_db)
    with open(path, "w", newline="\n") as fh:
        fh.write("," + ",".join(f"{t:.17g}" for t in matrix.time_axis) + "\n")
        for i in range(matrix.freq_axis.size):
            row = ",".join(f"{v:.17g}" for v in db[i])
            fh.write(f"{matrix.freq_axis[i]:.17g},{row}\n")


def write_tfr_pgm(matrix: TfrMatrix, path, bits: int = 16) -> None:
    """Binary PGM image, row 0 = highest frequency, linear map from [0, max].

    The output is a pure function of the matrix, so identical inputs give
    byte-identical files."""
    if bits not in (8, 16):
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    maxval = 255 if bits == 8 else 65535
    peak = float(matrix.values.max())
    if peak > 0:
        scaled = np.rint(matrix.values / peak * maxval)
    else:
        scaled = np.zeros_like(matrix.values)
    flipped = scaled[::-1, :]
    height, width = flipped.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = np.uint8 if bits == 8 else np.dtype(">u2")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flipped.astype(dtype).tobytes())
