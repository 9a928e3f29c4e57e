"""Compact averaging filters: construction, self-convolution, length selection.

A filter is a short, even, nonnegative tap sequence with unit mass. The
self-convolved ("double convolution") variant is the one the decomposition
engine relies on, because its transfer function stays inside [0, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TrendSignalError
from .spectral import Signal

__all__ = [
    "Filter",
    "FILTER_FAMILIES",
    "make_base_filter",
    "double_convolve",
    "count_extrema",
    "local_maxima_indices",
    "estimate_filter_length",
    "estimate_filter_length_spectral",
    "filter_dft_padded",
    "filter_dtft",
    "tune_double_filter",
    "write_filter_csv",
]

#: "bump" is the default smooth compactly supported profile; "rectangular"
#: is admitted only as the negative-control base whose self-convolution is
#: the triangle (it violates endpoint continuity on purpose).
FILTER_FAMILIES = ("bump", "triangular", "rectangular")


@dataclass(frozen=True, eq=False)
class Filter:
    """Even, nonnegative, unit-mass tap sequence over [-l, l] grid offsets."""

    taps: np.ndarray
    half_length: int
    is_double_convolution: bool = False
    family: str = "bump"

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64, copy=True).ravel()
        if self.half_length < 1:
            raise ValueError(f"half_length must be >= 1, got {self.half_length}")
        if taps.size != 2 * self.half_length + 1:
            raise ValueError(
                f"tap count {taps.size} does not match support {2 * self.half_length + 1}"
            )
        if np.any(taps < -1e-15):
            raise ValueError("filter taps must be nonnegative")
        if not np.array_equal(taps, taps[::-1]):
            raise ValueError("filter taps must be even-symmetric about the center")
        total = float(taps.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"filter taps must sum to 1, got {total!r}")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @property
    def support(self) -> int:
        return 2 * self.half_length + 1


def _bump_profile(offsets: np.ndarray, scale: float) -> np.ndarray:
    x = offsets / scale
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _symmetrize(taps: np.ndarray) -> np.ndarray:
    # averaging with the mirror makes the palindrome exact in floating point
    return 0.5 * (taps + taps[::-1])


def _normalize(taps: np.ndarray) -> np.ndarray:
    return taps / taps.sum()


def make_base_filter(kind: str, half_length: int) -> Filter:
    """Build a base (not yet self-convolved) filter of the given family.

    half_length is the discrete half-support l; the result has 2l+1 taps.
    """
    if half_length < 2:
        raise ValueError(f"half_length must be >= 2, got {half_length}")
    offsets = np.arange(-half_length, half_length + 1, dtype=np.float64)
    if kind == "bump":
        taps = _bump_profile(offsets, float(half_length))
    elif kind == "triangular":
        taps = 1.0 - np.abs(offsets) / half_length
    elif kind == "rectangular":
        taps = np.ones_like(offsets)
    else:
        raise ValueError(f"unknown filter family {kind!r}; choose from {FILTER_FAMILIES}")
    taps = _normalize(_symmetrize(taps))
    return Filter(taps, half_length, is_double_convolution=False, family=kind)


def _scaled_bump_base(scale: float) -> Filter:
    """Bump base filter with a real-valued support scale (tuning knob).

    Taps still live on integer offsets; the profile hits zero at +-scale so
    the stored support carries explicit zero endpoints.
    """
    if scale < 2.0:
        raise ValueError(f"bump scale must be >= 2, got {scale}")
    half = int(np.floor(scale)) + 1
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    taps = _normalize(_symmetrize(_bump_profile(offsets, scale)))
    return Filter(taps, half, is_double_convolution=False, family="bump")


def double_convolve(filt: Filter) -> Filter:
    """Self-convolve the taps; half-length doubles, mass is renormalized.

    The padded DFT of the result is the square of the base filter's, hence
    in [0, 1]."""
    conv = np.convolve(filt.taps, filt.taps)
    conv = _normalize(_symmetrize(conv))
    return Filter(conv, 2 * filt.half_length, is_double_convolution=True, family=filt.family)


def _run_compressed(values: np.ndarray):
    """Collapse equal-value runs; returns (run values, run start, run end)."""
    change = np.flatnonzero(np.diff(values) != 0.0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [values.size - 1]))
    return values[starts], starts, ends


def _extrema_indices(values: np.ndarray):
    """Strict interior extrema; a plateau counts once, at its midpoint."""
    vals, starts, ends = _run_compressed(values)
    if vals.size < 3:
        empty = np.array([], dtype=int)
        return empty, empty
    left = vals[:-2]
    mid = vals[1:-1]
    right = vals[2:]
    is_max = (mid > left) & (mid > right)
    is_min = (mid < left) & (mid < right)
    midpoints = (starts[1:-1] + ends[1:-1]) // 2
    return midpoints[is_max], midpoints[is_min]


def local_maxima_indices(values: np.ndarray) -> np.ndarray:
    """Indices of strict interior local maxima (plateau -> midpoint)."""
    maxima, _ = _extrema_indices(np.asarray(values, dtype=np.float64))
    return maxima


def count_extrema(signal: Signal) -> int:
    """Number of strict interior local maxima and minima."""
    maxima, minima = _extrema_indices(signal.samples)
    return int(maxima.size + minima.size)


def estimate_filter_length(signal: Signal, chi: float = 1.6) -> int:
    """Filter half-length from the extrema count: l = 2 * floor(chi * n / k).

    chi is the usual tuning parameter in [1.1, 2]. Raises TrendSignalError
    when the signal has fewer than 2 extrema (nothing left to extract).
    """
    if not 1.1 <= chi <= 2.0:
        raise ValueError(f"chi must lie in [1.1, 2], got {chi}")
    k = count_extrema(signal)
    if k < 2:
        raise TrendSignalError(f"signal has {k} extrema; need at least 2")
    length = 2 * int(chi * signal.n / k)
    if length < 2:
        warnings.warn(
            f"estimated filter length {length} clamped to 2 (n={signal.n}, extrema={k})",
            RuntimeWarning,
            stacklevel=2,
        )
        length = 2
    return length


def estimate_filter_length_spectral(signal: Signal, kappa: float = 1.6) -> int:
    """Alternative length rule: reciprocal of the highest spectral peak.

    Picks the largest-magnitude DFT bin above DC in the half spectrum and
    returns round(kappa * n / k_peak), clamped below at 2.
    """
    mags = np.abs(np.fft.fft(signal.samples))
    half = signal.n // 2
    if half < 1:
        raise ValueError("signal too short for a spectral peak")
    k_peak = 1 + int(np.argmax(mags[1 : half + 1]))
    length = int(round(kappa * signal.n / k_peak))
    return max(length, 2)


def filter_dft_padded(filt: Filter, n: int) -> np.ndarray:
    """Real DFT of the taps zero-padded to length n, centered at sample 0.

    The filter is placed circularly so that it is even around index 0; the
    transform is then real up to round-off and the real part is returned.
    """
    if filt.support > n:
        raise ValueError(
            f"filter support {filt.support} exceeds transform length {n}; "
            "extend the signal before filtering"
        )
    padded = np.zeros(n)
    idx = np.arange(-filt.half_length, filt.half_length + 1) % n
    padded[idx] = filt.taps
    coeffs = np.fft.fft(padded)
    imag_max = float(np.max(np.abs(coeffs.imag)))
    if imag_max > 1e-12 * max(1.0, float(np.max(np.abs(coeffs.real)))):
        raise AssertionError(f"padded filter DFT has imaginary residue {imag_max:g}")
    return coeffs.real.copy()


def filter_dtft(filt: Filter, freqs_per_sample: np.ndarray) -> np.ndarray:
    """Real DTFT of the taps at normalized frequencies (cycles per sample).

    Agrees with filter_dft_padded(f, n) at k/n, but is defined for any
    support and any frequency."""
    freqs = np.atleast_1d(np.asarray(freqs_per_sample, dtype=np.float64))
    j = np.arange(1, filt.half_length + 1)
    center = filt.taps[filt.half_length]
    sides = filt.taps[filt.half_length + 1 :]
    # chunk over frequencies to bound the cos matrix size
    out = np.empty(freqs.size)
    step = max(1, 2_000_000 // max(1, j.size))
    for lo in range(0, freqs.size, step):
        block = freqs[lo : lo + step]
        out[lo : lo + step] = center + 2.0 * np.cos(
            2.0 * np.pi * np.outer(block, j)
        ).dot(sides)
    return out


def tune_double_filter(
    target_freq: float,
    sample_rate: float,
    family: str = "bump",
    tol: float = 1e-11,
) -> Filter:
    """Double-convolution filter whose first transfer-function zero sits at
    target_freq (Hz).

    The base profile's support scale is bisected (over the reals) until its
    DTFT vanishes at the target, so the squared transfer touches zero there
    to near machine precision. Used by the tone-resolution workflows.
    """
    if family != "bump":
        raise ValueError(f"tuning is implemented for the bump family only, got {family!r}")
    theta = target_freq / sample_rate
    if not 0.0 < theta <= 0.5:
        raise ValueError(
            f"target frequency {target_freq} Hz is outside (0, Nyquist] at rate {sample_rate}"
        )

    def base_value(scale: float) -> float:
        return float(filter_dtft(_scaled_bump_base(scale), np.array([theta]))[0])

    lo = 2.0
    if base_value(lo) <= 0.0:
        raise ValueError(f"target frequency {target_freq} Hz is too high for a tunable filter")
    # multiplicative steps small enough that the first negative lobe of the
    # DTFT (endpoint ratio well above 1.2) cannot be stepped over
    hi = lo
    while base_value(hi) > 0.0:
        lo = hi
        hi *= 1.2
        if hi > 1e7:
            raise ValueError(f"no filter scale brackets a zero at {target_freq} Hz")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if base_value(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    base = _scaled_bump_base(0.5 * (lo + hi))
    below = np.linspace(theta * 1e-3, theta * 0.999, 512)
    if np.any(filter_dtft(base, below) <= 0.0):
        raise AssertionError(f"tuned zero at {target_freq} Hz is not the first zero")
    return double_convolve(base)


def write_filter_csv(filt: Filter, path) -> None:
    """One tap per line, lossless decimal formatting."""
    with open(path, "w", newline="\n") as fh:
        for tap in filt.taps:
            fh.write(f"{tap:.17g}\n")
