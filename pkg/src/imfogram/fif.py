"""Fast iterative-filtering decomposition into intrinsic mode functions.

The inner loop runs entirely in the frequency domain: one pass multiplies
the current spectrum by (1 - w_hat) per bin, so after m passes the applied
multiplier is (1 - w_hat)**m. Iteration stops when consecutive iterates
differ by less than delta times the norm of the loop's input, both norms
evaluated spectrally via Parseval. The outer loop re-estimates the filter
length on the running remainder and peels one IMF per pass until the
remainder is a trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .filters import (
    Filter,
    FILTER_FAMILIES,
    count_extrema,
    double_convolve,
    estimate_filter_length,
    filter_dft_padded,
    make_base_filter,
)
from .spectral import Signal

__all__ = [
    "EXTENSION_MODES",
    "FifConfig",
    "ExtractResult",
    "ImfMeta",
    "ImfSet",
    "extend_signal",
    "moving_average",
    "variation",
    "extract_imf",
    "decompose",
    "reconstruct",
    "write_imfset_csv",
    "read_imfset_csv",
]

#: "none" processes the signal circularly on its own grid, which is the only
#: mode under which the spectral bookkeeping identities hold bit-exactly.
EXTENSION_MODES = ("none", "symmetric", "periodic", "antisymmetric")

FILTER_MODES = ("double", "raw")


@dataclass(frozen=True)
class FifConfig:
    """Knobs of the decomposition.

    delta is the inner-loop stopping threshold, chi the filter-length tuning
    parameter, and extension the boundary handling applied per extraction.
    """

    delta: float = 1e-3
    chi: float = 1.6
    max_imfs: int = 50
    max_inner_iterations: int = 200
    extension: str = "none"
    filter_family: str = "bump"
    filter_mode: str = "double"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 1.1 <= self.chi <= 2.0:
            raise ValueError(f"chi must lie in [1.1, 2], got {self.chi}")
        if self.max_imfs < 1:
            raise ValueError(f"max_imfs must be >= 1, got {self.max_imfs}")
        if self.max_inner_iterations < 1:
            raise ValueError(f"max_inner_iterations must be >= 1, got {self.max_inner_iterations}")
        if self.extension not in EXTENSION_MODES:
            raise ValueError(f"extension must be one of {EXTENSION_MODES}, got {self.extension!r}")
        if self.filter_family not in FILTER_FAMILIES:
            raise ValueError(
                f"filter_family must be one of {FILTER_FAMILIES}, got {self.filter_family!r}"
            )
        if self.filter_mode not in FILTER_MODES:
            raise ValueError(f"filter_mode must be one of {FILTER_MODES}, got {self.filter_mode!r}")


@dataclass(frozen=True, eq=False)
class ExtractResult:
    """One inner-loop run: the extracted mode plus its iteration history."""

    imf: Signal
    iterations: int
    diff_norms: np.ndarray  # diff_norms[m-1] = ||s_hat_m - s_hat_{m-1}||_2
    source_norm: float
    converged: bool


@dataclass(frozen=True, eq=False)
class ImfMeta:
    """Per-IMF extraction record kept for verification and reporting."""

    half_length: int
    iterations: int
    family: str
    converged: bool
    filter: Filter
    diff_norms: np.ndarray
    source_norm: float
    length_clamped: bool = False


@dataclass(frozen=True, eq=False)
class ImfSet:
    """Ordered modes (highest frequency first) plus the residual trend.

    per_imf_meta is empty for externally supplied decompositions; operations
    that need the internal extraction state reject those.
    """

    imfs: tuple
    trend: Signal
    per_imf_meta: tuple = ()
    hit_max_imfs: bool = False
    config: Optional[FifConfig] = None

    def __post_init__(self):
        object.__setattr__(self, "imfs", tuple(self.imfs))
        object.__setattr__(self, "per_imf_meta", tuple(self.per_imf_meta))
        for imf in self.imfs:
            if not imf.same_grid(self.trend):
                raise ValueError("all IMFs and the trend must share one sample grid")
        if self.per_imf_meta and len(self.per_imf_meta) != len(self.imfs):
            raise ValueError("per_imf_meta length does not match the number of IMFs")

    def __len__(self) -> int:
        return len(self.imfs)

    @property
    def components(self) -> tuple:
        """IMFs followed by the trend."""
        return self.imfs + (self.trend,)

    @property
    def has_internal_state(self) -> bool:
        return len(self.per_imf_meta) == len(self.imfs) and len(self.imfs) > 0


def extend_signal(signal: Signal, pad_samples: int, mode: str = "symmetric") -> Signal:
    """Pre-extend by pad_samples on each side; the original samples occupy
    the middle bit-identically and keep their time stamps."""
    if pad_samples < 1:
        raise ValueError(f"pad_samples must be >= 1, got {pad_samples}")
    if mode not in ("symmetric", "periodic", "antisymmetric"):
        raise ValueError(f"unknown extension mode {mode!r}")
    s = signal.samples
    n = signal.n
    if mode == "periodic":
        idx = np.arange(-pad_samples, n + pad_samples) % n
        extended = s[idx]
    else:
        if pad_samples > n - 1:
            raise ValueError(
                f"reflection pad {pad_samples} exceeds n-1 = {n - 1}; reflection is undefined"
            )
        reflect_type = "even" if mode == "symmetric" else "odd"
        extended = np.pad(s, pad_samples, mode="reflect", reflect_type=reflect_type)
    return Signal(extended, signal.sample_rate, signal.t0 - pad_samples / signal.sample_rate)


def moving_average(signal: Signal, filt: Filter) -> Signal:
    """Circular convolution with the filter, computed spectrally."""
    w_hat = filter_dft_padded(filt, signal.n)
    averaged = np.fft.ifft(np.fft.fft(signal.samples) * w_hat).real
    return signal.with_samples(averaged)


def variation(signal: Signal, filt: Filter) -> Signal:
    """Signal minus its moving average (multiplies the spectrum by 1 - w_hat)."""
    return signal.with_samples(signal.samples - moving_average(signal, filt).samples)


def _spectral_norm2(coeffs: np.ndarray, duration: float, n: int) -> float:
    total = float(np.sum(coeffs.real * coeffs.real + coeffs.imag * coeffs.imag))
    return duration / n * math.sqrt(total / n)


def extract_imf(
    signal: Signal,
    filt: Filter,
    delta: float,
    max_iter: int = 200,
    allow_raw: bool = False,
) -> ExtractResult:
    """Iterate the variation operator in the frequency domain until the
    change between consecutive iterates drops below delta * ||signal||_2.

    The filter must be a double-convolution filter unless allow_raw is set
    (the escape hatch exists so the verification layer can reproduce what a
    badly chosen filter does).
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if not filt.is_double_convolution and not allow_raw:
        raise ValueError(
            "extract_imf requires a double-convolution filter; pass allow_raw=True "
            "to run the non-convergent raw-filter path deliberately"
        )
    n = signal.n
    duration = signal.duration
    s_hat = np.fft.fft(signal.samples)
    one_minus = 1.0 - filter_dft_padded(filt, n)
    source_norm = _spectral_norm2(s_hat, duration, n)
    threshold = delta * source_norm

    diffs = []
    current = s_hat * one_minus
    diffs.append(_spectral_norm2(current - s_hat, duration, n))
    m = 1
    while diffs[-1] > threshold and m < max_iter:
        nxt = current * one_minus
        diffs.append(_spectral_norm2(nxt - current, duration, n))
        current = nxt
        m += 1
    imf = Signal(np.fft.ifft(current).real, signal.sample_rate, signal.t0)
    return ExtractResult(
        imf=imf,
        iterations=m,
        diff_norms=np.asarray(diffs),
        source_norm=source_norm,
        converged=bool(diffs[-1] <= threshold),
    )


def _clamp_even_half_length(length: int, n: int) -> tuple[int, bool]:
    """Largest even half-length whose support fits the working grid."""
    limit = (n - 1) // 2
    limit -= limit % 2
    if length <= limit:
        return length, False
    return max(limit, 2), True


def _build_filter(config: FifConfig, half_length: int) -> Filter:
    if config.filter_mode == "double":
        # Eq.-style lengths are even by construction; the self-convolution of
        # a half-length l/2 base lands exactly on half-length l
        return double_convolve(make_base_filter(config.filter_family, max(half_length // 2, 2)))
    return make_base_filter(config.filter_family, max(half_length, 2))


def decompose(
    signal: Signal,
    config: FifConfig = FifConfig(),
    filters: Optional[Sequence[Filter]] = None,
) -> ImfSet:
    """Peel IMFs off the signal until the remainder is a trend.

    filters, when given, overrides the automatically estimated filter for
    the first len(filters) outer passes (tuned-resolution workflows); later
    passes fall back to the extrema-count rule.
    """
    if signal.n < 4:
        raise ValueError(f"decompose needs at least 4 samples, got {signal.n}")
    n = signal.n
    remainder = signal.samples.copy()
    imfs = []
    metas = []

    while len(imfs) < config.max_imfs:
        current = Signal(remainder, signal.sample_rate, signal.t0)
        if count_extrema(current) < 2:
            break

        clamped = False
        if filters is not None and len(imfs) < len(filters):
            filt = filters[len(imfs)]
            if not filt.is_double_convolution and config.filter_mode == "double":
                raise ValueError("explicit filters must be double-convolution in double mode")
        else:
            length = estimate_filter_length(current, config.chi)
            if config.extension == "none":
                length, clamped = _clamp_even_half_length(length, n)
            filt = _build_filter(config, length)

        if config.extension == "none":
            working = current
            pad = 0
        else:
            pad = 2 * filt.support
            if config.extension in ("symmetric", "antisymmetric"):
                pad = min(pad, n - 1)
            working = extend_signal(current, pad, config.extension)
        if filt.support > working.n:
            raise ValueError(
                f"filter support {filt.support} exceeds working length {working.n}; "
                "use a boundary extension or a shorter filter"
            )

        result = extract_imf(
            working,
            filt,
            config.delta,
            config.max_inner_iterations,
            allow_raw=config.filter_mode == "raw",
        )
        imf_samples = result.imf.samples[pad : pad + n] if pad else result.imf.samples
        imfs.append(Signal(imf_samples, signal.sample_rate, signal.t0))
        metas.append(
            ImfMeta(
                half_length=filt.half_length,
                iterations=result.iterations,
                family=filt.family,
                converged=result.converged,
                filter=filt,
                diff_norms=result.diff_norms,
                source_norm=result.source_norm,
                length_clamped=clamped,
            )
        )
        remainder = remainder - imf_samples

    trend = Signal(remainder, signal.sample_rate, signal.t0)
    hit_cap = len(imfs) == config.max_imfs and count_extrema(trend) >= 2
    return ImfSet(
        imfs=tuple(imfs),
        trend=trend,
        per_imf_meta=tuple(metas),
        hit_max_imfs=hit_cap,
        config=config,
    )


def reconstruct(imf_set: ImfSet) -> Signal:
    """Elementwise sum of all IMFs and the trend."""
    total = imf_set.trend.samples.copy()
    for imf in imf_set.imfs:
        total += imf.samples
    return Signal(total, imf_set.trend.sample_rate, imf_set.trend.t0)


def write_imfset_csv(imf_set: ImfSet, path) -> None:
    """Column 0 is time, then one column per IMF, last column the trend.

    Extraction metadata rides along as '#' comment lines."""
    trend = imf_set.trend
    times = trend.times()
    with open(path, "w", newline="\n") as fh:
        if imf_set.config is not None:
            cfg = imf_set.config
            fh.write(
                f"# delta={cfg.delta:.17g} chi={cfg.chi:.17g} "
                f"extension={cfg.extension} filter_mode={cfg.filter_mode} "
                f"filter_family={cfg.filter_family}\n"
            )
        for k, meta in enumerate(imf_set.per_imf_meta, start=1):
            fh.write(
                f"# imf{k}: half_length={meta.half_length} iterations={meta.iterations} "
                f"family={meta.family} converged={meta.converged}\n"
            )
        if imf_set.hit_max_imfs:
            fh.write("# decomposition stopped at the max-IMF cap\n")
        headers = ["time"] + [f"imf{k + 1}" for k in range(len(imf_set.imfs))] + ["trend"]
        fh.write(",".join(headers) + "\n")
        columns = [times] + [imf.samples for imf in imf_set.imfs] + [trend.samples]
        for row in zip(*columns):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_imfset_csv(path) -> ImfSet:
    """Read a decomposition written by write_imfset_csv (or compatible).

    The result carries no extraction metadata, so it is treated as an
    external decomposition by the verification layer."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line[0].isalpha():
                continue  # header row
            rows.append([float(v) for v in line.split(",")])
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: expected a time column plus at least one component")
    times = data[:, 0]
    dts = np.diff(times)
    dt = float(np.median(dts))
    if dt <= 0 or np.max(np.abs(dts - dt)) > 1e-9 * dt:
        raise ValueError(f"{path}: time column is not a uniform grid")
    rate = 1.0 / dt
    t0 = float(times[0])
    comps = [Signal(data[:, j], rate, t0) for j in range(1, data.shape[1])]
    return ImfSet(imfs=tuple(comps[:-1]), trend=comps[-1])
