"""Iterative-filtering decomposition, conservation checks, and IMF-based
time-frequency maps."""

from .spectral import (
    Signal,
    Spectrum,
    dft,
    idft,
    norm2,
    spectrum_norm2,
    local_norm2,
    l1_fourier_energy,
)
from .filters import (
    Filter,
    make_base_filter,
    double_convolve,
    count_extrema,
    estimate_filter_length,
    estimate_filter_length_spectral,
    filter_dft_padded,
    filter_dtft,
    tune_double_filter,
)
from .fif import (
    FifConfig,
    ImfSet,
    extend_signal,
    moving_average,
    variation,
    extract_imf,
    decompose,
    reconstruct,
)
from .verify import (
    ConservationReport,
    check_conservation,
    check_imf_set,
    multipliers,
    stopping_bound_violations,
)
from .tfr import (
    AveragingWindows,
    TfrMatrix,
    instantaneous_amplitude,
    instantaneous_frequency,
    local_average,
    imfogram,
    spectrogram,
    periodogram,
    hadamard_square,
    compare_tfr,
)
from .errors import TrendSignalError, UnsupportedOperationError

__version__ = "0.1.0"
