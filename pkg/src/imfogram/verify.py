"""Conservation checks for decompositions.

A decomposition conserves the L1 Fourier energy when the per-frequency sum
of component moduli never exceeds the signal's modulus and the energy
totals agree. Decompositions produced by this package additionally expose
their per-IMF spectral multipliers, which let the theoretical identities be
checked bin by bin. Externally supplied decompositions (for example EMD
output read from CSV) get the same conservation report, but when the check
fails no further conclusion is supported beyond the mode mixing it reflects.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UnsupportedOperationError
from .fif import ImfSet
from .filters import filter_dtft
from .spectral import Signal, l1_fourier_energy, norm2

__all__ = [
    "ConservationReport",
    "check_conservation",
    "check_imf_set",
    "multipliers",
    "stopping_bound_violations",
    "write_report_csv",
    "report_summary_json",
]

EXTERNAL_NOTE = (
    "non-conservation of an external decomposition reflects mode mixing in the "
    "frequency domain and supports no further conclusion"
)


@dataclass(frozen=True, eq=False)
class ConservationReport:
    """Per-frequency comparison of component spectra against the signal's."""

    per_bin_signal_energy: np.ndarray
    per_bin_component_sum: np.ndarray
    violations: tuple  # (bin index, excess) pairs
    total_signal_energy: float
    total_component_energy: float
    relative_error: float
    tolerance: float
    reconstruction_error: float
    note: str = ""

    @property
    def conserves(self) -> bool:
        return self.relative_error <= self.tolerance and not self.violations


def check_conservation(
    signal: Signal,
    components: Sequence[Signal],
    tolerance: float = 1e-10,
) -> ConservationReport:
    """Compare sum_k |comp_hat_k(xi)| against |s_hat(xi)| bin by bin.

    A bin violates when the component sum exceeds the signal modulus by more
    than tolerance * max_bin. The aggregate check compares total L1 energies
    at the same relative tolerance. Components are expected to sum to the
    signal; a reconstruction mismatch above 1e-8 only warns, the report is
    still produced.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tolerance}")
    if not components:
        raise ValueError("need at least one component")
    for comp in components:
        if not comp.same_grid(signal):
            raise ValueError("components must share the signal's sample grid")

    recon = np.sum([c.samples for c in components], axis=0)
    denom = norm2(signal)
    recon_err = (
        norm2(signal.with_samples(recon - signal.samples)) / denom if denom > 0 else 0.0
    )
    if recon_err > 1e-8:
        warnings.warn(
            f"components do not sum to the signal (relative error {recon_err:.3g})",
            RuntimeWarning,
            stacklevel=2,
        )

    signal_bins = np.abs(np.fft.fft(signal.samples))
    component_sum = np.zeros_like(signal_bins)
    total_component = 0.0
    for comp in components:
        mags = np.abs(np.fft.fft(comp.samples))
        component_sum += mags
        total_component += float(mags.sum())

    slack = tolerance * float(signal_bins.max(initial=0.0))
    excess = component_sum - signal_bins
    bad = np.flatnonzero(excess > slack)
    violations = tuple((int(k), float(excess[k])) for k in bad)

    total_signal = float(signal_bins.sum())
    rel_err = (
        abs(total_component - total_signal) / total_signal if total_signal > 0 else 0.0
    )
    return ConservationReport(
        per_bin_signal_energy=signal_bins,
        per_bin_component_sum=component_sum,
        violations=violations,
        total_signal_energy=total_signal,
        total_component_energy=total_component,
        relative_error=rel_err,
        tolerance=tolerance,
        reconstruction_error=recon_err,
    )


def check_imf_set(
    imf_set: ImfSet, signal: Signal | None = None, tolerance: float = 1e-10
) -> ConservationReport:
    """Conservation report for a decomposition, trend included as component 0."""
    if signal is None:
        from .fif import reconstruct

        signal = reconstruct(imf_set)
    components = (imf_set.trend,) + imf_set.imfs
    report = check_conservation(signal, components, tolerance)
    if not imf_set.has_internal_state and not report.conserves:
        return ConservationReport(
            per_bin_signal_energy=report.per_bin_signal_energy,
            per_bin_component_sum=report.per_bin_component_sum,
            violations=report.violations,
            total_signal_energy=report.total_signal_energy,
            total_component_energy=report.total_component_energy,
            relative_error=report.relative_error,
            tolerance=report.tolerance,
            reconstruction_error=report.reconstruction_error,
            note=EXTERNAL_NOTE,
        )
    return report


def multipliers(imf_set: ImfSet) -> np.ndarray:
    """Per-component spectral multipliers on the source grid.

    Row 0 is the trend's multiplier, rows 1..m the IMFs', evaluated at the
    source signal's frequency bins. Row k for k >= 1 is
    (1 - w_hat_k)**p_k * prod_{j<k} (1 - (1 - w_hat_j)**p_j), and row 0 is
    the final leftover product, so the rows sum to 1 at every bin.
    """
    if not imf_set.has_internal_state:
        raise UnsupportedOperationError(
            "multipliers are internal decomposition state; this ImfSet was "
            "supplied externally"
        )
    n = imf_set.trend.n
    grid = np.arange(n) / n  # cycles per sample
    rows = np.empty((len(imf_set.imfs) + 1, n))
    leftover = np.ones(n)
    for k, meta in enumerate(imf_set.per_imf_meta, start=1):
        w_hat = filter_dtft(meta.filter, grid)
        gain = (1.0 - w_hat) ** meta.iterations
        rows[k] = gain * leftover
        leftover = leftover * (1.0 - gain)
    rows[0] = leftover
    return rows


def stopping_bound_violations(imf_set: ImfSet, slack: float = 1e-9) -> list:
    """Check every recorded inner iteration against the theoretical bound
    diff_norm(p) <= ||s||_2 / (e * p), valid for double-convolution filters.

    Returns (imf_index, p, diff, bound) tuples for any violations; an empty
    list certifies the run. Diff p compares iterates p and p+1, so the first
    recorded difference (p = 0) carries no bound.
    """
    if not imf_set.has_internal_state:
        raise UnsupportedOperationError("stopping-bound checks need internal decomposition state")
    violations = []
    for idx, meta in enumerate(imf_set.per_imf_meta):
        if not meta.filter.is_double_convolution:
            continue
        for p in range(1, meta.diff_norms.size):
            bound = meta.source_norm / (math.e * p)
            diff = float(meta.diff_norms[p])
            if diff > bound * (1.0 + slack) + 1e-300:
                violations.append((idx, p, diff, bound))
    return violations


def write_report_csv(report: ConservationReport, path) -> None:
    """Rows of (bin, signal modulus, component-modulus sum, excess)."""
    excess = report.per_bin_component_sum - report.per_bin_signal_energy
    with open(path, "w", newline="\n") as fh:
        fh.write("bin,signal_energy,component_sum,excess\n")
        for k in range(report.per_bin_signal_energy.size):
            fh.write(
                f"{k},{report.per_bin_signal_energy[k]:.17g},"
                f"{report.per_bin_component_sum[k]:.17g},{excess[k]:.17g}\n"
            )


def report_summary_json(report: ConservationReport) -> str:
    """One-line machine-readable summary."""
    payload = {
        "conserves": report.conserves,
        "relative_error": report.relative_error,
        "violation_bins": len(report.violations),
        "total_signal_energy": report.total_signal_energy,
        "total_component_energy": report.total_component_energy,
        "reconstruction_error": report.reconstruction_error,
        "tolerance": report.tolerance,
    }
    if report.note:
        payload["note"] = report.note
    return json.dumps(payload, sort_keys=True)
