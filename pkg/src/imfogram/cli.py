"""Command-line surface: generate, decompose, verify, map, and export.

Exit codes: 0 success, 2 usage or validation failure, 3 conservation
violation under --strict.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import signals as gen
from .errors import TrendSignalError, UnsupportedOperationError
from .fif import (
    EXTENSION_MODES,
    FifConfig,
    ImfSet,
    decompose,
    read_imfset_csv,
    reconstruct,
    write_imfset_csv,
)
from .filters import FILTER_FAMILIES
from .spectral import Signal, l1_fourier_energy
from .tfr import (
    AveragingWindows,
    imfogram,
    spectrogram,
    write_tfr_csv,
    write_tfr_pgm,
)
from .verify import (
    check_imf_set,
    multipliers,
    report_summary_json,
    write_report_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VIOLATION = 3


def ingest(path, fmt: str | None = None, rate: float | None = None) -> Signal:
    """Read a signal from CSV (value, or time,value) or a WAV file.

    Two-column CSV must carry a uniform time grid (relative jitter at most
    1e-9); single-column CSV needs an explicit rate. WAV files are read
    through their PCM or float encoding, first channel, integer samples
    scaled into [-1, 1).
    """
    path = Path(path)
    if fmt is None:
        fmt = "wav" if path.suffix.lower() == ".wav" else "csv"
    if fmt == "wav":
        return _ingest_wav(path)
    if fmt != "csv":
        raise ValueError(f"unknown input format {fmt!r}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line[0].isalpha():
                continue
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: empty input file")
    data = np.asarray(rows)
    if data.shape[1] == 1:
        if rate is None:
            raise ValueError(f"{path}: single-column CSV needs --rate")
        return Signal(data[:, 0], rate)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected 1 or 2 columns, got {data.shape[1]}")
    times, values = data[:, 0], data[:, 1]
    dts = np.diff(times)
    dt = float(np.median(dts))
    if dt <= 0:
        raise ValueError(f"{path}: time column is not increasing")
    jitter = float(np.max(np.abs(dts - dt))) / dt
    if jitter > 1e-9:
        raise ValueError(f"{path}: nonuniform time grid (relative jitter {jitter:.3g})")
    return Signal(values, 1.0 / dt, float(times[0]))


def _ingest_wav(path) -> Signal:
    from scipy.io import wavfile

    rate, data = wavfile.read(path)
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported WAV encoding {data.dtype}")
    return Signal(samples, float(rate))


def write_signal_csv(signal: Signal, path) -> None:
    times = signal.times()
    with open(path, "w", newline="\n") as fh:
        for t, v in zip(times, signal.samples):
            fh.write(f"{t:.17g},{v:.17g}\n")


def _fif_config(args) -> FifConfig:
    return FifConfig(
        delta=args.delta,
        chi=args.chi,
        max_imfs=args.max_imfs,
        max_inner_iterations=args.max_inner,
        extension=args.extension,
        filter_family=args.filter_family,
        filter_mode=args.filter_mode,
    )


def _windows(args, n: int) -> AveragingWindows:
    J = args.window if args.window is not None else max(n // 16, 2)
    H = args.hop if args.hop is not None else max(J // 2, 1)
    return AveragingWindows(J, H)


def _add_fif_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=1e-3, help="inner-loop stopping threshold")
    p.add_argument("--chi", type=float, default=1.6, help="filter-length tuning parameter")
    p.add_argument("--max-imfs", type=int, default=50, dest="max_imfs")
    p.add_argument("--max-inner", type=int, default=200, dest="max_inner")
    p.add_argument("--extension", choices=EXTENSION_MODES, default="none")
    p.add_argument("--filter-family", choices=FILTER_FAMILIES, default="bump",
                   dest="filter_family")
    p.add_argument("--filter-mode", choices=("double", "raw"), default="double",
                   dest="filter_mode")


def _add_tfr_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=int, default=None, help="window length J in samples")
    p.add_argument("--hop", type=int, default=None, help="hop H in samples (default J/2)")
    p.add_argument("--freq-bins", type=int, default=257, dest="freq_bins")
    p.add_argument("--format", choices=("csv", "pgm"), action="append", dest="formats",
                   help="TFR export format, repeatable (default both)")


def _add_io_flags(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", required=True, help="input file (CSV or WAV)")
        p.add_argument("--rate", type=float, default=None,
                       help="sample rate for single-column CSV input")
    p.add_argument("--output-dir", default=".", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imfogram",
        description="Decompose signals into intrinsic mode functions, check "
        "energy conservation, and build IMF-based time-frequency maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a synthetic test signal as CSV")
    p_gen.add_argument("--kind", required=True, choices=gen.GENERATOR_KINDS)
    p_gen.add_argument("--n", type=int, default=2000)
    p_gen.add_argument("--rate", type=float, default=2000.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--alpha", type=float, default=-1.0)
    p_gen.add_argument("--beta", type=float, default=1.0)
    p_gen.add_argument("--gamma", type=float, default=0.1)
    p_gen.add_argument("--omega", type=float, default=1.0)
    p_gen.add_argument("--x0", type=float, default=1.0)
    p_gen.add_argument("--v0", type=float, default=0.0)
    p_gen.add_argument("--a", type=float, default=0.8, help="two-tone second amplitude")
    p_gen.add_argument("--f", type=float, default=0.6, help="two-tone second frequency")
    p_gen.add_argument("--phi", type=float, default=1.0, help="two-tone second phase")
    p_gen.add_argument("--window", type=int, default=None,
                       help="multisine window length in samples")
    p_gen.add_argument("--window-tones", action="append", default=None,
                       help="multisine tones for one window as a:f:phi[,a:f:phi...]; repeat per window")
    p_gen.add_argument("--output", required=True)

    p_dec = sub.add_parser("decompose", help="decompose a signal into IMFs plus trend")
    _add_io_flags(p_dec)
    _add_fif_flags(p_dec)

    p_ver = sub.add_parser("verify", help="conservation report for a decomposition CSV")
    p_ver.add_argument("--input", required=True, help="decomposition CSV (time, imfs..., trend)")
    p_ver.add_argument("--signal", default=None,
                       help="original signal CSV; defaults to the component sum")
    p_ver.add_argument("--rate", type=float, default=None)
    p_ver.add_argument("--output-dir", default=".", dest="output_dir")
    p_ver.add_argument("--tolerance", type=float, default=1e-10)
    p_ver.add_argument("--strict", action="store_true")

    p_imfo = sub.add_parser("imfogram", help="time-frequency map from a decomposition CSV")
    p_imfo.add_argument("--input", required=True, help="decomposition CSV")
    p_imfo.add_argument("--output-dir", default=".", dest="output_dir")
    _add_tfr_flags(p_imfo)

    p_spec = sub.add_parser("spectrogram", help="rectangular-window spectrogram of a signal")
    _add_io_flags(p_spec)
    _add_tfr_flags(p_spec)

    p_pipe = sub.add_parser("pipeline", help="ingest, decompose, verify, map, export")
    _add_io_flags(p_pipe)
    _add_fif_flags(p_pipe)
    _add_tfr_flags(p_pipe)
    p_pipe.add_argument("--strict", action="store_true")
    p_pipe.add_argument("--tolerance", type=float, default=1e-10)

    return parser


def _parse_window_tones(specs) -> list:
    windows = []
    for spec in specs:
        tones = []
        for part in spec.split(","):
            fields = part.split(":")
            if len(fields) != 3:
                raise ValueError(f"bad tone spec {part!r}; expected a:f:phi")
            tones.append((float(fields[0]), float(fields[1]), float(fields[2])))
        windows.append(tones)
    return windows


def _cmd_gen(args) -> int:
    if args.kind == "chirp-pair":
        sig = gen.gen_chirp_pair(args.n, args.rate)
    elif args.kind == "noisy-triple":
        sig = gen.gen_noisy_triple(args.n, args.rate, args.seed)
    elif args.kind == "duffing":
        sig = gen.gen_duffing_velocity(
            args.n, args.rate, args.alpha, args.beta, args.gamma, args.omega,
            args.x0, args.v0,
        )
    elif args.kind == "two-tone":
        sig = gen.gen_two_tone(args.a, args.f, args.phi, args.n, args.rate)
    else:
        if not args.window_tones or args.window is None:
            raise ValueError("multi-sine-piecewise needs --window and --window-tones")
        sig = gen.gen_piecewise_multisine(
            _parse_window_tones(args.window_tones), args.window, args.rate
        )
    write_signal_csv(sig, args.output)
    print(f"wrote {args.output} ({sig.n} samples at {sig.sample_rate:g} Hz)")
    return EXIT_OK


def _cmd_decompose(args) -> int:
    sig = ingest(args.input, rate=args.rate)
    result = decompose(sig, _fif_config(args))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "imfs.csv"
    write_imfset_csv(result, path)
    _print_meta_table(result)
    print(f"wrote {path}")
    return EXIT_OK


def _print_meta_table(imf_set: ImfSet) -> None:
    shares = None
    if imf_set.has_internal_state:
        mult = multipliers(imf_set)
        sig = reconstruct(imf_set)
        mags = np.abs(np.fft.fft(sig.samples))
        total = float(mags.sum())
        if total > 0:
            shares = [float((mult[k] * mags).sum()) / total for k in range(mult.shape[0])]
    print("imf  half_length  iterations  converged  energy_share")
    for k, meta in enumerate(imf_set.per_imf_meta, start=1):
        share = f"{shares[k]:.4f}" if shares else "n/a"
        print(f"{k:3d}  {meta.half_length:11d}  {meta.iterations:10d}"
              f"  {str(meta.converged):>9s}  {share}")
    trend_share = f"{shares[0]:.4f}" if shares else "n/a"
    print(f"trend{'':24s}{'':12s}{'':>10s}  {trend_share}")


def _cmd_verify(args) -> int:
    imf_set = read_imfset_csv(args.input)
    signal = ingest(args.signal, rate=args.rate) if args.signal else None
    report = check_imf_set(imf_set, signal, args.tolerance)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out / "conservation.csv")
    print(report_summary_json(report))
    if args.strict and not report.conserves:
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_imfogram(args) -> int:
    imf_set = read_imfset_csv(args.input)
    windows = _windows(args, imf_set.trend.n)
    matrix = imfogram(imf_set, windows, args.freq_bins)
    return _export_tfr(matrix, args, "imfogram")


def _cmd_spectrogram(args) -> int:
    sig = ingest(args.input, rate=args.rate)
    J = args.window if args.window is not None else max(sig.n // 16, 2)
    H = args.hop if args.hop is not None else max(J // 2, 1)
    matrix = spectrogram(sig, J, H)
    return _export_tfr(matrix, args, "spectrogram")


def _export_tfr(matrix, args, stem: str) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = args.formats or ["csv", "pgm"]
    for fmt in formats:
        path = out / f"{stem}.{fmt}"
        if fmt == "csv":
            write_tfr_csv(matrix, path)
        else:
            write_tfr_pgm(matrix, path)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    sig = ingest(args.input, rate=args.rate)
    result = decompose(sig, _fif_config(args))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    write_imfset_csv(result, out / "imfs.csv")
    report = check_imf_set(result, sig, args.tolerance)
    write_report_csv(report, out / "conservation.csv")

    _print_meta_table(result)
    print(report_summary_json(report))
    status = "OK" if report.conserves else "VIOLATED"
    print(f"conservation {status} (tolerance {args.tolerance:g}, "
          f"{len(report.violations)} violation bins)")

    if len(result.imfs) > 0:
        windows = _windows(args, sig.n)
        matrix = imfogram(result, windows, args.freq_bins)
        _export_tfr(matrix, args, "imfogram")
    else:
        print("no IMFs extracted; skipping the time-frequency map")

    if args.strict and not report.conserves:
        return EXIT_VIOLATION
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "decompose": _cmd_decompose,
    "verify": _cmd_verify,
    "imfogram": _cmd_imfogram,
    "spectrogram": _cmd_spectrogram,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    threads = os.environ.get("IMFOGRAM_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            print(f"error: IMFOGRAM_THREADS must be a positive integer, got {threads!r}",
                  file=sys.stderr)
            return EXIT_VALIDATION
        # computation is single-threaded per process, always within the cap

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, TrendSignalError, UnsupportedOperationError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
