"""Amplitude spectra of kernel rows and peak detection at candidate IFs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

DEFAULT_PAD = 4096
DEFAULT_WINDOW = 2e6
DEFAULT_FLOOR = 0.02


@dataclass
class SpectrumReport:
    freqs: np.ndarray
    amps: np.ndarray
    sample_rate: float
    peaks: list = field(default_factory=list)


@dataclass
class PeakCheck:
    candidate: float
    found: bool
    freq: float | None
    amp: float


def amplitude_spectrum(row, sample_rate: float, zero_pad_to: int | None = DEFAULT_PAD,
                       floor_ratio: float = DEFAULT_FLOOR) -> SpectrumReport:
    """DFT magnitude of the zero-padded row over ``[0, sample_rate / 2]``.

    No window is applied. ``peaks`` lists every strict local maximum above
    ``floor_ratio`` times the global maximum, as ``(freq, amp)`` pairs.
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.size == 0:
        raise ShapeError("spectrum row must be a non-empty vector")
    n_fft = row.size if zero_pad_to is None else int(zero_pad_to)
    if n_fft < row.size:
        raise ShapeError(f"zero_pad_to={n_fft} is shorter than the row ({row.size})")
    amps = np.abs(np.fft.rfft(row, n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    report = SpectrumReport(freqs, amps, float(sample_rate))
    top = amps.max()
    if top > 0:
        idx = _local_maxima(amps)
        idx = idx[amps[idx] > floor_ratio * top]
        report.peaks = [(float(freqs[i]), float(amps[i])) for i in idx]
    return report


def _local_maxima(a):
    """Indices strictly above both neighbours (edges compare to one neighbour)."""
    left = np.r_[-np.inf, a[:-1]]
    right = np.r_[a[1:], -np.inf]
    return np.flatnonzero((a > left) & (a > right))


def detect_peaks(report: SpectrumReport, candidate_freqs, window: float = DEFAULT_WINDOW,
                 floor_ratio: float = DEFAULT_FLOOR) -> list[PeakCheck]:
    """Is there a local maximum above the floor within ``window`` of each candidate?"""
    if not window > 0:
        raise ConfigError("peak window must be positive")
    if not 0 < floor_ratio < 1:
        raise ConfigError("floor_ratio must lie in (0, 1)")
    nyq = report.sample_rate / 2
    top = report.amps.max()
    maxima = _local_maxima(report.amps)
    out = []
    for f in candidate_freqs:
        f = float(f)
        if not 0 <= f <= nyq:
            raise ConfigError(f"candidate {f:g} Hz is outside the first Nyquist zone")
        near = maxima[np.abs(report.freqs[maxima] - f) <= window]
        if near.size == 0 or top == 0:
            out.append(PeakCheck(f, False, None, 0.0))
            continue
        best = near[np.argmax(report.amps[near])]
        amp = float(report.amps[best])
        out.append(PeakCheck(f, bool(amp > floor_ratio * top), float(report.freqs[best]), amp))
    return out


def to_csv(report: SpectrumReport) -> str:
    lines = ["freq_hz,amplitude"]
    lines += [f"{f!r},{a!r}" for f, a in zip(report.freqs.tolist(), report.amps.tolist())]
    return "\n".join(lines) + "\n"
