"""Conventional readout chain: demodulation kernel, projection, thresholding.

A demodulation kernel is a ``2 x N`` matrix ``D`` plus a bias; one shot ``x``
maps to ``(I, Q) = D @ x + bias``. The mix / filter / integrate chain is linear
in ``x`` and collapses into such a kernel (:func:`collapse_to_kernel`).

The discriminant is a line ``a*I + b*Q + c = 0`` kept normalised to
``a**2 + b**2 == 1`` and oriented so that the excited-state centroid has a
positive projection. A shot is assigned excited iff its projection is
strictly positive.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, FitError, ShapeError
from .signal import Dataset


@dataclass
class DemodKernel:
    d_matrix: np.ndarray
    bias: np.ndarray = None

    def __post_init__(self):
        self.d_matrix = np.array(self.d_matrix, dtype=float)
        if self.d_matrix.ndim != 2 or self.d_matrix.shape[0] != 2 or self.d_matrix.shape[1] < 1:
            raise ShapeError(f"kernel matrix must be 2 x N, got {self.d_matrix.shape}")
        self.bias = np.zeros(2) if self.bias is None else np.array(self.bias, dtype=float)
        if self.bias.shape != (2,):
            raise ShapeError(f"kernel bias must have 2 entries, got {self.bias.shape}")
        if not (np.all(np.isfinite(self.d_matrix)) and np.all(np.isfinite(self.bias))):
            raise ShapeError("kernel contains non-finite entries")
        if not np.any(self.d_matrix):
            raise ShapeError("kernel rows are all zero")

    @property
    def n_samples(self) -> int:
        return self.d_matrix.shape[1]


@dataclass
class DiscriminantLine:
    a: float
    b: float
    c: float

    def __post_init__(self):
        norm = np.hypot(self.a, self.b)
        if not norm > 0 or not np.isfinite(norm) or not np.isfinite(self.c):
            raise FitError(f"degenerate discriminant line ({self.a}, {self.b}, {self.c})")
        self.a, self.b, self.c = float(self.a / norm), float(self.b / norm), float(self.c / norm)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def flipped(self) -> "DiscriminantLine":
        return DiscriminantLine(-self.a, -self.b, -self.c)


def _check_len(kernel_n, x):
    if x.shape[-1] != kernel_n:
        raise ShapeError(f"signal length {x.shape[-1]} does not match kernel length {kernel_n}")


def demodulate(kernel: DemodKernel, x) -> np.ndarray:
    """Map one shot ``(N,)`` or a batch ``(M, N)`` to I-Q points ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    _check_len(kernel.n_samples, x)
    return x @ kernel.d_matrix.T + kernel.bias


def rectangular_kernel(if_freq: float, n_samples: int, sample_rate: float,
                       envelope=None) -> DemodKernel:
    t = np.arange(n_samples) / sample_rate
    e = np.ones(n_samples) if envelope is None else np.asarray(envelope, dtype=float)
    w = 2.0 * np.pi * if_freq * t
    scale = 2.0 / n_samples
    return DemodKernel(np.vstack([scale * e * np.cos(w), -scale * e * np.sin(w)]))


def _check_nyquist(if_freq, sample_rate):
    if not 0 < if_freq < sample_rate / 2:
        raise CalibrationError(f"IF {if_freq:g} Hz is outside the first Nyquist zone")


def build_weighted_kernel(calibration: Dataset, target_qubit: int | None = None,
                          if_freq: float = 540e6, bandwidth: float = 20e6) -> DemodKernel:
    """Mode-matched kernel from the class-mean difference of baseband trajectories.

    Each shot is mixed down at ``if_freq``; the difference between the excited
    and ground mean trajectories is band-limited to ``|f| < bandwidth / 2`` and
    its magnitude, normalised to unit mean, weights a rectangular quadrature
    kernel. The band limit removes the image at twice the IF and the tones of
    neighbouring resonators. It is applied on the record's own DFT grid
    (circularly), so tones on exact bins are removed exactly while envelope
    features faster than the band, or steps at the record edges, are smoothed.
    Identical class means give the rectangular kernel.
    """
    target = calibration.target_qubit if target_qubit is None else target_qubit
    _check_nyquist(if_freq, calibration.sample_rate)
    labels = calibration.states[:, target]
    if labels.min() == labels.max():
        raise CalibrationError(f"calibration set holds only one state of qubit {target}")
    n = calibration.n_samples
    t = np.arange(n) / calibration.sample_rate
    diff = calibration.samples[labels == 1].mean(axis=0) - calibration.samples[labels == 0].mean(axis=0)
    base = diff * np.exp(-2j * np.pi * if_freq * t)
    spec = np.fft.fft(base)
    spec[np.abs(np.fft.fftfreq(n, 1.0 / calibration.sample_rate)) >= bandwidth / 2] = 0.0
    env = np.abs(np.fft.ifft(spec))
    if env.mean() <= 1e-12 * max(np.abs(calibration.samples).max(), 1e-300):
        env = np.ones(n)
    else:
        env = env / env.mean()
    return rectangular_kernel(if_freq, n, calibration.sample_rate, env)


def three_stage_demodulate(x, if_freq: float, lowpass, envelope, sample_rate: float) -> np.ndarray:
    """Mix with the IF, apply a causal FIR filter, integrate against an envelope.

    The filter output at sample ``k`` uses inputs ``0..k`` only (zero initial
    state). The integration carries the ``2/N`` factor, so a unit filter and a
    uniform envelope reproduce the rectangular kernel.
    """
    x = np.asarray(x, dtype=float)
    h = np.atleast_1d(np.asarray(lowpass, dtype=float))
    env = np.asarray(envelope, dtype=float)
    n = x.shape[-1]
    if env.shape != (n,):
        raise ShapeError(f"envelope length {env.shape} does not match signal length {n}")
    if h.ndim != 1 or h.size == 0:
        raise ShapeError("lowpass filter must be a non-empty vector")
    w = 2.0 * np.pi * if_freq * np.arange(n) / sample_rate
    mixed = (x * np.cos(w), -x * np.sin(w))
    iq = []
    for m in mixed:
        filtered = np.convolve(m, h)[:n]
        iq.append(2.0 / n * np.dot(env, filtered))
    return np.array(iq)


def collapse_to_kernel(if_freq: float, lowpass, envelope, n_samples: int,
                       sample_rate: float) -> DemodKernel:
    """Single kernel equivalent to :func:`three_stage_demodulate`."""
    h = np.atleast_1d(np.asarray(lowpass, dtype=float))
    env = np.asarray(envelope, dtype=float)
    if env.shape != (n_samples,):
        raise ShapeError(f"envelope length {env.shape} does not match n_samples {n_samples}")
    # g[n] = sum_m h[m] * env[n + m]: weight of input sample n after filtering and integration
    g = np.zeros(n_samples)
    for m, tap in enumerate(h[:n_samples]):
        g[:n_samples - m] += tap * env[m:]
    w = 2.0 * np.pi * if_freq * np.arange(n_samples) / sample_rate
    scale = 2.0 / n_samples
    return DemodKernel(np.vstack([scale * g * np.cos(w), -scale * g * np.sin(w)]))


def project(line: DiscriminantLine, pt) -> np.ndarray | float:
    pt = np.asarray(pt, dtype=float)
    p = line.a * pt[..., 0] + line.b * pt[..., 1] + line.c
    return float(p) if p.ndim == 0 else p


def _split_classes(points, labels):
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels).astype(int)
    if points.ndim != 2 or points.shape[1] != 2 or len(points) != len(labels):
        raise ShapeError("points must be (M, 2) with one label each")
    g, e = points[labels == 0], points[labels == 1]
    if len(g) == 0 or len(e) == 0:
        raise FitError("discriminant fit needs both ground and excited points")
    return points, labels, g, e


def _orient(line, e_centroid):
    return line.flipped() if project(line, e_centroid) < 0 else line


def fit_bisector(points, labels) -> DiscriminantLine:
    _, _, g, e = _split_classes(points, labels)
    cg, ce = g.mean(axis=0), e.mean(axis=0)
    normal = ce - cg
    if not np.hypot(*normal) > 1e-15 * max(np.abs(cg).max(), np.abs(ce).max(), 1e-300):
        raise FitError("class centroids coincide; bisector is undefined")
    mid = 0.5 * (cg + ce)
    return DiscriminantLine(normal[0], normal[1], -normal @ mid)


def fit_svm(points, labels, C: float = 1.0, tol: float = 1e-6, max_iter: int = 100_000) -> DiscriminantLine:
    """Soft-margin linear SVM (hinge loss) on standardised coordinates.

    Solved in the dual by cyclic coordinate descent (liblinear) with a fixed
    shuffling seed; the intercept is carried as an extra regularised feature.
    """
    from sklearn.exceptions import ConvergenceWarning
    from sklearn.svm import LinearSVC

    if not C > 0:
        raise FitError(f"SVM regularisation C must be positive, got {C}")
    points, labels, g, e = _split_classes(points, labels)
    mu = points.mean(axis=0)
    sd = points.std(axis=0)
    sd[sd == 0] = 1.0
    z = (points - mu) / sd
    svc = LinearSVC(C=C, loss="hinge", dual=True, tol=tol, max_iter=max_iter,
                    fit_intercept=True, intercept_scaling=1.0, random_state=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        svc.fit(z, labels)
    wz = svc.coef_[0]
    bz = svc.intercept_[0]
    w = wz / sd
    c = bz - w @ mu
    if not np.hypot(*w) > 0:
        return fit_bisector(points, labels)
    return _orient(DiscriminantLine(w[0], w[1], c), e.mean(axis=0))


def fit_discriminant(points, labels, method: str = "svm", C: float = 1.0) -> DiscriminantLine:
    if method == "bisector":
        return fit_bisector(points, labels)
    if method == "svm":
        return fit_svm(points, labels, C=C)
    raise FitError(f"unknown discriminant method {method!r}")


def classify_dsp(kernel: DemodKernel, line: DiscriminantLine, x) -> np.ndarray | int:
    """1 iff the projected I-Q point lies strictly on the excited side."""
    p = np.asarray(project(line, demodulate(kernel, x)))
    out = (p > 0).astype(np.int64)
    return int(out) if out.ndim == 0 else out
