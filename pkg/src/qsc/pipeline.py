"""End-to-end workflow: generate, calibrate the conventional chain, train, evaluate.

The conventional baseline is a weighted kernel shared by every subset, plus
SVM lines in its I-Q plane: one *unified* line fitted on all calibration
shots and one *dedicated* line per spectator subset. Dedicated lines scored on
their own subsets give ``mu0``/``sigma0``; the unified line scored on every
subset gives the F5-style report whose mean is ``mu5``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import EvalConfig, RunConfig, SpectrumConfig
from .dsp import DemodKernel, DiscriminantLine, build_weighted_kernel, classify_dsp, demodulate, fit_svm
from .errors import FitError
from .metrics import (FidelityReport, crosstalk_free_check, dedicated_fidelities, fidelity_gaps, mean_std,
                      partition, subset_fidelities)
from .network import QscModel, TrainConfig, TrainTrace, classify_qsc, fit_feature_scaler, init_from_dsp, train
from .signal import Dataset, generate_dataset, split_dataset, subset_states
from .spectrum import SpectrumReport, amplitude_spectrum, detect_peaks


def prepared_states(cfg: RunConfig):
    qubits = cfg.eval.state_qubits or list(range(cfg.signal.n_qubits))
    return subset_states(cfg.signal.n_qubits, qubits)


def generate(cfg: RunConfig) -> Dataset:
    return generate_dataset(cfg.signal, cfg.eval.shots_per_state, prepared_states(cfg), cfg.eval.target_qubit)


def generate_split(cfg: RunConfig) -> tuple[Dataset, Dataset]:
    """Calibration/training shots and held-out shots from one seed family."""
    return split_dataset(generate(cfg), cfg.eval.train_fraction)


@dataclass
class Baseline:
    kernel: DemodKernel
    unified: DiscriminantLine
    dedicated: list
    subset_labels: list
    spectators: list
    target_qubit: int

    def unified_classifier(self):
        return lambda x: classify_dsp(self.kernel, self.unified, x)

    def dedicated_classifiers(self):
        return [lambda x, ln=ln: classify_dsp(self.kernel, ln, x) for ln in self.dedicated]

    def stats(self, dataset: Dataset) -> tuple[float, float, FidelityReport]:
        """``(mu0, sigma0, unified report)`` on ``dataset``."""
        groups = [lab for lab, _ in partition(dataset, self.spectators)]
        if groups != self.subset_labels:
            raise FitError(f"dataset subsets {groups} differ from the baseline's {self.subset_labels}")
        mu0, sigma0 = mean_std(dedicated_fidelities(self.dedicated_classifiers(), dataset, self.spectators))
        unified = subset_fidelities(self.unified_classifier(), dataset, spectators=self.spectators)
        unified.mu0, unified.sigma0 = mu0, sigma0
        unified.f_p1 = unified.mu - mu0
        unified.crosstalk_free = crosstalk_free_check(unified.mu, unified.sigma, mu0, sigma0)
        return mu0, sigma0, unified


def fit_baseline(calibration: Dataset, ev: EvalConfig, if_freq: float) -> Baseline:
    kernel = build_weighted_kernel(calibration, ev.target_qubit, if_freq, ev.kernel_bandwidth)
    iq = demodulate(kernel, calibration.samples)
    labels = calibration.labels
    unified = fit_svm(iq, labels, C=ev.svm_c)
    groups = partition(calibration, ev.spectators)
    dedicated = [fit_svm(iq[idx], labels[idx], C=ev.svm_c) for _, idx in groups]
    return Baseline(kernel, unified, dedicated, [lab for lab, _ in groups], list(ev.spectators),
                    calibration.target_qubit)


def train_qsc(training: Dataset, kernel: DemodKernel, cfg: TrainConfig) -> tuple[QscModel, QscModel, TrainTrace]:
    """Initialise from ``kernel`` on the training shots, then train. Returns ``(initial, trained, trace)``."""
    scaler = fit_feature_scaler(training)
    initial = init_from_dsp(kernel, scaler, training)
    trained, trace = train(initial, training, cfg)
    return initial, trained, trace


def evaluate(model: QscModel, baseline: Baseline, test: Dataset) -> FidelityReport:
    """F6-style report on held-out shots with the baseline statistics attached."""
    mu0, sigma0, unified = baseline.stats(test)
    report = subset_fidelities(lambda x: classify_qsc(model, x), test, spectators=baseline.spectators)
    report.mu0, report.sigma0 = mu0, sigma0
    report.f_p1, report.f_p2 = fidelity_gaps(unified.mu, report.mu, mu0)
    report.crosstalk_free = crosstalk_free_check(report.mu, report.sigma, mu0, sigma0)
    report.extra = {"mu5": unified.mu, "sigma5": unified.sigma, "F5": unified.F}
    return report


def cloud_shift(points, dataset: Dataset, spectators) -> dict:
    """Spectator-induced shift of the target-ground I-Q cloud.

    For each spectator the two centroids (spectator in ground / excited) are
    compared with the Mahalanobis distance under their pooled covariance, so
    the result is in units of cloud standard deviations and does not change
    under any invertible affine map of the I-Q plane.
    """
    points = np.asarray(points, dtype=float)
    ground = dataset.labels == 0
    out = {}
    for q in spectators:
        a = points[ground & (dataset.states[:, q] == 0)]
        b = points[ground & (dataset.states[:, q] == 1)]
        if len(a) < 3 or len(b) < 3:
            raise FitError(f"spectator Q{q + 1} needs shots in both states")
        pooled = 0.5 * (np.cov(a.T) + np.cov(b.T))
        d = a.mean(axis=0) - b.mean(axis=0)
        out[q] = float(np.sqrt(d @ np.linalg.solve(pooled, d)))
    return out


def kernel_row_spectrum(model: QscModel | DemodKernel, sample_rate: float, sc: SpectrumConfig,
                        if_freqs) -> tuple[SpectrumReport, list]:
    """Amplitude spectrum of one demodulation row on raw samples, with peak checks at ``if_freqs``.

    For a network the row is its demodulation layer expressed on raw samples,
    so trained and untrained rows are directly comparable.
    """
    kernel = model.effective_kernel() if isinstance(model, QscModel) else model
    report = amplitude_spectrum(kernel.d_matrix[sc.row], sample_rate, sc.zero_pad_to, sc.floor_ratio)
    return report, detect_peaks(report, if_freqs, sc.window, sc.floor_ratio)


@dataclass
class ReferenceRun:
    """Everything produced by one full synthetic run, kept for inspection."""

    cfg: RunConfig
    training: Dataset
    test: Dataset
    baseline: Baseline
    initial: QscModel
    model: QscModel
    trace: TrainTrace
    report: FidelityReport
    timings: dict = field(default_factory=dict)


def run_reference(cfg: RunConfig) -> ReferenceRun:
    t0 = time.perf_counter()
    training, test = generate_split(cfg)
    t1 = time.perf_counter()
    baseline = fit_baseline(training, cfg.eval, cfg.signal.if_freqs[cfg.eval.target_qubit])
    t2 = time.perf_counter()
    initial, model, trace = train_qsc(training, baseline.kernel, cfg.train)
    t3 = time.perf_counter()
    report = evaluate(model, baseline, test)
    t4 = time.perf_counter()
    timings = {"generate": t1 - t0, "baseline": t2 - t1, "train": t3 - t2, "eval": t4 - t3}
    return ReferenceRun(cfg, training, test, baseline, initial, model, trace, report, timings)
